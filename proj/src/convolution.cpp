#include "jmgt/convolution.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jmgt {

namespace {

// Int_0^L sin(g pi x / L) dx, g any integer
double sine_integral(int g, double length) {
    if (g == 0) return 0.0;
    if (g % 2 == 0) return 0.0;
    return 2.0 * length / (g * std::numbers::pi);
}

// Int_0^L sin(a pi x/L) sin(b pi x/L) sin(c pi x/L) dx via product-to-sum:
// = 1/4 [S(c+a-b) + S(c-a+b) - S(c+a+b) - S(c-a-b)]
double triple_sine_integral(int a, int b, int c, double length) {
    return 0.25 * (sine_integral(c + a - b, length) + sine_integral(c - a + b, length) -
                   sine_integral(c + a + b, length) - sine_integral(c - a - b, length));
}

}  // namespace

ExactProduct::ExactProduct(const SpectralBasis& basis) : n_(basis.n_modes()) {
    if (basis.kind() == BasisKind::Torus)
        throw std::invalid_argument("ExactProduct: implemented for Dirichlet bases only");
    tensor_.assign(n_ * n_ * n_, 0.0);
    const int dim = basis.dim();
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t l = 0; l < n_; ++l)
            for (std::size_t k = 0; k < n_; ++k) {
                double t = 1.0;
                for (int a = 0; a < dim; ++a) {
                    const double len = basis.lengths()[a];
                    const double norm = std::pow(2.0 / len, 1.5);
                    t *= norm * triple_sine_integral(basis.mode(j).index[a], basis.mode(l).index[a],
                                                     basis.mode(k).index[a], len);
                }
                tensor_[(j * n_ + l) * n_ + k] = t;
            }
}

std::vector<double> ExactProduct::project(const std::vector<double>& a,
                                          const std::vector<double>& b) const {
    if (a.size() != n_ || b.size() != n_)
        throw std::invalid_argument("ExactProduct: coefficient length mismatch");
    std::vector<double> out(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        if (a[j] == 0.0) continue;
        for (std::size_t l = 0; l < n_; ++l) {
            if (b[l] == 0.0) continue;
            const double w = a[j] * b[l];
            const double* row = tensor_.data() + (j * n_ + l) * n_;
            for (std::size_t k = 0; k < n_; ++k) out[k] += w * row[k];
        }
    }
    return out;
}

}  // namespace jmgt
