#include "jmgt/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jmgt {

namespace {

constexpr double kPi = std::numbers::pi;

// Fine-grid sizing: products of four Dirichlet modes oscillate with total
// phase 4*n*pi per axis; Gauss-Legendre enters its superexponential regime
// once the node count exceeds half the phase, so 4n+16 leaves a wide margin.
int fine_points_dirichlet(int n) { return 4 * n + 16; }
int coarse_points_dirichlet(int n) { return n + 2; }
// Uniform rule on the circle is exact through trig degree N-1; quartic
// products of wavenumbers <= K have degree 4K.
int fine_points_torus(int k) { return 4 * k + 2; }
int coarse_points_torus(int k) { return 2 * k + 2; }

void append_axis_grid_gl(int q, double length, std::vector<double>& x, std::vector<double>& w) {
    std::vector<double> n01, w01;
    gauss_legendre(q, n01, w01);
    x.resize(q);
    w.resize(q);
    for (int i = 0; i < q; ++i) {
        x[i] = length * n01[i];
        w[i] = length * w01[i];
    }
}

void append_axis_grid_uniform(int q, double length, std::vector<double>& x, std::vector<double>& w) {
    x.resize(q);
    w.resize(q);
    for (int i = 0; i < q; ++i) {
        x[i] = length * i / q;
        w[i] = length / q;
    }
}

QuadGrid tensor_grid(int dim, const std::array<std::vector<double>, 3>& x,
                     const std::array<std::vector<double>, 3>& w) {
    QuadGrid g;
    g.dim = dim;
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
        g.shape[a] = static_cast<int>(x[a].size());
        total *= x[a].size();
    }
    g.nodes.resize(total);
    g.weights.resize(total);
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t i = 0; i < total; ++i) {
        std::array<double, 3> p{0.0, 0.0, 0.0};
        double weight = 1.0;
        for (int a = 0; a < dim; ++a) {
            p[a] = x[a][idx[a]];
            weight *= w[a][idx[a]];
        }
        g.nodes[i] = p;
        g.weights[i] = weight;
        for (int a = dim - 1; a >= 0; --a) {
            if (++idx[a] < g.shape[a]) break;
            idx[a] = 0;
        }
    }
    return g;
}

// Canonical half-space representative: first nonzero component positive.
bool canonical_wavevector(const std::array<int, 3>& k, int dim) {
    for (int a = 0; a < dim; ++a) {
        if (k[a] > 0) return true;
        if (k[a] < 0) return false;
    }
    return false;  // zero vector handled separately
}

}  // namespace

BasisKind basis_kind_from_string(const std::string& name) {
    if (name == "dirichlet-interval") return BasisKind::DirichletInterval;
    if (name == "dirichlet-rectangle") return BasisKind::DirichletRectangle;
    if (name == "torus") return BasisKind::Torus;
    throw std::invalid_argument("basis.kind: unknown kind '" + name + "'");
}

std::string to_string(BasisKind kind) {
    switch (kind) {
        case BasisKind::DirichletInterval: return "dirichlet-interval";
        case BasisKind::DirichletRectangle: return "dirichlet-rectangle";
        case BasisKind::Torus: return "torus";
    }
    return "?";
}

void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(q);
    weights.resize(q);
    // Newton on P_q with Chebyshev initial guesses; nodes on [-1,1] then
    // mapped to [0,1].
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);  // descending x -> ascending node
        nodes[q - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * wgt;
        weights[q - 1 - i] = 0.5 * wgt;
    }
}

double SpectralBasis::lambda_min() const {
    for (double l : lambdas_)
        if (l > 0.0) return l;
    throw std::logic_error("basis has no positive eigenvalue");
}

double SpectralBasis::eval_mode(std::size_t j, const std::array<double, 3>& x) const {
    const BasisMode& m = modes_[j];
    if (kind_ == BasisKind::Torus) {
        if (m.index == std::array<int, 3>{0, 0, 0} && !m.is_sine)
            return 1.0 / std::sqrt(volume_);
        double phase = 0.0;
        for (int a = 0; a < dim_; ++a) phase += 2.0 * kPi * m.index[a] * x[a] / lengths_[a];
        double amp = std::sqrt(2.0 / volume_);
        return m.is_sine ? amp * std::sin(phase) : amp * std::cos(phase);
    }
    double v = 1.0;
    for (int a = 0; a < dim_; ++a)
        v *= std::sqrt(2.0 / lengths_[a]) * std::sin(m.index[a] * kPi * x[a] / lengths_[a]);
    return v;
}

std::vector<double> SpectralBasis::to_physical(const std::vector<double>& coeffs, bool dealias) const {
    if (coeffs.size() != n_modes())
        throw std::invalid_argument("to_physical: coefficient length does not match basis");
    const QuadGrid& g = grid_for(dealias);
    const std::vector<double>& phi = table(dealias);
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t j = 0; j < n_modes(); ++j) {
        const double cj = coeffs[j];
        if (cj == 0.0) continue;
        const double* row = phi.data() + j * g.size();
        for (std::size_t i = 0; i < g.size(); ++i) out[i] += cj * row[i];
    }
    return out;
}

std::vector<double> SpectralBasis::from_physical(const std::vector<double>& samples, bool dealias) const {
    const QuadGrid& g = grid_for(dealias);
    if (samples.size() != g.size())
        throw std::invalid_argument("from_physical: sample count does not match grid");
    const std::vector<double>& phi = table(dealias);
    std::vector<double> out(n_modes(), 0.0);
    for (std::size_t j = 0; j < n_modes(); ++j) {
        const double* row = phi.data() + j * g.size();
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights[i] * samples[i] * row[i];
        out[j] = acc;
    }
    return out;
}

double SpectralBasis::linf(const std::vector<double>& coeffs) const {
    std::vector<double> s = to_physical(coeffs, true);
    double m = 0.0;
    for (double v : s) m = std::max(m, std::abs(v));
    return m;
}

SpectralBasis build_basis(const BasisRequest& req) {
    const std::size_t dim = req.lengths.size();
    if (dim == 0 || dim != req.modes.size())
        throw std::invalid_argument("basis: lengths and modes must have equal, nonzero dimension");
    if (dim > 3) throw std::invalid_argument("basis: unsupported dimension (> 3)");
    for (double l : req.lengths)
        if (!(l > 0.0)) throw std::invalid_argument("basis.lengths must be positive");
    for (int n : req.modes)
        if (n < 1) throw std::invalid_argument("basis.modes must be >= 1 per axis");
    if (req.kind == BasisKind::DirichletInterval && dim != 1)
        throw std::invalid_argument("basis: dirichlet-interval is one-dimensional");
    if (req.kind == BasisKind::DirichletRectangle && dim < 2)
        throw std::invalid_argument("basis: dirichlet-rectangle needs dimension 2 or 3");
    if (req.torus_zero_mode && req.kind != BasisKind::Torus)
        throw std::invalid_argument("basis: zero mode only applies to the torus");

    SpectralBasis b;
    b.kind_ = req.kind;
    b.dim_ = static_cast<int>(dim);
    b.zero_mode_ = req.torus_zero_mode;
    b.volume_ = 1.0;
    for (std::size_t a = 0; a < dim; ++a) {
        b.lengths_[a] = req.lengths[a];
        b.axis_modes_[a] = req.modes[a];
        b.volume_ *= req.lengths[a];
    }

    // enumerate modes
    if (req.kind == BasisKind::Torus) {
        if (req.torus_zero_mode) {
            BasisMode m;
            m.lambda = 0.0;
            b.modes_.push_back(m);
        }
        std::array<int, 3> k{0, 0, 0};
        auto lambda_of = [&](const std::array<int, 3>& kv) {
            double l = 0.0;
            for (std::size_t a = 0; a < dim; ++a) {
                double w = 2.0 * kPi * kv[a] / req.lengths[a];
                l += w * w;
            }
            return l;
        };
        // iterate k_a in [-K_a, K_a]
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (std::size_t a = 0; a < dim; ++a) {
            lo[a] = -req.modes[a];
            hi[a] = req.modes[a];
        }
        k = lo;
        while (true) {
            if (canonical_wavevector(k, static_cast<int>(dim))) {
                BasisMode mc;
                mc.index = k;
                mc.lambda = lambda_of(k);
                b.modes_.push_back(mc);
                BasisMode ms = mc;
                ms.is_sine = true;
                b.modes_.push_back(ms);
            }
            int a = static_cast<int>(dim) - 1;
            while (a >= 0) {
                if (++k[a] <= hi[a]) break;
                k[a] = lo[a];
                --a;
            }
            if (a < 0) break;
        }
    } else {
        std::array<int, 3> j{1, 1, 1};
        while (true) {
            BasisMode m;
            m.index = j;
            double l = 0.0;
            for (std::size_t a = 0; a < dim; ++a) {
                double w = j[a] * kPi / req.lengths[a];
                l += w * w;
            }
            m.lambda = l;
            b.modes_.push_back(m);
            int a = static_cast<int>(dim) - 1;
            while (a >= 0) {
                if (++j[a] <= req.modes[a]) break;
                j[a] = 1;
                --a;
            }
            if (a < 0) break;
        }
    }

    std::stable_sort(b.modes_.begin(), b.modes_.end(), [](const BasisMode& x, const BasisMode& y) {
        if (x.lambda != y.lambda) return x.lambda < y.lambda;
        if (x.index != y.index) return x.index < y.index;
        return x.is_sine < y.is_sine;
    });
    b.lambdas_.reserve(b.modes_.size());
    for (const BasisMode& m : b.modes_) b.lambdas_.push_back(m.lambda);

    // grids
    std::array<std::vector<double>, 3> xf, wf, xc, wc;
    for (std::size_t a = 0; a < dim; ++a) {
        if (req.kind == BasisKind::Torus) {
            append_axis_grid_uniform(fine_points_torus(req.modes[a]), req.lengths[a], xf[a], wf[a]);
            append_axis_grid_uniform(coarse_points_torus(req.modes[a]), req.lengths[a], xc[a], wc[a]);
        } else {
            append_axis_grid_gl(fine_points_dirichlet(req.modes[a]), req.lengths[a], xf[a], wf[a]);
            append_axis_grid_gl(coarse_points_dirichlet(req.modes[a]), req.lengths[a], xc[a], wc[a]);
        }
    }
    b.fine_ = tensor_grid(static_cast<int>(dim), xf, wf);
    b.coarse_ = tensor_grid(static_cast<int>(dim), xc, wc);

    b.phi_fine_.resize(b.modes_.size() * b.fine_.size());
    b.phi_coarse_.resize(b.modes_.size() * b.coarse_.size());
    for (std::size_t j = 0; j < b.modes_.size(); ++j) {
        for (std::size_t i = 0; i < b.fine_.size(); ++i)
            b.phi_fine_[j * b.fine_.size() + i] = b.eval_mode(j, b.fine_.nodes[i]);
        for (std::size_t i = 0; i < b.coarse_.size(); ++i)
            b.phi_coarse_[j * b.coarse_.size() + i] = b.eval_mode(j, b.coarse_.nodes[i]);
    }
    return b;
}

SpectralBasis build_basis(BasisKind kind, std::vector<double> lengths, std::vector<int> modes,
                          bool torus_zero_mode) {
    BasisRequest req;
    req.kind = kind;
    req.lengths = std::move(lengths);
    req.modes = std::move(modes);
    req.torus_zero_mode = torus_zero_mode;
    return build_basis(req);
}

ModalState zero_state(const SpectralBasis& basis, double t) {
    ModalState s;
    s.t = t;
    s.u.assign(basis.n_modes(), 0.0);
    s.ut.assign(basis.n_modes(), 0.0);
    s.utt.assign(basis.n_modes(), 0.0);
    return s;
}

ModalNorms modal_norms(const ModalState& state, const SpectralBasis& basis) {
    const std::size_t n = basis.n_modes();
    if (state.u.size() != n || state.ut.size() != n || state.utt.size() != n)
        throw std::invalid_argument("modal_norms: state length does not match basis");
    double l2u = 0, h1u = 0, h2u = 0, h1ut = 0, h2ut = 0, h1utt = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double l = basis.lambda(j);
        l2u += state.u[j] * state.u[j];
        h1u += l * state.u[j] * state.u[j];
        h2u += l * l * state.u[j] * state.u[j];
        h1ut += l * state.ut[j] * state.ut[j];
        h2ut += l * l * state.ut[j] * state.ut[j];
        h1utt += l * state.utt[j] * state.utt[j];
    }
    return {std::sqrt(l2u), std::sqrt(h1u), std::sqrt(h2u),
            std::sqrt(h1ut), std::sqrt(h2ut), std::sqrt(h1utt)};
}

}  // namespace jmgt
