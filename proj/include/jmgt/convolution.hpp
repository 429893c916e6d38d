#pragma once

#include <vector>

#include "jmgt/basis.hpp"

namespace jmgt {

/// Exact L2 projection of the pointwise product of two modal fields onto the
/// basis via closed-form triple-product integrals. Dirichlet bases only and
/// intended for small mode counts (n <= 16); serves as the alias-free
/// reference for the pseudospectral product path.
class ExactProduct {
  public:
    explicit ExactProduct(const SpectralBasis& basis);

    /// coefficients of P(a * b) where a, b are modal coefficient vectors
    std::vector<double> project(const std::vector<double>& a, const std::vector<double>& b) const;

    double triple(std::size_t j, std::size_t l, std::size_t k) const {
        return tensor_[(j * n_ + l) * n_ + k];
    }

  private:
    std::size_t n_ = 0;
    std::vector<double> tensor_;  // T[j][l][k] = Int phi_j phi_l phi_k
};

}  // namespace jmgt
