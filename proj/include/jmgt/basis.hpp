#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace jmgt {

enum class BasisKind { DirichletInterval, DirichletRectangle, Torus };

BasisKind basis_kind_from_string(const std::string& name);
std::string to_string(BasisKind kind);

/// One eigenfunction of -Laplacian on the chosen domain.
/// Dirichlet kinds: index holds the per-axis sine indices (>= 1).
/// Torus: index is the wavevector (canonical half-space representative),
/// is_sine selects the sin branch of the cos/sin pair.
struct BasisMode {
    std::array<int, 3> index{0, 0, 0};
    bool is_sine = false;
    double lambda = 0.0;
};

/// Tensor quadrature grid with positive weights.
struct QuadGrid {
    int dim = 1;
    std::array<int, 3> shape{1, 1, 1};
    std::vector<std::array<double, 3>> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

struct BasisRequest {
    BasisKind kind = BasisKind::DirichletInterval;
    std::vector<double> lengths;  ///< edge lengths per axis [m]
    std::vector<int> modes;       ///< mode count (Dirichlet) or max wavenumber (torus) per axis
    bool torus_zero_mode = false; ///< include the lambda = 0 constant mode (torus only)
};

/// Eigenpairs of -Laplacian on a separable domain plus the collocation
/// machinery for pseudospectral products. Immutable after construction.
///
/// The fine grid integrates products of up to four basis functions to
/// round-off (Gauss-Legendre for Dirichlet kinds, uniform for the torus),
/// so projections of quadratic nonlinearities are alias-free. The coarse
/// grid resolves single modes only and exists for dealias=false runs.
class SpectralBasis {
  public:
    BasisKind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::array<double, 3>& lengths() const { return lengths_; }
    double volume() const { return volume_; }

    std::size_t n_modes() const { return modes_.size(); }
    const std::vector<BasisMode>& modes() const { return modes_; }
    const BasisMode& mode(std::size_t j) const { return modes_[j]; }
    const std::vector<double>& lambdas() const { return lambdas_; }
    double lambda(std::size_t j) const { return lambdas_[j]; }
    double lambda_min() const;

    const QuadGrid& grid() const { return fine_; }
    const QuadGrid& coarse_grid() const { return coarse_; }

    /// Pointwise value of basis function j at x (independent of any grid).
    double eval_mode(std::size_t j, const std::array<double, 3>& x) const;

    /// Modal coefficients -> samples on the selected grid.
    std::vector<double> to_physical(const std::vector<double>& coeffs, bool dealias = true) const;
    /// Quadrature L2 projection of grid samples back onto the basis.
    std::vector<double> from_physical(const std::vector<double>& samples, bool dealias = true) const;

    /// max |u(x)| over the fine grid (the computable L-infinity proxy).
    double linf(const std::vector<double>& coeffs) const;

    friend SpectralBasis build_basis(const BasisRequest& req);

  private:
    BasisKind kind_ = BasisKind::DirichletInterval;
    int dim_ = 1;
    std::array<double, 3> lengths_{1.0, 1.0, 1.0};
    std::array<int, 3> axis_modes_{1, 0, 0};
    double volume_ = 1.0;
    bool zero_mode_ = false;

    std::vector<BasisMode> modes_;
    std::vector<double> lambdas_;

    QuadGrid fine_;
    QuadGrid coarse_;
    // mode-major tables of basis values, [j * grid.size() + i]
    std::vector<double> phi_fine_;
    std::vector<double> phi_coarse_;

    const std::vector<double>& table(bool dealias) const { return dealias ? phi_fine_ : phi_coarse_; }
    const QuadGrid& grid_for(bool dealias) const { return dealias ? fine_ : coarse_; }
};

SpectralBasis build_basis(const BasisRequest& req);
SpectralBasis build_basis(BasisKind kind, std::vector<double> lengths, std::vector<int> modes,
                          bool torus_zero_mode = false);

/// Spectral coefficients of (u, u_t, u_tt) at one time instant.
struct ModalState {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> ut;
    std::vector<double> utt;
};

ModalState zero_state(const SpectralBasis& basis, double t = 0.0);

struct ModalNorms {
    double l2_u;
    double h1_u;   ///< |grad u|_{L2} = sqrt(sum lambda_j u_j^2)
    double h2_u;   ///< |Lap u|_{L2}  = sqrt(sum lambda_j^2 u_j^2)
    double h1_ut;
    double h2_ut;
    double h1_utt;
};

ModalNorms modal_norms(const ModalState& state, const SpectralBasis& basis);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace jmgt
