#pragma once

#include <complex>
#include <vector>

#include "jmgt/basis.hpp"
#include "jmgt/forcing.hpp"
#include "jmgt/params.hpp"
#include "jmgt/timedomain.hpp"

namespace jmgt {

/// Complex modal coefficients u_hat_{m,j} of the one-sided expansion
/// u(x,t) = Re sum_{m=1}^{M} u_hat_m(x) exp(i m omega t).
struct HarmonicField {
    double omega = 0.0;
    int order = 0;  ///< truncation M >= 1
    std::size_t n_modes = 0;
    std::vector<std::complex<double>> coeffs;  ///< row-major, (m-1)*n_modes + j

    static HarmonicField zeros(double omega, int order, std::size_t n_modes);
    std::complex<double>& at(int m, std::size_t j) { return coeffs[(m - 1) * n_modes + j]; }
    const std::complex<double>& at(int m, std::size_t j) const {
        return coeffs[(m - 1) * n_modes + j];
    }
};

/// Diagonal symbol of the coupled Helmholtz system at harmonic m and spatial
/// eigenvalue lambda:
///   S(m, j) = (c^2 lambda - m^2 omega^2) + i (b m omega lambda - tau m^3 omega^3),
/// the sign convention fixed so that S u_hat_m = rhs reproduces the
/// time-domain steady state.
std::complex<double> helmholtz_symbol(const PhysicalParams& params, int m, double omega,
                                      double lambda);

/// (eta/2) m^2 omega^2 [ sum_{l=1}^{m-1} u_l u_{m-l}
///   + 2 sum_{k=1}^{M-m} u_{k+m} conj(u_k) ], spatial products evaluated
/// pseudospectrally and projected; truncation k + m <= M.
std::vector<std::complex<double>> convolution_rhs(const HarmonicField& field,
                                                  const SpectralBasis& basis, double eta, int m,
                                                  bool dealias = true);

struct FixedPointOptions {
    double tol = 1e-10;        ///< successive-iterate H1-type change
    double relaxation = 0.5;   ///< under-relaxation, adaptively halved on residual growth
    int max_iterations = 500;
    bool dealias = true;
};

struct FixedPointReport {
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;            ///< H1-type residual of the Helmholtz system
    std::vector<double> residual_history;   ///< one entry per iteration
};

struct FixedPointResult {
    HarmonicField field;
    FixedPointReport report;
};

/// Picard iteration u_hat_m <- S^-1 [ convolution_rhs + m^2 omega^2 r_hat_m ]
/// with under-relaxation. Requires delta > 0; refuses near-singular symbols.
/// Divergence returns converged = false with the last iterate.
FixedPointResult solve_fixed_point(const PhysicalParams& params, const SpectralBasis& basis,
                                   const HarmonicField& source, const FixedPointOptions& opts = {});

/// Multiharmonic source from a modal-harmonic forcing spec: r_hat_1 = amplitude,
/// higher harmonics zero.
HarmonicField harmonic_source(const ForcingSpec& forcing, int order, std::size_t n_modes);

/// Discrete Fourier analysis in time of one uniformly sampled period
/// (sample count >= 4 M). Phases are referenced to absolute time.
HarmonicField harmonic_spectrum(const Trajectory& period, const SpectralBasis& basis, int order,
                                double omega);

/// Real modal coefficients of the represented field at time t.
std::vector<double> evaluate_harmonics(const HarmonicField& field, double t);

/// sqrt(sum_j lambda_j |u_hat_{m,j}|^2)
double harmonic_h1_norm(const HarmonicField& field, const SpectralBasis& basis, int m);

}  // namespace jmgt
