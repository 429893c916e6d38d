#pragma once

#include <vector>

#include "jmgt/basis.hpp"
#include "jmgt/forcing.hpp"
#include "jmgt/params.hpp"
#include "jmgt/timedomain.hpp"

namespace jmgt {

/// Weights of the energy-identity test function -Lap(tau u_tt + sigma u_t + rho u).
struct EnergyWeights {
    double sigma = 1.0;
    double rho = 1.0;
    double epsilon = 1.0;

    /// sigma = 1 - min{delta/(2b), tau delta/c^2} for delta > 0, else 1;
    /// rho = min{sigma/(2 tau), delta lambda_min/(4 c^2), sigma lambda_min/4}
    /// clipped to (0, 1].
    static EnergyWeights defaults(const PhysicalParams& params, const SpectralBasis& basis);
};

struct EnergyComponents {
    double grad_utt = 0.0;  ///< tau^2 |grad u_tt|^2
    double lap_ut = 0.0;    ///< tau |Lap u_t|^2
    double grad_ut = 0.0;   ///< |grad u_t|^2
    double lap_u = 0.0;     ///< |Lap u|^2
    double total() const { return grad_utt + lap_ut + grad_ut + lap_u; }
};

/// E[u](t) = tau^2 |grad u_tt|^2 + tau |Lap u_t|^2 + |grad u_t|^2 + |Lap u|^2,
/// realized spectrally.
EnergyComponents energy(const PhysicalParams& params, const SpectralBasis& basis,
                        const ModalState& state);

struct EnergyTrace {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> comp_grad_utt, comp_lap_ut, comp_grad_ut, comp_lap_u;
    std::vector<double> linf;
};

EnergyTrace energy_trace(const PhysicalParams& params, const SpectralBasis& basis,
                         const Trajectory& traj);

/// Normalized defect |LHS - RHS| of the energy identity along a uniformly
/// sampled trajectory, one value per sample time (first entry 0). Space norms
/// are spectral, time integrals composite trapezoid, so the defect vanishes
/// at second order under dt refinement.
std::vector<double> energy_identity_residual(const PhysicalParams& params,
                                             const SpectralBasis& basis, const Trajectory& traj,
                                             const EnergyWeights& weights,
                                             const ForcingSpec& forcing = {});

struct DecayFit {
    double rate = 0.0;       ///< c2 in E(t) ~ prefactor * exp(-c2 t)
    double prefactor = 0.0;
};

/// Least-squares fit of log E(t) over the window [t_lo, t_hi].
DecayFit fit_decay_rate(const EnergyTrace& trace, double t_lo, double t_hi);

struct BlowupDetection {
    bool detected = false;
    double t_detect = 0.0;
    double growth_exponent = 0.0;  ///< local d/dt log |u|_Linf at detection
};

BlowupDetection detect_blowup(const EnergyTrace& trace, double threshold);

/// z = tau u_t + u and its time derivative along a trajectory.
struct ZTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> z;   ///< modal rows
    std::vector<std::vector<double>> zt;  ///< tau u_tt + u_t
};

std::vector<double> z_of_state(const ModalState& state, double tau);
ZTrajectory z_transform(const Trajectory& traj, double tau);

/// Normalized residuals of the perturbed-wave form
///   z_tt - (c^2 + delta/tau) Lap z = f - (delta/tau) Lap u
/// and of the memory form
///   z_tt - (c^2 + delta/tau) Lap z + (delta/tau) e_tau * Lap z
///     = f - delta e_tau(t) Lap u(0)
/// with e_tau(t) = exp(-t/tau)/tau, evaluated along the trajectory
/// (second differences in time; exact piecewise-Hermite convolution).
struct WaveZResidual {
    std::vector<double> times;     ///< interior sample times
    std::vector<double> direct;    ///< perturbed-wave form
    std::vector<double> memory;    ///< memory form
    double max_direct = 0.0;
    double max_memory = 0.0;
};

WaveZResidual wave_z_residual(const PhysicalParams& params, const SpectralBasis& basis,
                              const Trajectory& traj, const ForcingSpec& forcing = {});

/// u(t) = exp(-t/tau) u(0) + (e_tau * z)(t) per mode; returns one modal row
/// per sample of the z-trajectory.
std::vector<std::vector<double>> reconstruct_u_from_z(const ZTrajectory& ztraj,
                                                      const std::vector<double>& u0, double tau);

}  // namespace jmgt
