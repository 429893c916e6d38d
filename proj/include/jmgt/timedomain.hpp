#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jmgt/basis.hpp"
#include "jmgt/forcing.hpp"
#include "jmgt/params.hpp"

namespace jmgt {

enum class Scheme { ExponentialImex, Rk4Explicit };

Scheme scheme_from_string(const std::string& name);
std::string to_string(Scheme s);

struct SolverConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    Scheme scheme = Scheme::ExponentialImex;
    bool dealias = true;
    double blowup_linf_threshold = 0.0;  ///< 0 = auto: 1e6 x initial Linf (1e6 from zero data)
    double newton_tol = 1e-12;           ///< reserved for the degenerate (tau = 0) path
    int sample_stride = 1;               ///< record every k-th step
    double degeneracy_margin = 1e-3;     ///< tau = 0: abort when 1 + 2 eta u <= margin

    void validate() const;
};

enum class Termination { Completed, BlowupDetected, StepFailure, DegeneracyLoss };

std::string to_string(Termination t);

/// Loss of non-degeneracy on the tau = 0 path: 1 + 2 eta u dropped below the
/// configured margin. Reported distinctly from blow-up.
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ModalState> states;
    Termination termination = Termination::Completed;
    double sample_dt = 0.0;  ///< spacing of recorded samples
};

struct Derivative {
    std::vector<double> du, dut, dutt;
};

/// Effective blow-up threshold: the configured cap, or 1e6 x the initial
/// Linf norm (absolute 1e6 when starting from zero).
double resolve_blowup_threshold(const SolverConfig& config, double linf0);

/// Semidiscrete right-hand side of the modal Galerkin JMGT-Westervelt system
/// (tau > 0): du = ut, dut = utt,
/// dutt = [-(1 + 2 eta u) utt - 2 eta ut^2 + c^2 Lap u + b Lap ut - r_tt] / tau
/// with the quadratic terms evaluated pseudospectrally and projected back.
Derivative rhs(const PhysicalParams& params, const SpectralBasis& basis, const ModalState& state,
               const ForcingSpec& forcing, double t, bool dealias = true);

/// Modal coefficients of f = -2 eta (u u_tt + u_t^2) - r_tt at time t, the
/// right-hand side of the linearized form.
std::vector<double> f_modal(const PhysicalParams& params, const SpectralBasis& basis,
                            const ModalState& state, const ForcingSpec& forcing, double t,
                            bool dealias = true);

/// u_tt solving the pointwise relation
/// (1 + 2 eta u) utt = c^2 Lap u + b Lap ut - 2 eta ut^2 - r_tt at time t.
/// Used as the default third initial datum and as the derived utt for tau = 0.
std::vector<double> consistent_utt(const PhysicalParams& params, const SpectralBasis& basis,
                                   const std::vector<double>& u, const std::vector<double>& ut,
                                   const ForcingSpec& forcing, double t, bool dealias = true,
                                   double degeneracy_margin = 1e-3);

/// Strang-split stepper for tau > 0: per-mode exact propagation of the linear
/// companion block (matrix exponential over dt) around an explicit midpoint
/// increment of the projected nonlinearity and forcing.
class ImexStepper {
  public:
    ImexStepper(const PhysicalParams& params, const SpectralBasis& basis, double dt,
                bool dealias = true);
    ModalState step(const ModalState& state, const ForcingSpec& forcing) const;
    double dt() const { return dt_; }

  private:
    const PhysicalParams params_;
    const SpectralBasis* basis_;
    double dt_;
    bool dealias_;
    std::vector<std::array<double, 9>> half_;  // exp(A_j dt/2) per mode
};

/// Classical four-stage Runge-Kutta on the full right-hand side (tau > 0).
/// Requires dt below the linear stability bound from the largest |root|.
class Rk4Stepper {
  public:
    Rk4Stepper(const PhysicalParams& params, const SpectralBasis& basis, double dt,
               bool dealias = true);
    ModalState step(const ModalState& state, const ForcingSpec& forcing) const;

  private:
    const PhysicalParams params_;
    const SpectralBasis* basis_;
    double dt_;
    bool dealias_;
};

/// One integrator step at the state's own time; convenience wrapper that
/// builds the matching stepper.
ModalState step(const PhysicalParams& params, const SpectralBasis& basis, const ModalState& state,
                const ForcingSpec& forcing, const SolverConfig& config);

/// Initial-value run of the JMGT-Westervelt system. tau = 0 routes to the
/// degenerate Westervelt path (u2 must then be omitted; utt is derived).
Trajectory simulate_ivp(const PhysicalParams& params, const SpectralBasis& basis,
                        const std::vector<double>& u0, const std::vector<double>& u1,
                        const std::optional<std::vector<double>>& u2, const ForcingSpec& forcing,
                        const SolverConfig& config);

/// Westervelt limit (tau = 0): (1 + 2 eta u) u_tt = c^2 Lap u + b Lap u_t
/// - 2 eta u_t^2 - r_tt as a first-order system in (u, u_t).
Trajectory simulate_westervelt_tau0(const PhysicalParams& params, const SpectralBasis& basis,
                                    const std::vector<double>& u0, const std::vector<double>& u1,
                                    const ForcingSpec& forcing, const SolverConfig& config);

struct PeriodicResult {
    Trajectory period;   ///< one period, N uniform samples over [t0, t0 + T)
    double defect = 0.0; ///< achieved period-to-period H1 change
    int periods = 0;
    bool converged = false;
};

/// Time-periodic steady state by transient decay under periodic forcing;
/// requires delta > 0. Fails explicitly after max_periods without
/// convergence.
PeriodicResult periodic_steady_state(const PhysicalParams& params, const SpectralBasis& basis,
                                     const ForcingSpec& forcing, const SolverConfig& config,
                                     double steady_tol = 1e-10, int max_periods = 400);

}  // namespace jmgt
