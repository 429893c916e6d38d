#include "jmgt/timedomain.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <numbers>

#include "jmgt/stability.hpp"

namespace jmgt {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool state_finite(const ModalState& s) {
    return all_finite(s.u) && all_finite(s.ut) && all_finite(s.utt);
}

std::array<double, 9> expm3(const Eigen::Matrix3d& a, double h) {
    Eigen::Matrix3d e = (a * h).exp();
    std::array<double, 9> out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[3 * r + c] = e(r, c);
    return out;
}

// Modal coefficients of -2 eta (u * utt + ut^2) - r_tt at time t, the
// right-hand side block shared by rhs() and the nonlinear substep.
std::vector<double> nonlinear_block(const PhysicalParams& params, const SpectralBasis& basis,
                                    const std::vector<double>& u_grid,
                                    const std::vector<double>& ut_grid,
                                    const std::vector<double>& utt, const ForcingSpec& forcing,
                                    double t, bool dealias) {
    const std::size_t n = basis.n_modes();
    std::vector<double> out;
    if (params.eta != 0.0) {
        std::vector<double> utt_grid = basis.to_physical(utt, dealias);
        for (std::size_t i = 0; i < utt_grid.size(); ++i)
            utt_grid[i] = -2.0 * params.eta * (u_grid[i] * utt_grid[i] + ut_grid[i] * ut_grid[i]);
        out = basis.from_physical(utt_grid, dealias);
    } else {
        out.assign(n, 0.0);
    }
    if (!forcing.none()) {
        const std::vector<double> rtt = rtt_modal(forcing, t, n);
        for (std::size_t j = 0; j < n; ++j) out[j] -= rtt[j];
    }
    return out;
}

}  // namespace

double resolve_blowup_threshold(const SolverConfig& config, double linf0) {
    if (config.blowup_linf_threshold > 0.0) return config.blowup_linf_threshold;
    return linf0 > 0.0 ? 1e6 * linf0 : 1e6;
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "exponential-imex") return Scheme::ExponentialImex;
    if (name == "rk4-explicit") return Scheme::Rk4Explicit;
    throw std::invalid_argument("solver.scheme: unknown scheme '" + name + "'");
}

std::string to_string(Scheme s) {
    return s == Scheme::ExponentialImex ? "exponential-imex" : "rk4-explicit";
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::BlowupDetected: return "blowup-detected";
        case Termination::StepFailure: return "step-failure";
        case Termination::DegeneracyLoss: return "degeneracy-loss";
    }
    return "?";
}

void SolverConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("solver.dt must be positive");
    if (!(t_end >= dt)) throw std::invalid_argument("solver.t_end must be >= solver.dt");
    if (blowup_linf_threshold < 0.0)
        throw std::invalid_argument("solver.blowup_threshold must be positive (or 0 for auto)");
    if (sample_stride < 1) throw std::invalid_argument("solver.sample_stride must be >= 1");
    if (!(degeneracy_margin > 0.0))
        throw std::invalid_argument("solver.degeneracy_margin must be positive");
}

Derivative rhs(const PhysicalParams& params, const SpectralBasis& basis, const ModalState& state,
               const ForcingSpec& forcing, double t, bool dealias) {
    params.validate();
    if (!(params.tau > 0.0)) throw std::invalid_argument("rhs: tau must be positive");
    const std::size_t n = basis.n_modes();
    if (state.u.size() != n || state.ut.size() != n || state.utt.size() != n)
        throw std::invalid_argument("rhs: state length does not match basis");

    Derivative d;
    d.du = state.ut;
    d.dut = state.utt;
    d.dutt.resize(n);

    std::vector<double> u_grid, ut_grid;
    if (params.eta != 0.0) {
        u_grid = basis.to_physical(state.u, dealias);
        ut_grid = basis.to_physical(state.ut, dealias);
    }
    std::vector<double> nl =
        nonlinear_block(params, basis, u_grid, ut_grid, state.utt, forcing, t, dealias);
    const double c2 = params.c * params.c;
    for (std::size_t j = 0; j < n; ++j) {
        const double lam = basis.lambda(j);
        d.dutt[j] =
            (-state.utt[j] - params.b * lam * state.ut[j] - c2 * lam * state.u[j] + nl[j]) /
            params.tau;
    }
    return d;
}

std::vector<double> f_modal(const PhysicalParams& params, const SpectralBasis& basis,
                            const ModalState& state, const ForcingSpec& forcing, double t,
                            bool dealias) {
    std::vector<double> u_grid, ut_grid;
    if (params.eta != 0.0) {
        u_grid = basis.to_physical(state.u, dealias);
        ut_grid = basis.to_physical(state.ut, dealias);
    }
    return nonlinear_block(params, basis, u_grid, ut_grid, state.utt, forcing, t, dealias);
}

std::vector<double> consistent_utt(const PhysicalParams& params, const SpectralBasis& basis,
                                   const std::vector<double>& u, const std::vector<double>& ut,
                                   const ForcingSpec& forcing, double t, bool dealias,
                                   double degeneracy_margin) {
    const std::size_t n = basis.n_modes();
    const double c2 = params.c * params.c;
    std::vector<double> lin(n);
    const std::vector<double> rtt = rtt_modal(forcing, t, n);
    for (std::size_t j = 0; j < n; ++j)
        lin[j] = -c2 * basis.lambda(j) * u[j] - params.b * basis.lambda(j) * ut[j] - rtt[j];
    if (params.eta == 0.0) return lin;

    std::vector<double> u_grid = basis.to_physical(u, dealias);
    std::vector<double> ut_grid = basis.to_physical(ut, dealias);
    std::vector<double> lin_grid = basis.to_physical(lin, dealias);
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const double denom = 1.0 + 2.0 * params.eta * u_grid[i];
        if (denom <= degeneracy_margin)
            throw DegeneracyError("consistent_utt: 1 + 2 eta u fell below the degeneracy margin");
        lin_grid[i] = (lin_grid[i] - 2.0 * params.eta * ut_grid[i] * ut_grid[i]) / denom;
    }
    return basis.from_physical(lin_grid, dealias);
}

ImexStepper::ImexStepper(const PhysicalParams& params, const SpectralBasis& basis, double dt,
                         bool dealias)
    : params_(params), basis_(&basis), dt_(dt), dealias_(dealias) {
    params.validate();
    if (!(params.tau > 0.0)) throw std::invalid_argument("ImexStepper: tau must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("ImexStepper: dt must be positive");
    const double c2 = params.c * params.c;
    half_.reserve(basis.n_modes());
    for (std::size_t j = 0; j < basis.n_modes(); ++j) {
        const double lam = basis.lambda(j);
        Eigen::Matrix3d a;
        a << 0.0, 1.0, 0.0,
             0.0, 0.0, 1.0,
             -c2 * lam / params.tau, -params.b * lam / params.tau, -1.0 / params.tau;
        half_.push_back(expm3(a, 0.5 * dt));
    }
}

ModalState ImexStepper::step(const ModalState& state, const ForcingSpec& forcing) const {
    const std::size_t n = basis_->n_modes();
    ModalState s = state;

    auto apply_half = [&](ModalState& x) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::array<double, 9>& e = half_[j];
            const double u = x.u[j], ut = x.ut[j], utt = x.utt[j];
            x.u[j] = e[0] * u + e[1] * ut + e[2] * utt;
            x.ut[j] = e[3] * u + e[4] * ut + e[5] * utt;
            x.utt[j] = e[6] * u + e[7] * ut + e[8] * utt;
        }
    };

    apply_half(s);
    if (params_.eta != 0.0 || !forcing.none()) {
        // midpoint rule on the nonlinear subflow; u, ut frozen
        std::vector<double> u_grid, ut_grid;
        if (params_.eta != 0.0) {
            u_grid = basis_->to_physical(s.u, dealias_);
            ut_grid = basis_->to_physical(s.ut, dealias_);
        }
        auto n_eval = [&](const std::vector<double>& utt, double t) {
            std::vector<double> nl =
                nonlinear_block(params_, *basis_, u_grid, ut_grid, utt, forcing, t, dealias_);
            for (double& v : nl) v /= params_.tau;
            return nl;
        };
        const std::vector<double> k1 = n_eval(s.utt, state.t);
        std::vector<double> utt_mid(n);
        for (std::size_t j = 0; j < n; ++j) utt_mid[j] = s.utt[j] + 0.5 * dt_ * k1[j];
        const std::vector<double> k2 = n_eval(utt_mid, state.t + 0.5 * dt_);
        for (std::size_t j = 0; j < n; ++j) s.utt[j] += dt_ * k2[j];
    }
    apply_half(s);
    s.t = state.t + dt_;
    return s;
}

Rk4Stepper::Rk4Stepper(const PhysicalParams& params, const SpectralBasis& basis, double dt,
                       bool dealias)
    : params_(params), basis_(&basis), dt_(dt), dealias_(dealias) {
    params.validate();
    if (!(params.tau > 0.0)) throw std::invalid_argument("Rk4Stepper: tau must be positive");
    double smax = 0.0;
    for (double lam : basis.lambdas()) {
        for (const auto& root : characteristic_roots(params, lam))
            smax = std::max(smax, std::abs(root));
    }
    if (dt * smax > 2.5)
        throw std::invalid_argument("Rk4Stepper: dt exceeds the linear stability bound (dt*|s|max = " +
                                    std::to_string(dt * smax) + " > 2.5)");
}

ModalState Rk4Stepper::step(const ModalState& state, const ForcingSpec& forcing) const {
    const std::size_t n = basis_->n_modes();
    auto axpy = [&](const ModalState& base, double w, const Derivative& d) {
        ModalState out = base;
        for (std::size_t j = 0; j < n; ++j) {
            out.u[j] += w * d.du[j];
            out.ut[j] += w * d.dut[j];
            out.utt[j] += w * d.dutt[j];
        }
        return out;
    };
    const double h = dt_;
    Derivative k1 = rhs(params_, *basis_, state, forcing, state.t, dealias_);
    ModalState s2 = axpy(state, 0.5 * h, k1);
    Derivative k2 = rhs(params_, *basis_, s2, forcing, state.t + 0.5 * h, dealias_);
    ModalState s3 = axpy(state, 0.5 * h, k2);
    Derivative k3 = rhs(params_, *basis_, s3, forcing, state.t + 0.5 * h, dealias_);
    ModalState s4 = axpy(state, h, k3);
    Derivative k4 = rhs(params_, *basis_, s4, forcing, state.t + h, dealias_);

    ModalState out = state;
    for (std::size_t j = 0; j < n; ++j) {
        out.u[j] += h / 6.0 * (k1.du[j] + 2.0 * k2.du[j] + 2.0 * k3.du[j] + k4.du[j]);
        out.ut[j] += h / 6.0 * (k1.dut[j] + 2.0 * k2.dut[j] + 2.0 * k3.dut[j] + k4.dut[j]);
        out.utt[j] += h / 6.0 * (k1.dutt[j] + 2.0 * k2.dutt[j] + 2.0 * k3.dutt[j] + k4.dutt[j]);
    }
    out.t = state.t + h;
    return out;
}

ModalState step(const PhysicalParams& params, const SpectralBasis& basis, const ModalState& state,
                const ForcingSpec& forcing, const SolverConfig& config) {
    config.validate();
    if (config.scheme == Scheme::ExponentialImex)
        return ImexStepper(params, basis, config.dt, config.dealias).step(state, forcing);
    return Rk4Stepper(params, basis, config.dt, config.dealias).step(state, forcing);
}

namespace {

// tau = 0 stepper: Strang split of the first-order (u, ut) Westervelt system.
class Tau0Stepper {
  public:
    Tau0Stepper(const PhysicalParams& params, const SpectralBasis& basis, double dt, bool dealias,
                double margin, Scheme scheme)
        : params_(params), basis_(&basis), dt_(dt), dealias_(dealias), margin_(margin),
          scheme_(scheme) {
        const double c2 = params.c * params.c;
        if (scheme == Scheme::Rk4Explicit) {
            double smax = 0.0;
            for (double lam : basis.lambdas()) {
                const std::complex<double> disc =
                    std::sqrt(std::complex<double>(params.b * params.b * lam * lam - 4.0 * c2 * lam));
                smax = std::max({smax, std::abs(0.5 * (-params.b * lam + disc)),
                                 std::abs(0.5 * (-params.b * lam - disc))});
            }
            if (dt * smax > 2.5)
                throw std::invalid_argument(
                    "simulate_westervelt_tau0: dt exceeds the rk4 stability bound");
            return;
        }
        half_.reserve(basis.n_modes());
        for (std::size_t j = 0; j < basis.n_modes(); ++j) {
            const double lam = basis.lambda(j);
            Eigen::Matrix2d a;
            a << 0.0, 1.0, -c2 * lam, -params.b * lam;
            Eigen::Matrix2d e = (a * (0.5 * dt)).exp();
            half_.push_back({e(0, 0), e(0, 1), e(1, 0), e(1, 1)});
        }
    }

    ModalState step(const ModalState& state, const ForcingSpec& forcing) const {
        return scheme_ == Scheme::ExponentialImex ? step_imex(state, forcing)
                                                  : step_rk4(state, forcing);
    }

    // dut = P[(c^2 Lap u + b Lap ut - 2 eta ut^2 - r_tt) / (1 + 2 eta u)]
    std::vector<double> acceleration(const std::vector<double>& u, const std::vector<double>& ut,
                                     const ForcingSpec& forcing, double t) const {
        return consistent_utt(params_, *basis_, u, ut, forcing, t, dealias_, margin_);
    }

  private:
    ModalState step_imex(const ModalState& state, const ForcingSpec& forcing) const {
        const std::size_t n = basis_->n_modes();
        ModalState s = state;
        auto apply_half = [&](ModalState& x) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto& e = half_[j];
                const double u = x.u[j], ut = x.ut[j];
                x.u[j] = e[0] * u + e[1] * ut;
                x.ut[j] = e[2] * u + e[3] * ut;
            }
        };
        apply_half(s);
        if (params_.eta != 0.0 || !forcing.none()) {
            const double c2 = params_.c * params_.c;
            // N = acceleration - linear part, u frozen over the subflow
            auto n_eval = [&](const std::vector<double>& ut, double t) {
                std::vector<double> nl = acceleration(s.u, ut, forcing, t);
                for (std::size_t j = 0; j < n; ++j)
                    nl[j] -= -c2 * basis_->lambda(j) * s.u[j] - params_.b * basis_->lambda(j) * ut[j];
                return nl;
            };
            const std::vector<double> k1 = n_eval(s.ut, state.t);
            std::vector<double> ut_mid(n);
            for (std::size_t j = 0; j < n; ++j) ut_mid[j] = s.ut[j] + 0.5 * dt_ * k1[j];
            const std::vector<double> k2 = n_eval(ut_mid, state.t + 0.5 * dt_);
            for (std::size_t j = 0; j < n; ++j) s.ut[j] += dt_ * k2[j];
        }
        apply_half(s);
        s.t = state.t + dt_;
        // utt is a derived quantity on this path
        s.utt = acceleration(s.u, s.ut, forcing, s.t);
        return s;
    }

    ModalState step_rk4(const ModalState& state, const ForcingSpec& forcing) const {
        const std::size_t n = basis_->n_modes();
        auto eval = [&](const std::vector<double>& u, const std::vector<double>& ut, double t) {
            return std::pair<std::vector<double>, std::vector<double>>(
                ut, acceleration(u, ut, forcing, t));
        };
        auto shifted = [&](const std::vector<double>& v, double w, const std::vector<double>& d) {
            std::vector<double> out = v;
            for (std::size_t j = 0; j < n; ++j) out[j] += w * d[j];
            return out;
        };
        const double h = dt_;
        auto [k1u, k1v] = eval(state.u, state.ut, state.t);
        auto [k2u, k2v] = eval(shifted(state.u, 0.5 * h, k1u), shifted(state.ut, 0.5 * h, k1v),
                               state.t + 0.5 * h);
        auto [k3u, k3v] = eval(shifted(state.u, 0.5 * h, k2u), shifted(state.ut, 0.5 * h, k2v),
                               state.t + 0.5 * h);
        auto [k4u, k4v] = eval(shifted(state.u, h, k3u), shifted(state.ut, h, k3v), state.t + h);
        ModalState out = state;
        for (std::size_t j = 0; j < n; ++j) {
            out.u[j] += h / 6.0 * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]);
            out.ut[j] += h / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
        }
        out.t = state.t + h;
        out.utt = acceleration(out.u, out.ut, forcing, out.t);
        return out;
    }

    const PhysicalParams params_;
    const SpectralBasis* basis_;
    double dt_;
    bool dealias_;
    double margin_;
    Scheme scheme_;
    std::vector<std::array<double, 4>> half_;
};

template <typename StepFn>
Trajectory integrate(StepFn&& advance, ModalState state, const SpectralBasis& basis,
                     const SolverConfig& config, double threshold) {
    Trajectory traj;
    traj.sample_dt = config.dt * config.sample_stride;
    const long n_steps = std::lround(config.t_end / config.dt);
    traj.times.reserve(n_steps / config.sample_stride + 2);
    auto record = [&](const ModalState& s) {
        traj.times.push_back(s.t);
        traj.states.push_back(s);
    };
    record(state);
    const double t0 = state.t;
    for (long k = 1; k <= n_steps; ++k) {
        ModalState next;
        try {
            next = advance(state);
        } catch (const DegeneracyError&) {
            traj.termination = Termination::DegeneracyLoss;
            return traj;
        }
        next.t = t0 + k * config.dt;
        if (!state_finite(next)) {
            traj.termination = Termination::StepFailure;
            return traj;
        }
        state = std::move(next);
        const bool sample = (k % config.sample_stride == 0) || k == n_steps;
        if (basis.linf(state.u) > threshold) {
            record(state);
            traj.termination = Termination::BlowupDetected;
            return traj;
        }
        if (sample) record(state);
    }
    traj.termination = Termination::Completed;
    return traj;
}

}  // namespace

Trajectory simulate_ivp(const PhysicalParams& params, const SpectralBasis& basis,
                        const std::vector<double>& u0, const std::vector<double>& u1,
                        const std::optional<std::vector<double>>& u2, const ForcingSpec& forcing,
                        const SolverConfig& config) {
    params.validate();
    config.validate();
    forcing.validate(basis.n_modes());
    if (params.tau == 0.0) {
        if (u2.has_value())
            throw std::invalid_argument(
                "simulate_ivp: utt is a derived quantity for tau = 0; omit u2");
        return simulate_westervelt_tau0(params, basis, u0, u1, forcing, config);
    }
    const std::size_t n = basis.n_modes();
    if (u0.size() != n || u1.size() != n || (u2 && u2->size() != n))
        throw std::invalid_argument("simulate_ivp: initial data length does not match basis");

    ModalState state;
    state.t = 0.0;
    state.u = u0;
    state.ut = u1;
    state.utt = u2 ? *u2
                   : consistent_utt(params, basis, u0, u1, forcing, 0.0, config.dealias,
                                    config.degeneracy_margin);

    const double threshold = resolve_blowup_threshold(config, basis.linf(u0));
    if (config.scheme == Scheme::ExponentialImex) {
        ImexStepper stepper(params, basis, config.dt, config.dealias);
        return integrate([&](const ModalState& s) { return stepper.step(s, forcing); }, state,
                         basis, config, threshold);
    }
    Rk4Stepper stepper(params, basis, config.dt, config.dealias);
    return integrate([&](const ModalState& s) { return stepper.step(s, forcing); }, state, basis,
                     config, threshold);
}

Trajectory simulate_westervelt_tau0(const PhysicalParams& params, const SpectralBasis& basis,
                                    const std::vector<double>& u0, const std::vector<double>& u1,
                                    const ForcingSpec& forcing, const SolverConfig& config) {
    params.validate();
    config.validate();
    forcing.validate(basis.n_modes());
    if (params.tau != 0.0)
        throw std::invalid_argument("simulate_westervelt_tau0: tau must be zero");
    const std::size_t n = basis.n_modes();
    if (u0.size() != n || u1.size() != n)
        throw std::invalid_argument("simulate_westervelt_tau0: initial data length mismatch");

    Tau0Stepper stepper(params, basis, config.dt, config.dealias, config.degeneracy_margin,
                        config.scheme);
    ModalState state;
    state.t = 0.0;
    state.u = u0;
    state.ut = u1;
    state.utt = stepper.acceleration(u0, u1, forcing, 0.0);

    const double threshold = resolve_blowup_threshold(config, basis.linf(u0));
    return integrate([&](const ModalState& s) { return stepper.step(s, forcing); }, state, basis,
                     config, threshold);
}

PeriodicResult periodic_steady_state(const PhysicalParams& params, const SpectralBasis& basis,
                                     const ForcingSpec& forcing, const SolverConfig& config,
                                     double steady_tol, int max_periods) {
    params.validate();
    config.validate();
    forcing.validate(basis.n_modes());
    if (!(params.delta() > 0.0))
        throw std::invalid_argument("periodic_steady_state: requires delta = b - tau c^2 > 0");
    const std::size_t n = basis.n_modes();

    const double omega = forcing.omega;
    const double period = omega > 0.0 ? 2.0 * std::numbers::pi / omega : 1.0;
    const long steps_per_period = std::max<long>(8, std::lround(period / config.dt));
    const double dt = period / static_cast<double>(steps_per_period);

    ModalState state = zero_state(basis);
    state.utt = consistent_utt(params, basis, state.u, state.ut, forcing, 0.0, config.dealias,
                               config.degeneracy_margin);

    auto h1_diff = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = a[j] - b[j];
            acc += basis.lambda(j) * d * d;
        }
        return std::sqrt(acc);
    };

    std::optional<ImexStepper> imex;
    std::optional<Rk4Stepper> rk4;
    std::optional<Tau0Stepper> tau0;
    if (params.tau == 0.0)
        tau0.emplace(params, basis, dt, config.dealias, config.degeneracy_margin, config.scheme);
    else if (config.scheme == Scheme::ExponentialImex)
        imex.emplace(params, basis, dt, config.dealias);
    else
        rk4.emplace(params, basis, dt, config.dealias);
    auto advance = [&](const ModalState& s) {
        if (tau0) return tau0->step(s, forcing);
        if (imex) return imex->step(s, forcing);
        return rk4->step(s, forcing);
    };

    PeriodicResult result;
    std::vector<double> prev_u = state.u;
    long global_step = 0;
    for (int p = 1; p <= max_periods; ++p) {
        for (long k = 0; k < steps_per_period; ++k) {
            state = advance(state);
            state.t = dt * static_cast<double>(++global_step);
            if (!state_finite(state))
                throw std::runtime_error("periodic_steady_state: non-finite state during transient");
        }
        result.defect = h1_diff(state.u, prev_u);
        result.periods = p;
        prev_u = state.u;
        if (result.defect < steady_tol) {
            result.converged = true;
            break;
        }
    }
    if (!result.converged)
        throw std::runtime_error("periodic_steady_state: no convergence after " +
                                 std::to_string(max_periods) + " periods (defect " +
                                 std::to_string(result.defect) + ")");

    // record one final period, half-open [t0, t0 + T)
    result.period.sample_dt = dt;
    result.period.termination = Termination::Completed;
    result.period.times.reserve(steps_per_period);
    result.period.states.reserve(steps_per_period);
    for (long k = 0; k < steps_per_period; ++k) {
        result.period.times.push_back(state.t);
        result.period.states.push_back(state);
        state = advance(state);
        state.t = dt * static_cast<double>(++global_step);
        if (!state_finite(state))
            throw std::runtime_error("periodic_steady_state: non-finite state while sampling");
    }
    return result;
}

}  // namespace jmgt
