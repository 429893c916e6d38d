#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "jmgt/convolution.hpp"
#include "jmgt/diagnostics.hpp"
#include "jmgt/stability.hpp"
#include "jmgt/timedomain.hpp"
#include "oracles.hpp"

using namespace jmgt;
constexpr double kPi = std::numbers::pi;

namespace {

PhysicalParams make(double tau, double c, double b, double eta = 0.0) {
    PhysicalParams p;
    p.tau = tau;
    p.c = c;
    p.b = b;
    p.eta = eta;
    return p;
}

double max_u_error(const Trajectory& traj, const oracles::AnalyticMode& exact) {
    double err = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        err = std::max(err, std::abs(traj.states[k].u[0] - exact.u(traj.times[k])));
    return err;
}

}  // namespace

TEST_CASE("rhs: zero state and zero forcing give a zero derivative") {
    const PhysicalParams p = make(1.0, 1.0, 2.0, 0.5);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {4});
    auto d = rhs(p, basis, zero_state(basis), {}, 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(d.du[j] == 0.0);
        CHECK(d.dut[j] == 0.0);
        CHECK(d.dutt[j] == 0.0);
    }
}

TEST_CASE("rhs: linear MGT is diagonal per mode") {
    const PhysicalParams p = make(0.5, 1.3, 0.9);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {4});
    ModalState s = zero_state(basis);
    s.u[1] = 0.7;
    s.ut[1] = -0.2;
    s.utt[1] = 0.4;
    auto d = rhs(p, basis, s, {}, 0.0);
    const double lam = basis.lambda(1);
    CHECK(d.du[1] == doctest::Approx(s.ut[1]));
    CHECK(d.dut[1] == doctest::Approx(s.utt[1]));
    CHECK(d.dutt[1] ==
          doctest::Approx((-s.utt[1] - p.b * lam * s.ut[1] - p.c * p.c * lam * s.u[1]) / p.tau)
              .epsilon(1e-13));
    for (std::size_t j = 0; j < 4; ++j) {
        if (j == 1) continue;
        CHECK(std::abs(d.dutt[j]) < 1e-14);
    }
}

TEST_CASE("rhs: quadratic terms match the dense modal-convolution oracle") {
    const PhysicalParams p = make(1.0, 1.0, 2.0, 0.8);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {4});
    ExactProduct ep(basis);
    ModalState s = zero_state(basis);
    s.u[0] = 1.0;
    s.ut[0] = 1.0;
    auto d = rhs(p, basis, s, {}, 0.0);
    // oracle: dutt = [-utt - b lam ut - c^2 lam u - 2 eta P(u utt) - 2 eta P(ut ut)]/tau
    const auto ut_sq = ep.project(s.ut, s.ut);
    for (std::size_t j = 0; j < 4; ++j) {
        const double lam = basis.lambda(j);
        const double expect =
            (-s.utt[j] - p.b * lam * s.ut[j] - p.c * p.c * lam * s.u[j] - 2.0 * p.eta * ut_sq[j]) /
            p.tau;
        CHECK(std::abs(d.dutt[j] - expect) < 1e-10);
    }
}

TEST_CASE("rhs requires tau > 0") {
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {2});
    CHECK_THROWS_AS(rhs(make(0.0, 1.0, 1.0), basis, zero_state(basis), {}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("exponential-imex reproduces the analytic linear solution per mode") {
    const PhysicalParams p = make(1.0, 1.0, 2.0);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {1});
    SolverConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 10.0;
    auto traj = simulate_ivp(p, basis, {1.0}, {0.0}, std::nullopt, {}, cfg);
    REQUIRE(traj.termination == Termination::Completed);

    const auto roots = characteristic_roots(p, basis.lambda(0));
    // u2 defaults to the consistent value -c^2 lam u0 - b lam u1 = -1
    oracles::AnalyticMode exact(p, basis.lambda(0), 1.0, 0.0, -1.0, roots);
    CHECK(max_u_error(traj, exact) < 1e-10);
}

TEST_CASE("zero data and zero forcing stay exactly zero") {
    const PhysicalParams p = make(0.5, 1.0, 1.0, 1.0);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {4});
    SolverConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 1.0;
    auto traj = simulate_ivp(p, basis, std::vector<double>(4, 0.0), std::vector<double>(4, 0.0),
                             std::nullopt, {}, cfg);
    REQUIRE(traj.termination == Termination::Completed);
    for (const auto& s : traj.states)
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(s.u[j] == 0.0);
            CHECK(s.ut[j] == 0.0);
            CHECK(s.utt[j] == 0.0);
        }
}

TEST_CASE("rk4 and exponential-imex converge to each other at their orders") {
    const PhysicalParams p = make(1.0, 1.0, 2.0, 0.6);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {4});
    std::vector<double> u0(4, 0.0), u1(4, 0.0);
    u0[0] = 0.2;
    u0[1] = 0.1;

    auto run = [&](Scheme scheme, double dt) {
        SolverConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 1.0;
        cfg.scheme = scheme;
        return simulate_ivp(p, basis, u0, u1, std::nullopt, {}, cfg);
    };
    // fine rk4 reference
    const auto ref = run(Scheme::Rk4Explicit, 1.0 / 4096.0);
    auto err_at_end = [&](const Trajectory& traj) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            const double d = traj.states.back().u[j] - ref.states.back().u[j];
            acc += d * d;
        }
        return std::sqrt(acc);
    };

    SUBCASE("rk4 observed order >= 3.8 (three-level Richardson)") {
        const double e1 = err_at_end(run(Scheme::Rk4Explicit, 1.0 / 64.0));
        const double e2 = err_at_end(run(Scheme::Rk4Explicit, 1.0 / 128.0));
        const double e3 = err_at_end(run(Scheme::Rk4Explicit, 1.0 / 256.0));
        CHECK(std::log2(e1 / e2) > 3.8);
        CHECK(std::log2(e2 / e3) > 3.8);
    }

    SUBCASE("exponential-imex observed order >= 1.9") {
        const double e1 = err_at_end(run(Scheme::ExponentialImex, 1.0 / 64.0));
        const double e2 = err_at_end(run(Scheme::ExponentialImex, 1.0 / 128.0));
        const double e3 = err_at_end(run(Scheme::ExponentialImex, 1.0 / 256.0));
        CHECK(std::log2(e1 / e2) > 1.9);
        CHECK(std::log2(e2 / e3) > 1.9);
    }

    SUBCASE("schemes agree on the trajectory to integrator accuracy") {
        const auto a = run(Scheme::ExponentialImex, 1.0 / 512.0);
        const auto b = run(Scheme::Rk4Explicit, 1.0 / 512.0);
        double diff = 0.0;
        for (std::size_t j = 0; j < 4; ++j)
            diff = std::max(diff, std::abs(a.states.back().u[j] - b.states.back().u[j]));
        CHECK(diff < 1e-7);
    }
}

TEST_CASE("rk4 rejects a dt above the linear stability bound") {
    const PhysicalParams p = make(0.01, 1.0, 0.5);  // stiff: fast root ~ -1/tau
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {8});
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 1.0;
    cfg.scheme = Scheme::Rk4Explicit;
    CHECK_THROWS_AS(
        simulate_ivp(p, basis, std::vector<double>(8, 0.1), std::vector<double>(8, 0.0),
                     std::nullopt, {}, cfg),
        std::invalid_argument);
}

TEST_CASE("dissipative linear runs keep E(t) <= C0 E(0) over [0, 50] and decay") {
    const PhysicalParams p = make(0.5, 1.0, 1.0);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {8});
    std::vector<double> u0(8), u1(8, 0.0);
    for (int j = 0; j < 8; ++j) u0[j] = 0.3 / ((j + 1) * (j + 1));
    SolverConfig cfg;
    cfg.dt = 0.02;
    cfg.t_end = 50.0;
    auto traj = simulate_ivp(p, basis, u0, u1, std::nullopt, {}, cfg);
    REQUIRE(traj.termination == Termination::Completed);
    auto trace = energy_trace(p, basis, traj);
    const double e0 = trace.energy.front();
    double sup = 0.0;
    for (double e : trace.energy) sup = std::max(sup, e);
    CHECK(sup <= 1.5 * e0);                      // t-independent envelope constant
    CHECK(trace.energy.back() < 1e-6 * e0);      // and actual decay over [0, 50]
}

TEST_CASE("non-finite states signal step-failure") {
    const PhysicalParams p = make(0.5, 1.0, 1.0);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {2});
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    std::vector<double> u0 = {std::numeric_limits<double>::quiet_NaN(), 0.0}, u1(2, 0.0),
                        u2(2, 0.0);
    auto traj = simulate_ivp(p, basis, u0, u1, u2, {}, cfg);
    CHECK(traj.termination == Termination::StepFailure);
    CHECK(traj.states.size() == 1);  // only the initial sample is kept
}

TEST_CASE("large data aligned with the first eigenfunction blows up; small data does not") {
    const PhysicalParams p = make(0.5, 1.0, 1.0, 1.0);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {8});
    SolverConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_end = 20.0;
    cfg.blowup_linf_threshold = 1e4;

    std::vector<double> big(8, 0.0), small(8, 0.0), u1(8, 0.0);
    big[0] = 4.0;
    small[0] = 0.25;

    auto btraj = simulate_ivp(p, basis, big, u1, std::nullopt, {}, cfg);
    CHECK(btraj.termination == Termination::BlowupDetected);
    CHECK(btraj.times.back() < 20.0);
    CHECK(basis.linf(btraj.states.back().u) > 1e4);

    auto straj = simulate_ivp(p, basis, small, u1, std::nullopt, {}, cfg);
    CHECK(straj.termination == Termination::Completed);
}

TEST_CASE("default third datum solves the tau = 0 relation at t = 0") {
    const PhysicalParams p = make(1.0, 1.2, 2.0);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {3});
    std::vector<double> u0 = {0.5, -0.2, 0.1}, u1 = {0.0, 0.3, 0.0};
    SolverConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 0.1;
    auto traj = simulate_ivp(p, basis, u0, u1, std::nullopt, {}, cfg);
    for (std::size_t j = 0; j < 3; ++j) {
        const double lam = basis.lambda(j);
        CHECK(traj.states[0].utt[j] ==
              doctest::Approx(-p.c * p.c * lam * u0[j] - p.b * lam * u1[j]).epsilon(1e-12));
    }
}

TEST_CASE("tau = 0 Westervelt path") {
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {4});

    SUBCASE("eta = 0 single mode matches the 2x2 matrix-exponential oracle") {
        const PhysicalParams p = make(0.0, 1.0, 0.5);
        SolverConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_end = 5.0;
        std::vector<double> u0(4, 0.0), u1(4, 0.0);
        u0[1] = 1.0;
        auto traj = simulate_westervelt_tau0(p, basis, u0, u1, {}, cfg);
        REQUIRE(traj.termination == Termination::Completed);
        oracles::AnalyticMode2 exact(p, basis.lambda(1), 1.0, 0.0);
        double err = 0.0;
        for (std::size_t k = 0; k < traj.times.size(); ++k)
            err = std::max(err, std::abs(traj.states[k].u[1] - exact.u(traj.times[k])));
        CHECK(err < 1e-10);
    }

    SUBCASE("zero data stays zero") {
        const PhysicalParams p = make(0.0, 1.0, 0.5, 1.0);
        SolverConfig cfg;
        cfg.dt = 1e-2;
        cfg.t_end = 1.0;
        auto traj = simulate_westervelt_tau0(p, basis, std::vector<double>(4, 0.0),
                                             std::vector<double>(4, 0.0), {}, cfg);
        for (const auto& s : traj.states)
            for (double v : s.u) CHECK(v == 0.0);
    }

    SUBCASE("utt is the derived consistent value along the run") {
        const PhysicalParams p = make(0.0, 1.0, 0.5, 0.4);
        SolverConfig cfg;
        cfg.dt = 1e-2;
        cfg.t_end = 0.5;
        std::vector<double> u0(4, 0.0), u1(4, 0.0);
        u0[0] = 0.1;
        auto traj = simulate_westervelt_tau0(p, basis, u0, u1, {}, cfg);
        const auto& s = traj.states.back();
        const auto expect = consistent_utt(p, basis, s.u, s.ut, {}, s.t);
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(s.utt[j] == doctest::Approx(expect[j]).epsilon(1e-12));
    }

    SUBCASE("simulate_ivp routes tau = 0 to this path and rejects u2") {
        const PhysicalParams p = make(0.0, 1.0, 0.5);
        SolverConfig cfg;
        cfg.dt = 1e-2;
        cfg.t_end = 0.2;
        std::vector<double> u0(4, 0.0), u1(4, 0.0);
        auto traj = simulate_ivp(p, basis, u0, u1, std::nullopt, {}, cfg);
        CHECK(traj.termination == Termination::Completed);
        CHECK_THROWS_AS(
            simulate_ivp(p, basis, u0, u1, std::vector<double>(4, 0.0), {}, cfg),
            std::invalid_argument);
    }

    SUBCASE("loss of non-degeneracy terminates distinctly from blow-up") {
        const PhysicalParams p = make(0.0, 1.0, 0.5, 1.0);
        SolverConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_end = 5.0;
        std::vector<double> u0(4, 0.0), u1(4, 0.0);
        u0[0] = -0.55;
        u1[0] = -0.8;
        auto traj = simulate_westervelt_tau0(p, basis, u0, u1, {}, cfg);
        CHECK(traj.termination == Termination::DegeneracyLoss);
        CHECK(traj.times.back() < 5.0);
    }

    SUBCASE("degenerate data at t = 0 is rejected up front") {
        const PhysicalParams p = make(0.0, 1.0, 0.5, 1.0);
        std::vector<double> u0(4, 0.0);
        u0[0] = -0.7;  // 1 + 2 eta u < 0 near the antinode
        CHECK_THROWS_AS(consistent_utt(p, basis, u0, std::vector<double>(4, 0.0), {}, 0.0),
                        DegeneracyError);
    }
}

TEST_CASE("periodic steady state") {
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {4});

    SUBCASE("zero forcing converges immediately to the zero state") {
        const PhysicalParams p = make(0.3, 1.0, 0.8);
        SolverConfig cfg;
        cfg.dt = 1e-2;
        auto res = periodic_steady_state(p, basis, {}, cfg, 1e-12, 10);
        CHECK(res.converged);
        CHECK(res.defect == 0.0);
        for (const auto& s : res.period.states)
            for (double v : s.u) CHECK(v == 0.0);
    }

    SUBCASE("delta <= 0 is refused") {
        const PhysicalParams p = make(0.5, 1.0, 0.5);
        CHECK_THROWS_AS(periodic_steady_state(p, basis, {}, SolverConfig{}), std::invalid_argument);
    }

    SUBCASE("single-frequency forcing reaches a periodic state with a small defect") {
        const PhysicalParams p = make(0.3, 1.0, 0.8, 0.0);
        ForcingSpec f;
        f.kind = ForcingKind::ModalHarmonic;
        f.omega = 0.9;
        f.amplitude.assign(4, 0.0);
        f.amplitude[0] = 0.05;
        SolverConfig cfg;
        cfg.dt = 2.0 * kPi / 0.9 / 256.0;
        auto res = periodic_steady_state(p, basis, f, cfg, 1e-10, 200);
        CHECK(res.converged);
        CHECK(res.defect < 1e-10);
        CHECK(res.period.states.size() == 256);
        // one-period span, half open
        CHECK(res.period.times.back() - res.period.times.front() ==
              doctest::Approx(2.0 * kPi / 0.9 * 255.0 / 256.0));
    }

    SUBCASE("non-convergence fails explicitly") {
        const PhysicalParams p = make(0.3, 1.0, 0.8);
        ForcingSpec f;
        f.kind = ForcingKind::ModalHarmonic;
        f.omega = 0.9;
        f.amplitude.assign(4, 0.0);
        f.amplitude[0] = 0.05;
        SolverConfig cfg;
        cfg.dt = 2.0 * kPi / 0.9 / 64.0;
        CHECK_THROWS_AS(periodic_steady_state(p, basis, f, cfg, 1e-12, 2), std::runtime_error);
    }
}

TEST_CASE("sample stride records every k-th state") {
    const PhysicalParams p = make(0.5, 1.0, 1.0);
    auto basis = build_basis(BasisKind::DirichletInterval, {kPi}, {2});
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    cfg.sample_stride = 10;
    auto traj = simulate_ivp(p, basis, {0.1, 0.0}, {0.0, 0.0}, std::nullopt, {}, cfg);
    CHECK(traj.times.size() == 11);
    CHECK(traj.times[1] - traj.times[0] == doctest::Approx(0.1));
    CHECK(traj.sample_dt == doctest::Approx(0.1));
}
