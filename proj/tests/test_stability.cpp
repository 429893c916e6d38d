#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "jmgt/stability.hpp"
#include "oracles.hpp"

using namespace jmgt;
using oracles::cplx;

namespace {

PhysicalParams make(double tau, double c, double b, double eta = 0.0) {
    PhysicalParams p;
    p.tau = tau;
    p.c = c;
    p.b = b;
    p.eta = eta;
    return p;
}

}  // namespace

TEST_CASE("hurwitz minors closed forms") {
    auto m = hurwitz_minors(make(1.0, 1.0, 2.0), 1.0);
    CHECK(m[0] == 1.0);
    CHECK(m[1] == doctest::Approx(1.0));
    CHECK(m[2] == doctest::Approx(1.0));

    auto m0 = hurwitz_minors(make(0.3, 2.0, 1.0), 0.0);
    CHECK(m0[0] == 1.0);
    CHECK(m0[1] == 0.0);
    CHECK(m0[2] == 0.0);

    // delta = 1 - 1*4 = -3: m2 = -9, m3 = c^2 zeta m2 = -108
    auto mneg = hurwitz_minors(make(1.0, 2.0, 1.0), 3.0);
    CHECK(mneg[1] == doctest::Approx(-9.0));
    CHECK(mneg[2] == doctest::Approx(-108.0));
    // cross-check the sign against the root finder: negative minors <-> a
    // root in the right half plane
    auto roots = characteristic_roots(make(1.0, 2.0, 1.0), 3.0);
    CHECK(roots[0].real() > 0.0);
}

TEST_CASE("hurwitz minors reject tau = 0 and negative zeta") {
    CHECK_THROWS_AS(hurwitz_minors(make(0.0, 1.0, 1.0), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(hurwitz_minors(make(1.0, 1.0, 1.0), -1.0), std::invalid_argument);
}

TEST_CASE("characteristic roots on closed-form cases") {
    SUBCASE("zeta = 0 factors as s^2 (tau s + 1)") {
        auto r = characteristic_roots(make(1.0, 1.0, 1.0), 0.0);
        CHECK(std::abs(r[0]) < 1e-10);
        CHECK(std::abs(r[1]) < 1e-10);
        CHECK(std::abs(r[2] - cplx(-1.0, 0.0)) < 1e-10);
    }

    SUBCASE("delta = 0 factors as (s + 1)(s^2 + 1)") {
        auto r = characteristic_roots(make(1.0, 1.0, 1.0), 1.0);
        // polynomial-multiplication oracle: expand (s - r0)(s - r1)(s - r2)
        // and compare against s^3 + s^2 + s + 1
        const cplx e2 = -(r[0] + r[1] + r[2]);
        const cplx e1 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        const cplx e0 = -r[0] * r[1] * r[2];
        CHECK(std::abs(e2 - 1.0) < 1e-10);
        CHECK(std::abs(e1 - 1.0) < 1e-10);
        CHECK(std::abs(e0 - 1.0) < 1e-10);
        // conjugate pure-imaginary pair present
        CHECK(std::abs(r[0].real()) < 1e-11);
        CHECK(std::abs(r[1].real()) < 1e-11);
        CHECK(r[0].imag() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(r[1].imag() == doctest::Approx(-1.0).epsilon(1e-10));
        CHECK(std::abs(r[2] - cplx(-1.0, 0.0)) < 1e-10);
    }

    SUBCASE("dissipative case has all real parts negative (eigenvalue oracle)") {
        const PhysicalParams p = make(1.0, 1.0, 2.0);
        auto r = characteristic_roots(p, 1.0);
        for (const auto& root : r) CHECK(root.real() < 0.0);
        // independent oracle: Durand-Kerner on the same cubic
        auto dk = oracles::durand_kerner_cubic(p.tau, 1.0, p.b, p.c * p.c);
        for (const auto& root : r) {
            double best = 1e9;
            for (const auto& ref : dk) best = std::min(best, std::abs(root - ref));
            CHECK(best < 1e-8);
        }
    }

    SUBCASE("sorted by real part descending") {
        auto r = characteristic_roots(make(0.5, 1.2, 2.0), 7.0);
        CHECK(r[0].real() >= r[1].real());
        CHECK(r[1].real() >= r[2].real());
    }
}

TEST_CASE("root residual stays below 1e-10 of the coefficient scale") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> utau(1e-3, 1.0), uc(0.5, 4.0), ub(0.0, 5.0),
        uz(1e-6, 100.0);
    for (int rep = 0; rep < 500; ++rep) {
        const PhysicalParams p = make(utau(rng), uc(rng), ub(rng));
        const double zeta = uz(rng);
        const double maxcoef =
            std::max({p.tau, 1.0, p.b * zeta, p.c * p.c * zeta});
        for (const auto& s : characteristic_roots(p, zeta)) {
            const cplx val = ((p.tau * s + 1.0) * s + p.b * zeta) * s + p.c * p.c * zeta;
            CHECK(std::abs(val) < 1e-10 * maxcoef * std::max(1.0, std::abs(s) * std::abs(s)));
        }
    }
}

TEST_CASE("Cardano closed form agrees with the companion route") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> utau(1e-2, 1.0), uc(0.5, 3.0), ub(0.1, 4.0),
        uz(0.1, 50.0);
    for (int rep = 0; rep < 200; ++rep) {
        const PhysicalParams p = make(utau(rng), uc(rng), ub(rng));
        const double zeta = uz(rng);
        auto lib = characteristic_roots(p, zeta);
        auto card = oracles::cardano_cubic(p.tau, 1.0, p.b * zeta, p.c * p.c * zeta);
        for (const auto& root : lib) {
            double best = 1e9;
            for (const auto& ref : card) best = std::min(best, std::abs(root - ref));
            CHECK(best < 1e-7 * std::max(1.0, std::abs(root)));
        }
    }
}

TEST_CASE("regime classification matches the sign of delta") {
    auto lambdas = std::vector<double>{1.0, 4.0, 9.0, 16.0};

    SUBCASE("delta > 0: stable everywhere") {
        auto rep = classify_regime(make(0.5, 1.0, 1.0), lambdas);
        CHECK(rep.verdict == Regime::Stable);
        for (const auto& m : rep.modes) CHECK(m.regime == Regime::Stable);
    }
    SUBCASE("delta = 0: marginal with a pure-imaginary pair") {
        auto rep = classify_regime(make(0.5, 1.0, 0.5), lambdas);
        CHECK(rep.verdict == Regime::Marginal);
        for (const auto& m : rep.modes) {
            CHECK(m.regime == Regime::Marginal);
            CHECK(std::abs(m.roots[0].real()) < 1e-9);
            CHECK(std::abs(m.roots[0].imag()) > 0.1);
        }
    }
    SUBCASE("delta < 0: unstable verdict") {
        auto rep = classify_regime(make(0.5, 2.0, 0.5), lambdas);
        CHECK(rep.verdict == Regime::Unstable);
    }
    SUBCASE("zeta = 0 mode does not poison the verdict") {
        auto rep = classify_regime(make(0.5, 1.0, 1.0), {0.0, 1.0, 4.0});
        CHECK(rep.modes[0].regime == Regime::Marginal);
        CHECK(rep.verdict == Regime::Stable);
    }
    SUBCASE("empty zeta set rejected") {
        CHECK_THROWS_AS(classify_regime(make(0.5, 1.0, 1.0), {}), std::invalid_argument);
    }
}

TEST_CASE("low frequency decay factor") {
    CHECK(low_frequency_decay_factor(0.0) == 0.0);
    CHECK(low_frequency_decay_factor(1.0) == doctest::Approx(0.5));
    CHECK(low_frequency_decay_factor(3.0) == doctest::Approx(0.9));
    CHECK_THROWS_AS(low_frequency_decay_factor(-1.0), std::invalid_argument);
    // monotone increasing toward 1
    double prev = -1.0;
    for (double x = 0.0; x < 50.0; x += 0.5) {
        const double v = low_frequency_decay_factor(x);
        CHECK(v >= prev);
        CHECK(v < 1.0);
        prev = v;
    }
}

TEST_CASE("Routh-Hurwitz / eigenvalue agreement over 1000 seeded draws") {
    std::mt19937_64 rng(20240801);
    std::uniform_real_distribution<double> utau(1e-3, 1.0), uc(0.5, 4.0), ub(0.0, 5.0),
        uz(1e-9, 100.0);
    int tested = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const PhysicalParams p = make(utau(rng), uc(rng), ub(rng));
        const double zeta = uz(rng);
        const auto minors = hurwitz_minors(p, zeta);
        const auto roots = characteristic_roots(p, zeta);
        const double absc = roots[0].real();
        if (std::abs(absc) <= 1e-9) continue;  // boundary band excluded
        const bool minors_pos = minors[0] > 0.0 && minors[1] > 0.0 && minors[2] > 0.0;
        CHECK(minors_pos == (absc < 0.0));
        ++tested;
    }
    CHECK(tested > 950);
}

TEST_CASE("spectral abscissa is continuous in zeta") {
    const PhysicalParams p = make(0.4, 1.3, 0.9);
    const double zmax = 50.0;
    const int n = 2000;
    std::vector<double> absc(n + 1);
    for (int i = 0; i <= n; ++i)
        absc[i] = characteristic_roots(p, zmax * i / n)[0].real();
    for (int i = 1; i + 1 < n; ++i) {
        const double jump = std::abs(absc[i + 1] - absc[i]);
        const double neighbor =
            std::abs(absc[i] - absc[i - 1]) + std::abs(absc[i + 2] - absc[i + 1]);
        CHECK(jump <= 10.0 * neighbor + 1e-9);
    }
}

TEST_CASE("verdict transitions exactly once as b crosses tau c^2") {
    const double tau = 0.5, c = 1.3, zeta = 2.0;
    const double bcrit = tau * c * c;
    std::vector<double> bs;
    for (int i = 0; i <= 400; ++i) bs.push_back(bcrit * (0.5 + i * (1.0 / 400.0)));
    bs.push_back(bcrit);  // the exact critical point
    std::sort(bs.begin(), bs.end());
    std::vector<Regime> seq;
    for (double b : bs) seq.push_back(analyze_mode(make(tau, c, b), zeta).regime);
    int um = 0, ms = 0;
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i - 1] == Regime::Unstable && seq[i] == Regime::Marginal) ++um;
        if (seq[i - 1] == Regime::Marginal && seq[i] == Regime::Stable) ++ms;
        // never skip marginal or go backwards
        CHECK(!(seq[i - 1] == Regime::Unstable && seq[i] == Regime::Stable));
        CHECK(!(seq[i - 1] == Regime::Stable && seq[i] != Regime::Stable));
        CHECK(!(seq[i - 1] == Regime::Marginal && seq[i] == Regime::Unstable));
    }
    CHECK(um == 1);
    CHECK(ms == 1);
}
