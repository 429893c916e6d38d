#include "jmgt/stability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jmgt {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Stable: return "stable";
        case Regime::Marginal: return "marginal";
        case Regime::Unstable: return "unstable";
    }
    return "?";
}

std::array<double, 3> hurwitz_minors(const PhysicalParams& params, double zeta) {
    params.validate();
    if (!(params.tau > 0.0))
        throw std::invalid_argument("hurwitz_minors: tau must be positive (cubic criterion)");
    if (zeta < 0.0) throw std::invalid_argument("hurwitz_minors: zeta must be nonnegative");
    const double m2 = params.delta() * zeta;
    return {1.0, m2, params.c * params.c * zeta * m2};
}

std::array<std::complex<double>, 3> characteristic_roots(const PhysicalParams& params, double zeta) {
    params.validate();
    if (!(params.tau > 0.0))
        throw std::invalid_argument("characteristic_roots: tau must be positive");
    const double tau = params.tau;
    const double c2z = params.c * params.c * zeta;
    const double bz = params.b * zeta;
    // monic form s^3 + a2 s^2 + a1 s + a0
    const double a2 = 1.0 / tau;
    const double a1 = bz / tau;
    const double a0 = c2z / tau;

    Eigen::Matrix3d companion;
    companion << 0.0, 0.0, -a0,
                 1.0, 0.0, -a1,
                 0.0, 1.0, -a2;
    Eigen::EigenSolver<Eigen::Matrix3d> solver(companion, false);

    std::array<std::complex<double>, 3> roots;
    for (int i = 0; i < 3; ++i) roots[i] = solver.eigenvalues()(i);

    // one Newton step on p(s) = tau s^3 + s^2 + b zeta s + c^2 zeta;
    // skipped near critical points of p (double roots).
    const double scale = std::max({tau, 1.0, bz, c2z});
    for (auto& s : roots) {
        const std::complex<double> p = ((tau * s + 1.0) * s + bz) * s + c2z;
        const std::complex<double> dp = (3.0 * tau * s + 2.0) * s + bz;
        if (std::abs(dp) > 1e-8 * scale) s -= p / dp;
    }

    std::sort(roots.begin(), roots.end(), [](const std::complex<double>& x, const std::complex<double>& y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    return roots;
}

ModeAnalysis analyze_mode(const PhysicalParams& params, double zeta, double tol) {
    ModeAnalysis a;
    a.zeta = zeta;
    a.minors = hurwitz_minors(params, zeta);
    a.roots = characteristic_roots(params, zeta);
    a.abscissa = a.roots[0].real();
    if (a.abscissa < -tol)
        a.regime = Regime::Stable;
    else if (a.abscissa <= tol)
        a.regime = Regime::Marginal;
    else
        a.regime = Regime::Unstable;
    return a;
}

RegimeReport classify_regime(const PhysicalParams& params, const std::vector<double>& zetas,
                             double tol) {
    if (zetas.empty()) throw std::invalid_argument("classify_regime: empty zeta set");
    RegimeReport report;
    report.modes.reserve(zetas.size());
    report.verdict = Regime::Stable;
    auto severity = [](Regime r) { return r == Regime::Stable ? 0 : r == Regime::Marginal ? 1 : 2; };
    for (double z : zetas) {
        report.modes.push_back(analyze_mode(params, z, tol));
        const Regime r = report.modes.back().regime;
        if (z > 0.0 && severity(r) > severity(report.verdict)) report.verdict = r;
    }
    return report;
}

double low_frequency_decay_factor(double xi_norm) {
    if (xi_norm < 0.0) throw std::invalid_argument("low_frequency_decay_factor: |xi| must be >= 0");
    const double x2 = xi_norm * xi_norm;
    return x2 / (x2 + 1.0);
}

}  // namespace jmgt
