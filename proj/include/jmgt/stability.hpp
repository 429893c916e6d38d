#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "jmgt/params.hpp"

namespace jmgt {

enum class Regime { Stable, Marginal, Unstable };

std::string to_string(Regime r);

constexpr double kMarginalTol = 1e-9;  ///< |abscissa| band treated as marginal [1/s]

/// Per-mode analysis of tau*s^3 + s^2 + b*zeta*s + c^2*zeta = 0.
struct ModeAnalysis {
    double zeta = 0.0;
    std::array<double, 3> minors{0.0, 0.0, 0.0};
    std::array<std::complex<double>, 3> roots{};  ///< sorted by real part, descending
    double abscissa = 0.0;
    Regime regime = Regime::Marginal;
};

/// Principal Hurwitz minors: m1 = 1, m2 = (b - tau c^2) zeta, m3 = c^2 zeta m2.
/// Requires tau > 0 (the criterion addresses the cubic).
std::array<double, 3> hurwitz_minors(const PhysicalParams& params, double zeta);

/// Roots of tau*s^3 + s^2 + b*zeta*s + c^2*zeta, sorted by real part
/// descending. Companion-matrix eigenvalues refined by one Newton step.
std::array<std::complex<double>, 3> characteristic_roots(const PhysicalParams& params, double zeta);

ModeAnalysis analyze_mode(const PhysicalParams& params, double zeta, double tol = kMarginalTol);

struct RegimeReport {
    std::vector<ModeAnalysis> modes;
    Regime verdict = Regime::Stable;  ///< worst regime over modes with zeta > 0
};

RegimeReport classify_regime(const PhysicalParams& params, const std::vector<double>& zetas,
                             double tol = kMarginalTol);

/// |xi|^2 / (|xi|^2 + 1): the frequency-dependent factor in the Cauchy-problem
/// pointwise decay estimate. In [0, 1), monotone, -> 1 as |xi| -> infinity.
double low_frequency_decay_factor(double xi_norm);

}  // namespace jmgt
