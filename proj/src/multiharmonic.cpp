#include "jmgt/multiharmonic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace jmgt {

namespace {

// complex pointwise product of two modal fields, projected back to modes
std::vector<std::complex<double>> complex_product(const SpectralBasis& basis,
                                                  const std::vector<std::complex<double>>& a,
                                                  const std::vector<std::complex<double>>& b,
                                                  bool dealias) {
    const std::size_t n = basis.n_modes();
    std::vector<double> ar(n), ai(n), br(n), bi(n);
    for (std::size_t j = 0; j < n; ++j) {
        ar[j] = a[j].real();
        ai[j] = a[j].imag();
        br[j] = b[j].real();
        bi[j] = b[j].imag();
    }
    const std::vector<double> gar = basis.to_physical(ar, dealias);
    const std::vector<double> gai = basis.to_physical(ai, dealias);
    const std::vector<double> gbr = basis.to_physical(br, dealias);
    const std::vector<double> gbi = basis.to_physical(bi, dealias);
    std::vector<double> pr(gar.size()), pi(gar.size());
    for (std::size_t i = 0; i < gar.size(); ++i) {
        pr[i] = gar[i] * gbr[i] - gai[i] * gbi[i];
        pi[i] = gar[i] * gbi[i] + gai[i] * gbr[i];
    }
    const std::vector<double> cr = basis.from_physical(pr, dealias);
    const std::vector<double> ci = basis.from_physical(pi, dealias);
    std::vector<std::complex<double>> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = {cr[j], ci[j]};
    return out;
}

std::vector<std::complex<double>> row(const HarmonicField& f, int m) {
    std::vector<std::complex<double>> out(f.n_modes);
    for (std::size_t j = 0; j < f.n_modes; ++j) out[j] = f.at(m, j);
    return out;
}

double h1_change(const HarmonicField& a, const HarmonicField& b, const SpectralBasis& basis) {
    double acc = 0.0;
    for (int m = 1; m <= a.order; ++m)
        for (std::size_t j = 0; j < a.n_modes; ++j) {
            const double d = std::abs(a.at(m, j) - b.at(m, j));
            acc += basis.lambda(j) * d * d;
        }
    return std::sqrt(acc);
}

}  // namespace

HarmonicField HarmonicField::zeros(double omega, int order, std::size_t n_modes) {
    HarmonicField f;
    f.omega = omega;
    f.order = order;
    f.n_modes = n_modes;
    f.coeffs.assign(static_cast<std::size_t>(order) * n_modes, {0.0, 0.0});
    return f;
}

std::complex<double> helmholtz_symbol(const PhysicalParams& params, int m, double omega,
                                      double lambda) {
    if (m < 1) throw std::invalid_argument("helmholtz_symbol: m must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("helmholtz_symbol: lambda must be positive");
    const double mw = m * omega;
    const double re = params.c * params.c * lambda - mw * mw;
    const double im = params.b * mw * lambda - params.tau * mw * mw * mw;
    return {re, im};
}

std::vector<std::complex<double>> convolution_rhs(const HarmonicField& field,
                                                  const SpectralBasis& basis, double eta, int m,
                                                  bool dealias) {
    if (m < 1 || m > field.order)
        throw std::invalid_argument("convolution_rhs: m out of range 1..M");
    const std::size_t n = field.n_modes;
    std::vector<std::complex<double>> acc(n, {0.0, 0.0});
    if (eta == 0.0) return acc;

    for (int l = 1; l <= m - 1; ++l) {
        const auto p = complex_product(basis, row(field, l), row(field, m - l), dealias);
        for (std::size_t j = 0; j < n; ++j) acc[j] += p[j];
    }
    for (int k = 1; k + m <= field.order; ++k) {
        std::vector<std::complex<double>> conj_k = row(field, k);
        for (auto& v : conj_k) v = std::conj(v);
        const auto p = complex_product(basis, row(field, k + m), conj_k, dealias);
        for (std::size_t j = 0; j < n; ++j) acc[j] += 2.0 * p[j];
    }
    const double mw2 = static_cast<double>(m) * field.omega * static_cast<double>(m) * field.omega;
    for (auto& v : acc) v *= 0.5 * eta * mw2;
    return acc;
}

FixedPointResult solve_fixed_point(const PhysicalParams& params, const SpectralBasis& basis,
                                   const HarmonicField& source, const FixedPointOptions& opts) {
    params.validate();
    if (!(params.delta() > 0.0))
        throw std::invalid_argument("solve_fixed_point: requires delta = b - tau c^2 > 0");
    if (source.order < 1) throw std::invalid_argument("solve_fixed_point: order must be >= 1");
    if (source.n_modes != basis.n_modes())
        throw std::invalid_argument("solve_fixed_point: source does not match basis");
    if (!(source.omega > 0.0)) throw std::invalid_argument("solve_fixed_point: omega must be positive");

    const int order = source.order;
    const std::size_t n = basis.n_modes();
    const double omega = source.omega;

    std::vector<std::complex<double>> symbol(static_cast<std::size_t>(order) * n);
    for (int m = 1; m <= order; ++m)
        for (std::size_t j = 0; j < n; ++j) {
            const std::complex<double> s = helmholtz_symbol(params, m, omega, basis.lambda(j));
            if (std::abs(s) < 1e-12)
                throw std::runtime_error("solve_fixed_point: near-singular symbol at (m = " +
                                         std::to_string(m) + ", j = " + std::to_string(j) + ")");
            symbol[(m - 1) * n + j] = s;
        }

    FixedPointResult result;
    result.field = HarmonicField::zeros(omega, order, n);
    // eta = 0 decouples the system: the map is an exact solve, relaxation
    // would only slow the single required iteration
    double alpha = params.eta == 0.0 ? 1.0 : opts.relaxation;
    double prev_residual = -1.0;
    int growth_streak = 0;
    HarmonicField last_finite = result.field;

    for (int it = 1; it <= opts.max_iterations; ++it) {
        // full right-hand side at the current iterate, and its residual
        HarmonicField target = HarmonicField::zeros(omega, order, n);
        double res_acc = 0.0;
        for (int m = 1; m <= order; ++m) {
            const std::vector<std::complex<double>> conv =
                convolution_rhs(result.field, basis, params.eta, m, opts.dealias);
            const double mw2 = static_cast<double>(m) * omega * static_cast<double>(m) * omega;
            for (std::size_t j = 0; j < n; ++j) {
                const std::complex<double> rhs = conv[j] + mw2 * source.at(m, j);
                target.at(m, j) = rhs / symbol[(m - 1) * n + j];
                const std::complex<double> res = symbol[(m - 1) * n + j] * result.field.at(m, j) - rhs;
                res_acc += basis.lambda(j) * std::norm(res);
            }
        }
        const double residual = std::sqrt(res_acc);
        result.report.residual_history.push_back(residual);
        result.report.iterations = it;

        if (!std::isfinite(residual)) {
            // iterate went non-finite: fail explicitly with the last finite one
            result.field = last_finite;
            result.report.converged = false;
            result.report.final_residual = prev_residual >= 0.0 ? prev_residual : residual;
            return result;
        }
        last_finite = result.field;

        if (prev_residual >= 0.0 && residual > prev_residual) {
            alpha = std::max(0.5 * alpha, 1e-3);
            if (++growth_streak >= 10) {
                result.report.converged = false;
                result.report.final_residual = residual;
                return result;
            }
        } else {
            growth_streak = 0;
        }
        prev_residual = residual;

        HarmonicField next = result.field;
        for (int m = 1; m <= order; ++m)
            for (std::size_t j = 0; j < n; ++j)
                next.at(m, j) = (1.0 - alpha) * result.field.at(m, j) + alpha * target.at(m, j);
        const double change = h1_change(next, result.field, basis);
        result.field = std::move(next);
        if (change < opts.tol) {
            result.report.converged = true;
            break;
        }
    }

    // residual of the returned iterate
    double res_acc = 0.0;
    for (int m = 1; m <= order; ++m) {
        const std::vector<std::complex<double>> conv =
            convolution_rhs(result.field, basis, params.eta, m, opts.dealias);
        const double mw2 = static_cast<double>(m) * omega * static_cast<double>(m) * omega;
        for (std::size_t j = 0; j < n; ++j) {
            const std::complex<double> res = symbol[(m - 1) * n + j] * result.field.at(m, j) -
                                             conv[j] - mw2 * source.at(m, j);
            res_acc += basis.lambda(j) * std::norm(res);
        }
    }
    result.report.final_residual = std::sqrt(res_acc);
    return result;
}

HarmonicField harmonic_source(const ForcingSpec& forcing, int order, std::size_t n_modes) {
    if (forcing.kind != ForcingKind::ModalHarmonic)
        throw std::invalid_argument("harmonic_source: forcing must be modal-harmonic");
    forcing.validate(n_modes);
    HarmonicField f = HarmonicField::zeros(forcing.omega, order, n_modes);
    for (std::size_t j = 0; j < n_modes; ++j) f.at(1, j) = forcing.amplitude[j];
    return f;
}

HarmonicField harmonic_spectrum(const Trajectory& period, const SpectralBasis& basis, int order,
                                double omega) {
    if (order < 1) throw std::invalid_argument("harmonic_spectrum: order must be >= 1");
    const std::size_t nt = period.states.size();
    if (nt < static_cast<std::size_t>(4 * order))
        throw std::invalid_argument("harmonic_spectrum: sample count < 4 M (aliasing guard)");
    const double h = period.times[1] - period.times[0];
    for (std::size_t k = 1; k < nt; ++k)
        if (std::abs(period.times[k] - period.times[k - 1] - h) > 1e-9 * std::max(h, 1.0))
            throw std::invalid_argument("harmonic_spectrum: non-uniform sampling");
    const double span = nt * h;
    const double T = 2.0 * std::numbers::pi / omega;
    if (std::abs(span - T) > 1e-6 * T)
        throw std::invalid_argument("harmonic_spectrum: samples do not span one period");

    const std::size_t n = basis.n_modes();
    HarmonicField f = HarmonicField::zeros(omega, order, n);
    for (int m = 1; m <= order; ++m) {
        for (std::size_t k = 0; k < nt; ++k) {
            const std::complex<double> w = std::exp(std::complex<double>(0.0, -m * omega * period.times[k]));
            for (std::size_t j = 0; j < n; ++j) f.at(m, j) += period.states[k].u[j] * w;
        }
        for (std::size_t j = 0; j < n; ++j) f.at(m, j) *= 2.0 / static_cast<double>(nt);
    }
    return f;
}

std::vector<double> evaluate_harmonics(const HarmonicField& field, double t) {
    std::vector<double> out(field.n_modes, 0.0);
    for (int m = 1; m <= field.order; ++m) {
        const std::complex<double> w = std::exp(std::complex<double>(0.0, m * field.omega * t));
        for (std::size_t j = 0; j < field.n_modes; ++j) out[j] += (field.at(m, j) * w).real();
    }
    return out;
}

double harmonic_h1_norm(const HarmonicField& field, const SpectralBasis& basis, int m) {
    double acc = 0.0;
    for (std::size_t j = 0; j < field.n_modes; ++j)
        acc += basis.lambda(j) * std::norm(field.at(m, j));
    return std::sqrt(acc);
}

}  // namespace jmgt
