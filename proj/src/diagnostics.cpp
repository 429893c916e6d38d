#include "jmgt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jmgt {

namespace {

void require_uniform(const std::vector<double>& times, std::size_t min_samples,
                     const char* who) {
    if (times.size() < min_samples)
        throw std::invalid_argument(std::string(who) + ": insufficient samples");
    const double h = times[1] - times[0];
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - times[k - 1] - h) > 1e-9 * std::max(h, 1.0))
            throw std::invalid_argument(std::string(who) + ": non-uniform sampling");
}

// Moments M_p = Int_0^h x^p (1/tau) exp(-(h-x)/tau) dx, p = 0..3.
std::array<double, 4> exp_kernel_moments(double h, double tau) {
    const double theta = h / tau;
    std::array<double, 4> m;
    if (theta >= 0.25) {
        m[0] = -std::expm1(-theta);
        for (int p = 1; p <= 3; ++p) m[p] = std::pow(h, p) - p * tau * m[p - 1];
    } else {
        // series in theta avoids cancellation: m_p/h^p = theta p! sum_k (-theta)^k/(p+k+1)!
        for (int p = 0; p <= 3; ++p) {
            double term = theta / (p + 1);
            double sum = term;
            for (int k = 1; k < 60; ++k) {
                term *= -theta / (p + k + 1.0);
                sum += term;
                if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            }
            m[p] = std::pow(h, p) * sum;
        }
    }
    return m;
}

// (e_tau * y)(t_k) for all k, with y piecewise Hermite from samples and
// derivatives on a uniform grid of spacing h.
std::vector<double> exp_kernel_convolution(const std::vector<double>& y,
                                           const std::vector<double>& yt, double h, double tau) {
    const std::size_t n = y.size();
    std::vector<double> conv(n, 0.0);
    const std::array<double, 4> m = exp_kernel_moments(h, tau);
    const double decay = std::exp(-h / tau);
    for (std::size_t k = 1; k < n; ++k) {
        const double y0 = y[k - 1], y1 = y[k], d0 = yt[k - 1], d1 = yt[k];
        const double c0 = y0;
        const double c1 = d0;
        const double c2 = 3.0 * (y1 - y0) / (h * h) - (2.0 * d0 + d1) / h;
        const double c3 = 2.0 * (y0 - y1) / (h * h * h) + (d0 + d1) / (h * h);
        const double panel = c0 * m[0] + c1 * m[1] + c2 * m[2] + c3 * m[3];
        conv[k] = decay * conv[k - 1] + panel;
    }
    return conv;
}

}  // namespace

EnergyWeights EnergyWeights::defaults(const PhysicalParams& params, const SpectralBasis& basis) {
    EnergyWeights w;
    const double delta = params.delta();
    if (delta > 0.0 && params.b > 0.0) {
        const double s1 = delta / (2.0 * params.b);
        const double s2 = params.tau * delta / (params.c * params.c);
        w.sigma = 1.0 - std::min(s1, s2);
    } else {
        w.sigma = 1.0;
    }
    // rho = min{sigma/(2 tau), delta lambda_min/(4 c^2), sigma lambda_min/4},
    // skipping candidates that are not positive, clipped to (0, 1]
    const double lmin = basis.lambda_min();
    double rho = w.sigma * lmin / 4.0;
    if (params.tau > 0.0) rho = std::min(rho, w.sigma / (2.0 * params.tau));
    if (delta > 0.0) rho = std::min(rho, delta * lmin / (4.0 * params.c * params.c));
    w.rho = std::min(rho, 1.0);
    w.epsilon = 1.0;
    return w;
}

EnergyComponents energy(const PhysicalParams& params, const SpectralBasis& basis,
                        const ModalState& state) {
    const std::size_t n = basis.n_modes();
    if (state.u.size() != n || state.ut.size() != n || state.utt.size() != n)
        throw std::invalid_argument("energy: state length does not match basis");
    EnergyComponents e;
    for (std::size_t j = 0; j < n; ++j) {
        const double lam = basis.lambda(j);
        e.grad_utt += lam * state.utt[j] * state.utt[j];
        e.lap_ut += lam * lam * state.ut[j] * state.ut[j];
        e.grad_ut += lam * state.ut[j] * state.ut[j];
        e.lap_u += lam * lam * state.u[j] * state.u[j];
    }
    e.grad_utt *= params.tau * params.tau;
    e.lap_ut *= params.tau;
    return e;
}

EnergyTrace energy_trace(const PhysicalParams& params, const SpectralBasis& basis,
                         const Trajectory& traj) {
    EnergyTrace tr;
    tr.times = traj.times;
    const std::size_t n = traj.states.size();
    tr.energy.reserve(n);
    for (const ModalState& s : traj.states) {
        const EnergyComponents e = energy(params, basis, s);
        tr.energy.push_back(e.total());
        tr.comp_grad_utt.push_back(e.grad_utt);
        tr.comp_lap_ut.push_back(e.lap_ut);
        tr.comp_grad_ut.push_back(e.grad_ut);
        tr.comp_lap_u.push_back(e.lap_u);
        tr.linf.push_back(basis.linf(s.u));
    }
    return tr;
}

std::vector<double> energy_identity_residual(const PhysicalParams& params,
                                             const SpectralBasis& basis, const Trajectory& traj,
                                             const EnergyWeights& weights,
                                             const ForcingSpec& forcing) {
    require_uniform(traj.times, 3, "energy_identity_residual");
    const std::size_t nt = traj.times.size();
    const std::size_t n = basis.n_modes();
    const double h = traj.times[1] - traj.times[0];
    const double tau = params.tau, c2 = params.c * params.c, b = params.b;
    const double sigma = weights.sigma, rho = weights.rho;

    // per-sample norms, cross inner products, and the identity's right-hand
    // side integrand <f, -Lap(tau u_tt + sigma u_t + rho u)>
    std::vector<double> ngutt(nt), nlut(nt), nlu(nt), ngut(nt);
    std::vector<double> ip_lut_lu(nt), ip_gutt_gut(nt), ip_gutt_gu(nt), ip_gut_gu(nt), rhs_ig(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        const ModalState& s = traj.states[k];
        const std::vector<double> f = f_modal(params, basis, s, forcing, traj.times[k]);
        double a1 = 0, a2 = 0, a3 = 0, a4 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, r = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double lam = basis.lambda(j);
            a1 += lam * s.utt[j] * s.utt[j];
            a2 += lam * lam * s.ut[j] * s.ut[j];
            a3 += lam * lam * s.u[j] * s.u[j];
            a4 += lam * s.ut[j] * s.ut[j];
            b1 += lam * lam * s.ut[j] * s.u[j];
            b2 += lam * s.utt[j] * s.ut[j];
            b3 += lam * s.utt[j] * s.u[j];
            b4 += lam * s.ut[j] * s.u[j];
            r += lam * f[j] * (tau * s.utt[j] + sigma * s.ut[j] + rho * s.u[j]);
        }
        ngutt[k] = a1; nlut[k] = a2; nlu[k] = a3; ngut[k] = a4;
        ip_lut_lu[k] = b1; ip_gutt_gut[k] = b2; ip_gutt_gu[k] = b3; ip_gut_gu[k] = b4;
        rhs_ig[k] = r;
    }

    auto cumtrapz = [&](const std::vector<double>& y) {
        std::vector<double> acc(nt, 0.0);
        for (std::size_t k = 1; k < nt; ++k) acc[k] = acc[k - 1] + 0.5 * h * (y[k - 1] + y[k]);
        return acc;
    };
    const std::vector<double> igutt = cumtrapz(ngutt);
    const std::vector<double> ilut = cumtrapz(nlut);
    const std::vector<double> ilu = cumtrapz(nlu);
    const std::vector<double> igut = cumtrapz(ngut);
    const std::vector<double> irhs = cumtrapz(rhs_ig);

    std::vector<double> residual(nt, 0.0);
    for (std::size_t k = 1; k < nt; ++k) {
        const std::array<double, 12> terms = {
            0.5 * tau * tau * (ngutt[k] - ngutt[0]),
            tau * (1.0 - sigma) * igutt[k],
            0.5 * tau * b * (nlut[k] - nlut[0]),
            (b * sigma - tau * c2) * ilut[k],
            0.5 * (sigma * c2 + b * rho) * (nlu[k] - nlu[0]),
            c2 * rho * ilu[k],
            0.5 * (sigma - tau * rho) * (ngut[k] - ngut[0]),
            -rho * igut[k],
            tau * c2 * (ip_lut_lu[k] - ip_lut_lu[0]),
            tau * sigma * (ip_gutt_gut[k] - ip_gutt_gut[0]),
            tau * rho * (ip_gutt_gu[k] - ip_gutt_gu[0]),
            rho * (ip_gut_gu[k] - ip_gut_gu[0]),
        };
        double lhs = 0.0, scale = std::abs(irhs[k]);
        for (double t : terms) {
            lhs += t;
            scale = std::max(scale, std::abs(t));
        }
        residual[k] = scale > 0.0 ? std::abs(lhs - irhs[k]) / scale : 0.0;
    }
    return residual;
}

DecayFit fit_decay_rate(const EnergyTrace& trace, double t_lo, double t_hi) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double t = trace.times[k];
        if (t < t_lo || t > t_hi) continue;
        if (!(trace.energy[k] > 0.0))
            throw std::invalid_argument("fit_decay_rate: non-positive energy in window");
        const double y = std::log(trace.energy[k]);
        st += t; sy += y; stt += t * t; sty += t * y;
        ++count;
    }
    if (count < 2) throw std::invalid_argument("fit_decay_rate: window contains < 2 samples");
    const double denom = count * stt - st * st;
    if (denom == 0.0) throw std::invalid_argument("fit_decay_rate: degenerate window");
    const double slope = (count * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / count;
    return {-slope, std::exp(intercept)};
}

BlowupDetection detect_blowup(const EnergyTrace& trace, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("detect_blowup: threshold must be positive");
    BlowupDetection det;
    for (std::size_t k = 0; k < trace.linf.size(); ++k) {
        if (trace.linf[k] < threshold) continue;
        det.detected = true;
        det.t_detect = trace.times[k];
        // local slope of log |u|_Linf over the last few samples
        const std::size_t lo = k >= 4 ? k - 4 : 0;
        double st = 0, sy = 0, stt = 0, sty = 0;
        std::size_t cnt = 0;
        for (std::size_t i = lo; i <= k; ++i) {
            if (!(trace.linf[i] > 0.0)) continue;
            const double t = trace.times[i], y = std::log(trace.linf[i]);
            st += t; sy += y; stt += t * t; sty += t * y;
            ++cnt;
        }
        const double denom = cnt * stt - st * st;
        det.growth_exponent = (cnt >= 2 && denom != 0.0) ? (cnt * sty - st * sy) / denom : 0.0;
        return det;
    }
    return det;
}

std::vector<double> z_of_state(const ModalState& state, double tau) {
    std::vector<double> z(state.u.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = tau * state.ut[j] + state.u[j];
    return z;
}

ZTrajectory z_transform(const Trajectory& traj, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("z_transform: tau must be positive");
    ZTrajectory zt;
    zt.times = traj.times;
    zt.z.reserve(traj.states.size());
    zt.zt.reserve(traj.states.size());
    for (const ModalState& s : traj.states) {
        zt.z.push_back(z_of_state(s, tau));
        std::vector<double> d(s.u.size());
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = tau * s.utt[j] + s.ut[j];
        zt.zt.push_back(std::move(d));
    }
    return zt;
}

WaveZResidual wave_z_residual(const PhysicalParams& params, const SpectralBasis& basis,
                              const Trajectory& traj, const ForcingSpec& forcing) {
    if (!(params.tau > 0.0)) throw std::invalid_argument("wave_z_residual: tau must be positive");
    require_uniform(traj.times, 5, "wave_z_residual");
    const std::size_t nt = traj.times.size();
    const std::size_t n = basis.n_modes();
    const double h = traj.times[1] - traj.times[0];
    const double tau = params.tau;
    const double speed2 = params.c * params.c + params.delta() / tau;
    const double dot = params.delta() / tau;

    const ZTrajectory ztraj = z_transform(traj, tau);

    // per-mode kernel convolution of z over the whole trajectory
    std::vector<std::vector<double>> conv(n);
    {
        std::vector<double> y(nt), yt(nt);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < nt; ++k) {
                y[k] = ztraj.z[k][j];
                yt[k] = ztraj.zt[k][j];
            }
            conv[j] = exp_kernel_convolution(y, yt, h, tau);
        }
    }

    WaveZResidual out;
    std::vector<double> res_d(n), res_m(n);
    double scale = 0.0;
    std::vector<double> norm_d, norm_m;
    for (std::size_t k = 1; k + 1 < nt; ++k) {
        const ModalState& s = traj.states[k];
        const std::vector<double> f = f_modal(params, basis, s, forcing, traj.times[k]);
        const double trel = traj.times[k] - traj.times[0];
        const double kernel = std::exp(-trel / tau) / tau;
        double nd = 0, nm = 0, nz = 0, nztt = 0, nf = 0, nu = 0, nc = 0, n0 = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double lam = basis.lambda(j);
            const double ztt = (ztraj.z[k + 1][j] - 2.0 * ztraj.z[k][j] + ztraj.z[k - 1][j]) / (h * h);
            const double stiff = speed2 * lam * ztraj.z[k][j];
            const double direct = ztt + stiff - f[j] - dot * lam * s.u[j];
            const double mem = ztt + stiff - dot * lam * conv[j][k] - f[j] -
                               params.delta() * kernel * lam * traj.states[0].u[j];
            nd += direct * direct;
            nm += mem * mem;
            nztt += ztt * ztt;
            nz += stiff * stiff;
            nf += f[j] * f[j];
            nu += dot * lam * s.u[j] * dot * lam * s.u[j];
            nc += dot * lam * conv[j][k] * dot * lam * conv[j][k];
            const double t0term = params.delta() * kernel * lam * traj.states[0].u[j];
            n0 += t0term * t0term;
        }
        out.times.push_back(traj.times[k]);
        norm_d.push_back(std::sqrt(nd));
        norm_m.push_back(std::sqrt(nm));
        scale = std::max({scale, std::sqrt(nztt), std::sqrt(nz), std::sqrt(nf), std::sqrt(nu),
                          std::sqrt(nc), std::sqrt(n0)});
    }
    if (scale == 0.0) scale = 1.0;
    for (std::size_t i = 0; i < norm_d.size(); ++i) {
        out.direct.push_back(norm_d[i] / scale);
        out.memory.push_back(norm_m[i] / scale);
        out.max_direct = std::max(out.max_direct, out.direct.back());
        out.max_memory = std::max(out.max_memory, out.memory.back());
    }
    return out;
}

std::vector<std::vector<double>> reconstruct_u_from_z(const ZTrajectory& ztraj,
                                                      const std::vector<double>& u0, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("reconstruct_u_from_z: tau must be positive");
    require_uniform(ztraj.times, 2, "reconstruct_u_from_z");
    const std::size_t nt = ztraj.times.size();
    const std::size_t n = u0.size();
    const double h = ztraj.times[1] - ztraj.times[0];

    std::vector<std::vector<double>> u(nt, std::vector<double>(n, 0.0));
    std::vector<double> y(nt), yt(nt);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < nt; ++k) {
            y[k] = ztraj.z[k][j];
            yt[k] = ztraj.zt[k][j];
        }
        const std::vector<double> conv = exp_kernel_convolution(y, yt, h, tau);
        for (std::size_t k = 0; k < nt; ++k) {
            const double trel = ztraj.times[k] - ztraj.times[0];
            u[k][j] = std::exp(-trel / tau) * u0[j] + conv[k];
        }
    }
    return u;
}

}  // namespace jmgt
