#pragma once

#include <string>
#include <vector>

#include "jmgt/basis.hpp"

namespace jmgt {

enum class ForcingKind { None, ModalHarmonic, CustomSamples };

ForcingKind forcing_kind_from_string(const std::string& name);
std::string to_string(ForcingKind kind);

/// Excitation r in  tau*u_ttt + u_tt - c^2 Lap u - b Lap u_t = -eta (u^2)_tt - r_tt.
///
/// modal-harmonic: r(x,t) = sum_j amplitude_j cos(omega t) phi_j(x), so the
/// single-frequency expansion has r_hat_m = 0 for m >= 2.
/// custom-samples: r_tt given as modal rows at sample times, linearly
/// interpolated in between.
struct ForcingSpec {
    ForcingKind kind = ForcingKind::None;
    std::vector<double> amplitude;  ///< per mode
    double omega = 0.0;             ///< angular frequency [rad/s]
    std::vector<double> sample_times;
    std::vector<std::vector<double>> rtt_samples;

    bool none() const { return kind == ForcingKind::None; }
    void validate(std::size_t n_modes) const;
};

/// Modal coefficients of r_tt(.,t); zero vector for kind none.
std::vector<double> rtt_modal(const ForcingSpec& forcing, double t, std::size_t n_modes);

}  // namespace jmgt
