#include "jmgt/forcing.hpp"

#include <cmath>
#include <stdexcept>

namespace jmgt {

ForcingKind forcing_kind_from_string(const std::string& name) {
    if (name == "none") return ForcingKind::None;
    if (name == "modal-harmonic") return ForcingKind::ModalHarmonic;
    if (name == "custom-samples") return ForcingKind::CustomSamples;
    throw std::invalid_argument("forcing.kind: unknown kind '" + name + "'");
}

std::string to_string(ForcingKind kind) {
    switch (kind) {
        case ForcingKind::None: return "none";
        case ForcingKind::ModalHarmonic: return "modal-harmonic";
        case ForcingKind::CustomSamples: return "custom-samples";
    }
    return "?";
}

void ForcingSpec::validate(std::size_t n_modes) const {
    if (kind == ForcingKind::None) return;
    if (kind == ForcingKind::ModalHarmonic) {
        if (amplitude.size() != n_modes)
            throw std::invalid_argument("forcing.amplitude: length does not match basis mode count");
        if (!(omega > 0.0)) throw std::invalid_argument("forcing.omega must be positive");
        return;
    }
    if (sample_times.size() < 2 || rtt_samples.size() != sample_times.size())
        throw std::invalid_argument("forcing: custom-samples needs >= 2 time samples with matching rows");
    for (const auto& row : rtt_samples)
        if (row.size() != n_modes)
            throw std::invalid_argument("forcing: custom-samples row length does not match basis");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (!(sample_times[i] > sample_times[i - 1]))
            throw std::invalid_argument("forcing: custom-samples times must be strictly increasing");
}

std::vector<double> rtt_modal(const ForcingSpec& forcing, double t, std::size_t n_modes) {
    std::vector<double> out(n_modes, 0.0);
    if (forcing.kind == ForcingKind::None) return out;
    if (forcing.kind == ForcingKind::ModalHarmonic) {
        const double factor = -forcing.omega * forcing.omega * std::cos(forcing.omega * t);
        for (std::size_t j = 0; j < n_modes; ++j) out[j] = factor * forcing.amplitude[j];
        return out;
    }
    // custom-samples: clamp outside the table, linear interpolation inside
    const auto& ts = forcing.sample_times;
    if (t <= ts.front()) return forcing.rtt_samples.front();
    if (t >= ts.back()) return forcing.rtt_samples.back();
    std::size_t k = 1;
    while (ts[k] < t) ++k;
    const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    for (std::size_t j = 0; j < n_modes; ++j)
        out[j] = (1.0 - w) * forcing.rtt_samples[k - 1][j] + w * forcing.rtt_samples[k][j];
    return out;
}

}  // namespace jmgt
