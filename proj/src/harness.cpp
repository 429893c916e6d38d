#include "jmgt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "jmgt/diagnostics.hpp"
#include "jmgt/multiharmonic.hpp"
#include "jmgt/stability.hpp"

namespace jmgt {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "physics.tau", "physics.c", "physics.b", "physics.eta",
        "basis.kind", "basis.lengths", "basis.modes", "basis.zero_mode",
        "solver.dt", "solver.t_end", "solver.scheme", "solver.dealias",
        "solver.blowup_threshold", "solver.sample_stride", "solver.newton_tol",
        "solver.degeneracy_margin",
        "forcing.kind", "forcing.omega", "forcing.amplitude",
        "initial.u0", "initial.u1", "initial.u2",
        "experiment.kind", "experiment.seed", "experiment.zeta_max", "experiment.zeta_count",
        "experiment.steady_tol", "experiment.max_periods", "experiment.harmonics",
        "experiment.fp_tol", "experiment.relaxation", "experiment.amp_min", "experiment.amp_max",
        "experiment.bracket_ratio",
        "sweep.parameter", "sweep.values",
    };
    return keys;
}

class KeyValues {
  public:
    explicit KeyValues(const std::string& text) {
        std::istringstream iss(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(iss, line)) {
            ++lineno;
            line = trim(line);
            if (line.empty() || line[0] == '#' || line[0] == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = section + "." + trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (kv_.count(key))
                throw std::invalid_argument("duplicate key: " + key);
            kv_[key] = value;
        }
        for (const auto& [key, value] : kv_) {
            if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
                throw std::invalid_argument("unknown key: " + key);
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        return parse_double(key, it->second);
    }

    int get_int(const std::string& key, int def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        try {
            std::size_t pos = 0;
            const int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("key " + key + ": expected integer, got '" + it->second + "'");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("key " + key + ": expected integer, got '" + it->second + "'");
        }
    }

    bool get_bool(const std::string& key, bool def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw std::invalid_argument("key " + key + ": expected true/false, got '" + it->second + "'");
    }

    std::vector<double> get_doubles(const std::string& key) const {
        std::vector<double> out;
        auto it = kv_.find(key);
        if (it == kv_.end()) return out;
        for (const std::string& tok : split_ws(it->second)) out.push_back(parse_double(key, tok));
        return out;
    }

    std::vector<int> get_ints(const std::string& key) const {
        std::vector<int> out;
        auto it = kv_.find(key);
        if (it == kv_.end()) return out;
        for (const std::string& tok : split_ws(it->second)) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stoi(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw std::invalid_argument("key " + key + ": expected integer list, got '" + tok + "'");
            }
        }
        return out;
    }

  private:
    static double parse_double(const std::string& key, const std::string& value) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("key " + key + ": expected number, got '" + value + "'");
        }
    }

    std::map<std::string, std::string> kv_;
};

class CsvBuilder {
  public:
    explicit CsvBuilder(const std::string& header) { out_ = header + "\n"; }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ += cells[i];
            out_ += (i + 1 < cells.size()) ? "," : "\n";
        }
    }
    std::string str() && { return std::move(out_); }

  private:
    std::string out_;
};

std::vector<double> padded(const std::vector<double>& v, std::size_t n, const std::string& key) {
    if (v.size() > n)
        throw std::invalid_argument("key " + key + ": more entries than basis modes");
    std::vector<double> out(n, 0.0);
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

const SpectralBasis& require_basis_cache(const RunConfig& config,
                                         std::optional<SpectralBasis>& cache) {
    if (!config.has_basis)
        throw std::invalid_argument("missing required key: basis.kind (experiment needs a basis)");
    if (!cache) cache = build_basis(config.basis);
    return *cache;
}

struct IvpData {
    std::vector<double> u0, u1;
    std::optional<std::vector<double>> u2;
};

IvpData initial_data(const RunConfig& config, std::size_t n) {
    IvpData d;
    d.u0 = padded(config.initial.u0, n, "initial.u0");
    d.u1 = padded(config.initial.u1, n, "initial.u1");
    if (config.initial.has_u2) d.u2 = padded(config.initial.u2, n, "initial.u2");
    return d;
}

void append_trajectory_csvs(const PhysicalParams& params, const SpectralBasis& basis,
                            const Trajectory& traj, const ForcingSpec& forcing,
                            RunArtifacts& artifacts, const std::string& prefix = "") {
    CsvBuilder long_csv("t,mode_index,u,ut,utt");
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const ModalState& s = traj.states[k];
        for (std::size_t j = 0; j < basis.n_modes(); ++j)
            long_csv.row({format_g17(traj.times[k]), std::to_string(j), format_g17(s.u[j]),
                          format_g17(s.ut[j]), format_g17(s.utt[j])});
    }
    artifacts.files.emplace_back(prefix + "trajectory.csv", std::move(long_csv).str());

    const EnergyTrace trace = energy_trace(params, basis, traj);
    CsvBuilder norms_csv("t,linf_u,h1_u,h2_u,h1_ut,h2_ut,h1_utt,energy");
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const ModalNorms nm = modal_norms(traj.states[k], basis);
        norms_csv.row({format_g17(traj.times[k]), format_g17(trace.linf[k]), format_g17(nm.h1_u),
                       format_g17(nm.h2_u), format_g17(nm.h1_ut), format_g17(nm.h2_ut),
                       format_g17(nm.h1_utt), format_g17(trace.energy[k])});
    }
    artifacts.files.emplace_back(prefix + "norms.csv", std::move(norms_csv).str());

    CsvBuilder energy_csv("t,energy,comp1,comp2,comp3,comp4,linf");
    for (std::size_t k = 0; k < trace.times.size(); ++k)
        energy_csv.row({format_g17(trace.times[k]), format_g17(trace.energy[k]),
                        format_g17(trace.comp_grad_utt[k]), format_g17(trace.comp_lap_ut[k]),
                        format_g17(trace.comp_grad_ut[k]), format_g17(trace.comp_lap_u[k]),
                        format_g17(trace.linf[k])});
    artifacts.files.emplace_back(prefix + "energy.csv", std::move(energy_csv).str());

    if (params.tau > 0.0 && traj.times.size() >= 3) {
        try {
            const EnergyWeights w = EnergyWeights::defaults(params, basis);
            const std::vector<double> res = energy_identity_residual(params, basis, traj, w, forcing);
            CsvBuilder enid_csv("t,enid_residual");
            double rmax = 0.0;
            for (std::size_t k = 0; k < res.size(); ++k) {
                enid_csv.row({format_g17(traj.times[k]), format_g17(res[k])});
                rmax = std::max(rmax, res[k]);
            }
            artifacts.files.emplace_back(prefix + "enid.csv", std::move(enid_csv).str());
            artifacts.metrics[prefix + "enid_residual_max"] = rmax;
        } catch (const std::invalid_argument&) {
            artifacts.info[prefix + "enid"] = "skipped: sampling not uniform";
        }
    }

    artifacts.info[prefix + "termination"] = to_string(traj.termination);
    if (traj.termination == Termination::BlowupDetected) {
        artifacts.metrics[prefix + "t_detect"] = traj.times.back();
    } else if (traj.termination == Termination::Completed && trace.times.size() >= 4) {
        const double t1 = trace.times.back();
        try {
            const DecayFit fit = fit_decay_rate(trace, 0.5 * t1, t1);
            artifacts.metrics[prefix + "decay_rate"] = fit.rate;
        } catch (const std::invalid_argument&) {
            // non-positive energies (zero run); no rate to report
        }
    }
}

void apply_override(RunConfig& config, const std::string& parameter, double value) {
    if (parameter == "physics.tau")
        config.physics.tau = value;
    else if (parameter == "physics.c")
        config.physics.c = value;
    else if (parameter == "physics.b")
        config.physics.b = value;
    else if (parameter == "physics.eta")
        config.physics.eta = value;
    else if (parameter == "forcing.omega")
        config.forcing.omega = value;
    else
        throw std::invalid_argument("sweep.parameter: unknown parameter '" + parameter + "'");
}

}  // namespace

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "stability") return ExperimentKind::Stability;
    if (name == "simulate") return ExperimentKind::Simulate;
    if (name == "periodic") return ExperimentKind::Periodic;
    if (name == "blowup-sweep") return ExperimentKind::BlowupSweep;
    if (name == "tau-sweep") return ExperimentKind::TauSweep;
    throw std::invalid_argument("experiment.kind: unknown kind '" + name + "'");
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Stability: return "stability";
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Periodic: return "periodic";
        case ExperimentKind::BlowupSweep: return "blowup-sweep";
        case ExperimentKind::TauSweep: return "tau-sweep";
    }
    return "?";
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

RunConfig parse_config(const std::string& text) {
    const KeyValues kv(text);
    for (const char* req : {"physics.tau", "physics.c", "physics.b"})
        if (!kv.has(req)) throw std::invalid_argument(std::string("missing required key: ") + req);

    RunConfig c;
    c.physics.tau = kv.get_double("physics.tau", 0.0);
    c.physics.c = kv.get_double("physics.c", 1.0);
    c.physics.b = kv.get_double("physics.b", 0.0);
    c.physics.eta = kv.get_double("physics.eta", 0.0);
    c.physics.validate();

    if (kv.has("basis.kind") || kv.has("basis.lengths") || kv.has("basis.modes")) {
        for (const char* req : {"basis.kind", "basis.lengths", "basis.modes"})
            if (!kv.has(req)) throw std::invalid_argument(std::string("missing required key: ") + req);
        c.basis.kind = basis_kind_from_string(kv.get_string("basis.kind", ""));
        c.basis.lengths = kv.get_doubles("basis.lengths");
        c.basis.modes = kv.get_ints("basis.modes");
        c.basis.torus_zero_mode = kv.get_bool("basis.zero_mode", false);
        c.has_basis = true;
    }

    c.solver.dt = kv.get_double("solver.dt", c.solver.dt);
    c.solver.t_end = kv.get_double("solver.t_end", c.solver.t_end);
    c.solver.scheme = scheme_from_string(kv.get_string("solver.scheme", "exponential-imex"));
    c.solver.dealias = kv.get_bool("solver.dealias", true);
    c.solver.blowup_linf_threshold = kv.get_double("solver.blowup_threshold", 0.0);
    c.solver.sample_stride = kv.get_int("solver.sample_stride", 1);
    c.solver.newton_tol = kv.get_double("solver.newton_tol", c.solver.newton_tol);
    c.solver.degeneracy_margin = kv.get_double("solver.degeneracy_margin", c.solver.degeneracy_margin);
    c.solver.validate();

    const std::string fkind = kv.get_string("forcing.kind", "none");
    if (fkind == "custom-samples")
        throw std::invalid_argument("forcing.kind: custom-samples is API-only, not configurable");
    c.forcing.kind = forcing_kind_from_string(fkind);
    c.forcing.omega = kv.get_double("forcing.omega", 0.0);
    c.forcing.amplitude = kv.get_doubles("forcing.amplitude");
    if (c.forcing.kind == ForcingKind::ModalHarmonic && !(c.forcing.omega > 0.0))
        throw std::invalid_argument("forcing.omega must be positive for modal-harmonic forcing");

    c.initial.u0 = kv.get_doubles("initial.u0");
    c.initial.u1 = kv.get_doubles("initial.u1");
    c.initial.u2 = kv.get_doubles("initial.u2");
    c.initial.has_u2 = kv.has("initial.u2");

    if (kv.has("experiment.kind")) {
        c.experiment = experiment_kind_from_string(kv.get_string("experiment.kind", ""));
        c.has_experiment = true;
    }
    c.seed = kv.get_u64("experiment.seed", 0);
    c.zeta_max = kv.get_double("experiment.zeta_max", c.zeta_max);
    c.zeta_count = kv.get_int("experiment.zeta_count", c.zeta_count);
    c.steady_tol = kv.get_double("experiment.steady_tol", c.steady_tol);
    c.max_periods = kv.get_int("experiment.max_periods", c.max_periods);
    c.harmonics = kv.get_int("experiment.harmonics", c.harmonics);
    c.fp_tol = kv.get_double("experiment.fp_tol", c.fp_tol);
    c.relaxation = kv.get_double("experiment.relaxation", c.relaxation);
    c.amp_min = kv.get_double("experiment.amp_min", c.amp_min);
    c.amp_max = kv.get_double("experiment.amp_max", c.amp_max);
    c.bracket_ratio = kv.get_double("experiment.bracket_ratio", c.bracket_ratio);
    if (c.zeta_count < 1) throw std::invalid_argument("experiment.zeta_count must be >= 1");
    if (c.harmonics < 1) throw std::invalid_argument("experiment.harmonics must be >= 1");
    if (!(c.zeta_max > 0.0)) throw std::invalid_argument("experiment.zeta_max must be positive");
    if (!(c.amp_min > 0.0) || !(c.amp_max >= c.amp_min))
        throw std::invalid_argument("experiment.amp_min/amp_max must satisfy 0 < amp_min <= amp_max");
    if (!(c.bracket_ratio > 1.0))
        throw std::invalid_argument("experiment.bracket_ratio must exceed 1");

    c.sweep.parameter = kv.get_string("sweep.parameter", "");
    c.sweep.values = kv.get_doubles("sweep.values");
    if (!c.sweep.parameter.empty()) {
        static const std::vector<std::string> allowed = {"physics.tau", "physics.c", "physics.b",
                                                         "physics.eta", "forcing.omega"};
        if (std::find(allowed.begin(), allowed.end(), c.sweep.parameter) == allowed.end())
            throw std::invalid_argument("sweep.parameter: unknown parameter '" + c.sweep.parameter +
                                        "'");
        if (c.sweep.values.empty())
            throw std::invalid_argument("missing required key: sweep.values");
    } else if (!c.sweep.values.empty()) {
        throw std::invalid_argument("missing required key: sweep.parameter");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string print_config(const RunConfig& c) {
    std::ostringstream out;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_g17(v[i]);
        return s;
    };
    out << "[physics]\n";
    out << "tau = " << format_g17(c.physics.tau) << "\n";
    out << "c = " << format_g17(c.physics.c) << "\n";
    out << "b = " << format_g17(c.physics.b) << "\n";
    out << "eta = " << format_g17(c.physics.eta) << "\n";
    if (c.has_basis) {
        out << "\n[basis]\n";
        out << "kind = " << to_string(c.basis.kind) << "\n";
        out << "lengths = " << list(c.basis.lengths) << "\n";
        out << "modes =";
        for (int m : c.basis.modes) out << " " << m;
        out << "\n";
        out << "zero_mode = " << (c.basis.torus_zero_mode ? "true" : "false") << "\n";
    }
    out << "\n[solver]\n";
    out << "dt = " << format_g17(c.solver.dt) << "\n";
    out << "t_end = " << format_g17(c.solver.t_end) << "\n";
    out << "scheme = " << to_string(c.solver.scheme) << "\n";
    out << "dealias = " << (c.solver.dealias ? "true" : "false") << "\n";
    out << "blowup_threshold = " << format_g17(c.solver.blowup_linf_threshold) << "\n";
    out << "sample_stride = " << c.solver.sample_stride << "\n";
    out << "newton_tol = " << format_g17(c.solver.newton_tol) << "\n";
    out << "degeneracy_margin = " << format_g17(c.solver.degeneracy_margin) << "\n";
    out << "\n[forcing]\n";
    out << "kind = " << to_string(c.forcing.kind) << "\n";
    out << "omega = " << format_g17(c.forcing.omega) << "\n";
    if (!c.forcing.amplitude.empty()) out << "amplitude = " << list(c.forcing.amplitude) << "\n";
    if (!c.initial.u0.empty() || !c.initial.u1.empty() || c.initial.has_u2) {
        out << "\n[initial]\n";
        if (!c.initial.u0.empty()) out << "u0 = " << list(c.initial.u0) << "\n";
        if (!c.initial.u1.empty()) out << "u1 = " << list(c.initial.u1) << "\n";
        if (c.initial.has_u2) out << "u2 = " << list(c.initial.u2) << "\n";
    }
    out << "\n[experiment]\n";
    if (c.has_experiment) out << "kind = " << to_string(c.experiment) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "zeta_max = " << format_g17(c.zeta_max) << "\n";
    out << "zeta_count = " << c.zeta_count << "\n";
    out << "steady_tol = " << format_g17(c.steady_tol) << "\n";
    out << "max_periods = " << c.max_periods << "\n";
    out << "harmonics = " << c.harmonics << "\n";
    out << "fp_tol = " << format_g17(c.fp_tol) << "\n";
    out << "relaxation = " << format_g17(c.relaxation) << "\n";
    out << "amp_min = " << format_g17(c.amp_min) << "\n";
    out << "amp_max = " << format_g17(c.amp_max) << "\n";
    out << "bracket_ratio = " << format_g17(c.bracket_ratio) << "\n";
    if (!c.sweep.empty()) {
        out << "\n[sweep]\n";
        out << "parameter = " << c.sweep.parameter << "\n";
        out << "values = " << list(c.sweep.values) << "\n";
    }
    return out.str();
}

ForcingSpec materialize_forcing(const RunConfig& config, std::size_t n_modes) {
    ForcingSpec f = config.forcing;
    if (f.kind == ForcingKind::ModalHarmonic)
        f.amplitude = padded(f.amplitude, n_modes, "forcing.amplitude");
    f.validate(n_modes);
    return f;
}

RunArtifacts run_stability_atlas(const RunConfig& config) {
    RunArtifacts artifacts;
    std::vector<double> zetas(config.zeta_count);
    for (int i = 0; i < config.zeta_count; ++i)
        zetas[i] = config.zeta_count == 1
                       ? config.zeta_max
                       : config.zeta_max * static_cast<double>(i) / (config.zeta_count - 1);
    const RegimeReport report = classify_regime(config.physics, zetas);

    CsvBuilder csv("zeta,m1,m2,m3,re_s1,im_s1,re_s2,im_s2,re_s3,im_s3,regime");
    for (const ModeAnalysis& m : report.modes)
        csv.row({format_g17(m.zeta), format_g17(m.minors[0]), format_g17(m.minors[1]),
                 format_g17(m.minors[2]), format_g17(m.roots[0].real()), format_g17(m.roots[0].imag()),
                 format_g17(m.roots[1].real()), format_g17(m.roots[1].imag()),
                 format_g17(m.roots[2].real()), format_g17(m.roots[2].imag()), to_string(m.regime)});
    artifacts.files.emplace_back("stability.csv", std::move(csv).str());
    artifacts.metrics["delta"] = config.physics.delta();
    artifacts.info["verdict"] = to_string(report.verdict);
    return artifacts;
}

RunArtifacts run_simulate(const RunConfig& config) {
    RunArtifacts artifacts;
    std::optional<SpectralBasis> cache;
    const SpectralBasis& basis = require_basis_cache(config, cache);
    const ForcingSpec forcing = materialize_forcing(config, basis.n_modes());
    const IvpData data = initial_data(config, basis.n_modes());
    const Trajectory traj =
        simulate_ivp(config.physics, basis, data.u0, data.u1, data.u2, forcing, config.solver);
    append_trajectory_csvs(config.physics, basis, traj, forcing, artifacts);
    return artifacts;
}

RunArtifacts run_periodic(const RunConfig& config) {
    RunArtifacts artifacts;
    std::optional<SpectralBasis> cache;
    const SpectralBasis& basis = require_basis_cache(config, cache);
    const ForcingSpec forcing = materialize_forcing(config, basis.n_modes());
    if (forcing.kind != ForcingKind::ModalHarmonic)
        throw std::invalid_argument("periodic experiment requires forcing.kind = modal-harmonic");

    const HarmonicField source = harmonic_source(forcing, config.harmonics, basis.n_modes());
    FixedPointOptions opts;
    opts.tol = config.fp_tol;
    opts.relaxation = config.relaxation;
    opts.dealias = config.solver.dealias;
    const FixedPointResult result = solve_fixed_point(config.physics, basis, source, opts);

    CsvBuilder hcsv("m,mode_index,abs_u,arg_u");
    for (int m = 1; m <= result.field.order; ++m)
        for (std::size_t j = 0; j < basis.n_modes(); ++j)
            hcsv.row({std::to_string(m), std::to_string(j), format_g17(std::abs(result.field.at(m, j))),
                      format_g17(std::arg(result.field.at(m, j)))});
    artifacts.files.emplace_back("harmonics.csv", std::move(hcsv).str());

    CsvBuilder icsv("iter,residual");
    for (std::size_t i = 0; i < result.report.residual_history.size(); ++i)
        icsv.row({std::to_string(i + 1), format_g17(result.report.residual_history[i])});
    artifacts.files.emplace_back("iterations.csv", std::move(icsv).str());

    artifacts.metrics["iterations"] = result.report.iterations;
    artifacts.metrics["final_residual"] = result.report.final_residual;
    for (int m = 1; m <= std::min(result.field.order, 3); ++m)
        artifacts.metrics["h1_harmonic_" + std::to_string(m)] =
            harmonic_h1_norm(result.field, basis, m);
    if (!result.report.converged)
        throw std::runtime_error("periodic: fixed point did not converge (residual " +
                                 format_g17(result.report.final_residual) + ")");
    return artifacts;
}

RunArtifacts run_blowup_sweep(const RunConfig& config) {
    RunArtifacts artifacts;
    std::optional<SpectralBasis> cache;
    const SpectralBasis& basis = require_basis_cache(config, cache);
    const ForcingSpec forcing = materialize_forcing(config, basis.n_modes());
    const std::size_t n = basis.n_modes();

    struct ScanRow {
        double a;
        Termination termination;
        double t_detect;
        double growth;
    };
    std::vector<ScanRow> rows;

    auto run_one = [&](double a) {
        std::vector<double> u0(n, 0.0), u1(n, 0.0);
        u0[0] = a;  // data aligned with the first eigenfunction
        const Trajectory traj =
            simulate_ivp(config.physics, basis, u0, u1, std::nullopt, forcing, config.solver);
        ScanRow row{a, traj.termination, 0.0, 0.0};
        if (traj.termination == Termination::BlowupDetected) {
            row.t_detect = traj.times.back();
            const EnergyTrace trace = energy_trace(config.physics, basis, traj);
            const double threshold = resolve_blowup_threshold(config.solver, basis.linf(u0));
            const BlowupDetection det = detect_blowup(trace, threshold);
            row.growth = det.growth_exponent;
        }
        rows.push_back(row);
        return row;
    };

    // geometric scan upward until the first blow-up
    double a_safe = -1.0, a_blow = -1.0;
    for (double a = config.amp_min; a <= config.amp_max * (1.0 + 1e-12); a *= 2.0) {
        const ScanRow row = run_one(a);
        if (row.termination == Termination::BlowupDetected) {
            a_blow = a;
            break;
        }
        if (row.termination == Termination::Completed) a_safe = a;
    }

    if (a_blow > 0.0 && a_safe < 0.0) {
        // first scanned amplitude already blew up; search downward
        double a = config.amp_min;
        for (int i = 0; i < 30 && a_safe < 0.0; ++i) {
            a *= 0.5;
            const ScanRow row = run_one(a);
            if (row.termination == Termination::Completed) a_safe = a;
            else if (row.termination == Termination::BlowupDetected) a_blow = a;
        }
    }

    if (a_blow > 0.0 && a_safe > 0.0) {
        int guard = 0;
        while (a_blow / a_safe > config.bracket_ratio && ++guard < 60) {
            const double mid = std::sqrt(a_safe * a_blow);
            const ScanRow row = run_one(mid);
            if (row.termination == Termination::BlowupDetected)
                a_blow = mid;
            else
                a_safe = mid;
        }
        artifacts.metrics["a_safe"] = a_safe;
        artifacts.metrics["a_blow"] = a_blow;
        artifacts.metrics["bracket_ratio"] = a_blow / a_safe;
        artifacts.info["result"] = "bracketed";
    } else {
        artifacts.info["result"] = "inconclusive";
    }

    std::sort(rows.begin(), rows.end(), [](const ScanRow& x, const ScanRow& y) { return x.a < y.a; });
    CsvBuilder csv("amplitude,termination,t_detect,growth_exponent");
    for (const ScanRow& r : rows)
        csv.row({format_g17(r.a), to_string(r.termination), format_g17(r.t_detect),
                 format_g17(r.growth)});
    artifacts.files.emplace_back("scan.csv", std::move(csv).str());
    return artifacts;
}

RunArtifacts run_tau_sweep(const RunConfig& config, int workers) {
    RunArtifacts artifacts;
    std::optional<SpectralBasis> cache;
    const SpectralBasis& basis = require_basis_cache(config, cache);
    const ForcingSpec forcing = materialize_forcing(config, basis.n_modes());
    if (config.sweep.parameter != "physics.tau")
        throw std::invalid_argument("tau-sweep requires sweep.parameter = physics.tau");
    if (config.initial.has_u2)
        throw std::invalid_argument("tau-sweep uses the consistent utt; omit initial.u2");
    const IvpData data = initial_data(config, basis.n_modes());

    std::vector<double> taus = config.sweep.values;
    for (double tau : taus) {
        if (!(tau > 0.0)) throw std::invalid_argument("tau-sweep: sweep values must be positive");
        PhysicalParams p = config.physics;
        p.tau = tau;
        if (!(p.delta() > 0.0))
            throw std::invalid_argument("tau-sweep: delta <= 0 at tau = " + format_g17(tau));
    }
    if (!(config.physics.b > 0.0))
        throw std::invalid_argument("tau-sweep: reference requires b > 0");

    auto member = [&](double tau) {
        PhysicalParams p = config.physics;
        p.tau = tau;
        Trajectory traj;
        if (tau == 0.0)
            traj = simulate_westervelt_tau0(p, basis, data.u0, data.u1, forcing, config.solver);
        else
            traj = simulate_ivp(p, basis, data.u0, data.u1, std::nullopt, forcing, config.solver);
        if (traj.termination != Termination::Completed)
            throw std::runtime_error("tau-sweep member tau = " + format_g17(tau) + " failed: " +
                                     to_string(traj.termination));
        return traj;
    };

    std::vector<double> all_taus = taus;
    all_taus.push_back(0.0);
    std::vector<Trajectory> runs(all_taus.size());
    const int nw = std::max(1, workers);
    for (std::size_t base = 0; base < all_taus.size(); base += nw) {
        std::vector<std::future<Trajectory>> batch;
        for (std::size_t i = base; i < std::min(all_taus.size(), base + nw); ++i)
            batch.push_back(std::async(std::launch::async, member, all_taus[i]));
        for (std::size_t i = base; i < std::min(all_taus.size(), base + nw); ++i)
            runs[i] = batch[i - base].get();
    }
    const Trajectory& ref = runs.back();

    auto w_indep = [&](const Trajectory& traj) {
        // H1(0,T;H2) portion of |u|_{W,tau}^2: Int sum lambda^2 (u^2 + ut^2)
        std::vector<double> integrand(traj.states.size(), 0.0);
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < basis.n_modes(); ++j) {
                const double l2 = basis.lambda(j) * basis.lambda(j);
                acc += l2 * (traj.states[k].u[j] * traj.states[k].u[j] +
                             traj.states[k].ut[j] * traj.states[k].ut[j]);
            }
            integrand[k] = acc;
        }
        double total = 0.0;
        for (std::size_t k = 1; k < integrand.size(); ++k)
            total += 0.5 * (traj.times[k] - traj.times[k - 1]) * (integrand[k] + integrand[k - 1]);
        return total;
    };

    auto err_vs_ref = [&](const Trajectory& traj) {
        if (traj.times.size() != ref.times.size())
            throw std::runtime_error("tau-sweep: sample grids differ between members");
        std::vector<double> integrand(traj.states.size(), 0.0);
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < basis.n_modes(); ++j) {
                const double d = traj.states[k].u[j] - ref.states[k].u[j];
                acc += basis.lambda(j) * d * d;
            }
            integrand[k] = acc;
        }
        double total = 0.0;
        for (std::size_t k = 1; k < integrand.size(); ++k)
            total += 0.5 * (traj.times[k] - traj.times[k - 1]) * (integrand[k] + integrand[k - 1]);
        return std::sqrt(total);
    };

    CsvBuilder csv("tau,err_l2_h1,w_tau_independent");
    for (std::size_t i = 0; i < taus.size(); ++i)
        csv.row({format_g17(taus[i]), format_g17(err_vs_ref(runs[i])), format_g17(w_indep(runs[i]))});
    csv.row({format_g17(0.0), format_g17(0.0), format_g17(w_indep(ref))});
    artifacts.files.emplace_back("sweep.csv", std::move(csv).str());
    artifacts.metrics["w_tau_independent_ref"] = w_indep(ref);
    return artifacts;
}

RunArtifacts run_experiment(const RunConfig& config, int workers) {
    const auto t0 = std::chrono::steady_clock::now();
    RunArtifacts artifacts;

    auto run_single = [&](const RunConfig& c) {
        switch (c.experiment) {
            case ExperimentKind::Stability: return run_stability_atlas(c);
            case ExperimentKind::Simulate: return run_simulate(c);
            case ExperimentKind::Periodic: return run_periodic(c);
            case ExperimentKind::BlowupSweep: return run_blowup_sweep(c);
            case ExperimentKind::TauSweep: return run_tau_sweep(c, workers);
        }
        throw std::logic_error("unreachable");
    };

    if (!config.sweep.empty() && config.experiment != ExperimentKind::TauSweep) {
        if (config.experiment == ExperimentKind::BlowupSweep)
            throw std::invalid_argument("blowup-sweep does not take a [sweep] section");
        std::vector<RunArtifacts> members(config.sweep.values.size());
        const int nw = std::max(1, workers);
        auto member = [&](std::size_t i) {
            RunConfig c = config;
            apply_override(c, config.sweep.parameter, config.sweep.values[i]);
            c.sweep = {};
            return run_single(c);
        };
        for (std::size_t base = 0; base < members.size(); base += nw) {
            std::vector<std::future<RunArtifacts>> batch;
            for (std::size_t i = base; i < std::min(members.size(), base + nw); ++i)
                batch.push_back(std::async(std::launch::async, member, i));
            for (std::size_t i = base; i < std::min(members.size(), base + nw); ++i)
                members[i] = batch[i - base].get();
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            char prefix[32];
            std::snprintf(prefix, sizeof(prefix), "run_%03zu_", i);
            for (auto& [name, bytes] : members[i].files)
                artifacts.files.emplace_back(prefix + name, std::move(bytes));
            for (const auto& [k, v] : members[i].metrics) artifacts.metrics[prefix + k] = v;
            for (const auto& [k, v] : members[i].info) artifacts.info[prefix + k] = v;
        }
    } else {
        artifacts = run_single(config);
    }

    const auto t1 = std::chrono::steady_clock::now();
    artifacts.info["wall_ms"] =
        std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());
    return artifacts;
}

void emit_outputs(const RunConfig& config, const RunArtifacts& artifacts,
                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

    auto write_file = [&](const std::string& name, const std::string& bytes) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + path.string());
    };

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["experiment"] = to_string(config.experiment);
    manifest["seed"] = config.seed;
    manifest["config"] = print_config(config);
    manifest["metrics"] = nlohmann::json::object();
    for (const auto& [k, v] : artifacts.metrics) manifest["metrics"][k] = v;
    manifest["info"] = nlohmann::json::object();
    for (const auto& [k, v] : artifacts.info) manifest["info"][k] = v;
    manifest["files"] = nlohmann::json::array();
    for (const auto& [name, bytes] : artifacts.files) {
        write_file(name, bytes);
        char digest[24];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(bytes)));
        manifest["files"].push_back(
            {{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", digest}});
    }
    write_file("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace jmgt
