#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "jmgt/basis.hpp"
#include "jmgt/forcing.hpp"
#include "jmgt/params.hpp"
#include "jmgt/timedomain.hpp"

namespace jmgt {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { Stability, Simulate, Periodic, BlowupSweep, TauSweep };

ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ExperimentKind k);

struct InitialSpec {
    std::vector<double> u0, u1, u2;  ///< modal, padded with zeros to the basis size
    bool has_u2 = false;
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
    bool empty() const { return parameter.empty(); }
};

/// One experiment description, parsed from flat INI-style text. Unset keys
/// resolve to the defaults echoed by print_config.
struct RunConfig {
    ExperimentKind experiment = ExperimentKind::Simulate;
    bool has_experiment = false;
    PhysicalParams physics;
    BasisRequest basis;
    bool has_basis = false;
    SolverConfig solver;
    ForcingSpec forcing;
    InitialSpec initial;
    SweepSpec sweep;
    std::uint64_t seed = 0;

    // experiment extras
    double zeta_max = 100.0;
    int zeta_count = 100;
    double steady_tol = 1e-10;
    int max_periods = 400;
    int harmonics = 8;
    double fp_tol = 1e-10;
    double relaxation = 0.5;
    double amp_min = 0.015625;
    double amp_max = 64.0;
    double bracket_ratio = 1.1;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical echo; parse_config(print_config(c)) reproduces c.
std::string print_config(const RunConfig& config);

/// In-memory result of one experiment: named CSV payloads plus summary
/// metrics for the manifest.
struct RunArtifacts {
    std::vector<std::pair<std::string, std::string>> files;
    std::map<std::string, double> metrics;
    std::map<std::string, std::string> info;
};

RunArtifacts run_stability_atlas(const RunConfig& config);
RunArtifacts run_simulate(const RunConfig& config);
RunArtifacts run_periodic(const RunConfig& config);
RunArtifacts run_blowup_sweep(const RunConfig& config);
RunArtifacts run_tau_sweep(const RunConfig& config, int workers = 1);

/// Dispatch on experiment kind; expands a generic [sweep] section into
/// prefixed member runs executed on up to `workers` threads.
RunArtifacts run_experiment(const RunConfig& config, int workers = 1);

/// Write artifact files plus manifest.json (config echo, version, seed,
/// metrics, timings, file digests) into out_dir. 17 significant digits, LF
/// line endings, deterministic ordering.
void emit_outputs(const RunConfig& config, const RunArtifacts& artifacts,
                  const std::string& out_dir);

std::uint64_t fnv1a64(const std::string& bytes);
std::string format_g17(double v);

/// Forcing with amplitude padded to the basis mode count.
ForcingSpec materialize_forcing(const RunConfig& config, std::size_t n_modes);

}  // namespace jmgt
