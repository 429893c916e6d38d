#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "jmgt/harness.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string out_dir = "out";
    int workers = 1;
};

void attach(CLI::App* sub, SubArgs& args) {
    sub->add_option("--config", args.config_path, "path to the INI-style run configuration")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory (default: out)");
    sub->add_option("--workers", args.workers, "concurrent sweep members (default: 1)")
        ->check(CLI::PositiveNumber);
}

int run(jmgt::ExperimentKind kind, const SubArgs& args) {
    jmgt::RunConfig config = jmgt::load_config(args.config_path);
    if (config.has_experiment && config.experiment != kind) {
        std::fprintf(stderr, "error: config sets experiment.kind = %s but the %s subcommand was invoked\n",
                     jmgt::to_string(config.experiment).c_str(), jmgt::to_string(kind).c_str());
        return 1;
    }
    config.experiment = kind;
    config.has_experiment = true;

    const jmgt::RunArtifacts artifacts = jmgt::run_experiment(config, args.workers);
    jmgt::emit_outputs(config, artifacts, args.out_dir);
    std::printf("%s: wrote %zu file(s) + manifest.json to %s\n", jmgt::to_string(kind).c_str(),
                artifacts.files.size(), args.out_dir.c_str());
    for (const auto& [k, v] : artifacts.info) std::printf("  %s: %s\n", k.c_str(), v.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jmgt-lab: spectral laboratory for the MGT / JMGT-Westervelt equations"};
    app.require_subcommand(1);

    const std::pair<const char*, jmgt::ExperimentKind> kinds[] = {
        {"stability", jmgt::ExperimentKind::Stability},
        {"simulate", jmgt::ExperimentKind::Simulate},
        {"periodic", jmgt::ExperimentKind::Periodic},
        {"blowup-sweep", jmgt::ExperimentKind::BlowupSweep},
        {"tau-sweep", jmgt::ExperimentKind::TauSweep},
    };

    SubArgs args[5];
    CLI::App* subs[5];
    for (int i = 0; i < 5; ++i) {
        subs[i] = app.add_subcommand(kinds[i].first);
        attach(subs[i], args[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (int i = 0; i < 5; ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            return run(kinds[i].second, args[i]);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 1;
        }
    }
    return 1;
}
