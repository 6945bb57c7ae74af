// eventreg: run, list, validate and reproduce the experiment catalog.
//
// Exit status: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eventreg/experiments.hpp"

namespace ex = eventreg::experiments;

namespace {

struct RunFlags {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> overrides;
    bool force = false;
};

ex::json read_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ex::ConfigError("cannot open config '" + path + "'");
    ex::json doc = ex::json::parse(in, nullptr, false);
    if (doc.is_discarded())
        throw ex::ConfigError("config '" + path + "' is not valid JSON");
    return doc;
}

void apply_flags(ex::ExperimentSpec &spec, const RunFlags &flags) {
    if (flags.seed)
        spec.seed = flags.seed;
    if (!flags.out.empty())
        spec.out_dir = flags.out;
    for (const auto &o : flags.overrides)
        spec.overrides.push_back(ex::parse_override(o));
    spec.force = spec.force || flags.force;
}

void print_metrics(const std::map<std::string, double> &metrics) {
    for (const auto &[key, value] : metrics)
        std::printf("%s %.9g\n", key.c_str(), value);
}

int execute(const ex::ExperimentSpec &spec) {
    const auto rs = ex::run_experiment(spec);
    std::printf("# %s -> %s\n", spec.id.c_str(), rs.out_dir.string().c_str());
    print_metrics(rs.metrics);
    return 0;
}

void add_run_flags(CLI::App *cmd, RunFlags &flags, bool with_output) {
    cmd->add_option("--seed", flags.seed, "Seed (overrides the config and preset default)");
    cmd->add_option("--override", flags.overrides, "Parameter override key=value (repeatable)");
    if (with_output) {
        cmd->add_option("--out", flags.out, "Output directory (default $EVENTREG_OUT/<id>)");
        cmd->add_flag("--force", flags.force, "Write into a non-empty output directory");
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Trajectory vs. event regulation experiments"};
    app.require_subcommand(1);

    RunFlags flags;
    std::string config_path;
    std::string figure;

    auto *run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Config JSON")->required();
    add_run_flags(run, flags, true);

    auto *list = app.add_subcommand("list", "List catalog experiments");

    auto *validate = app.add_subcommand("validate", "Check a config without simulating");
    validate->add_option("config", config_path, "Config JSON")->required();
    add_run_flags(validate, flags, false);

    auto *reproduce = app.add_subcommand("reproduce", "Run the default scenario for a figure id");
    reproduce->add_option("figure", figure, "fig1|fig3|fig5|fig6|fig7|fig8|fig10|fig12|ifsync")->required();
    add_run_flags(reproduce, flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*list) {
            for (const auto &e : ex::catalog())
                std::printf("%-22s %-7s %s\n", e.id.c_str(), e.figure.c_str(), e.description.c_str());
            return 0;
        }
        if (*validate) {
            auto spec = ex::ExperimentSpec::from_json(read_config(config_path));
            apply_flags(spec, flags);
            (void)ex::resolve_parameters(spec);
            std::printf("ok %s seed %llu\n", spec.id.c_str(),
                        static_cast<unsigned long long>(ex::resolve_seed(spec)));
            return 0;
        }
        ex::ExperimentSpec spec;
        if (*run) {
            spec = ex::ExperimentSpec::from_json(read_config(config_path));
        } else {
            spec.id = ex::id_for_figure(figure);
        }
        apply_flags(spec, flags);
        return execute(spec);
    } catch (const ex::ConfigError &e) {
        std::fprintf(stderr, "eventreg: config error: %s\n", e.what());
        return 1;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "eventreg: error: %s\n", e.what());
        return 2;
    }
}
