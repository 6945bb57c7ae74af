#pragma once

/**
 * @file experiments.hpp
 * @brief Scenario catalog, parameter resolution with dotted-path overrides,
 *        and persisted result sets (trajectory CSVs, events CSV, metrics and
 *        manifest JSON).
 */

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eventreg/events.hpp"
#include "eventreg/sim_core.hpp"

namespace eventreg::experiments {

using json = nlohmann::json;

/// Invalid experiment id, override path, grid, or output directory.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CatalogEntry {
    std::string id;
    std::string figure; ///< reproduce alias, e.g. "fig10"
    std::string description;
};

[[nodiscard]] const std::vector<CatalogEntry> &catalog();
/// Catalog id for a reproduce alias (fig1, ..., ifsync). Throws ConfigError.
[[nodiscard]] std::string id_for_figure(const std::string &figure);

struct ExperimentSpec {
    std::string id;
    std::optional<std::uint64_t> seed;
    /// Dotted parameter path -> replacement value, applied in order.
    std::vector<std::pair<std::string, json>> overrides;
    /// Optional {dt, t_end} replacing the experiment's default grid.
    json grid = json::object();
    std::filesystem::path out_dir;
    bool force = false;

    /// Reads {experiment, seed, overrides, grid, out_dir}. Throws ConfigError.
    static ExperimentSpec from_json(const json &doc);
};

/// Default parameter tree of an experiment (includes "grid").
[[nodiscard]] json default_parameters(const std::string &id);
[[nodiscard]] std::uint64_t default_seed(const std::string &id);

/// Defaults with grid and overrides applied. Any path that does not already
/// exist, or a value of a different JSON type, raises ConfigError.
[[nodiscard]] json resolve_parameters(const ExperimentSpec &spec);
[[nodiscard]] std::uint64_t resolve_seed(const ExperimentSpec &spec);

/// Everything a run produces, before anything is written to disk.
struct Outcome {
    std::map<std::string, double> metrics;
    std::vector<std::pair<std::string, sim::Trajectory>> trajectories;
    std::vector<events::EventTrain> events;
};

/// Runs the scenario in memory.
[[nodiscard]] Outcome simulate(const ExperimentSpec &spec);

struct ResultSet {
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> trajectories;
    std::filesystem::path events;
    std::filesystem::path metrics_path;
    std::filesystem::path manifest_path;
    std::map<std::string, double> metrics;
    json manifest;
};

/**
 * Simulates and writes the result set. An existing non-empty output
 * directory is a ConfigError unless spec.force is set. An empty out_dir
 * selects output_root() / id.
 */
ResultSet run_experiment(const ExperimentSpec &spec);

/// $EVENTREG_OUT if set, otherwise ./eventreg-out.
[[nodiscard]] std::filesystem::path output_root();

/// Rebuilds the spec recorded in a manifest document.
[[nodiscard]] ExperimentSpec spec_from_manifest(const json &manifest);

/// Header `t,<columns>`, every `stride`-th sample (the last one always kept).
void write_trajectory_csv(std::ostream &out, const sim::Trajectory &traj, std::size_t stride = 1);

/// "key=value" with value parsed as JSON when possible, otherwise a string.
[[nodiscard]] std::pair<std::string, json> parse_override(const std::string &text);

} // namespace eventreg::experiments
