#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "scenarios.hpp"

namespace eventreg::experiments {

namespace {

constexpr const char *kVersion = "0.1.0";

struct Scenario {
    CatalogEntry entry;
    std::function<json()> defaults;
    std::function<Outcome(const json &, std::uint64_t)> run;
    std::uint64_t seed;
};

const std::vector<Scenario> &scenarios() {
    using namespace detail;
    static const std::vector<Scenario> table = {
        {{"reliability", "fig1", "FN spike-time reliability: constant step vs. shared frozen noise, 25 trials"},
         reliability_defaults, run_reliability, 1},
        {{"pendulum-tracking", "fig3", "pendulum tracking a bistable reference with an internal model; resets at 80, 130"},
         pendulum_tracking_defaults, run_pendulum_tracking, 1},
        {{"fn-rejection-dc", "fig5", "synaptic disturbance rejection under constant drive; residual phase shift"},
         fn_rejection_dc_defaults, run_fn_rejection_dc, 1},
        {{"fn-rejection-noise", "fig6", "synaptic disturbance rejection under frozen-noise drive; spike times recovered"},
         fn_rejection_noise_defaults, run_fn_rejection_noise, 1},
        {{"pendulum-entrainment", "fig7", "velocity-coupled pendula entrained by sin t, unlocked under u = 1.5"},
         pendulum_entrainment_defaults, run_pendulum_entrainment, 1},
        {{"coupling-comparison", "fig8", "heterogeneous FN pair: diffusive vs. synaptic vs. no coupling"},
         coupling_comparison_defaults, run_coupling_comparison, 1},
        {{"event-rejection", "fig10", "spurious spike rejection with a mismatched inhibitory synapse, delta sweep"},
         event_rejection_defaults, run_event_rejection, 1},
        {{"if-sync", "ifsync", "pulse-coupled integrate-and-fire network: time to synchrony over seeds"},
         if_sync_defaults, run_if_sync, 1},
        {{"event-pendulum", "fig12", "bursting network drives a pendulum; inhibitory to excitatory switch"},
         event_pendulum_defaults, run_event_pendulum, 1},
    };
    return table;
}

const Scenario &find_scenario(const std::string &id) {
    for (const auto &s : scenarios())
        if (s.entry.id == id)
            return s;
    throw ConfigError("unknown experiment '" + id + "'");
}

const char *type_name(const json &j) {
    if (j.is_number())
        return "number";
    return j.type_name();
}

bool same_kind(const json &target, const json &value) {
    if (target.is_number_float())
        return value.is_number();
    if (target.is_number_unsigned())
        return value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
    if (target.is_number_integer())
        return value.is_number_integer();
    return target.type() == value.type();
}

json *locate(json &root, const std::string &path) {
    json *node = &root;
    std::size_t begin = 0;
    while (true) {
        const std::size_t dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
        if (key.empty() || !node->is_object())
            return nullptr;
        const auto it = node->find(key);
        if (it == node->end())
            return nullptr;
        node = &*it;
        if (dot == std::string::npos)
            return node;
        begin = dot + 1;
    }
}

void apply_override(json &params, const std::string &path, const json &value) {
    json *target = locate(params, path);
    if (target == nullptr)
        throw ConfigError("override of unknown parameter '" + path + "'");
    if (!same_kind(*target, value))
        throw ConfigError("override '" + path + "' expects a " + type_name(*target) + ", got " + type_name(value));
    if (target->is_number_float() && value.is_number())
        *target = value.get<double>();
    else
        *target = value;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------

const std::vector<CatalogEntry> &catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> out;
        for (const auto &s : scenarios())
            out.push_back(s.entry);
        return out;
    }();
    return entries;
}

std::string id_for_figure(const std::string &figure) {
    for (const auto &e : catalog())
        if (e.figure == figure)
            return e.id;
    throw ConfigError("unknown figure id '" + figure + "'");
}

ExperimentSpec ExperimentSpec::from_json(const json &doc) {
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known = {"experiment", "seed", "overrides", "grid", "out_dir"};
    for (const auto &[key, value] : doc.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config: unknown field '" + key + "'");
    }
    ExperimentSpec spec;
    if (!doc.contains("experiment") || !doc["experiment"].is_string())
        throw ConfigError("config: 'experiment' must be a string");
    spec.id = doc["experiment"].get<std::string>();
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() || doc["seed"].get<std::int64_t>() < 0)
            throw ConfigError("config: 'seed' must be a non-negative integer");
        spec.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("overrides")) {
        if (!doc["overrides"].is_object())
            throw ConfigError("config: 'overrides' must be an object of dotted paths");
        for (const auto &[key, value] : doc["overrides"].items())
            spec.overrides.emplace_back(key, value);
    }
    if (doc.contains("grid")) {
        if (!doc["grid"].is_object())
            throw ConfigError("config: 'grid' must be an object");
        spec.grid = doc["grid"];
    }
    if (doc.contains("out_dir")) {
        if (!doc["out_dir"].is_string())
            throw ConfigError("config: 'out_dir' must be a string");
        spec.out_dir = doc["out_dir"].get<std::string>();
    }
    return spec;
}

json default_parameters(const std::string &id) { return find_scenario(id).defaults(); }

std::uint64_t default_seed(const std::string &id) { return find_scenario(id).seed; }

json resolve_parameters(const ExperimentSpec &spec) {
    json params = default_parameters(spec.id);
    for (const auto &[key, value] : spec.grid.items()) {
        if (key != "dt" && key != "t_end")
            throw ConfigError("grid: unknown field '" + key + "'");
        if (!value.is_number() || !(value.get<double>() > 0.0))
            throw ConfigError("grid: '" + key + "' must be a positive number");
        params["grid"][key] = value.get<double>();
    }
    for (const auto &[path, value] : spec.overrides)
        apply_override(params, path, value);
    try {
        (void)detail::grid_from(params);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    return params;
}

std::uint64_t resolve_seed(const ExperimentSpec &spec) { return spec.seed.value_or(default_seed(spec.id)); }

Outcome simulate(const ExperimentSpec &spec) {
    const auto &scenario = find_scenario(spec.id);
    const json params = resolve_parameters(spec);
    try {
        return scenario.run(params, resolve_seed(spec));
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

std::filesystem::path output_root() {
    if (const char *env = std::getenv("EVENTREG_OUT"); env != nullptr && *env != '\0')
        return env;
    return "eventreg-out";
}

void write_trajectory_csv(std::ostream &out, const sim::Trajectory &traj, std::size_t stride) {
    if (stride == 0)
        stride = 1;
    out << 't';
    for (const auto &name : traj.names())
        out << ',' << name;
    out << '\n';
    std::vector<const std::vector<double> *> cols;
    for (const auto &name : traj.names())
        cols.push_back(&traj.column(name));
    const std::size_t n = traj.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (k % stride != 0 && k + 1 != n)
            continue;
        out << format_number(traj.grid().time(k));
        for (const auto *c : cols)
            out << ',' << format_number((*c)[k]);
        out << '\n';
    }
}

std::pair<std::string, json> parse_override(const std::string &text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + text + "' is not of the form key=value");
    const std::string key = text.substr(0, eq);
    const std::string raw = text.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded())
        value = raw;
    return {key, value};
}

ExperimentSpec spec_from_manifest(const json &manifest) {
    json doc = {{"experiment", manifest.at("experiment")},
                {"seed", manifest.at("seed")},
                {"overrides", manifest.at("overrides")},
                {"grid", manifest.at("grid")}};
    return ExperimentSpec::from_json(doc);
}

ResultSet run_experiment(const ExperimentSpec &spec) {
    const json params = resolve_parameters(spec);
    const std::uint64_t seed = resolve_seed(spec);

    ResultSet rs;
    rs.out_dir = spec.out_dir.empty() ? output_root() / spec.id : spec.out_dir;
    namespace fs = std::filesystem;
    if (fs::exists(rs.out_dir) && !fs::is_directory(rs.out_dir))
        throw ConfigError("output path '" + rs.out_dir.string() + "' exists and is not a directory");
    if (fs::exists(rs.out_dir) && !fs::is_empty(rs.out_dir) && !spec.force)
        throw ConfigError("output directory '" + rs.out_dir.string() + "' is not empty (use --force)");

    Outcome outcome = simulate(spec);

    fs::create_directories(rs.out_dir);
    const std::size_t stride = detail::stride_from(params);
    std::vector<std::string> files;
    for (const auto &[name, traj] : outcome.trajectories) {
        const auto path = rs.out_dir / (name + ".csv");
        std::ofstream out(path, std::ios::binary);
        write_trajectory_csv(out, traj, stride);
        if (!out)
            throw std::runtime_error("failed writing " + path.string());
        rs.trajectories.push_back(path);
        files.push_back(path.filename().string());
    }
    rs.events = rs.out_dir / "events.csv";
    {
        std::ofstream out(rs.events, std::ios::binary);
        events::write_events_csv(out, outcome.events);
        if (!out)
            throw std::runtime_error("failed writing " + rs.events.string());
    }
    files.push_back("events.csv");

    rs.metrics = outcome.metrics;
    json metrics = json::object();
    for (const auto &[k, v] : outcome.metrics)
        metrics[k] = v;
    rs.metrics_path = rs.out_dir / "metrics.json";
    {
        std::ofstream out(rs.metrics_path, std::ios::binary);
        out << metrics.dump(2) << '\n';
    }
    files.push_back("metrics.json");

    json overrides = json::object();
    for (const auto &[k, v] : spec.overrides)
        overrides[k] = v;
    rs.manifest = {{"artifact", "eventreg"},
                   {"version", kVersion},
                   {"experiment", spec.id},
                   {"seed", seed},
                   {"overrides", overrides},
                   {"grid", params.at("grid")},
                   {"parameters", params},
                   {"outputs", files}};
    rs.manifest_path = rs.out_dir / "manifest.json";
    {
        std::ofstream out(rs.manifest_path, std::ios::binary);
        out << rs.manifest.dump(2) << '\n';
    }
    return rs;
}

// ---------------------------------------------------------------------------

namespace detail {

namespace {

std::pair<std::size_t, std::size_t> index_range(const sim::TimeGrid &grid, double begin, double end) {
    const std::size_t lo = grid.nearest_index(begin);
    std::size_t hi = grid.nearest_index(end);
    if (hi > grid.steps())
        hi = grid.steps();
    return {lo, hi};
}

} // namespace

double rms_difference(const sim::Trajectory &a, const std::string &col_a, const sim::Trajectory &b,
                      const std::string &col_b, double begin, double end) {
    const auto &x = a.column(col_a);
    const auto &y = b.column(col_b);
    const auto [lo, hi] = index_range(a.grid(), begin, end);
    double ss = 0.0;
    for (std::size_t k = lo; k < hi; ++k)
        ss += (x[k] - y[k]) * (x[k] - y[k]);
    return hi > lo ? std::sqrt(ss / static_cast<double>(hi - lo)) : 0.0;
}

double max_difference(const sim::Trajectory &a, const std::string &col_a, const sim::Trajectory &b,
                      const std::string &col_b, double begin, double end) {
    const auto &x = a.column(col_a);
    const auto &y = b.column(col_b);
    const auto [lo, hi] = index_range(a.grid(), begin, end);
    double m = 0.0;
    for (std::size_t k = lo; k < hi; ++k)
        m = std::max(m, std::abs(x[k] - y[k]));
    return m;
}

sim::Trajectory select_columns(const sim::Trajectory &traj, const std::vector<std::string> &columns) {
    sim::Trajectory out(traj.grid());
    for (const auto &c : columns)
        out.add_column(c, traj.column(c));
    return out;
}

void merge_columns(sim::Trajectory &into, const sim::Trajectory &traj, const std::string &prefix) {
    for (const auto &c : traj.names())
        into.add_column(prefix + c, traj.column(c));
}

} // namespace detail

} // namespace eventreg::experiments
