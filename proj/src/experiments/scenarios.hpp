#pragma once

#include <cstdint>
#include <string>

#include "eventreg/controllers.hpp"
#include "eventreg/experiments.hpp"
#include "eventreg/models.hpp"

namespace eventreg::experiments::detail {

// Each scenario exposes its default parameter tree and a runner taking the
// resolved tree.
json reliability_defaults();
Outcome run_reliability(const json &p, std::uint64_t seed);

json pendulum_tracking_defaults();
Outcome run_pendulum_tracking(const json &p, std::uint64_t seed);

json fn_rejection_dc_defaults();
Outcome run_fn_rejection_dc(const json &p, std::uint64_t seed);

json fn_rejection_noise_defaults();
Outcome run_fn_rejection_noise(const json &p, std::uint64_t seed);

json pendulum_entrainment_defaults();
Outcome run_pendulum_entrainment(const json &p, std::uint64_t seed);

json coupling_comparison_defaults();
Outcome run_coupling_comparison(const json &p, std::uint64_t seed);

json event_rejection_defaults();
Outcome run_event_rejection(const json &p, std::uint64_t seed);

json if_sync_defaults();
Outcome run_if_sync(const json &p, std::uint64_t seed);

json event_pendulum_defaults();
Outcome run_event_pendulum(const json &p, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Parameter-tree helpers shared by the scenarios.

inline json grid_json(double dt, double t_end) { return {{"dt", dt}, {"t_end", t_end}}; }

inline sim::TimeGrid grid_from(const json &p) {
    const auto &g = p.at("grid");
    return {0.0, g.at("t_end").get<double>(), g.at("dt").get<double>()};
}

inline json to_json(const models::FNParams &f) { return {{"C", f.C}, {"L", f.L}, {"a", f.a}, {"b", f.b}}; }

inline models::FNParams fn_from(const json &j) {
    models::FNParams f{j.at("C").get<double>(), j.at("L").get<double>(), j.at("a").get<double>(),
                       j.at("b").get<double>()};
    f.validate();
    return f;
}

inline json to_json(const models::SynapseParams &s) {
    return {{"tau", s.tau}, {"g", s.g}, {"E_syn", s.E_syn}, {"h_gain", s.h_gain}, {"h_center", s.h_center}};
}

inline models::SynapseParams synapse_from(const json &j) {
    models::SynapseParams s{j.at("tau").get<double>(), j.at("g").get<double>(), j.at("E_syn").get<double>(),
                            j.at("h_gain").get<double>(), j.at("h_center").get<double>()};
    s.validate();
    return s;
}

inline json to_json(const models::PendulumParams &p) { return {{"a", p.a}, {"c", p.c}}; }

inline models::PendulumParams pendulum_from(const json &j) {
    models::PendulumParams p{j.at("a").get<double>(), j.at("c").get<double>()};
    p.validate();
    return p;
}

inline json frozen_noise_json(double mean, double std, double hold) {
    return {{"mean", mean}, {"std", std}, {"hold", hold}};
}

inline sim::FrozenNoiseSignal frozen_noise_from(const json &j, std::uint64_t seed) {
    return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("hold").get<double>(), seed};
}

/// Bit-flag style tags for derive_seed so streams stay independent.
enum StreamTag : std::uint64_t {
    kTagDrive = 1,
    kTagPresynaptic = 2,
    kTagPostsynaptic = 3,
    kTagTrial = 100,
    kTagInitial = 200,
};

inline std::size_t stride_from(const json &p) { return p.at("output").at("stride").get<std::size_t>(); }

/// Root-mean-square difference of two equal-length series over [begin, end).
double rms_difference(const sim::Trajectory &a, const std::string &col_a, const sim::Trajectory &b,
                      const std::string &col_b, double begin, double end);

/// Maximum absolute difference over [begin, end).
double max_difference(const sim::Trajectory &a, const std::string &col_a, const sim::Trajectory &b,
                      const std::string &col_b, double begin, double end);

/// Trajectory restricted to the listed columns (and the grid).
sim::Trajectory select_columns(const sim::Trajectory &traj, const std::vector<std::string> &columns);

/// Prefix every column of `traj` with `prefix` and append to `into`.
void merge_columns(sim::Trajectory &into, const sim::Trajectory &traj, const std::string &prefix);

} // namespace eventreg::experiments::detail
