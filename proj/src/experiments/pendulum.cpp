#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

#include "scenarios.hpp"

namespace eventreg::experiments::detail {

namespace {

using models::PendulumParams;

std::string window_key(const json &w) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "window_%g_%g", w.at(0).get<double>(), w.at(1).get<double>());
    return buf;
}

double max_abs(const sim::Trajectory &traj, const std::string &column, double begin, double end) {
    const auto &grid = traj.grid();
    const auto &x = traj.column(column);
    double m = 0.0;
    for (std::size_t k = grid.nearest_index(begin); k <= grid.nearest_index(end); ++k)
        m = std::max(m, std::abs(x[k]));
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// Tracking a bistable reference pendulum through an internal model.

json pendulum_tracking_defaults() {
    return {
        {"plant", to_json(PendulumParams{1.0, 1.5})},
        {"reference", to_json(PendulumParams{1.0, 0.25})},
        {"input", {{"offset", 0.5}, {"amplitude", 0.5}, {"omega", 1.0}}},
        {"gains", {{"k1", 4.0}, {"k2", 2.0}}},
        {"injection_gain", 5.0},
        {"initial",
         {{"plant", {0.0, 0.0}}, {"reference", {0.5, 0.0}}, {"internal_model", {0.0, 0.0}}}},
        {"resets", {{{"time", 80.0}, {"omega", 3.0}}, {{"time", 130.0}, {"omega", 0.0}}}},
        {"windows", {{60.0, 80.0}, {110.0, 130.0}, {160.0, 200.0}}},
        {"compare_without_injection", true},
        {"grid", grid_json(1e-3, 200.0)},
        {"output", {{"stride", 10}}},
    };
}

Outcome run_pendulum_tracking(const json &p, std::uint64_t) {
    const PendulumParams plant = pendulum_from(p.at("plant"));
    const PendulumParams ref = pendulum_from(p.at("reference"));
    const control::TrackingGains gains{p.at("gains").at("k1").get<double>(), p.at("gains").at("k2").get<double>()};
    gains.validate(plant);
    const auto &in = p.at("input");
    const sim::SignalSpec u_ref = sim::SinusoidSignal{in.at("offset").get<double>(), in.at("amplitude").get<double>(),
                                                      in.at("omega").get<double>(), 0.0};
    const auto grid = grid_from(p);

    std::vector<sim::Reset> resets;
    for (const auto &r : p.at("resets")) {
        sim::Reset reset{r.at("time").get<double>(), {}};
        if (r.contains("theta"))
            reset.assignment.emplace_back(2, r.at("theta").get<double>());
        if (r.contains("omega"))
            reset.assignment.emplace_back(3, r.at("omega").get<double>());
        resets.push_back(std::move(reset));
    }
    const sim::ResetSchedule schedule(std::move(resets));

    const auto &init = p.at("initial");
    const sim::State x0{init.at("plant").at(0).get<double>(),          init.at("plant").at(1).get<double>(),
                        init.at("reference").at(0).get<double>(),      init.at("reference").at(1).get<double>(),
                        init.at("internal_model").at(0).get<double>(), init.at("internal_model").at(1).get<double>()};

    // x = (theta, omega, theta_r, omega_r, theta_hat, omega_hat)
    auto run = [&](double injection) {
        auto control_of = [&](double t, std::span<const double> x) {
            return control::tracking_control(x[0] - x[4], x[1] - x[5], x[4], x[5], sim::eval_signal(u_ref, t), plant,
                                             ref, gains);
        };
        sim::System sys{{"theta", "omega", "theta_r", "omega_r", "theta_hat", "omega_hat"},
                        [&, injection](double t, std::span<const double> x, std::span<double> dx) {
                            const double ur = sim::eval_signal(u_ref, t);
                            const auto pl = models::pendulum_dynamics({x[0], x[1]}, control_of(t, x), plant);
                            const auto rf = models::pendulum_dynamics({x[2], x[3]}, ur, ref);
                            const auto im =
                                control::internal_model_dynamics({x[4], x[5]}, ur, ref, injection, x[4] - x[2]);
                            dx[0] = pl[0];
                            dx[1] = pl[1];
                            dx[2] = rf[0];
                            dx[3] = rf[1];
                            dx[4] = im[0];
                            dx[5] = im[1];
                        },
                        {"e", "u"},
                        [&](double t, std::span<const double> x, std::span<double> y) {
                            y[0] = x[0] - x[2];
                            y[1] = control_of(t, x);
                        }};
        return sim::integrate(sys, x0, grid, schedule);
    };

    Outcome out;
    sim::Trajectory with = run(p.at("injection_gain").get<double>());
    const bool compare = p.at("compare_without_injection").get<bool>();
    std::optional<sim::Trajectory> without;
    if (compare)
        without = run(0.0);

    for (const auto &w : p.at("windows")) {
        const double b = w.at(0).get<double>();
        const double e = w.at(1).get<double>();
        const std::string key = window_key(w);
        out.metrics[key + ".max_error"] = max_abs(with, "e", b, e);
        const auto &th = with.column("theta_r");
        const auto [lo, hi] = std::minmax_element(th.begin() + static_cast<std::ptrdiff_t>(grid.nearest_index(b)),
                                                  th.begin() + static_cast<std::ptrdiff_t>(grid.nearest_index(e)) + 1);
        out.metrics[key + ".reference_excursion"] = *hi - *lo;
        if (without)
            out.metrics[key + ".max_error_without_injection"] = max_abs(*without, "e", b, e);
    }

    if (without)
        with.add_column("e_without_injection", without->column("e"));
    out.trajectories.emplace_back("trajectory", std::move(with));
    return out;
}

// ---------------------------------------------------------------------------
// Entrainment of velocity-coupled pendula by a common drive.

json pendulum_entrainment_defaults() {
    return {
        {"single", to_json(PendulumParams{1.0, 1.0})},
        {"pendula", {to_json(PendulumParams{1.0, 1.0}), to_json(PendulumParams{1.0, 1.3})}},
        {"coupling", 0.5},
        {"drive", {{"amplitude", 1.0}, {"omega", 1.0}}},
        {"constant_interval", {33.0, 66.0}},
        {"constant_level", 1.5},
        {"initial", {{0.0, 0.0}, {0.3, 0.0}, {-0.3, 0.0}}},
        {"events", {{"threshold", 0.0}, {"refractory", 1.0}}},
        {"locked_windows", {{10.0, 33.0}, {80.0, 100.0}}},
        {"unlocked_windows", {{33.0, 66.0}}},
        {"lock_tolerance", 0.05},
        {"grid", grid_json(1e-3, 100.0)},
        {"output", {{"stride", 10}}},
    };
}

Outcome run_pendulum_entrainment(const json &p, std::uint64_t) {
    const PendulumParams single = pendulum_from(p.at("single"));
    const PendulumParams p1 = pendulum_from(p.at("pendula").at(0));
    const PendulumParams p2 = pendulum_from(p.at("pendula").at(1));
    const double k = p.at("coupling").get<double>();
    const auto grid = grid_from(p);
    const auto &dj = p.at("drive");
    const sim::SinusoidSignal sine{0.0, dj.at("amplitude").get<double>(), dj.at("omega").get<double>(), 0.0};
    const double c_begin = p.at("constant_interval").at(0).get<double>();
    const double c_end = p.at("constant_interval").at(1).get<double>();
    const sim::SignalSpec drive = sim::PiecewiseSignal{
        {{-1.0, c_begin}, {c_begin, c_end}, {c_end, grid.t_end() + 1.0}},
        {sine, sim::ConstantSignal{p.at("constant_level").get<double>()}, sine}};

    sim::System sys{{"theta_single", "omega_single", "theta_1", "omega_1", "theta_2", "omega_2"},
                    [&](double t, std::span<const double> x, std::span<double> dx) {
                        const double u = sim::eval_signal(drive, t);
                        const auto s = models::pendulum_dynamics({x[0], x[1]}, u, single);
                        const auto a =
                            models::pendulum_dynamics({x[2], x[3]}, u + control::velocity_coupling(x[3], x[5], k), p1);
                        const auto b =
                            models::pendulum_dynamics({x[4], x[5]}, u + control::velocity_coupling(x[5], x[3], k), p2);
                        dx[0] = s[0];
                        dx[1] = s[1];
                        dx[2] = a[0];
                        dx[3] = a[1];
                        dx[4] = b[0];
                        dx[5] = b[1];
                    },
                    {"u", "sin_theta_single", "sin_theta_1", "sin_theta_2"},
                    [&](double t, std::span<const double> x, std::span<double> y) {
                        y[0] = sim::eval_signal(drive, t);
                        y[1] = std::sin(x[0]);
                        y[2] = std::sin(x[2]);
                        y[3] = std::sin(x[4]);
                    }};
    const auto &init = p.at("initial");
    sim::State x0;
    for (std::size_t i = 0; i < 3; ++i) {
        x0.push_back(init.at(i).at(0).get<double>());
        x0.push_back(init.at(i).at(1).get<double>());
    }
    sim::Trajectory traj = sim::integrate(sys, x0, grid);

    const double threshold = p.at("events").at("threshold").get<double>();
    const double refractory = p.at("events").at("refractory").get<double>();
    auto train = [&](const std::string &col, int id, const std::string &label) {
        auto e = events::detect_events(traj, col, threshold, events::Direction::up, refractory);
        e.trial_id = id;
        e.label = label;
        return e;
    };
    const auto single_events = train("sin_theta_single", 0, "single");
    const auto e1 = train("sin_theta_1", 1, "pendulum_1");
    const auto e2 = train("sin_theta_2", 2, "pendulum_2");
    const auto eu = train("u", 3, "drive");

    Outcome out;
    const double tol = p.at("lock_tolerance").get<double>();
    auto assess = [&](const json &w, const std::string &prefix) {
        const double b = w.at(0).get<double>();
        const double e = w.at(1).get<double>();
        const std::string key = prefix + window_key(w);
        std::optional<double> offset;
        try {
            offset = events::phase_offset(e2.window(b, e), e1.window(b, e));
        } catch (const events::MetricError &) {
        }
        out.metrics[key + ".phase_defined"] = offset ? 1.0 : 0.0;
        if (offset)
            out.metrics[key + ".phase_offset"] = *offset;
        out.metrics[key + ".locked"] = offset && std::abs(*offset) < tol ? 1.0 : 0.0;
    };
    for (const auto &w : p.at("locked_windows"))
        assess(w, "");
    for (const auto &w : p.at("unlocked_windows"))
        assess(w, "");
    {
        const auto &w = p.at("locked_windows").at(0);
        const double b = w.at(0).get<double>();
        const double e = w.at(1).get<double>();
        try {
            out.metrics["single.phase_to_drive"] =
                events::phase_offset(single_events.window(b, e), eu.window(b, e));
            out.metrics["single.entrained"] = 1.0;
        } catch (const events::MetricError &) {
            out.metrics["single.entrained"] = 0.0;
        }
    }
    out.events = {single_events, e1, e2, eu};
    out.trajectories.emplace_back("trajectory", std::move(traj));
    return out;
}

} // namespace eventreg::experiments::detail
