#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>

#include "scenarios.hpp"

namespace eventreg::experiments::detail {

namespace {

using models::HCONetwork;
using models::HCONeuronParams;
using models::kHcoSize;

json to_json(const HCONeuronParams &n) {
    return {{"tau_f", n.tau_f},         {"tau_s", n.tau_s},         {"tau_us", n.tau_us},
            {"g_f_minus", n.g_f_minus}, {"g_s_plus", n.g_s_plus},   {"g_s_minus", n.g_s_minus},
            {"g_us_plus", n.g_us_plus}};
}

HCONeuronParams neuron_from(const json &j) {
    HCONeuronParams n{j.at("tau_f").get<double>(),     j.at("tau_s").get<double>(),
                      j.at("tau_us").get<double>(),    j.at("g_f_minus").get<double>(),
                      j.at("g_s_plus").get<double>(),  j.at("g_s_minus").get<double>(),
                      j.at("g_us_plus").get<double>()};
    n.validate();
    return n;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Online up-crossing detector with linear interpolation and refractory.
struct CrossingDetector {
    CrossingDetector(double threshold_, double refractory_) : threshold(threshold_), refractory(refractory_) {}

    double threshold;
    double refractory;
    double previous = 0.0;
    double previous_t = 0.0;
    bool primed = false;
    std::vector<double> times;

    std::optional<double> feed(double t, double value) {
        std::optional<double> event;
        if (primed && previous <= threshold && value > threshold) {
            const double te = previous_t + (threshold - previous) / (value - previous) * (t - previous_t);
            if (times.empty() || te - times.back() >= refractory) {
                times.push_back(te);
                event = te;
            }
        }
        previous = value;
        previous_t = t;
        primed = true;
        return event;
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Bursting network driving a pendulum through two motors; a pulse-based
// phase controller feeds pendulum events back into neuron 1.

json event_pendulum_defaults() {
    const HCONetwork net = models::hco_preset("paper-hco");
    return {
        {"neuron", to_json(net.neurons[0])},
        {"synapse_gain", std::abs(net.g_syn[0][2])},
        {"time_scale", 0.01},
        {"switch_time", 300.0},
        {"pendulum", to_json(models::PendulumParams{1.0, 1.5})},
        {"motor", {{"g_m", 0.6}, {"v_th", 0.0}, {"polarity_inhibitory", 1.0}, {"polarity_excitatory", -1.0}}},
        {"controller",
         {{"amplitude", 0.5}, {"pulse_width", 0.5}, {"burst_threshold", -1.0}, {"gain", 1.0}, {"target_phase", 0.0},
          {"neuron", 0}}},
        {"burst_refractory", 3.0},
        {"theta_events", {{"threshold", 0.0}, {"refractory", 2.0}}},
        {"initial", {-1.0, -1.0, -1.0, -1.2, -1.1, -0.9, 1.0, 0.5, -0.5, 0.8, 0.4, -0.6}},
        {"transient", 100.0},
        {"lock_window_fraction", 0.1},
        {"grid", grid_json(1e-3, 700.0)},
        {"output", {{"stride", 20}}},
    };
}

Outcome run_event_pendulum(const json &p, std::uint64_t) {
    const double scale = p.at("time_scale").get<double>();
    const HCONeuronParams neuron = neuron_from(p.at("neuron")).time_scaled(scale);
    const double gain = p.at("synapse_gain").get<double>();
    HCONetwork inhibitory;
    inhibitory.neurons.fill(neuron);
    for (std::size_t i = 0; i < kHcoSize; ++i)
        for (std::size_t j = 0; j < kHcoSize; ++j)
            inhibitory.g_syn[i][j] = (i / 2 != j / 2) ? -gain : 0.0;
    inhibitory.validate();
    const HCONetwork excitatory = inhibitory.with_synapse_sign(+1.0);
    const double t_switch = p.at("switch_time").get<double>();
    const auto pend = pendulum_from(p.at("pendulum"));
    const auto &mj = p.at("motor");
    const double g_m = mj.at("g_m").get<double>();
    const double v_th = mj.at("v_th").get<double>();
    const double pol_inh = mj.at("polarity_inhibitory").get<double>();
    const double pol_exc = mj.at("polarity_excitatory").get<double>();
    const auto &cj = p.at("controller");
    const control::PhaseControllerConfig cfg{cj.at("amplitude").get<double>(), cj.at("pulse_width").get<double>(),
                                             cj.at("burst_threshold").get<double>(), cj.at("gain").get<double>(),
                                             cj.at("target_phase").get<double>()};
    const auto controlled = cj.at("neuron").get<std::size_t>();
    if (controlled >= kHcoSize)
        throw std::invalid_argument("controller.neuron must index one of the four neurons");
    const auto grid = grid_from(p);
    const double burst_refractory = p.at("burst_refractory").get<double>();

    control::PhaseController controller(cfg);
    CrossingDetector burst{cfg.burst_threshold, burst_refractory};
    CrossingDetector theta_event{p.at("theta_events").at("threshold").get<double>(),
                                 p.at("theta_events").at("refractory").get<double>()};

    // x = (v, v_s, v_us) x 4, then (theta, omega)
    constexpr std::size_t th = 3 * kHcoSize;
    auto motor = [&](double t, std::span<const double> x) {
        const double polarity = t < t_switch ? pol_inh : pol_exc;
        return control::hco_motor_map(x[0], x[6], g_m, v_th, polarity);
    };
    sim::System sys;
    for (std::size_t i = 0; i < kHcoSize; ++i) {
        const std::string n = std::to_string(i + 1);
        sys.state_names.insert(sys.state_names.end(), {"v" + n, "v_s" + n, "v_us" + n});
    }
    sys.state_names.insert(sys.state_names.end(), {"theta", "omega"});
    sys.field = [&](double t, std::span<const double> x, std::span<double> dx) {
        std::array<double, kHcoSize> i_p{};
        i_p[controlled] = controller.current(t);
        models::hco_network_dynamics(t < t_switch ? inhibitory : excitatory, x.first(th), i_p, dx.first(th));
        const auto d = models::pendulum_dynamics({x[th], x[th + 1]}, motor(t, x), pend);
        dx[th] = d[0];
        dx[th + 1] = d[1];
    };
    sys.output_names = {"u", "i_p"};
    sys.outputs = [&](double t, std::span<const double> x, std::span<double> y) {
        y[0] = motor(t, x);
        y[1] = controller.current(t);
    };
    const auto init = p.at("initial").get<std::vector<double>>();
    if (init.size() != th)
        throw std::invalid_argument("initial must list (v, v_s, v_us) for the four neurons");
    sim::State x0 = init;
    x0.push_back(0.0);
    x0.push_back(0.0);

    const auto hook = [&](std::size_t, double t, std::span<double> x) {
        if (const auto tb = burst.feed(t, x[3 * controlled + 1]))
            controller.on_burst_onset(*tb);
        if (const auto te = theta_event.feed(t, x[th]))
            controller.on_measured_event(*te);
    };
    // Prime the detectors with the initial state.
    hook(0, grid.t0(), x0);
    sim::Trajectory traj = sim::integrate(sys, x0, grid, {}, hook);

    // Offline analysis.
    Outcome out;
    std::vector<events::EventTrain> bursts;
    for (std::size_t i = 0; i < kHcoSize; ++i) {
        auto e = events::detect_events(traj, "v_s" + std::to_string(i + 1), cfg.burst_threshold,
                                       events::Direction::up, burst_refractory);
        e.trial_id = static_cast<int>(i);
        e.label = "burst_" + std::to_string(i + 1);
        bursts.push_back(std::move(e));
    }
    events::EventTrain theta_train{static_cast<int>(kHcoSize), "theta", theta_event.times};

    const double transient = p.at("transient").get<double>();
    const double end = grid.t_end() + 1.0;
    struct Phase {
        std::string name;
        double begin;
        double end;
    };
    const std::vector<Phase> phases{{"inhibitory", transient, t_switch},
                                    {"excitatory", t_switch + transient, end}};
    const auto &ref = bursts[controlled];
    for (const auto &ph : phases) {
        const auto b0 = bursts[0].window(ph.begin, ph.end);
        const auto b2 = bursts[2].window(ph.begin, ph.end);
        const std::string k = ph.name;
        out.metrics[k + ".bursts"] = static_cast<double>(b0.size());
        try {
            out.metrics[k + ".burst_period"] = b0.mean_interval();
            out.metrics[k + ".phase_offset_1_3"] = events::phase_offset(b2, b0);
            out.metrics[k + ".phase_defined"] = 1.0;
        } catch (const events::MetricError &) {
            out.metrics[k + ".phase_defined"] = 0.0;
        }
        out.metrics[k + ".peak_abs_theta"] =
            [&] {
                const auto &x = traj.column("theta");
                double m = 0.0;
                for (std::size_t s = grid.nearest_index(ph.begin); s <= grid.nearest_index(std::min(ph.end, grid.t_end())); ++s)
                    m = std::max(m, std::abs(x[s]));
                return m;
            }();
    }

    // Locking of theta events to the controlled neuron's bursts before the
    // switch: subtract the median lag, then match within a fraction of the
    // burst period.
    {
        const auto rb = ref.window(transient, t_switch);
        const auto te = theta_train.window(transient, t_switch);
        out.metrics["inhibitory.theta_events"] = static_cast<double>(te.size());
        if (rb.size() >= 2 && !te.empty()) {
            const double period = rb.mean_interval();
            std::vector<double> lags;
            for (double t : te.times) {
                const auto it = std::upper_bound(rb.times.begin(), rb.times.end(), t);
                if (it != rb.times.begin())
                    lags.push_back(t - *(it - 1));
            }
            const double lag = lags.empty() ? 0.0 : median(lags);
            events::EventTrain shifted = te;
            for (double &t : shifted.times)
                t -= lag;
            const auto report =
                events::match_trains(rb, shifted, p.at("lock_window_fraction").get<double>() * period);
            out.metrics["inhibitory.theta_lag"] = lag;
            out.metrics["inhibitory.theta_matched_fraction"] = report.matched_fraction;
            out.metrics["inhibitory.theta_extra"] = static_cast<double>(report.extra_test);
        } else {
            out.metrics["inhibitory.theta_matched_fraction"] = 0.0;
        }
    }
    const double before = out.metrics["inhibitory.peak_abs_theta"];
    out.metrics["peak_theta_ratio"] = before > 0.0 ? out.metrics["excitatory.peak_abs_theta"] / before : 0.0;

    out.events = std::move(bursts);
    out.events.push_back(std::move(theta_train));
    out.trajectories.emplace_back("trajectory", std::move(traj));
    return out;
}

// ---------------------------------------------------------------------------
// Pulse-coupled integrate-and-fire network: time to a single network-wide
// avalanche from random initial phases.

json if_sync_defaults() {
    return {
        {"drive", 1.0},
        {"leak", 0.5},
        {"sizes", {10}},
        {"epsilons", {0.05, 0.0}},
        {"seeds", 100},
        {"max_periods", 50.0},
        {"grid", grid_json(0.01, 80.0)},
        {"output", {{"stride", 1}}},
    };
}

Outcome run_if_sync(const json &p, std::uint64_t seed) {
    const double drive = p.at("drive").get<double>();
    const double leak = p.at("leak").get<double>();
    const auto sizes = p.at("sizes").get<std::vector<std::size_t>>();
    const auto epsilons = p.at("epsilons").get<std::vector<double>>();
    const int seeds = p.at("seeds").get<int>();
    const double max_periods = p.at("max_periods").get<double>();
    const auto grid = grid_from(p);
    const double period = models::if_time_to_threshold(0.0, drive, leak);

    Outcome out;
    out.metrics["period"] = period;
    bool recorded = false;
    for (std::size_t n : sizes) {
        for (double eps : epsilons) {
            char key[48];
            std::snprintf(key, sizeof key, "n%zu_eps%g", n, eps);
            int synced = 0;
            int synced_in_time = 0;
            double worst = 0.0;
            double total = 0.0;
            for (int s = 0; s < seeds; ++s) {
                const std::uint64_t stream = sim::derive_seed(sim::derive_seed(seed, kTagInitial), static_cast<std::uint64_t>(s));
                auto net = models::IFNetwork::identical(n, drive, leak, eps);
                for (std::size_t i = 0; i < n; ++i)
                    net.x[i] = sim::counter_uniform(stream, i);
                net.validate();
                const bool record = !recorded;
                std::vector<std::vector<double>> cols(record ? n : 0, std::vector<double>(grid.steps() + 1));
                std::vector<events::EventTrain> trains;
                if (record) {
                    for (std::size_t i = 0; i < n; ++i) {
                        cols[i][0] = net.x[i];
                        trains.push_back({static_cast<int>(i), "unit_" + std::to_string(i + 1), {}});
                    }
                }
                std::optional<double> t_sync;
                for (std::size_t k = 0; k < grid.steps(); ++k) {
                    const auto result = models::if_step(net, grid.dt());
                    for (const auto &a : result.avalanches) {
                        const double t = grid.time(k) + a.time;
                        if (!t_sync && a.units.size() == n)
                            t_sync = t;
                        if (record)
                            for (std::size_t u : a.units)
                                trains[u].times.push_back(t);
                    }
                    if (record)
                        for (std::size_t i = 0; i < n; ++i)
                            cols[i][k + 1] = net.x[i];
                    else if (t_sync)
                        break;
                }
                if (t_sync) {
                    ++synced;
                    const double periods = *t_sync / period;
                    worst = std::max(worst, periods);
                    total += periods;
                    if (periods < max_periods)
                        ++synced_in_time;
                }
                if (record) {
                    sim::Trajectory traj(grid);
                    for (std::size_t i = 0; i < n; ++i)
                        traj.add_column("x" + std::to_string(i + 1), std::move(cols[i]));
                    out.trajectories.emplace_back(std::string("seed0_") + key, std::move(traj));
                    out.events = std::move(trains);
                    recorded = true;
                }
            }
            out.metrics[std::string(key) + ".seeds"] = seeds;
            out.metrics[std::string(key) + ".synced"] = synced;
            out.metrics[std::string(key) + ".synced_within_max_periods"] = synced_in_time;
            if (synced > 0) {
                out.metrics[std::string(key) + ".mean_periods_to_sync"] = total / synced;
                out.metrics[std::string(key) + ".max_periods_to_sync"] = worst;
            }
        }
    }
    return out;
}

} // namespace eventreg::experiments::detail
