#include <cmath>
#include <numbers>

#include <doctest.h>

#include "eventreg/controllers.hpp"
#include "eventreg/sim_core.hpp"

using namespace eventreg;
using namespace eventreg::control;
using models::PendulumParams;
using models::SynapseParams;

namespace {

constexpr double kTrivial = 1e-12;

} // namespace

TEST_CASE("tracking law examples") {
    const PendulumParams plant{1.0, 0.5};
    const TrackingGains gains{4.0, 2.0};
    CHECK(std::abs(tracking_control(0.0, 0.0, 0.8, -0.3, 0.7, plant, plant, gains) - 0.7) <= kTrivial);
    const PendulumParams ref{2.0, 0.5};
    CHECK(std::abs(tracking_control(0.0, 0.0, std::numbers::pi / 2, 0.0, 0.0, plant, ref, gains) + 1.0) <= kTrivial);
    CHECK(std::abs(tracking_control(0.1, 0.0, 1.234, 0.0, 0.0, plant, plant, gains) + 0.4) <= kTrivial);
}

TEST_CASE("tracking gains enforce the stated stability region") {
    const PendulumParams plant{1.0, 1.5};
    CHECK_NOTHROW((TrackingGains{4.0, 2.0}).validate(plant));
    CHECK_NOTHROW((TrackingGains{1.5, -1.4}).validate(plant));
    CHECK_THROWS((TrackingGains{1.0, 2.0}).validate(plant));
    CHECK_THROWS((TrackingGains{4.0, -1.5}).validate(plant));
}

TEST_CASE("internal model without injection is the plain reference copy") {
    const PendulumParams ref{1.0, 0.25};
    const auto a = internal_model_dynamics({0.3, -0.2}, 0.6, ref, 0.0, 5.0);
    const auto b = models::pendulum_dynamics({0.3, -0.2}, 0.6, ref);
    CHECK(a == b);
    const auto c = internal_model_dynamics({0.3, -0.2}, 0.6, ref, 2.0, 0.1);
    CHECK(std::abs(c[0] - (b[0] - 0.2)) <= kTrivial);
    CHECK(std::abs(c[1] - (b[1] - 0.2)) <= kTrivial);
}

TEST_CASE("observer compensation cancels the disturbance when the estimate is exact") {
    const SynapseParams p{1.0, 1.7, -2.0, 5.0, 1.5};
    for (double z : {0.0, 0.2, 0.9})
        for (double v : {-2.0, -1.2, 0.0, 1.9}) {
            CHECK(std::abs(disturbance_compensation(z, v, p) + models::synapse_current(z, v, p)) <= kTrivial);
        }
    CHECK(std::abs(disturbance_compensation(0.0, 1.3, p)) <= kTrivial);
    SynapseParams big = p;
    big.g = 1e6;
    CHECK(std::abs(disturbance_compensation(0.0, 1.3, big)) <= kTrivial);
}

TEST_CASE("observer error decays at rate 1/tau") {
    for (double tau : {1.0, 2.5}) {
        SynapseParams p{tau, 1.0, -2.0, 2.0, -1.0};
        const double w = 0.4;
        const sim::System sys{{"z", "z_hat"}, [&](double, std::span<const double> x, std::span<double> dx) {
                                  dx[0] = models::synapse_activation_dynamics(x[0], w, p);
                                  dx[1] = disturbance_observer_step(x[1], w, p);
                              }};
        const double z0 = 0.2;
        const sim::TimeGrid grid(0.0, 2.0 * tau, 1e-3);
        const auto traj = sim::integrate(sys, {z0, z0 + 0.3}, grid);
        const auto &z = traj.column("z");
        const auto &zh = traj.column("z_hat");
        // Oracle: e(t) = 0.3 exp(-t / tau).
        CHECK(std::abs((zh.back() - z.back()) - 0.3 * std::exp(-2.0)) < 1e-6);

        // Least-squares fit of log e against t.
        double st = 0, se = 0, stt = 0, ste = 0, see = 0;
        const auto n = static_cast<double>(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double t = grid.time(k);
            const double le = std::log(zh[k] - z[k]);
            st += t;
            se += le;
            stt += t * t;
            ste += t * le;
            see += le * le;
        }
        const double slope = (n * ste - st * se) / (n * stt - st * st);
        const double r = (n * ste - st * se) / std::sqrt((n * stt - st * st) * (n * see - se * se));
        CHECK(std::abs(slope + 1.0 / tau) < 1e-6);
        CHECK(r * r > 0.999);
    }
}

TEST_CASE("matched observer keeps the compensated neuron bit-identical to the undisturbed one") {
    const auto fn = models::fn_preset("fn-classic");
    const SynapseParams syn{1.0, 1.0, -2.0, 5.0, 1.5};
    const sim::SignalSpec pre_drive = sim::ConstantSignal{0.5};
    const sim::SignalSpec drive = sim::FrozenNoiseSignal{0.2, 0.5, 1.0, 11};
    // x = (v_pre, iL_pre, z, z_hat, v_free, iL_free, v_comp, iL_comp)
    const sim::System sys{
        {"vp", "ip", "z", "zh", "vf", "if", "vc", "ic"}, [&](double t, std::span<const double> x, std::span<double> dx) {
            const auto pre = models::fn_dynamics({x[0], x[1]}, sim::eval_signal(pre_drive, t), 0.0, 0.0, fn);
            const double I = sim::eval_signal(drive, t);
            const auto free = models::fn_dynamics({x[4], x[5]}, I, 0.0, 0.0, fn);
            const double d = models::synapse_current(x[2], x[6], syn);
            const double u = disturbance_compensation(x[3], x[6], syn);
            const auto comp = models::fn_dynamics({x[6], x[7]}, I, u, d, fn);
            dx[0] = pre[0];
            dx[1] = pre[1];
            dx[2] = models::synapse_activation_dynamics(x[2], x[0], syn);
            dx[3] = disturbance_observer_step(x[3], x[0], syn);
            dx[4] = free[0];
            dx[5] = free[1];
            dx[6] = comp[0];
            dx[7] = comp[1];
        }};
    const auto traj = sim::integrate(sys, {-1.2, -0.6, 0.1, 0.1, -1.1, -0.5, -1.1, -0.5}, sim::TimeGrid(0.0, 200.0, 1e-2));
    CHECK(traj.column("vf") == traj.column("vc"));
    CHECK(traj.column("if") == traj.column("ic"));
    double vmax = -10;
    for (double v : traj.column("vp"))
        vmax = std::max(vmax, v);
    CHECK(vmax > 1.5); // the disturbance was actually active
}

TEST_CASE("mismatched synapse examples") {
    const SynapseParams nominal{1.0, 2.0, -2.0, 5.0, 1.5};
    const auto same = uncertain_synapse(nominal, {0.0});
    CHECK(same.g == nominal.g);
    CHECK(same.E_syn == nominal.E_syn);
    CHECK(same.tau == nominal.tau);
    CHECK(same.h_gain == nominal.h_gain);
    CHECK(same.h_center == nominal.h_center);
    CHECK(std::abs(uncertain_synapse(nominal, {0.1}).g - 2.2) <= kTrivial);
    const auto m = uncertain_synapse(nominal, {0.2});
    CHECK(std::abs(m.g - 2.4) <= kTrivial);
    CHECK(std::abs(m.E_syn + 2.4) <= kTrivial);
    CHECK(std::abs(m.tau - 1.2) <= kTrivial);
    CHECK(m.h_center == nominal.h_center);
    CHECK_THROWS_AS((void)uncertain_synapse(nominal, {-1.0}), std::domain_error);
}

TEST_CASE("mismatched synapse is continuous in delta") {
    const SynapseParams nominal{1.0, 2.0, -2.0, 5.0, 1.5};
    for (double d : {-0.5, 0.0, 0.1, 0.3}) {
        const auto a = uncertain_synapse(nominal, {d});
        const auto b = uncertain_synapse(nominal, {d + 1e-9});
        CHECK(std::abs(a.g - b.g) < 1e-8);
        CHECK(std::abs(a.E_syn - b.E_syn) < 1e-8);
        CHECK(std::abs(a.tau - b.tau) < 1e-8);
    }
}

TEST_CASE("coupling law examples") {
    auto [u1, u2] = diffusive_coupling(0.7, 0.7, 3.0, 3.0);
    CHECK(std::abs(u1) <= kTrivial);
    CHECK(std::abs(u2) <= kTrivial);
    std::tie(u1, u2) = diffusive_coupling(1.0, 0.0, 3.0, 3.0);
    CHECK(std::abs(u1 + 3.0) <= kTrivial);
    CHECK(std::abs(u2 + 3.0) <= kTrivial);
    std::tie(u1, u2) = diffusive_coupling(1.0, -0.4, 3.0, 0.0);
    CHECK(std::abs(u2) <= kTrivial);

    CHECK(std::abs(velocity_coupling(0.3, 0.3, 2.0)) <= kTrivial);
    CHECK(std::abs(velocity_coupling(0.0, 0.5, 2.0) - 1.0) <= kTrivial);
    for (double wi : {-1.0, 0.2})
        for (double wj : {0.5, 3.0})
            CHECK(std::abs(velocity_coupling(wi, wj, 1.7) + velocity_coupling(wj, wi, 1.7)) <= kTrivial);
}

TEST_CASE("synaptic coupling current follows the synapse current") {
    SynapseParams p;
    p.g = 2.0;
    p.E_syn = -2.0;
    CHECK(std::abs(synaptic_coupling_current(0.4, p.E_syn, p)) <= kTrivial);
    CHECK(std::abs(synaptic_coupling_current(0.5, 0.0, p) - 2.0) <= kTrivial);
    SynapseParams off = p;
    off.g = 0.0;
    CHECK(std::abs(synaptic_coupling_current(0.5, 1.0, off)) <= kTrivial);
}

TEST_CASE("synaptic coupling is unidirectional") {
    const auto fn = models::fn_preset("fn-classic");
    const SynapseParams syn{1.0, 1.0, -2.0, 5.0, 0.5};
    auto run = [&](bool coupled) {
        const sim::System sys{{"v1", "i1", "v2", "i2", "z"}, [&, coupled](double, std::span<const double> x,
                                                                       std::span<double> dx) {
                                  const double u2 = coupled ? synaptic_coupling_current(x[4], x[2], syn) : 0.0;
                                  const auto a = models::fn_dynamics({x[0], x[1]}, 0.5, 0.0, 0.0, fn);
                                  const auto b = models::fn_dynamics({x[2], x[3]}, 0.0, u2, 0.0, fn);
                                  dx[0] = a[0];
                                  dx[1] = a[1];
                                  dx[2] = b[0];
                                  dx[3] = b[1];
                                  dx[4] = models::synapse_activation_dynamics(x[4], x[0], syn);
                              }};
        return sim::integrate(sys, {-1.2, -0.6, -1.2, -0.6, 0.0}, sim::TimeGrid(0.0, 100.0, 1e-2));
    };
    const auto on = run(true);
    const auto off = run(false);
    CHECK(on.column("v1") == off.column("v1"));
    CHECK(on.column("v2") != off.column("v2"));
}

TEST_CASE("phase controller examples") {
    const PhaseControllerConfig cfg{1.0, 0.5, -1.0, 1.0, 0.0};
    const std::vector<double> bursts{0.0, 10.0, 20.0, 30.0};
    const std::vector<double> none;
    for (double t : {0.0, 5.0, 25.0, 100.0})
        CHECK(phase_controller_step(none, bursts, cfg, t) == 0.0);

    const std::vector<double> coincident{20.0};
    for (double t : {20.0, 20.2, 20.49})
        CHECK(std::abs(phase_controller_step(coincident, bursts, cfg, t)) <= kTrivial);

    const std::vector<double> quarter{22.5};
    CHECK(phase_controller_step(quarter, bursts, cfg, 22.4) == 0.0);
    for (double t : {22.5, 22.7, 22.99})
        CHECK(std::abs(phase_controller_step(quarter, bursts, cfg, t) - 0.25) <= kTrivial);
    CHECK(phase_controller_step(quarter, bursts, cfg, 23.0) == 0.0);
}

TEST_CASE("incremental phase controller agrees with the pure form") {
    const PhaseControllerConfig cfg{0.8, 0.5, -1.0, 1.5, 0.1};
    PhaseController c(cfg);
    const std::vector<double> bursts{1.0, 11.0, 21.0, 31.0, 41.0};
    const std::vector<double> measured{3.0, 17.5, 24.0, 38.9};
    std::vector<double> seen_b;
    std::vector<double> seen_m;
    std::size_t ib = 0;
    std::size_t im = 0;
    for (int k = 0; k <= 5000; ++k) {
        const double t = 0.01 * k;
        while (ib < bursts.size() && bursts[ib] <= t) {
            c.on_burst_onset(bursts[ib]);
            seen_b.push_back(bursts[ib++]);
        }
        while (im < measured.size() && measured[im] <= t) {
            c.on_measured_event(measured[im]);
            seen_m.push_back(measured[im++]);
        }
        CHECK(std::abs(c.current(t) - phase_controller_step(seen_m, seen_b, cfg, t)) <= kTrivial);
    }
}

TEST_CASE("motor map examples") {
    CHECK(std::abs(hco_motor_map(0.7, 0.7, 2.0, 0.0)) <= kTrivial);
    CHECK(std::abs(hco_motor_map(-1.0, -1.0, 2.0, 0.0)) <= kTrivial);
    CHECK(std::abs(hco_motor_map(1.0, -0.5, 2.0, 0.0) - 2.0) <= kTrivial);
    CHECK(std::abs(hco_motor_map(-0.3, -2.0, 2.0, 0.0)) <= kTrivial);
    CHECK(std::abs(hco_motor_map(1.0, 1.0, 2.0, 0.0, -1.0) - 4.0) <= kTrivial);
    CHECK(std::abs(wrap_half(0.75) + 0.25) <= kTrivial);
    CHECK(std::abs(wrap_half(-0.5) - 0.5) <= kTrivial);
}
