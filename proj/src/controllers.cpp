#include "eventreg/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eventreg::control {

void TrackingGains::validate(const models::PendulumParams &plant) const {
    if (!(k1 > 1.0))
        throw std::invalid_argument("tracking gains: k1 must exceed 1");
    if (!(k2 > -plant.c))
        throw std::invalid_argument("tracking gains: k2 must exceed -c");
}

double tracking_control(double e, double e_dot, double theta_r, double omega_r, double u_r,
                        const models::PendulumParams &plant, const models::PendulumParams &ref,
                        const TrackingGains &gains) noexcept {
    return u_r - (ref.a - plant.a) * std::sin(theta_r) - (ref.c - plant.c) * omega_r - gains.k1 * e - gains.k2 * e_dot;
}

std::array<double, 2> internal_model_dynamics(const models::PendulumState &estimate, double u_r,
                                              const models::PendulumParams &ref, double injection_gain,
                                              double estimate_error) noexcept {
    const double injection = injection_gain * estimate_error;
    auto d = models::pendulum_dynamics(estimate, u_r - injection, ref);
    d[0] -= injection;
    return d;
}

// ---------------------------------------------------------------------------

double disturbance_observer_step(double z_hat, double w, const models::SynapseParams &p) noexcept {
    return models::synapse_activation_dynamics(z_hat, w, p);
}

double disturbance_compensation(double z_hat, double v, const models::SynapseParams &p) noexcept {
    return -models::synapse_current(z_hat, v, p);
}

models::SynapseParams uncertain_synapse(const models::SynapseParams &nominal, const MismatchSpec &m) {
    if (!(m.delta > -1.0))
        throw std::domain_error("mismatch: delta must exceed -1");
    models::SynapseParams out = nominal;
    const double scale = 1.0 + m.delta;
    out.g = nominal.g * scale;
    out.E_syn = nominal.E_syn * scale;
    out.tau = nominal.tau * scale;
    if (!(out.tau > 0.0))
        throw std::domain_error("mismatch: resulting tau is not positive");
    return out;
}

// ---------------------------------------------------------------------------

std::pair<double, double> diffusive_coupling(double y1, double y2, double k1, double k2) noexcept {
    const double e = y1 - y2;
    return {-k1 * e, -k2 * e};
}

double velocity_coupling(double omega_i, double omega_j, double k) noexcept { return k * (omega_j - omega_i); }

double synaptic_coupling_current(double z_pre, double y_post, const models::SynapseParams &p) noexcept {
    return models::synapse_current(z_pre, y_post, p);
}

// ---------------------------------------------------------------------------

void PhaseControllerConfig::validate() const {
    if (!(amplitude >= 0.0))
        throw std::invalid_argument("phase controller: amplitude must be non-negative");
    if (!(pulse_width > 0.0))
        throw std::invalid_argument("phase controller: pulse width must be positive");
}

double wrap_half(double x) noexcept {
    double w = x - std::floor(x);
    if (w > 0.5)
        w -= 1.0;
    return w;
}

double phase_controller_step(std::span<const double> measured_events, std::span<const double> internal_burst_onsets,
                             const PhaseControllerConfig &cfg, double t) {
    const auto m_end = std::upper_bound(measured_events.begin(), measured_events.end(), t);
    if (m_end == measured_events.begin())
        return 0.0;
    const double t_m = *(m_end - 1);
    if (t - t_m >= cfg.pulse_width)
        return 0.0;
    const auto b_end = std::upper_bound(internal_burst_onsets.begin(), internal_burst_onsets.end(), t_m);
    const auto n_bursts = static_cast<std::size_t>(b_end - internal_burst_onsets.begin());
    if (n_bursts < 2)
        return 0.0;
    const double first = internal_burst_onsets.front();
    const double last = *(b_end - 1);
    const double period = (last - first) / static_cast<double>(n_bursts - 1);
    const double error = wrap_half((t_m - last) / period - cfg.target_phase);
    return cfg.amplitude * cfg.gain * error;
}

PhaseController::PhaseController(PhaseControllerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void PhaseController::on_burst_onset(double t) {
    if (bursts_ == 0)
        first_burst_ = t;
    last_burst_ = t;
    ++bursts_;
}

void PhaseController::on_measured_event(double t) {
    if (bursts_ < 2) {
        pulse_active_ = false;
        return;
    }
    const double period = (last_burst_ - first_burst_) / static_cast<double>(bursts_ - 1);
    last_error_ = wrap_half((t - last_burst_) / period - cfg_.target_phase);
    pulse_start_ = t;
    pulse_amplitude_ = cfg_.amplitude * cfg_.gain * last_error_;
    pulse_active_ = true;
}

double PhaseController::current(double t) const noexcept {
    if (!pulse_active_ || t < pulse_start_ || t - pulse_start_ >= cfg_.pulse_width)
        return 0.0;
    return pulse_amplitude_;
}

// ---------------------------------------------------------------------------

double motor_activation(double v, double v_th) noexcept { return std::max(v - v_th, 0.0); }

double hco_motor_map(double v1, double v3, double g_m, double v_th, double polarity) noexcept {
    return g_m * (motor_activation(v1, v_th) - polarity * motor_activation(v3, v_th));
}

} // namespace eventreg::control
