#pragma once

/**
 * @file controllers.hpp
 * @brief Control laws and internal models: pendulum tracking with a copy of
 *        the exosystem, synaptic disturbance observer, mismatched synapse
 *        model, diffusive/velocity/synaptic coupling, and the pulse-based
 *        phase controller with the motor map used by the bursting network.
 */

#include <array>
#include <span>
#include <utility>

#include "eventreg/models.hpp"

namespace eventreg::control {

// ---------------------------------------------------------------------------
// Pendulum tracking

struct TrackingGains {
    double k1 = 4.0;
    double k2 = 2.0;

    /// k1 > 1 and k2 > -c for plant damping c.
    void validate(const models::PendulumParams &plant) const;
};

/**
 * u = u_r - (a_r - 1) sin(theta_r) - (c_r - c) omega_r - k1 e - k2 e_dot.
 *
 * The reference arguments are either the measured exosystem state or its
 * internal-model estimate (with e replaced by theta - theta_hat).
 */
[[nodiscard]] double tracking_control(double e, double e_dot, double theta_r, double omega_r, double u_r,
                                      const models::PendulumParams &plant, const models::PendulumParams &ref,
                                      const TrackingGains &gains) noexcept;

/**
 * Derivative of the internal copy of the exosystem, driven by the measured
 * exosystem input. `estimate_error` is theta_hat - theta_r as reconstructed
 * from the measured regulation error (e - e_hat); it is injected with gain
 * `injection_gain` into both the kinematic and torque equations. Zero gain
 * gives the pure open-loop copy.
 */
[[nodiscard]] std::array<double, 2> internal_model_dynamics(const models::PendulumState &estimate, double u_r,
                                                            const models::PendulumParams &ref,
                                                            double injection_gain, double estimate_error) noexcept;

// ---------------------------------------------------------------------------
// Synaptic disturbance rejection

/// tau z_hat' = -z_hat + h(w): same law as the synapse it copies.
[[nodiscard]] double disturbance_observer_step(double z_hat, double w, const models::SynapseParams &p) noexcept;
/// u = -g z_hat (v - E_syn).
[[nodiscard]] double disturbance_compensation(double z_hat, double v, const models::SynapseParams &p) noexcept;

struct MismatchSpec {
    double delta = 0.0;
};

/// (g, E_syn, tau) scaled by (1 + delta); sigmoid shape untouched.
[[nodiscard]] models::SynapseParams uncertain_synapse(const models::SynapseParams &nominal, const MismatchSpec &m);

// ---------------------------------------------------------------------------
// Coupling laws

/// e = y1 - y2; returns (-k1 e, -k2 e).
[[nodiscard]] std::pair<double, double> diffusive_coupling(double y1, double y2, double k1, double k2) noexcept;
/// k (omega_j - omega_i), added to pendulum i.
[[nodiscard]] double velocity_coupling(double omega_i, double omega_j, double k) noexcept;
/// Current into the postsynaptic unit; the presynaptic unit receives nothing.
[[nodiscard]] double synaptic_coupling_current(double z_pre, double y_post, const models::SynapseParams &p) noexcept;

// ---------------------------------------------------------------------------
// Event-phase controller for the bursting network

struct PhaseControllerConfig {
    double amplitude = 1.0;       ///< A
    double pulse_width = 1.0;     ///< w_p
    double burst_threshold = 0.0; ///< up-crossing level on v_s marking a burst onset
    double gain = 1.0;            ///< multiplies the normalized phase error
    double target_phase = 0.0;    ///< desired (event - burst) lag in periods

    void validate() const;
};

/// Wrap x into (-1/2, 1/2].
[[nodiscard]] double wrap_half(double x) noexcept;

/**
 * Pure form of the controller: i_p(t) given both event histories. Each
 * measured event t_m opens a pulse of width w_p and amplitude
 * A * gain * wrap((t_m - t_burst_last) / T_burst - target_phase), where
 * T_burst is the mean internal burst period observed up to t_m. A later
 * event replaces an earlier pulse. Fewer than two bursts before t_m gives 0.
 */
[[nodiscard]] double phase_controller_step(std::span<const double> measured_events,
                                           std::span<const double> internal_burst_onsets,
                                           const PhaseControllerConfig &cfg, double t);

/// Incremental form of phase_controller_step for closed-loop simulation.
class PhaseController {
  public:
    explicit PhaseController(PhaseControllerConfig cfg);

    void on_burst_onset(double t);
    void on_measured_event(double t);
    [[nodiscard]] double current(double t) const noexcept;

    [[nodiscard]] const PhaseControllerConfig &config() const noexcept { return cfg_; }
    [[nodiscard]] double last_phase_error() const noexcept { return last_error_; }

  private:
    PhaseControllerConfig cfg_;
    double first_burst_ = 0.0;
    double last_burst_ = 0.0;
    std::size_t bursts_ = 0;
    double pulse_start_ = 0.0;
    double pulse_amplitude_ = 0.0;
    bool pulse_active_ = false;
    double last_error_ = 0.0;
};

/// Rectifier sigma(v) = max(v - v_th, 0).
[[nodiscard]] double motor_activation(double v, double v_th) noexcept;

/**
 * u = g_m (sigma(v1) - polarity * sigma(v3)). polarity = +1 gives opposing
 * motors (alternating torque from anti-phase bursts); polarity = -1 drives
 * both motors in the same direction.
 */
[[nodiscard]] double hco_motor_map(double v1, double v3, double g_m, double v_th, double polarity = 1.0) noexcept;

} // namespace eventreg::control
