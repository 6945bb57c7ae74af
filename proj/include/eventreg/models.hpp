#pragma once

/**
 * @file models.hpp
 * @brief Vector fields and parameter records: forced pendulum,
 *        FitzHugh-Nagumo neuron, conductance synapse, fast/slow/ultraslow
 *        bursting neuron network, and pulse-coupled integrate-and-fire units.
 *
 * All functions here are pure.
 */

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eventreg::models {

// ---------------------------------------------------------------------------
// Pendulum:  theta'' = -a sin(theta) - c theta' + u

struct PendulumParams {
    double a = 1.0;
    double c = 0.5;

    void validate() const;
};

struct PendulumState {
    double theta = 0.0;
    double omega = 0.0;
};

[[nodiscard]] std::array<double, 2> pendulum_dynamics(const PendulumState &s, double u, const PendulumParams &p) noexcept;

// ---------------------------------------------------------------------------
// FitzHugh-Nagumo:  C v' = v - v^3/3 - i_L + I + u + d,   L i_L' = -b i_L + v + a

struct FNParams {
    double C = 1.0;
    double L = 1.0;
    double a = 0.7;
    double b = 0.8;

    void validate() const;
};

struct FNState {
    double v = 0.0;
    double i_L = 0.0;
};

[[nodiscard]] std::array<double, 2> fn_dynamics(const FNState &s, double drive, double control, double disturbance,
                                                const FNParams &p) noexcept;

/// Resting state for constant total input current (unique root of the nullcline
/// intersection; requires b > 0 or the cubic to have a single real root).
[[nodiscard]] FNState fn_rest_state(const FNParams &p, double input = 0.0);

// ---------------------------------------------------------------------------
// Conductance synapse:  tau z' = -z + h(w),   d = g z (v - E_syn)

struct SynapseParams {
    double tau = 1.0;
    double g = 2.0;
    double E_syn = -2.0;
    double h_gain = 2.0;
    double h_center = -1.0;

    void validate() const;
};

/// Logistic activation 1 / (1 + exp(-h_gain (w - h_center))).
[[nodiscard]] double synapse_sigmoid(double w, const SynapseParams &p) noexcept;
[[nodiscard]] double synapse_activation_dynamics(double z, double w, const SynapseParams &p) noexcept;
[[nodiscard]] double synapse_current(double z, double v, const SynapseParams &p) noexcept;

// ---------------------------------------------------------------------------
// Bursting neuron with fast, slow and ultraslow feedback, and the 4-neuron
// network built from it.

struct HCONeuronParams {
    double tau_f = 1.0;
    double tau_s = 50.0;
    double tau_us = 2500.0;
    double g_f_minus = 2.0;
    double g_s_plus = 1.5;
    double g_s_minus = 1.5;
    double g_us_plus = 1.5;

    void validate() const;
    /// Copy with every time constant multiplied by `factor`.
    [[nodiscard]] HCONeuronParams time_scaled(double factor) const;
};

struct HCONeuronState {
    double v = 0.0;
    double v_s = 0.0;
    double v_us = 0.0;
};

[[nodiscard]] std::array<double, 3> hco_neuron_dynamics(const HCONeuronState &s, double i_syn, double i_p,
                                                        const HCONeuronParams &p) noexcept;

/// g_syn / (1 + exp(-2 (v_s_pre + 1))).
[[nodiscard]] double hco_synaptic_current(double v_s_pre, double g_syn) noexcept;

inline constexpr std::size_t kHcoSize = 4;

struct HCONetwork {
    std::array<HCONeuronParams, kHcoSize> neurons{};
    /// g_syn[i][j]: gain of the synapse from neuron j onto neuron i.
    std::array<std::array<double, kHcoSize>, kHcoSize> g_syn{};

    void validate() const;
    /// Copy with every off-diagonal gain replaced by its magnitude times `sign`.
    [[nodiscard]] HCONetwork with_synapse_sign(double sign) const;
};

/// Derivative of the full network state laid out as (v, v_s, v_us) per neuron.
void hco_network_dynamics(const HCONetwork &net, std::span<const double> x,
                          const std::array<double, kHcoSize> &i_p, std::span<double> dxdt) noexcept;

// ---------------------------------------------------------------------------
// Pulse-coupled integrate-and-fire units with leaky rise x' = S - gamma x.

struct IFNetwork {
    std::vector<double> drive;  ///< S_i
    std::vector<double> leak;   ///< gamma_i
    double epsilon = 0.0;       ///< pulse increment
    std::vector<double> x;      ///< phase-like states in [0, 1]

    [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
    void validate() const;

    static IFNetwork identical(std::size_t n, double drive, double leak, double epsilon);
};

/// Units that fired together, with their common event time (relative to the
/// start of the step).
struct Avalanche {
    double time;
    std::vector<std::size_t> units;
};

struct IFStepResult {
    std::vector<Avalanche> avalanches;

    [[nodiscard]] std::vector<std::size_t> fired() const;
};

/**
 * Advance every unit by the exact flow over dt. Threshold crossings are
 * resolved at their exact times; a firing unit resets to 0 and adds epsilon to
 * every unit that has not fired in the same avalanche. Increments are summed
 * before clipping at 1 and the cascade repeats until no unit sits at
 * threshold.
 */
[[nodiscard]] IFStepResult if_step(IFNetwork &net, double dt);

/// Time for a unit at x to reach 1 under x' = S - gamma x.
[[nodiscard]] double if_time_to_threshold(double x, double drive, double leak) noexcept;

// ---------------------------------------------------------------------------
// Presets

/// "fn-classic": C = 1, L = 12.5, a = 0.7, b = 0.8 (spiking threshold I ~ 0.33).
[[nodiscard]] FNParams fn_preset(const std::string &name);

/**
 * "paper-hco": two half-centers {1,2} and {3,4} with cross-pair inhibition of
 * gain 0.12, bursting in anti-phase with period ~1218. "paper-hco-excitatory"
 * flips the synapse sign and bursts in-phase with period ~2141. Raising g_us+
 * by 20% shortens the burst period in both (to ~1085 and ~1512).
 */
[[nodiscard]] HCONetwork hco_preset(const std::string &name);
[[nodiscard]] std::vector<std::string> preset_names();

} // namespace eventreg::models
