#include "eventreg/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eventreg::models {

namespace {

void require(bool condition, const char *message) {
    if (!condition)
        throw std::invalid_argument(message);
}

} // namespace

void PendulumParams::validate() const {
    require(a > 0.0, "pendulum: a must be positive");
    require(c > 0.0, "pendulum: c must be positive");
}

std::array<double, 2> pendulum_dynamics(const PendulumState &s, double u, const PendulumParams &p) noexcept {
    return {s.omega, -p.a * std::sin(s.theta) - p.c * s.omega + u};
}

// ---------------------------------------------------------------------------

void FNParams::validate() const {
    require(C > 0.0, "fitzhugh-nagumo: C must be positive");
    require(L > 0.0, "fitzhugh-nagumo: L must be positive");
    require(b >= 0.0, "fitzhugh-nagumo: b must be non-negative");
}

std::array<double, 2> fn_dynamics(const FNState &s, double drive, double control, double disturbance,
                                  const FNParams &p) noexcept {
    const double v = s.v;
    // control + disturbance is summed first so an exactly cancelling control
    // leaves the drive-only trajectory unchanged bit for bit.
    return {(v - v * v * v / 3.0 - s.i_L + drive + (control + disturbance)) / p.C, (-p.b * s.i_L + v + p.a) / p.L};
}

FNState fn_rest_state(const FNParams &p, double input) {
    p.validate();
    if (p.b == 0.0) {
        const double v = -p.a;
        return {v, v - v * v * v / 3.0 + input};
    }
    // g(v) = v - v^3/3 - (v + a)/b + input is strictly decreasing when b < 1;
    // for other b pick the root by bisection on a bracket that holds a sign change.
    auto g = [&](double v) { return v - v * v * v / 3.0 - (v + p.a) / p.b + input; };
    double lo = -10.0;
    double hi = 10.0;
    if (!(g(lo) > 0.0 && g(hi) < 0.0))
        throw std::domain_error("fitzhugh-nagumo: rest state not bracketed");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double v = 0.5 * (lo + hi);
    return {v, (v + p.a) / p.b};
}

// ---------------------------------------------------------------------------

void SynapseParams::validate() const {
    require(tau > 0.0, "synapse: tau must be positive");
    require(g >= 0.0, "synapse: g must be non-negative");
}

double synapse_sigmoid(double w, const SynapseParams &p) noexcept {
    return 1.0 / (1.0 + std::exp(-p.h_gain * (w - p.h_center)));
}

double synapse_activation_dynamics(double z, double w, const SynapseParams &p) noexcept {
    return (-z + synapse_sigmoid(w, p)) / p.tau;
}

double synapse_current(double z, double v, const SynapseParams &p) noexcept { return p.g * z * (v - p.E_syn); }

// ---------------------------------------------------------------------------

void HCONeuronParams::validate() const {
    require(tau_f > 0.0 && tau_f < tau_s && tau_s < tau_us, "hco neuron: need 0 < tau_f < tau_s < tau_us");
    require(g_f_minus >= 0.0 && g_s_plus >= 0.0 && g_s_minus >= 0.0 && g_us_plus >= 0.0,
            "hco neuron: conductances must be non-negative");
}

HCONeuronParams HCONeuronParams::time_scaled(double factor) const {
    HCONeuronParams p = *this;
    p.tau_f *= factor;
    p.tau_s *= factor;
    p.tau_us *= factor;
    return p;
}

std::array<double, 3> hco_neuron_dynamics(const HCONeuronState &s, double i_syn, double i_p,
                                          const HCONeuronParams &p) noexcept {
    const double fast = -s.v + p.g_f_minus * std::tanh(s.v) - p.g_s_plus * std::tanh(s.v_s) +
                        p.g_s_minus * std::tanh(s.v_s + 0.9) - p.g_us_plus * std::tanh(s.v_us + 0.9) + i_syn + i_p;
    return {fast / p.tau_f, (s.v - s.v_s) / p.tau_s, (s.v - s.v_us) / p.tau_us};
}

double hco_synaptic_current(double v_s_pre, double g_syn) noexcept {
    return g_syn / (1.0 + std::exp(-2.0 * (v_s_pre + 1.0)));
}

void HCONetwork::validate() const {
    for (const auto &n : neurons)
        n.validate();
    for (std::size_t i = 0; i < kHcoSize; ++i)
        require(g_syn[i][i] == 0.0, "hco network: synaptic matrix must have a zero diagonal");
}

HCONetwork HCONetwork::with_synapse_sign(double sign) const {
    HCONetwork out = *this;
    for (std::size_t i = 0; i < kHcoSize; ++i)
        for (std::size_t j = 0; j < kHcoSize; ++j)
            out.g_syn[i][j] = sign * std::abs(g_syn[i][j]);
    return out;
}

void hco_network_dynamics(const HCONetwork &net, std::span<const double> x, const std::array<double, kHcoSize> &i_p,
                          std::span<double> dxdt) noexcept {
    std::array<double, kHcoSize> activation{};
    for (std::size_t j = 0; j < kHcoSize; ++j)
        activation[j] = hco_synaptic_current(x[3 * j + 1], 1.0);
    for (std::size_t i = 0; i < kHcoSize; ++i) {
        double i_syn = 0.0;
        for (std::size_t j = 0; j < kHcoSize; ++j)
            i_syn += net.g_syn[i][j] * activation[j];
        const auto d = hco_neuron_dynamics({x[3 * i], x[3 * i + 1], x[3 * i + 2]}, i_syn, i_p[i], net.neurons[i]);
        dxdt[3 * i] = d[0];
        dxdt[3 * i + 1] = d[1];
        dxdt[3 * i + 2] = d[2];
    }
}

// ---------------------------------------------------------------------------

void IFNetwork::validate() const {
    require(drive.size() == x.size() && leak.size() == x.size(), "if network: parameter sizes differ");
    require(epsilon >= 0.0, "if network: epsilon must be non-negative");
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] >= 0.0 && x[i] <= 1.0, "if network: states must lie in [0, 1]");
        require(leak[i] >= 0.0, "if network: leak must be non-negative");
        require(drive[i] > leak[i], "if network: drive must exceed leak so every unit reaches threshold");
    }
}

IFNetwork IFNetwork::identical(std::size_t n, double drive, double leak, double epsilon) {
    return {std::vector<double>(n, drive), std::vector<double>(n, leak), epsilon, std::vector<double>(n, 0.0)};
}

std::vector<std::size_t> IFStepResult::fired() const {
    std::vector<std::size_t> out;
    for (const auto &a : avalanches)
        out.insert(out.end(), a.units.begin(), a.units.end());
    std::sort(out.begin(), out.end());
    return out;
}

double if_time_to_threshold(double x, double drive, double leak) noexcept {
    if (x >= 1.0)
        return 0.0;
    if (leak == 0.0)
        return (1.0 - x) / drive;
    return std::log((drive - leak * x) / (drive - leak)) / leak;
}

namespace {

double if_flow(double x, double drive, double leak, double t) noexcept {
    if (leak == 0.0)
        return x + drive * t;
    const double fixed = drive / leak;
    return fixed + (x - fixed) * std::exp(-leak * t);
}

} // namespace

IFStepResult if_step(IFNetwork &net, double dt) {
    const std::size_t n = net.size();
    IFStepResult result;
    double elapsed = 0.0;
    std::vector<double> t_hit(n);
    std::vector<char> fired(n);

    while (true) {
        const double remaining = dt - elapsed;
        double t_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            t_hit[i] = if_time_to_threshold(net.x[i], net.drive[i], net.leak[i]);
            t_min = std::min(t_min, t_hit[i]);
        }
        if (t_min > remaining) {
            for (std::size_t i = 0; i < n; ++i)
                net.x[i] = std::min(1.0, if_flow(net.x[i], net.drive[i], net.leak[i], remaining));
            break;
        }

        // Advance to the first crossing; units crossing at the same instant
        // start the avalanche together.
        const double tol = 1e-12 * std::max(1.0, t_min);
        std::fill(fired.begin(), fired.end(), 0);
        std::vector<std::size_t> wave;
        for (std::size_t i = 0; i < n; ++i) {
            if (t_hit[i] - t_min <= tol) {
                net.x[i] = 1.0;
                wave.push_back(i);
            } else {
                net.x[i] = std::min(1.0, if_flow(net.x[i], net.drive[i], net.leak[i], t_min));
            }
        }
        elapsed += t_min;

        Avalanche avalanche{elapsed, {}};
        while (!wave.empty()) {
            for (std::size_t i : wave) {
                fired[i] = 1;
                avalanche.units.push_back(i);
            }
            const double kick = net.epsilon * static_cast<double>(wave.size());
            wave.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (fired[i])
                    continue;
                net.x[i] = std::min(1.0, net.x[i] + kick);
                if (net.x[i] >= 1.0)
                    wave.push_back(i);
            }
        }
        for (std::size_t i : avalanche.units)
            net.x[i] = 0.0;
        std::sort(avalanche.units.begin(), avalanche.units.end());
        result.avalanches.push_back(std::move(avalanche));
    }
    return result;
}

// ---------------------------------------------------------------------------

FNParams fn_preset(const std::string &name) {
    if (name == "fn-classic")
        return FNParams{1.0, 12.5, 0.7, 0.8};
    throw std::invalid_argument("unknown fitzhugh-nagumo preset '" + name + "'");
}

HCONetwork hco_preset(const std::string &name) {
    if (name != "paper-hco" && name != "paper-hco-excitatory")
        throw std::invalid_argument("unknown hco preset '" + name + "'");
    HCONetwork net;
    for (auto &n : net.neurons) {
        n.g_s_plus = 2.0;
        n.g_us_plus = 2.0;
    }
    // Two half-centers {0,1} and {2,3}; every cross-pair synapse has the
    // same gain, none within a pair.
    constexpr double gain = 0.12;
    for (std::size_t i = 0; i < kHcoSize; ++i)
        for (std::size_t j = 0; j < kHcoSize; ++j)
            net.g_syn[i][j] = (i / 2 != j / 2) ? -gain : 0.0;
    return name == "paper-hco" ? net : net.with_synapse_sign(+1.0);
}

std::vector<std::string> preset_names() { return {"fn-classic", "paper-hco", "paper-hco-excitatory"}; }

} // namespace eventreg::models
