#include "eventreg/sim_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eventreg::sim {

IntegrationError::IntegrationError(std::size_t step, std::size_t component, const std::string &name)
    : std::runtime_error("non-finite derivative at step " + std::to_string(step) + " in component " +
                         std::to_string(component) + " (" + name + ")"),
      step_(step), component_(component) {}

TimeGrid::TimeGrid(double t0, double t_end, double dt) : t0_(t0), t_end_(t_end), dt_(dt), steps_(0) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("time grid: dt must be positive");
    if (!(t_end > t0) || !std::isfinite(t0) || !std::isfinite(t_end))
        throw std::invalid_argument("time grid: t_end must exceed t0");
    const double ratio = (t_end - t0) / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("time grid: span is not an integer multiple of dt");
    steps_ = static_cast<std::size_t>(rounded);
}

std::size_t TimeGrid::nearest_index(double t) const noexcept {
    const double k = std::round((t - t0_) / dt_);
    if (k <= 0.0)
        return 0;
    return std::min(static_cast<std::size_t>(k), steps_);
}

// ---------------------------------------------------------------------------

SignalSpec::SignalSpec(PiecewiseSignal s) {
    if (s.intervals.size() != s.pieces.size())
        throw std::invalid_argument("piecewise signal: intervals and pieces differ in length");
    for (std::size_t i = 0; i < s.intervals.size(); ++i) {
        if (!(s.intervals[i].end > s.intervals[i].begin))
            throw std::invalid_argument("piecewise signal: empty interval");
        if (i > 0 && s.intervals[i].begin < s.intervals[i - 1].end)
            throw std::invalid_argument("piecewise signal: intervals overlap or are unordered");
    }
    kind_ = std::move(s);
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632BE59BD9B4E019ULL));
}

// 53 random bits -> (0, 1]
double open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

struct Evaluator {
    double t;

    double operator()(const ConstantSignal &s) const { return s.level; }
    double operator()(const SinusoidSignal &s) const {
        return s.offset + s.amplitude * std::sin(s.omega * t + s.phase);
    }
    double operator()(const PulseTrainSignal &s) const {
        if (t < s.start || !(s.period > 0.0))
            return 0.0;
        const double since = std::fmod(t - s.start, s.period);
        return since < s.width ? s.amplitude : 0.0;
    }
    double operator()(const FrozenNoiseSignal &s) const {
        const double k = std::floor(t / s.hold + 1e-9);
        const auto counter = static_cast<std::uint64_t>(static_cast<std::int64_t>(k));
        return s.mean + s.std * counter_gaussian(s.seed, counter);
    }
    double operator()(const PiecewiseSignal &s) const {
        for (std::size_t i = 0; i < s.intervals.size(); ++i) {
            if (t >= s.intervals[i].begin && t < s.intervals[i].end)
                return eval_signal(s.pieces[i], t);
        }
        throw std::domain_error("piecewise signal does not cover t = " + std::to_string(t));
    }
};

} // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept {
    return static_cast<double>(mix(seed, counter) >> 11) * 0x1.0p-53;
}

double counter_gaussian(std::uint64_t seed, std::uint64_t counter) noexcept {
    // Box-Muller on two decorrelated draws derived from one counter.
    const double u1 = open_unit(mix(seed, 2 * counter));
    const double u2 = open_unit(mix(seed, 2 * counter + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return splitmix64(seed * 0x9E3779B97F4A7C15ULL ^ splitmix64(tag ^ 0xD1B54A32D192ED03ULL));
}

double eval_signal(const SignalSpec &spec, double t) { return std::visit(Evaluator{t}, spec.kind()); }

// ---------------------------------------------------------------------------

ResetSchedule::ResetSchedule(std::vector<Reset> resets) : resets_(std::move(resets)) {
    for (std::size_t i = 1; i < resets_.size(); ++i) {
        if (!(resets_[i].time > resets_[i - 1].time))
            throw std::invalid_argument("reset schedule: times must be strictly increasing");
    }
}

void Trajectory::add_column(std::string name, std::vector<double> values) {
    if (values.size() != size())
        throw std::invalid_argument("trajectory column '" + name + "' has wrong length");
    if (has_column(name))
        throw std::invalid_argument("duplicate trajectory column '" + name + "'");
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

bool Trajectory::has_column(const std::string &name) const noexcept {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double> &Trajectory::column(const std::string &name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        throw std::out_of_range("no trajectory column '" + name + "'");
    return columns_[static_cast<std::size_t>(it - names_.begin())];
}

std::vector<double> &Trajectory::column(const std::string &name) {
    return const_cast<std::vector<double> &>(std::as_const(*this).column(name));
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t(size());
    for (std::size_t k = 0; k < t.size(); ++k)
        t[k] = grid_.time(k);
    return t;
}

// ---------------------------------------------------------------------------

namespace {

class Rk4 {
  public:
    explicit Rk4(const System &system)
        : system_(system), n_(system.dim()), k1_(n_), k2_(n_), k3_(n_), k4_(n_), tmp_(n_) {}

    void step(std::size_t step_index, double t, double dt, std::span<double> x) {
        eval(step_index, t, x, k1_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = x[i] + 0.5 * dt * k1_[i];
        eval(step_index, t + 0.5 * dt, tmp_, k2_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = x[i] + 0.5 * dt * k2_[i];
        eval(step_index, t + 0.5 * dt, tmp_, k3_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = x[i] + dt * k3_[i];
        eval(step_index, t + dt, tmp_, k4_);
        for (std::size_t i = 0; i < n_; ++i)
            x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        for (std::size_t i = 0; i < n_; ++i) {
            if (!std::isfinite(x[i]))
                throw IntegrationError(step_index, i, system_.state_names[i]);
        }
    }

  private:
    void eval(std::size_t step_index, double t, std::span<const double> x, std::vector<double> &out) {
        system_.field(t, x, out);
        for (std::size_t i = 0; i < n_; ++i) {
            if (!std::isfinite(out[i]))
                throw IntegrationError(step_index, i, system_.state_names[i]);
        }
    }

    const System &system_;
    std::size_t n_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

void check_dimension(const System &system, const State &x0) {
    if (x0.size() != system.dim())
        throw std::invalid_argument("initial state has dimension " + std::to_string(x0.size()) +
                                    ", system expects " + std::to_string(system.dim()));
    if (!system.field)
        throw std::invalid_argument("system has no vector field");
}

} // namespace

Trajectory integrate(const System &system, const State &x0, const TimeGrid &grid, const ResetSchedule &resets,
                     const StepHook &hook) {
    check_dimension(system, x0);
    const std::size_t n = system.dim();
    const std::size_t n_out = system.output_names.size();
    const std::size_t samples = grid.steps() + 1;

    // Reset indices on the grid.
    std::vector<std::size_t> reset_index;
    for (const auto &r : resets.resets()) {
        if (r.time < grid.t0() - 0.5 * grid.dt() || r.time > grid.t_end() + 0.5 * grid.dt())
            throw std::invalid_argument("reset at t = " + std::to_string(r.time) + " lies outside the grid");
        for (const auto &[component, value] : r.assignment) {
            if (component >= n)
                throw std::invalid_argument("reset assigns to nonexistent component");
            (void)value;
        }
        const std::size_t k = grid.nearest_index(r.time);
        if (!reset_index.empty() && k <= reset_index.back())
            throw std::invalid_argument("reset times collapse onto the same grid point");
        reset_index.push_back(k);
    }

    std::vector<std::vector<double>> states(n, std::vector<double>(samples));
    std::vector<std::vector<double>> outputs(n_out, std::vector<double>(samples));
    std::vector<double> y(n_out);
    State x = x0;
    std::size_t next_reset = 0;

    auto apply_resets = [&](std::size_t k) {
        while (next_reset < reset_index.size() && reset_index[next_reset] == k) {
            for (const auto &[component, value] : resets.resets()[next_reset].assignment)
                x[component] = value;
            ++next_reset;
        }
    };
    auto record = [&](std::size_t k) {
        for (std::size_t i = 0; i < n; ++i)
            states[i][k] = x[i];
        if (n_out > 0) {
            system.outputs(grid.time(k), x, y);
            for (std::size_t j = 0; j < n_out; ++j)
                outputs[j][k] = y[j];
        }
    };

    apply_resets(0);
    record(0);
    Rk4 rk4(system);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        rk4.step(k, grid.time(k), grid.dt(), x);
        apply_resets(k + 1);
        if (hook)
            hook(k + 1, grid.time(k + 1), x);
        record(k + 1);
    }

    Trajectory traj(grid);
    for (std::size_t i = 0; i < n; ++i)
        traj.add_column(system.state_names[i], std::move(states[i]));
    for (std::size_t j = 0; j < n_out; ++j)
        traj.add_column(system.output_names[j], std::move(outputs[j]));
    return traj;
}

State integrate_final(const System &system, const State &x0, const TimeGrid &grid) {
    check_dimension(system, x0);
    State x = x0;
    Rk4 rk4(system);
    for (std::size_t k = 0; k < grid.steps(); ++k)
        rk4.step(k, grid.time(k), grid.dt(), x);
    return x;
}

HalvingErrors halving_error(const System &system, const State &x0, const TimeGrid &grid,
                            std::optional<State> reference_final) {
    if (!reference_final) {
        const TimeGrid fine(grid.t0(), grid.t_end(), grid.dt() / 64.0);
        reference_final = integrate_final(system, x0, fine);
    }
    const TimeGrid half(grid.t0(), grid.t_end(), grid.dt() / 2.0);
    auto max_error = [&](const State &x) {
        double e = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            e = std::max(e, std::abs(x[i] - (*reference_final)[i]));
        return e;
    };
    return {max_error(integrate_final(system, x0, grid)), max_error(integrate_final(system, x0, half))};
}

} // namespace eventreg::sim
