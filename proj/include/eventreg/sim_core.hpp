#pragma once

/**
 * @file sim_core.hpp
 * @brief Fixed-step integration, input signals, scheduled resets and
 *        counter-based noise shared by every model and experiment.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace eventreg::sim {

using State = std::vector<double>;

/// Raised when an integration step produces a non-finite derivative.
class IntegrationError : public std::runtime_error {
  public:
    IntegrationError(std::size_t step, std::size_t component, const std::string &name);

    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] std::size_t component() const noexcept { return component_; }

  private:
    std::size_t step_;
    std::size_t component_;
};

/**
 * Uniform time grid t_k = t0 + k*dt, k = 0..steps().
 *
 * The span (t_end - t0) must be an integer multiple of dt to 1e-9 relative
 * tolerance.
 */
class TimeGrid {
  public:
    TimeGrid(double t0, double t_end, double dt);

    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double t_end() const noexcept { return t_end_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] double time(std::size_t k) const noexcept {
        return t0_ + static_cast<double>(k) * dt_;
    }
    /// Index of the grid point nearest to t (clamped to the grid).
    [[nodiscard]] std::size_t nearest_index(double t) const noexcept;

  private:
    double t0_;
    double t_end_;
    double dt_;
    std::size_t steps_;
};

// ---------------------------------------------------------------------------
// Signals

struct ConstantSignal {
    double level = 0.0;
};

struct SinusoidSignal {
    double offset = 0.0;
    double amplitude = 1.0;
    double omega = 1.0;
    double phase = 0.0;
};

/// Rectangular pulses of `width` every `period`, the first starting at `start`.
struct PulseTrainSignal {
    double amplitude = 1.0;
    double width = 1.0;
    double period = 10.0;
    double start = 0.0;
};

/// Gaussian value held constant over each interval [k*hold, (k+1)*hold).
struct FrozenNoiseSignal {
    double mean = 0.0;
    double std = 1.0;
    double hold = 1e-3;
    std::uint64_t seed = 0;
};

class SignalSpec;

/// Ordered, half-open intervals [begin, end) each with its own signal.
struct PiecewiseSignal {
    struct Interval {
        double begin;
        double end;
    };
    std::vector<Interval> intervals;
    std::vector<SignalSpec> pieces;
};

class SignalSpec {
  public:
    using Variant = std::variant<ConstantSignal, SinusoidSignal, PulseTrainSignal,
                                 FrozenNoiseSignal, PiecewiseSignal>;

    SignalSpec() : kind_(ConstantSignal{}) {}
    SignalSpec(ConstantSignal s) : kind_(std::move(s)) {}
    SignalSpec(SinusoidSignal s) : kind_(std::move(s)) {}
    SignalSpec(PulseTrainSignal s) : kind_(std::move(s)) {}
    SignalSpec(FrozenNoiseSignal s) : kind_(std::move(s)) {}
    SignalSpec(PiecewiseSignal s);

    [[nodiscard]] const Variant &kind() const noexcept { return kind_; }

    static SignalSpec constant(double level) { return ConstantSignal{level}; }

  private:
    Variant kind_;
};

/// Pure function of (spec, t). Throws std::domain_error when a piecewise spec
/// does not cover t.
[[nodiscard]] double eval_signal(const SignalSpec &spec, double t);

/// Standard normal sample number `counter` of the stream named by `seed`.
[[nodiscard]] double counter_gaussian(std::uint64_t seed, std::uint64_t counter) noexcept;
/// Uniform sample in [0, 1) from the same counter-based scheme.
[[nodiscard]] double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept;
/// Derive an independent stream seed from a base seed and a stream tag.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

// ---------------------------------------------------------------------------
// Systems and trajectories

using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;
using OutputMap = std::function<void(double t, std::span<const double> x, std::span<double> y)>;
/// Called after every completed step (and after any reset at that step).
/// May modify the state and any controller state captured in the closure.
using StepHook = std::function<void(std::size_t step, double t, std::span<double> x)>;

struct System {
    std::vector<std::string> state_names;
    VectorField field;
    std::vector<std::string> output_names{};
    OutputMap outputs{};

    [[nodiscard]] std::size_t dim() const noexcept { return state_names.size(); }
};

struct Reset {
    double time;
    /// Component index -> assigned value. Unlisted components are kept.
    std::vector<std::pair<std::size_t, double>> assignment;
};

class ResetSchedule {
  public:
    ResetSchedule() = default;
    explicit ResetSchedule(std::vector<Reset> resets);

    [[nodiscard]] const std::vector<Reset> &resets() const noexcept { return resets_; }
    [[nodiscard]] bool empty() const noexcept { return resets_.empty(); }

  private:
    std::vector<Reset> resets_;
};

/// Named columns sampled on a TimeGrid; every column has steps()+1 entries.
class Trajectory {
  public:
    explicit Trajectory(TimeGrid grid) : grid_(grid) {}

    [[nodiscard]] const TimeGrid &grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return grid_.steps() + 1; }

    void add_column(std::string name, std::vector<double> values);
    [[nodiscard]] bool has_column(const std::string &name) const noexcept;
    [[nodiscard]] const std::vector<double> &column(const std::string &name) const;
    [[nodiscard]] std::vector<double> &column(const std::string &name);
    [[nodiscard]] const std::vector<std::string> &names() const noexcept { return names_; }
    [[nodiscard]] std::vector<double> times() const;

  private:
    TimeGrid grid_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

/**
 * Classical fourth-order Runge-Kutta on a fixed grid.
 *
 * Resets scheduled at a grid point are applied right after the step that
 * lands on it, so the recorded sample at that point is the reset state.
 * The hook runs after resets.
 */
[[nodiscard]] Trajectory integrate(const System &system, const State &x0, const TimeGrid &grid,
                                   const ResetSchedule &resets = {}, const StepHook &hook = {});

/// Same stepping as integrate() but only the final state is kept.
[[nodiscard]] State integrate_final(const System &system, const State &x0, const TimeGrid &grid);

struct HalvingErrors {
    double error_dt;
    double error_half_dt;

    [[nodiscard]] double ratio() const noexcept { return error_dt / error_half_dt; }
};

/**
 * Max-norm terminal errors at dt and dt/2 against `reference_final`. Without a
 * reference, a run at dt/64 stands in for the exact solution.
 */
[[nodiscard]] HalvingErrors halving_error(const System &system, const State &x0, const TimeGrid &grid,
                                          std::optional<State> reference_final = std::nullopt);

} // namespace eventreg::sim
