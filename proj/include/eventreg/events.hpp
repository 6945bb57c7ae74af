#pragma once

/**
 * @file events.hpp
 * @brief Threshold-crossing event extraction and event-train metrics.
 */

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eventreg/sim_core.hpp"

namespace eventreg::events {

/// Raised when a metric's preconditions on the input trains do not hold.
class MetricError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct EventTrain {
    int trial_id = 0;
    std::string label;
    std::vector<double> times; ///< strictly increasing

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
    /// Throws std::invalid_argument unless times are strictly increasing and finite.
    void validate() const;
    /// Events with begin <= t < end.
    [[nodiscard]] EventTrain window(double begin, double end) const;
    /// Mean and relative standard deviation of the inter-event intervals.
    [[nodiscard]] double mean_interval() const;
    [[nodiscard]] double interval_cv() const;
};

struct MatchReport {
    double matched_fraction = 1.0;
    double jitter = 0.0; ///< population std of matched (test - reference) differences
    std::size_t matched = 0;
    std::size_t unmatched_reference = 0;
    std::size_t extra_test = 0;
    std::vector<double> differences;
};

enum class Direction { up, down };

/**
 * Threshold crossings of `values` sampled at `times`. An up-crossing between
 * samples k and k+1 means values[k] <= threshold < values[k+1]; the event time
 * is linearly interpolated. Crossings closer than `refractory` to the previous
 * accepted event are dropped.
 */
[[nodiscard]] EventTrain detect_events(std::span<const double> times, std::span<const double> values,
                                       double threshold, Direction direction, double refractory);
[[nodiscard]] EventTrain detect_events(const sim::Trajectory &traj, const std::string &column, double threshold,
                                       Direction direction, double refractory);

/**
 * Greedy matching in reference time order: each reference event takes the
 * nearest still-unused test event within `window`. An empty reference train
 * reports a matched fraction of 1.
 */
[[nodiscard]] MatchReport match_trains(const EventTrain &reference, const EventTrain &test, double window);

struct Reliability {
    double matched_fraction; ///< mean over trials 1..n-1 matched against trial 0
    double jitter;           ///< std of all matched differences pooled over trials
};

[[nodiscard]] Reliability reliability(std::span<const EventTrain> trains, double window);

/**
 * Circular mean phase of a's events relative to b's cycles, in units of b's
 * period and wrapped to (-1/2, 1/2]. Requires at least 3 events in each train
 * and b's interval CV below 0.1; a mean resultant length below 0.5 (no
 * consistent phase) is also reported as MetricError.
 */
[[nodiscard]] double phase_offset(const EventTrain &a, const EventTrain &b);

/// Test events with no baseline partner within `window`.
[[nodiscard]] std::size_t spurious_count(const EventTrain &baseline, const EventTrain &test, double window);

/// CSV with header `trial_id,label,time`, times at 9 significant digits.
void write_events_csv(std::ostream &out, std::span<const EventTrain> trains);
[[nodiscard]] std::vector<EventTrain> read_events_csv(std::istream &in);

} // namespace eventreg::events
