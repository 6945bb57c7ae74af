#include "eventreg/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace eventreg::events {

void EventTrain::validate() const {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]))
            throw std::invalid_argument("event train '" + label + "': non-finite time");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw std::invalid_argument("event train '" + label + "': times not strictly increasing");
    }
}

EventTrain EventTrain::window(double begin, double end) const {
    EventTrain out{trial_id, label, {}};
    std::copy_if(times.begin(), times.end(), std::back_inserter(out.times),
                 [&](double t) { return t >= begin && t < end; });
    return out;
}

double EventTrain::mean_interval() const {
    if (times.size() < 2)
        throw MetricError("event train '" + label + "': fewer than two events");
    return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

double EventTrain::interval_cv() const {
    const double mean = mean_interval();
    double ss = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double d = times[i] - times[i - 1] - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(times.size() - 1)) / mean;
}

// ---------------------------------------------------------------------------

EventTrain detect_events(std::span<const double> times, std::span<const double> values, double threshold,
                         Direction direction, double refractory) {
    if (times.size() != values.size())
        throw std::invalid_argument("detect_events: times and values differ in length");
    if (refractory < 0.0)
        throw std::invalid_argument("detect_events: refractory must be non-negative");
    EventTrain train;
    const double sign = direction == Direction::up ? 1.0 : -1.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double a = sign * (values[k] - threshold);
        const double b = sign * (values[k + 1] - threshold);
        if (!(a <= 0.0 && b > 0.0))
            continue;
        const double frac = a == 0.0 ? 0.0 : -a / (b - a);
        const double t = times[k] + frac * (times[k + 1] - times[k]);
        if (!train.times.empty() && (t - train.times.back() < refractory || !(t > train.times.back())))
            continue;
        train.times.push_back(t);
    }
    return train;
}

EventTrain detect_events(const sim::Trajectory &traj, const std::string &column, double threshold,
                         Direction direction, double refractory) {
    const auto t = traj.times();
    EventTrain train = detect_events(t, traj.column(column), threshold, direction, refractory);
    train.label = column;
    return train;
}

// ---------------------------------------------------------------------------

MatchReport match_trains(const EventTrain &reference, const EventTrain &test, double window) {
    if (!(window > 0.0))
        throw std::invalid_argument("match_trains: window must be positive");
    MatchReport report;
    std::vector<char> used(test.times.size(), 0);
    std::size_t start = 0;
    for (double r : reference.times) {
        while (start < test.times.size() && (used[start] || test.times[start] < r - window))
            ++start;
        std::size_t best = test.times.size();
        double best_dist = window;
        for (std::size_t j = start; j < test.times.size() && test.times[j] <= r + window; ++j) {
            if (used[j])
                continue;
            const double dist = std::abs(test.times[j] - r);
            if (dist <= best_dist && (best == test.times.size() || dist < best_dist)) {
                best = j;
                best_dist = dist;
            }
        }
        if (best == test.times.size())
            continue;
        used[best] = 1;
        report.differences.push_back(test.times[best] - r);
    }
    report.matched = report.differences.size();
    report.unmatched_reference = reference.times.size() - report.matched;
    report.extra_test = test.times.size() - report.matched;
    report.matched_fraction = reference.times.empty()
                                  ? 1.0
                                  : static_cast<double>(report.matched) / static_cast<double>(reference.times.size());
    if (!report.differences.empty()) {
        const double n = static_cast<double>(report.differences.size());
        const double mean = std::accumulate(report.differences.begin(), report.differences.end(), 0.0) / n;
        double ss = 0.0;
        for (double d : report.differences)
            ss += (d - mean) * (d - mean);
        report.jitter = std::sqrt(ss / n);
    }
    return report;
}

Reliability reliability(std::span<const EventTrain> trains, double window) {
    if (trains.size() < 2)
        throw std::invalid_argument("reliability: need at least two trials");
    double fraction = 0.0;
    std::vector<double> pooled;
    for (std::size_t i = 1; i < trains.size(); ++i) {
        const auto report = match_trains(trains[0], trains[i], window);
        fraction += report.matched_fraction;
        pooled.insert(pooled.end(), report.differences.begin(), report.differences.end());
    }
    fraction /= static_cast<double>(trains.size() - 1);
    double jitter = 0.0;
    if (!pooled.empty()) {
        const double n = static_cast<double>(pooled.size());
        const double mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
        double ss = 0.0;
        for (double d : pooled)
            ss += (d - mean) * (d - mean);
        jitter = std::sqrt(ss / n);
    }
    return {fraction, jitter};
}

double phase_offset(const EventTrain &a, const EventTrain &b) {
    if (a.size() < 3 || b.size() < 3)
        throw MetricError("phase_offset: need at least 3 events in each train");
    if (b.interval_cv() >= 0.1)
        throw MetricError("phase_offset: reference train '" + b.label + "' is not periodic");
    const double period = b.mean_interval();
    double sum_sin = 0.0;
    double sum_cos = 0.0;
    for (double t : a.times) {
        // Position inside the enclosing b-cycle; outside b's span use the mean period.
        const auto it = std::upper_bound(b.times.begin(), b.times.end(), t);
        double phase;
        if (it == b.times.begin()) {
            phase = (t - b.times.front()) / period;
        } else if (it == b.times.end()) {
            phase = (t - b.times.back()) / period;
        } else {
            const double lo = *(it - 1);
            phase = (t - lo) / (*it - lo);
        }
        const double angle = 2.0 * std::numbers::pi * phase;
        sum_sin += std::sin(angle);
        sum_cos += std::cos(angle);
    }
    const double n = static_cast<double>(a.size());
    const double resultant = std::hypot(sum_sin, sum_cos) / n;
    if (resultant < 0.5)
        throw MetricError("phase_offset: no consistent phase relation (resultant " + std::to_string(resultant) + ")");
    double offset = std::atan2(sum_sin, sum_cos) / (2.0 * std::numbers::pi);
    if (offset <= -0.5)
        offset += 1.0;
    return offset;
}

std::size_t spurious_count(const EventTrain &baseline, const EventTrain &test, double window) {
    return match_trains(baseline, test, window).extra_test;
}

// ---------------------------------------------------------------------------

void write_events_csv(std::ostream &out, std::span<const EventTrain> trains) {
    out << "trial_id,label,time\n";
    char buf[64];
    for (const auto &train : trains) {
        for (double t : train.times) {
            std::snprintf(buf, sizeof buf, "%.9g", t);
            out << train.trial_id << ',' << train.label << ',' << buf << '\n';
        }
    }
}

std::vector<EventTrain> read_events_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != "trial_id,label,time")
        throw std::invalid_argument("event csv: missing header");
    std::vector<EventTrain> trains;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto c1 = line.find(',');
        const auto c2 = line.rfind(',');
        if (c1 == std::string::npos || c1 == c2)
            throw std::invalid_argument("event csv: malformed row '" + line + "'");
        const int trial = std::stoi(line.substr(0, c1));
        std::string label = line.substr(c1 + 1, c2 - c1 - 1);
        const double t = std::stod(line.substr(c2 + 1));
        if (trains.empty() || trains.back().trial_id != trial || trains.back().label != label)
            trains.push_back({trial, std::move(label), {}});
        trains.back().times.push_back(t);
    }
    for (const auto &train : trains)
        train.validate();
    return trains;
}

} // namespace eventreg::events
