#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "eventreg/controllers.hpp"
#include "eventreg/events.hpp"
#include "eventreg/models.hpp"
#include "eventreg/sim_core.hpp"

using namespace eventreg;
using namespace eventreg::events;

namespace {

constexpr double kTrivial = 1e-12;

EventTrain train(std::vector<double> t, int trial = 0, std::string label = "x") {
    return EventTrain{trial, std::move(label), std::move(t)};
}

double population_std(const std::vector<double> &x) {
    double m = 0;
    for (double v : x)
        m += v;
    m /= static_cast<double>(x.size());
    double s = 0;
    for (double v : x)
        s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

} // namespace

TEST_CASE("sine up-crossings land on multiples of 2 pi") {
    const sim::TimeGrid grid(0.0, 20.0, 1e-3);
    std::vector<double> t(grid.steps() + 1);
    std::vector<double> v(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = grid.time(k);
        v[k] = std::sin(t[k]);
    }
    const auto ev = detect_events(t, v, 0.0, Direction::up, 1.0);
    REQUIRE(ev.size() == 4);
    for (std::size_t i = 0; i < ev.size(); ++i)
        CHECK(std::abs(ev.times[i] - 2.0 * std::numbers::pi * static_cast<double>(i)) <= 1e-3);

    const auto down = detect_events(t, v, 0.0, Direction::down, 1.0);
    REQUIRE(down.size() == 3);
    CHECK(std::abs(down.times[0] - std::numbers::pi) <= 1e-3);
}

TEST_CASE("constant signal below threshold gives no events") {
    std::vector<double> t{0, 1, 2, 3};
    std::vector<double> v{0.2, 0.2, 0.2, 0.2};
    CHECK(detect_events(t, v, 0.5, Direction::up, 0.0).empty());
    CHECK(detect_events(t, v, 0.5, Direction::down, 0.0).empty());
}

TEST_CASE("interpolated crossing time") {
    std::vector<double> t{0.0, 1.0, 2.0};
    std::vector<double> v{0.0, 0.5, 2.5};
    const auto ev = detect_events(t, v, 1.0, Direction::up, 0.0);
    REQUIRE(ev.size() == 1);
    CHECK(std::abs(ev.times[0] - 1.25) <= kTrivial);
}

TEST_CASE("refractory period drops close crossings") {
    std::vector<double> t{0, 1, 2, 3, 4, 5, 6};
    std::vector<double> v{0, 2, 0, 2, 0, 2, 0};
    CHECK(detect_events(t, v, 1.0, Direction::up, 0.0).size() == 3);
    const auto ev = detect_events(t, v, 1.0, Direction::up, 2.5);
    REQUIRE(ev.size() == 2);
    CHECK(std::abs(ev.times[1] - 4.5) <= kTrivial);
}

TEST_CASE("detection is invariant under a time shift") {
    std::vector<double> t;
    std::vector<double> v;
    for (int k = 0; k <= 5000; ++k) {
        t.push_back(0.01 * k);
        v.push_back(std::sin(0.01 * k) + 0.3 * std::sin(3.1 * 0.01 * k));
    }
    const auto base = detect_events(t, v, 0.1, Direction::up, 0.5);
    REQUIRE(base.size() > 3);
    for (double shift : {-7.0, 3.25, 100.0}) {
        std::vector<double> ts(t);
        for (double &x : ts)
            x += shift;
        const auto moved = detect_events(ts, v, 0.1, Direction::up, 0.5);
        REQUIRE(moved.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i)
            CHECK(std::abs(moved.times[i] - (base.times[i] + shift)) < 1e-9);
    }
}

TEST_CASE("FN limit cycle gives a periodic train") {
    const auto p = models::fn_preset("fn-classic");
    const sim::System sys{{"v", "iL"}, [&](double, std::span<const double> x, std::span<double> dx) {
                              const auto d = models::fn_dynamics({x[0], x[1]}, 0.5, 0.0, 0.0, p);
                              dx[0] = d[0];
                              dx[1] = d[1];
                          }};
    const auto traj = sim::integrate(sys, {-1.2, -0.6}, sim::TimeGrid(0.0, 600.0, 1e-3));
    const auto ev = detect_events(traj, "v", 1.0, Direction::up, 5.0);
    REQUIRE(ev.size() > 8);
    const auto steady = ev.window(ev.times[2], 1e9);
    CHECK(steady.interval_cv() < 1e-3);
}

TEST_CASE("match examples") {
    const auto ref = train({1.0, 2.0, 3.0});
    auto r = match_trains(ref, ref, 0.05);
    CHECK(r.matched_fraction == 1.0);
    CHECK(r.jitter == 0.0);
    CHECK(r.unmatched_reference == 0);
    CHECK(r.extra_test == 0);

    r = match_trains(ref, train({1.1, 2.1, 3.1}), 0.05);
    CHECK(r.matched_fraction == 0.0);
    CHECK(r.matched == 0);
    CHECK(r.unmatched_reference == 3);
    CHECK(r.extra_test == 3);

    r = match_trains(ref, train({1.01, 2.02, 3.01, 5.0}), 0.05);
    CHECK(r.matched_fraction == 1.0);
    CHECK(r.extra_test == 1);
    CHECK(std::abs(r.jitter - population_std({0.01, 0.02, 0.01})) <= kTrivial);

    CHECK(match_trains(train({}), train({1.0}), 0.1).matched_fraction == 1.0);
    CHECK(match_trains(ref, train({}), 0.1).matched_fraction == 0.0);
}

TEST_CASE("match uses each test event once") {
    const auto r = match_trains(train({1.0, 1.02}), train({1.01}), 0.05);
    CHECK(r.matched == 1);
    CHECK(r.unmatched_reference == 1);
    CHECK(r.extra_test == 0);
    CHECK(std::abs(r.matched_fraction - 0.5) <= kTrivial);
}

TEST_CASE("self match is perfect for any window") {
    std::vector<double> t;
    for (int i = 0; i < 40; ++i)
        t.push_back(0.37 * i + 0.01 * (i % 3));
    const auto a = train(t);
    for (double w : {1e-9, 0.01, 0.5, 10.0}) {
        const auto r = match_trains(a, a, w);
        CHECK(r.matched_fraction == 1.0);
        CHECK(r.jitter == 0.0);
        CHECK(r.extra_test == 0);
    }
}

TEST_CASE("reliability examples") {
    const std::vector<EventTrain> same{train({1, 2, 3}, 0), train({1, 2, 3}, 1), train({1, 2, 3}, 2)};
    auto rel = reliability(same, 0.1);
    CHECK(rel.matched_fraction == 1.0);
    CHECK(rel.jitter == 0.0);

    const std::vector<EventTrain> one_empty{train({1, 2, 3}, 0), train({1, 2, 3}, 1), train({}, 2)};
    rel = reliability(one_empty, 0.1);
    CHECK(std::abs(rel.matched_fraction - 0.5) <= kTrivial);

    const std::vector<EventTrain> jittered{train({1, 2, 3}, 0), train({1.01, 2.0, 3.0}, 1),
                                           train({0.99, 2.02, 3.0}, 2)};
    rel = reliability(jittered, 0.1);
    CHECK(rel.matched_fraction == 1.0);
    CHECK(std::abs(rel.jitter - population_std({0.01, 0.0, 0.0, -0.01, 0.02, 0.0})) < 1e-12);
}

TEST_CASE("phase offset examples") {
    std::vector<double> b;
    std::vector<double> q;
    for (int i = 0; i < 20; ++i) {
        b.push_back(10.0 * i);
        q.push_back(10.0 * i + 2.5);
    }
    CHECK(std::abs(phase_offset(train(b), train(b))) <= kTrivial);
    CHECK(std::abs(phase_offset(train(q), train(b)) - 0.25) <= kTrivial);
    CHECK(std::abs(phase_offset(train(b), train(q)) + 0.25) <= kTrivial);
}

TEST_CASE("phase offset is antisymmetric for equal periods") {
    for (double frac : {0.1, 0.3, 0.45, 0.6, 0.9}) {
        std::vector<double> a;
        std::vector<double> b;
        for (int i = 0; i < 15; ++i) {
            b.push_back(7.0 * i);
            a.push_back(7.0 * (i + frac));
        }
        const double ab = phase_offset(train(a), train(b));
        const double ba = phase_offset(train(b), train(a));
        CHECK(std::abs(eventreg::control::wrap_half(ab + ba)) < 1e-9);
    }
}

TEST_CASE("phase offset preconditions") {
    CHECK_THROWS_AS((void)phase_offset(train({1, 2}), train({0, 1, 2, 3})), MetricError);
    CHECK_THROWS_AS((void)phase_offset(train({1, 2, 3}), train({0, 1, 3, 3.5, 7})), MetricError);
}

TEST_CASE("spurious count examples") {
    const auto base = train({1, 5, 9, 13});
    CHECK(spurious_count(base, base, 0.1) == 0);
    CHECK(spurious_count(base, train({1, 5, 7, 9, 13}), 0.1) == 1);
}

TEST_CASE("spurious count is nonincreasing in the window") {
    const auto base = train({1, 5, 9, 13, 20});
    const auto test = train({1.05, 4.7, 6.0, 9.3, 12.0, 13.01, 17.0, 20.5, 30.0});
    std::size_t prev = spurious_count(base, test, 1e-3);
    for (double w : {0.01, 0.05, 0.1, 0.4, 1.0, 2.0, 5.0, 20.0}) {
        const auto c = spurious_count(base, test, w);
        CHECK(c <= prev);
        prev = c;
    }
}

TEST_CASE("event csv round trip") {
    const std::vector<EventTrain> trains{train({0.1, 1.123456789, 250.5}, 0, "pre"), train({}, 1, "post"),
                                         train({3.0, 4.25}, 1, "pre")};
    std::stringstream ss;
    write_events_csv(ss, trains);
    CHECK(ss.str().rfind("trial_id,label,time\n", 0) == 0);
    const auto back = read_events_csv(ss);
    std::stringstream again;
    write_events_csv(again, back);
    std::stringstream first;
    write_events_csv(first, trains);
    CHECK(again.str() == first.str());
    for (const auto &tr : back) {
        if (tr.label == "pre" && tr.trial_id == 0) {
            REQUIRE(tr.size() == 3);
            CHECK(tr.times[1] == 1.12345679);
        }
    }
}

TEST_CASE("train validation and statistics") {
    CHECK_THROWS_AS(train({1.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(train({1.0, NAN}).validate(), std::invalid_argument);
    const auto t = train({0.0, 2.0, 4.0, 6.0});
    CHECK(std::abs(t.mean_interval() - 2.0) <= kTrivial);
    CHECK(std::abs(t.interval_cv()) <= kTrivial);
    CHECK(t.window(2.0, 6.0).times == std::vector<double>{2.0, 4.0});
}
