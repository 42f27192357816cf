#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <slfv/simulator.hpp>
#include <slfv/stats.hpp>

#include "oracles.hpp"

using namespace slfv;
using std::numbers::pi;

namespace
{

const std::vector<Event> script = oracle::scripted({{1, 0.5, 0, 1}, {2, 2.2, 0, 1}, {3, 5, 5, 1}});

std::string csv(const EventLog &log)
{
    std::ostringstream os;
    write_events_csv(os, log);
    return os.str();
}

} // namespace

TEST_CASE("scripted log stops at the second event")
{
    const auto [log, rep] = run_scripted(SeedRegion::origin(), RadiusMeasure::unit(), script, HalfPlaneReached{3});
    REQUIRE(log.size() == 2);
    CHECK(log.events[0].id == 1);
    CHECK(log.events[1].id == 2);
    CHECK(rep.stop_time == 2.0);
    CHECK(rep.trigger_event_id == std::optional<std::uint64_t>{2});
    CHECK(rep.accepted_count == 2);
    CHECK(rep.candidate_count == 2);

    const auto [plog, prep] = run_scripted(SeedRegion::origin(), RadiusMeasure::unit(), script, PointCovered{{3, 0}});
    CHECK(prep.stop_time == 2.0);
    CHECK(prep.trigger_event_id == std::optional<std::uint64_t>{2});

    // Running the full script: e3 at (5,5) is rejected.
    const auto [all, arep] = run_scripted(SeedRegion::origin(), RadiusMeasure::unit(), script, HalfPlaneReached{100});
    CHECK(all.size() == 2);
    CHECK_FALSE(arep.trigger_event_id.has_value());
    CHECK(arep.candidate_count == 3);
}

TEST_CASE("targets already reached give time zero")
{
    const auto m = RadiusMeasure::unit();
    CHECK(hitting_time(SeedRegion::origin(), m, Rng(1), HalfPlaneReached{0}) == 0.0);
    CHECK(hitting_time(SeedRegion::origin(), m, Rng(1), PointCovered{{0, 0}}) == 0.0);
    CHECK(hitting_time(SeedRegion::origin(), m, Rng(1), SegmentCovered{{0, 0}}) == 0.0);
    const auto [log, rep] = run_forward(SeedRegion::origin(), m, Rng(1), HalfPlaneReached{0});
    CHECK(log.size() == 0);
    CHECK_FALSE(rep.trigger_event_id.has_value());
}

TEST_CASE("first acceptance from a point seed is exponential with rate pi")
{
    const auto m = RadiusMeasure::unit();
    const int n = 10000;
    std::vector<double> t;
    for (int i = 0; i < n; ++i) {
        auto [log, rep] = run_forward(SeedRegion::origin(), m, replica_stream(7, i), EventCount{1});
        t.push_back(rep.stop_time);
    }
    CHECK(std::abs(stats::mean(t) - 1 / pi) <= 3 * (1 / pi) / std::sqrt(n));
    // Same law on the frontier policy.
    std::vector<double> f;
    for (int i = 0; i < n; ++i) {
        auto [log, rep] = run_forward(SeedRegion::origin(), m, replica_stream(8, i), EventCount{1}, FrontierWindow{});
        f.push_back(rep.stop_time);
    }
    CHECK(std::abs(stats::mean(f) - 1 / pi) <= 3 * (1 / pi) / std::sqrt(n));
}

TEST_CASE("acceptance region after one ball has area at most M0")
{
    const auto m = RadiusMeasure::unit();
    Rng rng(12);
    for (int rep = 0; rep < 10; ++rep) {
        Simulator sim(SeedRegion::origin(), m, replica_stream(12, rep), AdaptiveWindow{});
        sim.run(EventCount{1});
        const Window w = sim.state().inflated_bbox(1.0);
        const int n = 200000;
        int hit = 0;
        for (int i = 0; i < n; ++i) {
            hit += sim.state().intersects({uniform(rng, w.x_lo, w.x_hi), uniform(rng, w.y_lo, w.y_hi)}, 1.0);
        }
        const double p = static_cast<double>(hit) / n;
        const double area = p * w.area();
        CHECK(area <= m.yule_rate_bound() + 3 * w.area() * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("runs are deterministic")
{
    const auto m = RadiusMeasure({{0.5, 1}, {1.0, 1}}, {});
    for (const WindowPolicy &pol : {WindowPolicy{AdaptiveWindow{}}, WindowPolicy{FrontierWindow{}}}) {
        auto [a, ra] = run_forward(SeedRegion::origin(), m, replica_stream(3, 9), HalfPlaneReached{15}, pol);
        auto [b, rb] = run_forward(SeedRegion::origin(), m, replica_stream(3, 9), HalfPlaneReached{15}, pol);
        CHECK(csv(a) == csv(b));
        CHECK(ra.stop_time == rb.stop_time);
        CHECK(ra.candidate_count == rb.candidate_count);
    }
    const Window q = default_halfplane_window(10, 6, 1);
    auto [a, ra] = run_forward(HalfPlane{0}, RadiusMeasure::unit(), replica_stream(3, 1), PointCovered{{10, 0}},
                               FixedWindow{q});
    auto [b, rb] = run_forward(HalfPlane{0}, RadiusMeasure::unit(), replica_stream(3, 1), PointCovered{{10, 0}},
                               FixedWindow{q});
    CHECK(csv(a) == csv(b));
    CHECK(ra.truncated == rb.truncated);
}

TEST_CASE("pathwise orderings and the advance bound")
{
    const auto m = RadiusMeasure::unit();
    const double x = 20;
    for (int rep = 0; rep < 40; ++rep) {
        Simulator sim(SeedRegion::origin(), m, replica_stream(21, rep),
                      rep % 2 ? WindowPolicy{FrontierWindow{}} : WindowPolicy{AdaptiveWindow{}});
        const auto h = sim.watch(HalfPlaneReached{x});
        const auto p = sim.watch(PointCovered{{x, 0}});
        const auto s = sim.watch(SegmentCovered{{x, 0}});
        const auto rh = sim.advance_until(h);
        CHECK(rh.accepted_count >= static_cast<std::uint64_t>(std::ceil(x / 2)));
        sim.advance_until(s);
        REQUIRE(sim.hit(p));
        CHECK(sim.hit(h)->time <= sim.hit(p)->time);
        CHECK(sim.hit(p)->time <= sim.hit(s)->time);
        CHECK(sim.hit(h)->event_id.has_value());
        // The trigger event is the first accepted event reaching x.
        const auto &log = sim.log();
        const auto idx = log.find(*sim.hit(h)->event_id).value();
        CHECK(log.events[idx].center.x + log.events[idx].radius >= x);
        for (std::size_t i = 0; i < idx; ++i) {
            CHECK(log.events[i].center.x + log.events[i].radius < x);
        }
    }
}

TEST_CASE("frontier and adaptive policies agree in law")
{
    const auto m = RadiusMeasure::unit();
    std::vector<double> a, f;
    for (int rep = 0; rep < 300; ++rep) {
        a.push_back(hitting_time(SeedRegion::origin(), m, replica_stream(40, rep), HalfPlaneReached{12},
                                 AdaptiveWindow{}));
        f.push_back(hitting_time(SeedRegion::origin(), m, replica_stream(41, rep), HalfPlaneReached{12},
                                 FrontierWindow{}));
    }
    const auto ks = stats::ks_two_sample(a, f);
    CHECK(ks.p_value > 0.001);
}

TEST_CASE("restricted states are contained in larger ones")
{
    const auto m = RadiusMeasure({{0.6, 1}, {1.0, 1}}, {});
    for (int rep = 0; rep < 5; ++rep) {
        CoupledRun run(m, replica_stream(5, rep), Window{-30, 30, -30, 30});
        const auto full = run.add_state(SeedRegion::origin(), std::nullopt);
        const auto small = run.add_state(SeedRegion::origin(), Window{-3, 4, -2, 2});
        const auto half_small = run.add_state(HalfPlane{0}, Window{-2, 8, -3, 3});
        const auto half_big = run.add_state(HalfPlane{0}, Window{-2, 8, -6, 6});
        while (run.state(full).balls().size() < 200) {
            run.step();
            std::set<std::uint64_t> ids;
            for (const auto &e : run.log(full).events) {
                ids.insert(e.id);
            }
            for (const auto &e : run.log(small).events) {
                REQUIRE(ids.count(e.id) == 1);
            }
            std::set<std::uint64_t> big;
            for (const auto &e : run.log(half_big).events) {
                big.insert(e.id);
            }
            for (const auto &e : run.log(half_small).events) {
                REQUIRE(big.count(e.id) == 1);
            }
        }
        CHECK(run.log(small).size() < run.log(full).size());
    }
    CoupledRun tight(m, Rng(1), Window{-2, 2, -2, 2});
    tight.add_state(SeedRegion::origin(), std::nullopt);
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 100000; ++i) {
                tight.step();
            }
        }(),
        contract_violation);
}

TEST_CASE("half-plane seeds need a fixed window")
{
    CHECK_THROWS_AS(Simulator(HalfPlane{0}, RadiusMeasure::unit(), Rng(1), AdaptiveWindow{}), contract_violation);
    CHECK_THROWS_AS(Simulator(HalfPlane{0}, RadiusMeasure::unit(), Rng(1), FrontierWindow{}), contract_violation);
    CHECK_THROWS_AS(Simulator(SeedRegion::origin(), RadiusMeasure::unit(), Rng(1), FixedWindow{{0, 0, 0, 1}}),
                    invalid_window);
}

TEST_CASE("budget exhaustion reports the partial log")
{
    // The window misses the target, so the point is never covered.
    SimulationOptions opts;
    opts.candidate_budget = 5000;
    try {
        run_forward(HalfPlane{0}, RadiusMeasure::unit(), Rng(2), PointCovered{{50, 0}},
                    FixedWindow{Window{-2, 10, -5, 5}}, opts);
        FAIL("expected budget_exceeded");
    } catch (const budget_exceeded &e) {
        CHECK(e.report().candidate_count == 5000);
        CHECK(e.partial_log().candidate_count == 5000);
        CHECK(e.partial_log().size() > 0);
        CHECK_FALSE(e.report().trigger_event_id.has_value());
    }
}

TEST_CASE("time horizon and event count stops")
{
    const auto m = RadiusMeasure::unit();
    auto [log, rep] = run_forward(SeedRegion::origin(), m, Rng(4), TimeHorizon{3.5});
    CHECK(rep.stop_time == 3.5);
    CHECK_FALSE(rep.trigger_event_id.has_value());
    for (const auto &e : log.events) {
        CHECK(e.time <= 3.5);
    }
    auto [l2, r2] = run_forward(SeedRegion::origin(), m, Rng(4), EventCount{17});
    CHECK(l2.size() == 17);
    CHECK(r2.trigger_event_id == l2.events.back().id);
    CHECK(r2.stop_time == l2.events.back().time);
}

TEST_CASE("offered candidates must be ordered")
{
    Simulator sim(SeedRegion::origin(), RadiusMeasure::unit(), Rng{}, AdaptiveWindow{});
    sim.offer(script[1 - 1]);
    CHECK_THROWS_AS(sim.offer(Event{1, 0.5, {0, 0}, 1}), contract_violation);
}

TEST_CASE("truncation flag follows the window")
{
    const auto m = RadiusMeasure::unit();
    int tight_truncated = 0, wide_truncated = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto [l1, r1] = run_forward(HalfPlane{0}, m, replica_stream(6, rep), PointCovered{{10, 0}},
                                    FixedWindow{Window{-2, 11, -1, 1}});
        tight_truncated += r1.truncated;
        auto [l2, r2] = run_forward(HalfPlane{0}, m, replica_stream(6, rep), PointCovered{{10, 0}},
                                    FixedWindow{default_halfplane_window(10, 6, 1)});
        wide_truncated += r2.truncated;
    }
    CHECK(tight_truncated == 20);
    CHECK(wide_truncated <= 2);
    CHECK(default_halfplane_window(100, 6, 1) == Window{-2, 160, -60, 60});
    CHECK(default_halfplane_window(0.01, 6, 1) == Window{-2, 1.01, -1, 1});
}

TEST_CASE("two-type seed rule and single events")
{
    const auto m = RadiusMeasure::unit();
    Simulator empty(SeedRegion(Disk{{0, 0}, 5}), m, Rng(1), AdaptiveWindow{});
    empty.enable_types(SplitX{0});
    CHECK(empty.type_at({-1, 0}) == 0);
    CHECK(empty.type_at({1, 0}) == 1);

    for (int rep = 0; rep < 50; ++rep) {
        Simulator sim(SeedRegion(Disk{{0, 0}, 5}), m, replica_stream(2, rep), AdaptiveWindow{});
        sim.enable_types(SplitX{0});
        sim.offer(Event{1, 1.0, {-2.5, 0.3}, 1});
        REQUIRE(sim.log().types.size() == 1);
        CHECK(sim.log().types[0] == 0);
        CHECK(sim.type_at({-2.5, 0.3}) == 0);
    }

    CHECK(seed_type(SplitY{1}, {0, 0}) == 0);
    CHECK(seed_type(Sectors{4, {0, 0}}, {1, 0.1}) == 0);
    CHECK(seed_type(Sectors{4, {0, 0}}, {-0.1, 1}) == 1);
    CHECK(seed_type(Sectors{4, {0, 0}}, {-1, -0.1}) == 0);

    Simulator frontier(SeedRegion(Disk{{0, 0}, 5}), m, Rng(1), FrontierWindow{});
    CHECK_THROWS_AS(frontier.enable_types(SplitX{0}), contract_violation);
}

TEST_CASE("parent locations are uniform on the occupied part of the event ball")
{
    const auto m = RadiusMeasure::unit();
    // Two overlapping seed disks, so the overlap must not be counted twice.
    const SeedRegion seed = SeedUnion{{Disk{{-0.5, 0}, 1}, Disk{{0.5, 0}, 1}}};
    const Ball b{{0.3, 1.2}, 1};
    const double split = 0.2;
    long in = 0, right = 0;
    const int g = 1500;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            const Point p{b.center.x - 1 + 2 * (i + 0.5) / g, b.center.y - 1 + 2 * (j + 0.5) / g};
            if (b.contains(p) && seed.contains(p)) {
                ++in;
                right += p.x >= split ? 1 : 0;
            }
        }
    }
    const double expect = static_cast<double>(right) / static_cast<double>(in);
    const int n = 20000;
    int ones = 0;
    for (int rep = 0; rep < n; ++rep) {
        Simulator sim(seed, m, replica_stream(31, rep), AdaptiveWindow{});
        sim.enable_types(SplitX{split});
        sim.offer(Event{1, 1.0, b.center, b.radius});
        ones += sim.log().types[0];
    }
    const double sd = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(static_cast<double>(ones) / n - expect) < 4 * sd);

    // A ball that only grazes the seed still finds a parent; by symmetry each type is
    // equally likely.
    ones = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        Simulator sim(SeedRegion(Disk{{0, 0}, 1}), m, replica_stream(32, rep), AdaptiveWindow{});
        sim.enable_types(SplitX{0});
        sim.offer(Event{1, 1.0, {0, 1.9999}, 1});
        ones += sim.log().types[0];
    }
    CHECK(std::abs(ones / 2000.0 - 0.5) < 4 * std::sqrt(0.25 / 2000));
}

TEST_CASE("a point seed has no room for a parent")
{
    SimulationOptions opts;
    opts.parent_trials = 1000;
    Simulator sim(SeedRegion::origin(), RadiusMeasure::unit(), Rng(3), AdaptiveWindow{}, opts);
    sim.enable_types(SplitX{0});
    CHECK_THROWS_AS(sim.offer(Event{1, 1.0, {0.5, 0}, 1}), degenerate_intersection);
}

TEST_CASE("types are total and never change")
{
    const auto m = RadiusMeasure::unit();
    for (int rep = 0; rep < 5; ++rep) {
        Simulator sim(SeedRegion(Disk{{0, 0}, 3}), m, replica_stream(9, rep), AdaptiveWindow{});
        sim.enable_types(Sectors{4, {0, 0}});
        sim.run(EventCount{300});
        const auto snapshot = sim.log().types;
        REQUIRE(snapshot.size() == 300);
        sim.run(EventCount{900});
        REQUIRE(sim.log().types.size() == 900);
        for (std::size_t i = 0; i < snapshot.size(); ++i) {
            CHECK(sim.log().types[i] == snapshot[i]);
        }
        for (auto t : sim.log().types) {
            CHECK(t <= 1);
        }
    }
}
