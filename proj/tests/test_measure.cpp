#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <slfv/measure.hpp>

using namespace slfv;
using std::numbers::pi;

namespace
{

std::vector<RadiusMeasure> sample_measures()
{
    return {RadiusMeasure::unit(),
            RadiusMeasure({{0.5, 2.0}, {1.5, 0.1}}, {}),
            RadiusMeasure({}, {{0.0, 2.0, 1.0}}),
            RadiusMeasure({{1.0, 1.0}, {2.0, 1.0}}, {}),
            RadiusMeasure({{0.3, 0.7}}, {{0.1, 0.9, 2.5}, {0.5, 1.2, 0.4}})};
}

} // namespace

TEST_CASE("R0 is the largest radius carrying mass")
{
    CHECK(RadiusMeasure::unit().max_radius() == 1.0);
    CHECK(RadiusMeasure({{0.5, 2.0}, {1.5, 0.1}}, {}).max_radius() == 1.5);
    CHECK(RadiusMeasure({}, {{0.0, 2.0, 1.0}}).max_radius() == 2.0);
}

TEST_CASE("invalid measures are rejected")
{
    CHECK_THROWS_AS(RadiusMeasure({}, {}), invalid_measure);
    CHECK_THROWS_AS(RadiusMeasure({{1.0, 0.0}}, {}), invalid_measure);
    CHECK_THROWS_AS(RadiusMeasure({{-1.0, 1.0}}, {}), invalid_measure);
    CHECK_THROWS_AS(RadiusMeasure({}, {{1.0, 1.0, 1.0}}), invalid_measure);
    CHECK_THROWS_AS(RadiusMeasure({{1.0, std::nan("")}}, {}), invalid_measure);
}

TEST_CASE("Yule rate bound")
{
    CHECK(RadiusMeasure::unit().yule_rate_bound() == Catch::Approx(4 * pi));
    // pi (2+1)^2 + pi (2+2)^2
    CHECK(RadiusMeasure({{1.0, 1.0}, {2.0, 1.0}}, {}).yule_rate_bound() == Catch::Approx(25 * pi));
    // pi * integral_0^1 (1+r)^2 dr
    CHECK(RadiusMeasure({}, {{0.0, 1.0, 1.0}}).yule_rate_bound() == Catch::Approx(7 * pi / 3));
}

TEST_CASE("Yule rate bound matches numerical integration")
{
    for (const auto &m : sample_measures()) {
        const double r0 = m.max_radius();
        double expect = 0.0;
        for (const auto &a : m.atoms()) {
            expect += a.mass * pi * (r0 + a.radius) * (r0 + a.radius);
        }
        for (const auto &p : m.pieces()) {
            const int n = 20000;
            const double h = (p.hi - p.lo) / n;
            for (int i = 0; i < n; ++i) {
                const double r = p.lo + (i + 0.5) * h;
                expect += p.mass / (p.hi - p.lo) * pi * (r0 + r) * (r0 + r) * h;
            }
        }
        CHECK(m.yule_rate_bound() == Catch::Approx(expect).epsilon(1e-8));
        CHECK(m.yule_rate_bound() >= pi * r0 * r0 * m.total_mass());
    }
}

TEST_CASE("tail mass is monotone with the right end values")
{
    Rng rng(11);
    for (const auto &m : sample_measures()) {
        CHECK(m.tail_mass(0.0) == Catch::Approx(m.total_mass()));
        CHECK(m.tail_mass(m.max_radius()) == 0.0);
        CHECK(m.tail_mass(m.max_radius() + 1) == 0.0);
        for (int i = 0; i < 100; ++i) {
            double a = uniform(rng, 0, m.max_radius() * 1.1);
            double b = uniform(rng, 0, m.max_radius() * 1.1);
            if (a > b) {
                std::swap(a, b);
            }
            CHECK(m.tail_mass(a) >= m.tail_mass(b));
        }
    }
}

TEST_CASE("radius sampling")
{
    Rng rng(3);
    const auto unit = RadiusMeasure::unit();
    for (int i = 0; i < 100; ++i) {
        CHECK(unit.sample(rng) == 1.0);
    }

    // Mixture 3/4 at radius 1, 1/4 at radius 2: mean 1.25, variance 3/16.
    const RadiusMeasure mix({{1.0, 3.0}, {2.0, 1.0}}, {});
    const int n = 1000000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s += mix.sample(rng);
    }
    const double sigma = std::sqrt(3.0 / 16.0 / n);
    CHECK(std::abs(s / n - 1.25) <= 3 * sigma);

    Rng a(99), b(99);
    const RadiusMeasure cont({}, {{0.2, 1.0, 1.0}});
    for (int i = 0; i < 1000; ++i) {
        const double r = cont.sample(a);
        CHECK(r == cont.sample(b));
        CHECK(r > 0.2);
        CHECK(r <= 1.0);
    }
}

TEST_CASE("slow chain parameters")
{
    const auto unit = RadiusMeasure::unit();
    const auto p = slow_chain_params(unit, 0.3);
    CHECK(p.delta == 0.3);
    CHECK(p.eta == 1.0);
    CHECK(p.step_rate == Catch::Approx(0.18));

    // Grid maximisation: 2 d^2 tail(3d) is increasing while 3d < 1, so the best grid
    // point is the largest one strictly below 1/3.
    const auto q = slow_chain_params(unit);
    CHECK(q.delta == Catch::Approx(999.0 / 3000.0));
    CHECK(q.eta == 1.0);
    CHECK(q.step_rate >= 2 * q.delta * q.delta * q.eta);

    const RadiusMeasure small({{0.1, 1.0}}, {});
    CHECK_THROWS_AS(slow_chain_params(small, std::nullopt, 0.04), no_valid_delta);
    const auto s = slow_chain_params(small, std::nullopt, 0.01);
    CHECK(s.delta >= 0.01);
    CHECK(3 * s.delta < 0.1);

    CHECK_THROWS_AS(slow_chain_params(unit, 0.34), no_valid_delta);
    CHECK_THROWS_AS(slow_chain_params(unit, 0.0), no_valid_delta);

    for (const auto &m : sample_measures()) {
        const auto r = slow_chain_params(m);
        CHECK(r.step_rate >= 2 * r.delta * r.delta * r.eta);
        CHECK(m.tail_mass(3 * r.delta) >= r.eta);
        CHECK(3 * r.delta < m.max_radius());
    }
}
