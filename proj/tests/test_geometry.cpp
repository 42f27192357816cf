#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include <slfv/geometry.hpp>
#include <slfv/random.hpp>

using namespace slfv;

TEST_CASE("closed balls meet at tangency")
{
    CHECK(balls_meet({{0, 0}, 1}, {{2, 0}, 1}));
    CHECK_FALSE(balls_meet({{0, 0}, 1}, {{2.0000001, 0}, 1}));
    CHECK(Ball{{0, 0}, 1}.contains({1, 0}));
    CHECK_FALSE(Ball{{0, 0}, 1}.contains({1.0000001, 0}));
}

TEST_CASE("window validation")
{
    CHECK_THROWS_AS(Window::make(0, 0, 0, 1), invalid_window);
    CHECK_THROWS_AS(Window::make(0, 1, 1, 0), invalid_window);
    CHECK_THROWS_AS(Window::make(0, std::numeric_limits<double>::infinity(), 0, 1), invalid_window);
    const auto w = Window::make(-1, 2, 0, 3);
    CHECK(w.area() == 9.0);
    CHECK(w.contains({2, 3}));
    CHECK(w.inflated(1) == Window{-2, 3, -1, 4});
}

TEST_CASE("closest point of a clipped ball matches a dense search")
{
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const Ball b{{uniform(rng, -2, 2), uniform(rng, -2, 2)}, uniform(rng, 0.2, 2)};
        const double x0 = uniform(rng, -3, 2), y0 = uniform(rng, -3, 2);
        const Window r{x0, x0 + uniform(rng, 0.1, 3), y0, y0 + uniform(rng, 0.1, 3)};
        const Point p{uniform(rng, -5, 5), uniform(rng, -5, 5)};

        // Oracle: minimum distance over a fine lattice of B ∩ R.
        double best = std::numeric_limits<double>::infinity();
        const int n = 300;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                const Point q{r.x_lo + r.width() * i / n, r.y_lo + r.height() * j / n};
                if (b.contains(q)) {
                    best = std::min(best, distance(p, q));
                }
            }
        }
        const auto q = closest_point(p, b, r);
        if (!std::isfinite(best)) {
            // The lattice can miss thin intersections; only check the claimed point is legal.
            if (q) {
                CHECK(r.contains(*q));
                CHECK(norm(*q - b.center) <= b.radius * (1 + 1e-12));
            }
            continue;
        }
        REQUIRE(q.has_value());
        CHECK(r.contains(*q));
        CHECK(norm(*q - b.center) <= b.radius * (1 + 1e-12));
        const double h = std::hypot(r.width(), r.height()) / n;
        CHECK(distance(p, *q) <= best + 1e-12);
        CHECK(distance(p, *q) >= best - h);
    }
}

TEST_CASE("closest point when the ball misses the rectangle")
{
    CHECK_FALSE(closest_point({0, 0}, {{5, 5}, 1}, Window{0, 1, 0, 1}).has_value());
    CHECK(std::isinf(distance_to_clipped_ball({0, 0}, {{5, 5}, 1}, Window{0, 1, 0, 1})));
}

TEST_CASE("balls meeting only outside the clip window do not meet within it")
{
    const Window q{-10, 0.9, -10, 10};
    CHECK_FALSE(balls_meet_within({{0, 0}, 1}, {{2, 0}, 1}, q));
    CHECK(balls_meet_within({{0, 0}, 1}, {{2, 0}, 1}, Window{-10, 1, -10, 10}));
}

TEST_CASE("chord of a segment through a ball")
{
    const auto iv = chord({-2, 0}, {2, 0}, Ball{{0, 0}, 1});
    REQUIRE(iv);
    CHECK(iv->lo == Catch::Approx(0.25));
    CHECK(iv->hi == Catch::Approx(0.75));
    CHECK_FALSE(chord({-2, 2}, {2, 2}, Ball{{0, 0}, 1}).has_value());
    const auto w = chord({-2, 0}, {2, 0}, Window{-1, 0, -1, 1});
    REQUIRE(w);
    CHECK(w->lo == Catch::Approx(0.25));
    CHECK(w->hi == Catch::Approx(0.5));
    CHECK_FALSE(intersect(Interval{0, 0.3}, Interval{0.4, 1}).has_value());
}
