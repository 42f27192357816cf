#ifndef SLFV_GEOMETRY_HPP
#define SLFV_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <slfv/errors.hpp>

namespace slfv
{

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) noexcept
    {
        return {a.x + b.x, a.y + b.y};
    }
    friend constexpr Point operator-(Point a, Point b) noexcept
    {
        return {a.x - b.x, a.y - b.y};
    }
    friend constexpr Point operator*(double s, Point a) noexcept
    {
        return {s * a.x, s * a.y};
    }
    friend constexpr bool operator==(Point a, Point b) noexcept = default;
};

constexpr double dot(Point a, Point b) noexcept
{
    return a.x * b.x + a.y * b.y;
}

constexpr double norm2(Point a) noexcept
{
    return dot(a, a);
}

inline double norm(Point a) noexcept
{
    return std::hypot(a.x, a.y);
}

inline double distance(Point a, Point b) noexcept
{
    return norm(a - b);
}

// Closed ball B(center, radius).
struct Ball {
    Point center;
    double radius = 0.0;

    [[nodiscard]] bool contains(Point p) const noexcept
    {
        return norm2(p - center) <= radius * radius;
    }
};

// Closed balls a and b share at least one point.
inline bool balls_meet(const Ball &a, const Ball &b) noexcept
{
    const double s = a.radius + b.radius;
    return norm2(a.center - b.center) <= s * s;
}

// Axis-aligned closed rectangle [x_lo, x_hi] x [y_lo, y_hi].
struct Window {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;

    static Window make(double x_lo, double x_hi, double y_lo, double y_hi)
    {
        Window w{x_lo, x_hi, y_lo, y_hi};
        w.validate();
        return w;
    }

    void validate() const
    {
        if (!(x_lo < x_hi) || !(y_lo < y_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi)
            || !std::isfinite(y_lo) || !std::isfinite(y_hi)) {
            throw invalid_window("window must satisfy x_lo < x_hi and y_lo < y_hi with finite bounds");
        }
    }

    [[nodiscard]] double width() const noexcept
    {
        return x_hi - x_lo;
    }
    [[nodiscard]] double height() const noexcept
    {
        return y_hi - y_lo;
    }
    [[nodiscard]] double area() const noexcept
    {
        return width() * height();
    }
    [[nodiscard]] bool contains(Point p) const noexcept
    {
        return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi;
    }
    [[nodiscard]] Window inflated(double margin) const noexcept
    {
        return {x_lo - margin, x_hi + margin, y_lo - margin, y_hi + margin};
    }
    [[nodiscard]] Point clamp(Point p) const noexcept
    {
        return {std::clamp(p.x, x_lo, x_hi), std::clamp(p.y, y_lo, y_hi)};
    }

    friend bool operator==(const Window &, const Window &) = default;
};

// Smallest window containing both arguments.
inline Window hull(const Window &a, const Window &b) noexcept
{
    return {std::min(a.x_lo, b.x_lo), std::max(a.x_hi, b.x_hi), std::min(a.y_lo, b.y_lo),
            std::max(a.y_hi, b.y_hi)};
}

inline Window bounding_box(const Ball &b) noexcept
{
    return {b.center.x - b.radius, b.center.x + b.radius, b.center.y - b.radius, b.center.y + b.radius};
}

inline std::optional<Window> intersection(const Window &a, const Window &b) noexcept
{
    Window w{std::max(a.x_lo, b.x_lo), std::min(a.x_hi, b.x_hi), std::max(a.y_lo, b.y_lo),
             std::min(a.y_hi, b.y_hi)};
    if (w.x_lo > w.x_hi || w.y_lo > w.y_hi) {
        return std::nullopt;
    }
    return w;
}

inline double distance(Point p, const Window &w) noexcept
{
    return distance(p, w.clamp(p));
}

// Rectangle (possibly degenerate) lies inside the closed ball.
inline bool rect_inside_ball(const Window &r, const Ball &b) noexcept
{
    const std::array<Point, 4> corners{Point{r.x_lo, r.y_lo}, Point{r.x_lo, r.y_hi}, Point{r.x_hi, r.y_lo},
                                       Point{r.x_hi, r.y_hi}};
    return std::all_of(corners.begin(), corners.end(), [&](Point c) { return b.contains(c); });
}

// Point of the convex set B ∩ R closest to p; nullopt when the set is empty.
inline std::optional<Point> closest_point(Point p, const Ball &b, const Window &r) noexcept
{
    if (distance(b.center, r) > b.radius) {
        return std::nullopt;
    }
    if (b.contains(p) && r.contains(p)) {
        return p;
    }
    std::optional<Point> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    const auto consider = [&](Point q) {
        const double d2 = norm2(p - q);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = q;
        }
    };
    // Radial projection onto the circle, if it lands inside the rectangle.
    {
        const Point d = p - b.center;
        const double n = norm(d);
        const Point q = n > 0.0 ? b.center + (b.radius / n) * d : Point{b.center.x + b.radius, b.center.y};
        if (r.contains(q)) {
            consider(q);
        }
    }
    // Projection onto the rectangle, if it lands inside the ball.
    {
        const Point q = r.clamp(p);
        if (b.contains(q)) {
            consider(q);
        }
    }
    // Each rectangle edge meets the ball in a (possibly empty) segment; project onto it.
    const auto edge = [&](Point a, Point e) {
        const Point ac = a - b.center;
        const double qa = dot(e, e);
        if (qa == 0.0) {
            if (b.contains(a)) {
                consider(a);
            }
            return;
        }
        const double qb = 2.0 * dot(e, ac);
        const double qc = dot(ac, ac) - b.radius * b.radius;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) {
            return;
        }
        const double sq = std::sqrt(disc);
        const double u0 = std::max(0.0, (-qb - sq) / (2.0 * qa));
        const double u1 = std::min(1.0, (-qb + sq) / (2.0 * qa));
        if (u0 > u1) {
            return;
        }
        consider(a + std::clamp(dot(p - a, e) / qa, u0, u1) * e);
    };
    edge({r.x_lo, r.y_lo}, {r.width(), 0.0});
    edge({r.x_lo, r.y_hi}, {r.width(), 0.0});
    edge({r.x_lo, r.y_lo}, {0.0, r.height()});
    edge({r.x_hi, r.y_lo}, {0.0, r.height()});
    return best;
}

// Euclidean distance from p to B ∩ R; +inf when the set is empty.
inline double distance_to_clipped_ball(Point p, const Ball &b, const Window &r) noexcept
{
    const auto q = closest_point(p, b, r);
    return q ? distance(p, *q) : std::numeric_limits<double>::infinity();
}

// Closed balls a and b meet inside the rectangle r.
inline bool balls_meet_within(const Ball &a, const Ball &b, const Window &r) noexcept
{
    return balls_meet(a, b) && distance_to_clipped_ball(a.center, b, r) <= a.radius;
}

// Closed parameter interval [lo, hi] of the segment a + u (b - a) lying inside the ball,
// not yet intersected with [0, 1]. Empty when the line misses the ball. A degenerate
// segment (a == b) yields (-inf, inf) when a is inside and nothing otherwise.
struct Interval {
    double lo;
    double hi;
};

inline std::optional<Interval> chord(Point a, Point b, const Ball &ball) noexcept
{
    const Point d = b - a;
    const Point ac = a - ball.center;
    const double qa = dot(d, d);
    const double qc = dot(ac, ac) - ball.radius * ball.radius;
    if (qa == 0.0) {
        if (qc <= 0.0) {
            return Interval{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        }
        return std::nullopt;
    }
    const double qb = 2.0 * dot(d, ac);
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) {
        return std::nullopt;
    }
    const double sq = std::sqrt(disc);
    return Interval{(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)};
}

// Parameter interval of the segment a + u (b - a) inside a closed rectangle.
inline std::optional<Interval> chord(Point a, Point b, const Window &w) noexcept
{
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const auto slab = [&](double p, double d, double s_lo, double s_hi) {
        if (d == 0.0) {
            if (p < s_lo || p > s_hi) {
                lo = 1.0;
                hi = 0.0;
            }
            return;
        }
        double t0 = (s_lo - p) / d;
        double t1 = (s_hi - p) / d;
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    };
    slab(a.x, b.x - a.x, w.x_lo, w.x_hi);
    slab(a.y, b.y - a.y, w.y_lo, w.y_hi);
    if (lo > hi) {
        return std::nullopt;
    }
    return Interval{lo, hi};
}

inline std::optional<Interval> intersect(std::optional<Interval> a, std::optional<Interval> b) noexcept
{
    if (!a || !b) {
        return std::nullopt;
    }
    Interval r{std::max(a->lo, b->lo), std::min(a->hi, b->hi)};
    if (r.lo > r.hi) {
        return std::nullopt;
    }
    return r;
}

} // namespace slfv

#endif
