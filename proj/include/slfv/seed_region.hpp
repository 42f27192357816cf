#ifndef SLFV_SEED_REGION_HPP
#define SLFV_SEED_REGION_HPP

#include <limits>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <slfv/geometry.hpp>

namespace slfv
{

// Finite set of points. Has null Lebesgue measure, so it does not satisfy the
// positive-volume neighbourhood condition; still a legal initial state.
struct PointSet {
    std::vector<Point> points;
};

// Closed half-plane {x <= x0}.
struct HalfPlane {
    double x0 = 0.0;
};

struct Disk {
    Point center;
    double radius = 0.0;
};

class SeedRegion;

struct SeedUnion {
    std::vector<SeedRegion> parts;
};

/// Initial occupied set E. All predicates treat E as closed and, when a clip window is
/// given, work with E ∩ clip (the restricted process only ever sees the clipped seed).
class SeedRegion
{
public:
    using variant_type = std::variant<PointSet, HalfPlane, Disk, SeedUnion>;

    SeedRegion(PointSet p) : m_v(std::move(p)) {}
    SeedRegion(HalfPlane h) : m_v(h) {}
    SeedRegion(Disk d) : m_v(d) {}
    SeedRegion(SeedUnion u) : m_v(std::move(u)) {}

    static SeedRegion origin()
    {
        return PointSet{{Point{0.0, 0.0}}};
    }

    [[nodiscard]] const variant_type &variant() const noexcept
    {
        return m_v;
    }

    [[nodiscard]] bool contains(Point p, const std::optional<Window> &clip = std::nullopt) const
    {
        if (clip && !clip->contains(p)) {
            return false;
        }
        return std::visit(
            [&](const auto &s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PointSet>) {
                    for (const auto &q : s.points) {
                        if (q == p) {
                            return true;
                        }
                    }
                    return false;
                } else if constexpr (std::is_same_v<T, HalfPlane>) {
                    return p.x <= s.x0;
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return Ball{s.center, s.radius}.contains(p);
                } else {
                    for (const auto &part : s.parts) {
                        if (part.contains(p, clip)) {
                            return true;
                        }
                    }
                    return false;
                }
            },
            m_v);
    }

    // Point of E ∩ clip closest to p, if that set is non-empty.
    [[nodiscard]] std::optional<Point> closest_point(Point p, const std::optional<Window> &clip = std::nullopt) const
    {
        return std::visit(
            [&](const auto &s) -> std::optional<Point> {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PointSet>) {
                    std::optional<Point> best;
                    double best_d2 = std::numeric_limits<double>::infinity();
                    for (const auto &q : s.points) {
                        if (clip && !clip->contains(q)) {
                            continue;
                        }
                        const double d2 = norm2(p - q);
                        if (d2 < best_d2) {
                            best_d2 = d2;
                            best = q;
                        }
                    }
                    return best;
                } else if constexpr (std::is_same_v<T, HalfPlane>) {
                    if (!clip) {
                        return Point{std::min(p.x, s.x0), p.y};
                    }
                    if (clip->x_lo > s.x0) {
                        return std::nullopt;
                    }
                    Window r = *clip;
                    r.x_hi = std::min(r.x_hi, s.x0);
                    return r.clamp(p);
                } else if constexpr (std::is_same_v<T, Disk>) {
                    const Ball b{s.center, s.radius};
                    if (clip) {
                        return slfv::closest_point(p, b, *clip);
                    }
                    if (b.contains(p)) {
                        return p;
                    }
                    const Point d = p - s.center;
                    return s.center + (s.radius / norm(d)) * d;
                } else {
                    std::optional<Point> best;
                    double best_d2 = std::numeric_limits<double>::infinity();
                    for (const auto &part : s.parts) {
                        if (auto q = part.closest_point(p, clip)) {
                            const double d2 = norm2(p - *q);
                            if (d2 < best_d2) {
                                best_d2 = d2;
                                best = q;
                            }
                        }
                    }
                    return best;
                }
            },
            m_v);
    }

    // B ∩ E ∩ clip is non-empty.
    [[nodiscard]] bool meets(const Ball &b, const std::optional<Window> &clip = std::nullopt) const
    {
        if (!clip) {
            if (const auto *h = std::get_if<HalfPlane>(&m_v)) {
                return b.center.x - b.radius <= h->x0;
            }
            if (const auto *d = std::get_if<Disk>(&m_v)) {
                return balls_meet(b, Ball{d->center, d->radius});
            }
        }
        const auto q = closest_point(b.center, clip);
        return q && b.contains(*q);
    }

    // Closed parameter intervals of the segment a + u (b - a) inside E ∩ clip.
    void chords(Point a, Point b, const std::optional<Window> &clip, std::vector<Interval> &out) const
    {
        const auto clip_interval = [&](std::optional<Interval> iv) {
            if (clip) {
                iv = intersect(iv, chord(a, b, *clip));
            }
            if (iv) {
                out.push_back(*iv);
            }
        };
        std::visit(
            [&](const auto &s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PointSet>) {
                    for (const auto &q : s.points) {
                        // A point meets the segment in at most one parameter value.
                        clip_interval(chord(a, b, Ball{q, 0.0}));
                    }
                } else if constexpr (std::is_same_v<T, HalfPlane>) {
                    const double dx = b.x - a.x;
                    constexpr double inf = std::numeric_limits<double>::infinity();
                    if (dx == 0.0) {
                        if (a.x <= s.x0) {
                            clip_interval(Interval{-inf, inf});
                        }
                    } else if (dx > 0.0) {
                        clip_interval(Interval{-inf, (s.x0 - a.x) / dx});
                    } else {
                        clip_interval(Interval{(s.x0 - a.x) / dx, inf});
                    }
                } else if constexpr (std::is_same_v<T, Disk>) {
                    clip_interval(chord(a, b, Ball{s.center, s.radius}));
                } else {
                    for (const auto &part : s.parts) {
                        part.chords(a, b, clip, out);
                    }
                }
            },
            m_v);
    }

    // Rectangle r lies inside E (sufficient test, used only for interior bookkeeping).
    [[nodiscard]] bool contains_rect(const Window &r) const
    {
        return std::visit(
            [&](const auto &s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PointSet>) {
                    return false;
                } else if constexpr (std::is_same_v<T, HalfPlane>) {
                    return r.x_hi <= s.x0;
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return rect_inside_ball(r, Ball{s.center, s.radius});
                } else {
                    for (const auto &part : s.parts) {
                        if (part.contains_rect(r)) {
                            return true;
                        }
                    }
                    return false;
                }
            },
            m_v);
    }

    // Bounding box of E ∩ clip; nullopt when unbounded or empty.
    [[nodiscard]] std::optional<Window> bounding_box(const std::optional<Window> &clip = std::nullopt) const
    {
        std::optional<Window> box = std::visit(
            [&](const auto &s) -> std::optional<Window> {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PointSet>) {
                    std::optional<Window> w;
                    for (const auto &q : s.points) {
                        if (clip && !clip->contains(q)) {
                            continue;
                        }
                        const Window pw{q.x, q.x, q.y, q.y};
                        w = w ? hull(*w, pw) : pw;
                    }
                    return w;
                } else if constexpr (std::is_same_v<T, HalfPlane>) {
                    if (!clip || clip->x_lo > s.x0) {
                        return std::nullopt;
                    }
                    Window r = *clip;
                    r.x_hi = std::min(r.x_hi, s.x0);
                    return r;
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return slfv::bounding_box(Ball{s.center, s.radius});
                } else {
                    std::optional<Window> w;
                    for (const auto &part : s.parts) {
                        if (!part.is_compact() && !clip) {
                            return std::nullopt;
                        }
                        if (auto pw = part.bounding_box(clip)) {
                            w = w ? hull(*w, *pw) : *pw;
                        }
                    }
                    return w;
                }
            },
            m_v);
        if (box && clip) {
            box = intersection(*box, *clip);
        }
        return box;
    }

    [[nodiscard]] bool is_compact() const
    {
        return std::visit(
            [](const auto &s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, HalfPlane>) {
                    return false;
                } else if constexpr (std::is_same_v<T, SeedUnion>) {
                    for (const auto &part : s.parts) {
                        if (!part.is_compact()) {
                            return false;
                        }
                    }
                    return true;
                } else {
                    return true;
                }
            },
            m_v);
    }

    // Every point of E has a neighbourhood meeting E in positive area. Points fail;
    // half-planes and disks of positive radius pass; a union passes iff every part does
    // or the failing parts are inside passing ones (not checked: reported as failing).
    [[nodiscard]] bool satisfies_triangle() const
    {
        return std::visit(
            [](const auto &s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PointSet>) {
                    return s.points.empty();
                } else if constexpr (std::is_same_v<T, HalfPlane>) {
                    return true;
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return s.radius > 0.0;
                } else {
                    for (const auto &part : s.parts) {
                        if (!part.satisfies_triangle()) {
                            return false;
                        }
                    }
                    return true;
                }
            },
            m_v);
    }

private:
    variant_type m_v;
};

} // namespace slfv

#endif
