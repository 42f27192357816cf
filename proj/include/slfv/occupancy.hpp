#ifndef SLFV_OCCUPANCY_HPP
#define SLFV_OCCUPANCY_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <slfv/errors.hpp>
#include <slfv/events.hpp>
#include <slfv/geometry.hpp>
#include <slfv/seed_region.hpp>
#include <slfv/spatial_grid.hpp>

namespace slfv
{

// Whether a closed-interval union (parameters along a segment) covers [0, 1].
inline bool covers_unit_interval(std::vector<Interval> ivs)
{
    std::vector<Interval> clipped;
    clipped.reserve(ivs.size());
    for (const auto &iv : ivs) {
        const double lo = std::max(iv.lo, 0.0);
        const double hi = std::min(iv.hi, 1.0);
        if (lo <= hi) {
            clipped.push_back({lo, hi});
        }
    }
    std::sort(clipped.begin(), clipped.end(), [](const Interval &a, const Interval &b) { return a.lo < b.lo; });
    if (clipped.empty() || clipped.front().lo > 0.0) {
        return false;
    }
    double reach = clipped.front().hi;
    for (const auto &iv : clipped) {
        if (iv.lo > reach) {
            return false;
        }
        reach = std::max(reach, iv.hi);
    }
    return reach >= 1.0;
}

/// Incrementally maintained union of closed sub-intervals of [0, 1] along a segment.
class SegmentCover
{
public:
    SegmentCover(Point anchor, Point end, std::optional<Window> clip = std::nullopt)
        : m_a(anchor), m_b(end), m_clip(clip)
    {
    }

    [[nodiscard]] Point anchor() const noexcept
    {
        return m_a;
    }
    [[nodiscard]] Point end() const noexcept
    {
        return m_b;
    }

    void add_ball(const Ball &b)
    {
        auto iv = chord(m_a, m_b, b);
        if (m_clip) {
            iv = intersect(iv, chord(m_a, m_b, *m_clip));
        }
        if (iv) {
            add(*iv);
        }
    }

    void add_seed(const SeedRegion &seed)
    {
        std::vector<Interval> ivs;
        seed.chords(m_a, m_b, m_clip, ivs);
        for (const auto &iv : ivs) {
            add(iv);
        }
    }

    void add(Interval iv)
    {
        double lo = std::max(iv.lo, 0.0);
        double hi = std::min(iv.hi, 1.0);
        if (lo > hi) {
            return;
        }
        // Merge with every stored interval that touches [lo, hi].
        auto it = m_parts.upper_bound(hi);
        while (it != m_parts.begin()) {
            auto prev = std::prev(it);
            if (prev->second < lo) {
                break;
            }
            lo = std::min(lo, prev->first);
            hi = std::max(hi, prev->second);
            it = m_parts.erase(prev);
        }
        m_parts.emplace(lo, hi);
    }

    [[nodiscard]] bool covered() const noexcept
    {
        return !m_parts.empty() && m_parts.begin()->first <= 0.0 && m_parts.begin()->second >= 1.0;
    }

private:
    Point m_a;
    Point m_b;
    std::optional<Window> m_clip;
    std::map<double, double> m_parts;
};

struct StoredBall {
    std::uint64_t event_id = 0;
    double time = 0.0;
    Ball ball;
};

/// The occupied set S_t = seed ∪ balls, with every ball (and the seed) clipped to `clip`
/// in restricted mode. Balls are only ever appended.
///
/// With interior tracking on, each grid cell carries an 8×8 bitmap of sub-squares known
/// to lie inside S. A cell is "deep" once S contains every point within R0 of the cell,
/// so any event centred there is accepted without changing S. Cells adjacent to a ball
/// centre (or near the seed) and not deep form the frontier from which candidates are
/// drawn by the frontier window policy.
class OccupiedState
{
public:
    static constexpr int sub_per_side = 8;

    OccupiedState(SeedRegion seed, double max_radius, std::optional<Window> clip = std::nullopt,
                  bool track_interior = false)
        : m_seed(std::move(seed)), m_r0(max_radius), m_clip(clip), m_index(max_radius),
          m_cells(2.0 * max_radius), m_track(track_interior)
    {
        if (!(max_radius > 0.0)) {
            throw invalid_measure("maximal radius must be positive");
        }
        if (m_clip) {
            m_clip->validate();
        }
        m_bbox = m_seed.bounding_box(m_clip);
        m_bounded = m_clip.has_value() || m_seed.is_compact();
        if (m_track) {
            if (m_clip || !m_seed.is_compact()) {
                throw contract_violation("interior tracking needs a compact seed and no clip window");
            }
            init_frontier_from_seed();
        }
    }

    [[nodiscard]] const SeedRegion &seed() const noexcept
    {
        return m_seed;
    }
    [[nodiscard]] const std::optional<Window> &clip() const noexcept
    {
        return m_clip;
    }
    [[nodiscard]] double max_radius() const noexcept
    {
        return m_r0;
    }
    [[nodiscard]] double t_now() const noexcept
    {
        return m_t;
    }
    [[nodiscard]] const std::vector<StoredBall> &balls() const noexcept
    {
        return m_balls;
    }
    [[nodiscard]] const std::optional<Window> &bbox() const noexcept
    {
        return m_bbox;
    }
    [[nodiscard]] const BallIndex &index() const noexcept
    {
        return m_index;
    }

    // B(center, radius) meets S (after clipping in restricted mode).
    [[nodiscard]] bool intersects(Point center, double radius) const
    {
        const Ball q{center, radius};
        if (m_seed.meets(q, m_clip)) {
            return true;
        }
        if (m_clip) {
            const Window clip = *m_clip;
            return m_index.scan_near(center, [&](const BallIndex::Slot &s) {
                return balls_meet_within(q, Ball{{s.x, s.y}, s.r}, clip);
            });
        }
        return m_index.scan_near(center, [&](const BallIndex::Slot &s) {
            const double dx = s.x - center.x, dy = s.y - center.y, rr = s.r + radius;
            return dx * dx + dy * dy <= rr * rr;
        });
    }

    [[nodiscard]] bool covers(Point p) const
    {
        if (m_clip && !m_clip->contains(p)) {
            return false;
        }
        if (m_seed.contains(p, m_clip)) {
            return true;
        }
        return m_index.scan_near(p, [&](const BallIndex::Slot &s) {
            const double dx = s.x - p.x, dy = s.y - p.y;
            return dx * dx + dy * dy <= s.r * s.r;
        });
    }

    // Ids of the balls containing p, ascending in time (the seed is not listed).
    [[nodiscard]] std::vector<std::uint64_t> covering_events(Point p) const
    {
        std::vector<std::uint32_t> hits;
        if (!m_clip || m_clip->contains(p)) {
            m_index.scan_near(p, [&](const BallIndex::Slot &s) {
                const double dx = s.x - p.x, dy = s.y - p.y;
                if (dx * dx + dy * dy <= s.r * s.r) {
                    hits.push_back(s.index);
                }
                return false;
            });
        }
        std::sort(hits.begin(), hits.end());
        std::vector<std::uint64_t> ids;
        ids.reserve(hits.size());
        for (auto i : hits) {
            ids.push_back(m_balls[i].event_id);
        }
        return ids;
    }

    // Appends an accepted event. The caller must have checked intersects().
    void insert(const Event &e)
    {
        if (e.time < m_t) {
            throw contract_violation("event inserted before the current time");
        }
        if (m_clip && !m_clip->contains(e.center)) {
            throw contract_violation("restricted state only accepts events centred in its window");
        }
        if (!intersects(e.center, e.radius)) {
            throw contract_violation("inserted event does not meet the occupied set");
        }
        insert_accepted(e);
    }

    // insert() without re-validating acceptance.
    void insert_accepted(const Event &e)
    {
        const auto idx = static_cast<std::uint32_t>(m_balls.size());
        m_balls.push_back(StoredBall{e.id, e.time, e.ball()});
        m_index.add(idx, e.ball());
        Window bb = slfv::bounding_box(e.ball());
        if (m_clip) {
            if (auto c = intersection(bb, *m_clip)) {
                bb = *c;
            }
        }
        if (m_bounded) {
            m_bbox = m_bbox ? hull(*m_bbox, bb) : bb;
        }
        m_t = e.time;
        if (m_track) {
            mark_frontier_around(m_cells.key(e.center));
            mark_covered(e.ball());
        }
    }

    // The whole segment from `anchor` to z lies in S. Exact closed-interval union.
    [[nodiscard]] bool segment_fully_covered(Point z, Point anchor = {0.0, 0.0}) const
    {
        if (anchor == z) {
            return covers(z);
        }
        std::vector<Interval> ivs;
        m_seed.chords(anchor, z, m_clip, ivs);
        const std::optional<Interval> clip_iv =
            m_clip ? chord(anchor, z, *m_clip) : std::optional<Interval>{Interval{-1e300, 1e300}};
        if (!clip_iv) {
            return false;
        }
        const Window seg{std::min(anchor.x, z.x), std::max(anchor.x, z.x), std::min(anchor.y, z.y),
                         std::max(anchor.y, z.y)};
        m_index.for_each_in(seg, [&](const BallIndex::Slot &s) {
            if (auto iv = intersect(chord(anchor, z, Ball{{s.x, s.y}, s.r}), clip_iv)) {
                ivs.push_back(*iv);
            }
        });
        return covers_unit_interval(std::move(ivs));
    }

    // Bounding box grown by `margin`; with margin >= R0 it contains the centre of every
    // event able to meet S.
    [[nodiscard]] Window inflated_bbox(double margin) const
    {
        if (!m_bbox) {
            throw contract_violation("occupied set is unbounded; use a fixed window");
        }
        return m_bbox->inflated(margin);
    }

    // --- frontier bookkeeping (interior tracking only) ---

    [[nodiscard]] bool tracks_interior() const noexcept
    {
        return m_track;
    }
    [[nodiscard]] double cell_size() const noexcept
    {
        return m_cells.cell_size();
    }
    [[nodiscard]] std::span<const CellKey> frontier() const noexcept
    {
        return m_frontier;
    }
    [[nodiscard]] Window cell_window(CellKey k) const noexcept
    {
        return m_cells.cell_window(k);
    }
    [[nodiscard]] bool is_deep(CellKey k) const noexcept
    {
        const auto *c = m_cells.find(k);
        return c != nullptr && c->deep;
    }
    [[nodiscard]] std::size_t deep_cell_count() const noexcept
    {
        return m_deep_count;
    }

private:
    struct CellInfo {
        std::uint64_t covered = 0;
        std::int64_t frontier_pos = -1;
        bool candidate = false;
        bool deep = false;
    };

    static constexpr std::uint64_t full = ~std::uint64_t{0};

    // Bits of a neighbour's bitmap that must be covered for the centre cell to be deep:
    // the half of the neighbour nearest to the centre cell in each offset direction.
    static std::uint64_t neighbour_mask(int dx, int dy) noexcept
    {
        constexpr int half = sub_per_side / 2;
        std::uint64_t m = 0;
        for (int j = 0; j < sub_per_side; ++j) {
            if ((dy < 0 && j < half) || (dy > 0 && j >= half)) {
                continue;
            }
            for (int i = 0; i < sub_per_side; ++i) {
                if ((dx < 0 && i < half) || (dx > 0 && i >= half)) {
                    continue;
                }
                m |= std::uint64_t{1} << (j * sub_per_side + i);
            }
        }
        return m;
    }

    void init_frontier_from_seed()
    {
        const auto box = m_seed.bounding_box();
        if (!box) {
            return;
        }
        const Window reach = box->inflated(m_r0);
        const CellKey lo = m_cells.key({reach.x_lo, reach.y_lo});
        const CellKey hi = m_cells.key({reach.x_hi, reach.y_hi});
        for (std::int64_t iy = lo.iy; iy <= hi.iy; ++iy) {
            for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix) {
                make_candidate({ix, iy});
            }
        }
        std::vector<CellKey> touched;
        for (std::int64_t iy = lo.iy; iy <= hi.iy; ++iy) {
            for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix) {
                const CellKey k{ix, iy};
                auto &cell = m_cells.at(k);
                const Window w = m_cells.cell_window(k);
                const double s = w.width() / sub_per_side;
                for (int j = 0; j < sub_per_side; ++j) {
                    for (int i = 0; i < sub_per_side; ++i) {
                        const Window sq{w.x_lo + i * s, w.x_lo + (i + 1) * s, w.y_lo + j * s, w.y_lo + (j + 1) * s};
                        if (m_seed.contains_rect(sq)) {
                            cell.covered |= std::uint64_t{1} << (j * sub_per_side + i);
                        }
                    }
                }
                touched.push_back(k);
            }
        }
        refresh_deep(touched);
    }

    void make_candidate(CellKey k)
    {
        auto &cell = m_cells.at(k);
        if (cell.candidate) {
            return;
        }
        cell.candidate = true;
        if (!cell.deep) {
            cell.frontier_pos = static_cast<std::int64_t>(m_frontier.size());
            m_frontier.push_back(k);
        }
    }

    void mark_frontier_around(CellKey c)
    {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                make_candidate({c.ix + dx, c.iy + dy});
            }
        }
    }

    void mark_covered(const Ball &b)
    {
        const double side = m_cells.cell_size();
        const double s = side / sub_per_side;
        // A sub-square fits in the ball only if the ball is at least its half diagonal.
        if (b.radius * b.radius < 0.5 * s * s) {
            return;
        }
        const Window bb = slfv::bounding_box(b);
        const CellKey lo = m_cells.key({bb.x_lo, bb.y_lo});
        const CellKey hi = m_cells.key({bb.x_hi, bb.y_hi});
        std::vector<CellKey> touched;
        for (std::int64_t iy = lo.iy; iy <= hi.iy; ++iy) {
            for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix) {
                const CellKey k{ix, iy};
                auto &cell = m_cells.at(k);
                if (cell.covered == full) {
                    continue;
                }
                const Window w = m_cells.cell_window(k);
                const int i0 = std::max(0, static_cast<int>(std::floor((bb.x_lo - w.x_lo) / s)));
                const int i1 = std::min(sub_per_side - 1, static_cast<int>(std::floor((bb.x_hi - w.x_lo) / s)));
                const int j0 = std::max(0, static_cast<int>(std::floor((bb.y_lo - w.y_lo) / s)));
                const int j1 = std::min(sub_per_side - 1, static_cast<int>(std::floor((bb.y_hi - w.y_lo) / s)));
                const std::uint64_t before = cell.covered;
                for (int j = j0; j <= j1; ++j) {
                    for (int i = i0; i <= i1; ++i) {
                        const std::uint64_t bit = std::uint64_t{1} << (j * sub_per_side + i);
                        if ((cell.covered & bit) != 0) {
                            continue;
                        }
                        const Window sq{w.x_lo + i * s, w.x_lo + (i + 1) * s, w.y_lo + j * s, w.y_lo + (j + 1) * s};
                        if (rect_inside_ball(sq, b)) {
                            cell.covered |= bit;
                        }
                    }
                }
                if (cell.covered != before) {
                    touched.push_back(k);
                }
            }
        }
        refresh_deep(touched);
    }

    // Re-examines the cells whose deep status may depend on the touched cells.
    void refresh_deep(const std::vector<CellKey> &touched)
    {
        for (const auto &t : touched) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dx = -1; dx <= 1; ++dx) {
                    const CellKey k{t.ix + dx, t.iy + dy};
                    auto *cell = m_cells.find(k);
                    if (cell == nullptr || cell->deep || cell->covered != full) {
                        continue;
                    }
                    if (check_deep(k)) {
                        set_deep(k);
                    }
                }
            }
        }
    }

    [[nodiscard]] bool check_deep(CellKey k) const
    {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const auto *n = m_cells.find({k.ix + dx, k.iy + dy});
                const std::uint64_t need = neighbour_mask(dx, dy);
                if (n == nullptr || (n->covered & need) != need) {
                    return false;
                }
            }
        }
        return true;
    }

    void set_deep(CellKey k)
    {
        auto &cell = m_cells.at(k);
        cell.deep = true;
        ++m_deep_count;
        if (cell.frontier_pos >= 0) {
            const auto pos = static_cast<std::size_t>(cell.frontier_pos);
            const CellKey last = m_frontier.back();
            m_frontier[pos] = last;
            m_cells.at(last).frontier_pos = static_cast<std::int64_t>(pos);
            m_frontier.pop_back();
            cell.frontier_pos = -1;
        }
    }

    SeedRegion m_seed;
    double m_r0;
    std::optional<Window> m_clip;
    BallIndex m_index;
    std::vector<StoredBall> m_balls;
    std::optional<Window> m_bbox;
    bool m_bounded = true;
    double m_t = 0.0;

    DenseGrid<CellInfo> m_cells;
    bool m_track;
    std::vector<CellKey> m_frontier;
    std::size_t m_deep_count = 0;
};

} // namespace slfv

#endif
