#ifndef SLFV_SIMULATOR_HPP
#define SLFV_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <slfv/chains.hpp>
#include <slfv/errors.hpp>
#include <slfv/events.hpp>
#include <slfv/geometry.hpp>
#include <slfv/measure.hpp>
#include <slfv/occupancy.hpp>
#include <slfv/random.hpp>
#include <slfv/seed_region.hpp>

namespace slfv
{

// Stop conditions. A run stops at the first accepted event after which its condition
// holds (or at the horizon / event count).
struct PointCovered {
    Point z;
};
struct HalfPlaneReached {
    double x = 0.0;
};
struct SegmentCovered {
    Point z;
    Point anchor{0.0, 0.0};
};
struct TimeHorizon {
    double t = 0.0;
};
struct EventCount {
    std::uint64_t n = 0;
};

using StopCondition = std::variant<PointCovered, HalfPlaneReached, SegmentCovered, TimeHorizon, EventCount>;

struct StopReport {
    double stop_time = 0.0;
    std::optional<std::uint64_t> trigger_event_id;
    std::uint64_t accepted_count = 0;
    std::uint64_t candidate_count = 0;
    bool truncated = false;
};

// Candidate windows. Adaptive: the occupied bounding box grown by R0, recomputed after
// every acceptance. Frontier: the non-deep cells next to the occupied set (events centred
// in deep cells are accepted no-ops and are never drawn, so they are absent from the
// log). Fixed: the restricted process on a rectangle Q, balls clipped to Q.
struct AdaptiveWindow {
};
struct FrontierWindow {
};
struct FixedWindow {
    Window q;
};

using WindowPolicy = std::variant<AdaptiveWindow, FrontierWindow, FixedWindow>;

// Seed colouring for two-type runs: type 0 below the threshold, 1 otherwise; sectors
// alternate types around `center`.
struct SplitX {
    double threshold = 0.0;
};
struct SplitY {
    double threshold = 0.0;
};
struct Sectors {
    int count = 2;
    Point center;
};
using TypeRule = std::variant<SplitX, SplitY, Sectors>;

inline std::uint8_t seed_type(const TypeRule &rule, Point p)
{
    return std::visit(
        [&](const auto &r) -> std::uint8_t {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, SplitX>) {
                return p.x < r.threshold ? 0 : 1;
            } else if constexpr (std::is_same_v<T, SplitY>) {
                return p.y < r.threshold ? 0 : 1;
            } else {
                double a = std::atan2(p.y - r.center.y, p.x - r.center.x);
                if (a < 0.0) {
                    a += 2.0 * std::numbers::pi;
                }
                const int k = std::min(r.count - 1, static_cast<int>(a / (2.0 * std::numbers::pi) * r.count));
                return static_cast<std::uint8_t>(k % 2);
            }
        },
        rule);
}

struct SimulationOptions {
    std::uint64_t candidate_budget = 1'000'000'000;
    // Rejection-sampling trials for the parent location of a two-type event.
    std::uint64_t parent_trials = 100'000;
};

class budget_exceeded : public error
{
public:
    budget_exceeded(EventLog partial, StopReport report)
        : error("candidate budget exhausted before the stop condition"), m_partial(std::move(partial)),
          m_report(report)
    {
    }

    [[nodiscard]] const EventLog &partial_log() const noexcept
    {
        return m_partial;
    }
    [[nodiscard]] const StopReport &report() const noexcept
    {
        return m_report;
    }

private:
    EventLog m_partial;
    StopReport m_report;
};

struct Hit {
    double time = 0.0;
    std::optional<std::uint64_t> event_id;
};

/// Forward simulation of S_t from a seed. Conditions are registered with watch() and
/// recorded the first time they hold, so one run can report several hitting times.
class Simulator
{
public:
    Simulator(SeedRegion seed, RadiusMeasure measure, Rng rng, WindowPolicy policy, SimulationOptions opts = {})
        : m_measure(std::move(measure)), m_rng(std::move(rng)), m_policy(policy), m_opts(opts),
          m_state(std::move(seed), m_measure.max_radius(), clip_of(policy),
                  std::holds_alternative<FrontierWindow>(policy))
    {
        if (const auto *f = std::get_if<FixedWindow>(&m_policy)) {
            f->q.validate();
        } else if (!m_state.seed().is_compact()) {
            throw contract_violation("an unbounded seed needs the fixed window policy");
        }
        m_log.clip = m_state.clip();
    }

    void set_stream_metadata(std::uint64_t master_seed, std::uint64_t replica_id)
    {
        m_log.master_seed = master_seed;
        m_log.replica_id = replica_id;
    }

    // Colours every accepted event by its parent's type.
    void enable_types(TypeRule rule)
    {
        if (!m_log.events.empty()) {
            throw contract_violation("types must be enabled before the first event");
        }
        // Events in deep cells recolour the interior, so they cannot be skipped.
        if (std::holds_alternative<FrontierWindow>(m_policy)) {
            throw contract_violation("two-type runs need the adaptive or fixed window policy");
        }
        m_rule = rule;
    }

    [[nodiscard]] const OccupiedState &state() const noexcept
    {
        return m_state;
    }
    [[nodiscard]] const EventLog &log() const noexcept
    {
        return m_log;
    }
    [[nodiscard]] EventLog take_log()
    {
        return std::move(m_log);
    }
    [[nodiscard]] double now() const noexcept
    {
        return m_t;
    }
    [[nodiscard]] const RadiusMeasure &measure() const noexcept
    {
        return m_measure;
    }
    [[nodiscard]] Rng &rng() noexcept
    {
        return m_rng;
    }

    // Registers a condition. Conditions already true at registration are recorded at the
    // current time without a trigger.
    std::size_t watch(const StopCondition &c)
    {
        Watch w{c, std::nullopt, std::nullopt};
        if (const auto *s = std::get_if<SegmentCovered>(&c)) {
            w.cover.emplace(s->anchor, s->z, m_state.clip());
            w.cover->add_seed(m_state.seed());
            for (const auto &b : m_state.balls()) {
                w.cover->add_ball(b.ball);
            }
        }
        if (holds_now(w)) {
            w.hit = Hit{m_t, std::nullopt};
        }
        m_watches.push_back(std::move(w));
        return m_watches.size() - 1;
    }

    [[nodiscard]] const std::optional<Hit> &hit(std::size_t handle) const
    {
        return m_watches.at(handle).hit;
    }

    // Runs until the watched condition holds.
    StopReport advance_until(std::size_t handle)
    {
        while (!m_watches.at(handle).hit) {
            step();
        }
        return report_for(handle);
    }

    StopReport run(const StopCondition &c)
    {
        return advance_until(watch(c));
    }

    // Draws one candidate and applies it (or a horizon).
    void step()
    {
        if (m_log.candidate_count >= m_opts.candidate_budget) {
            throw budget_exceeded(m_log, StopReport{m_t, std::nullopt, m_log.events.size(), m_log.candidate_count,
                                                    false});
        }
        Event e = draw();
        ++m_log.candidate_count;
        e.id = m_log.candidate_count;
        apply(e);
    }

    // Feeds one externally chosen candidate (scripted runs, replays). Its id is kept when
    // set, else the candidate count is used.
    void offer(Event e)
    {
        if (e.time < m_t || (!m_log.events.empty() && e.id != 0 && e.id <= m_log.events.back().id)) {
            throw contract_violation("offered candidates must come in time and id order");
        }
        ++m_log.candidate_count;
        if (e.id == 0) {
            e.id = m_log.candidate_count;
        }
        apply(e);
    }

private:
    void apply(const Event &e)
    {
        // Horizons falling before the candidate end the wait; the candidate is dropped
        // (the process is memoryless, so resuming from the horizon is exact).
        double earliest = std::numeric_limits<double>::infinity();
        for (auto &w : m_watches) {
            if (const auto *h = std::get_if<TimeHorizon>(&w.cond); h && !w.hit && h->t < e.time) {
                earliest = std::min(earliest, h->t);
            }
        }
        if (earliest < std::numeric_limits<double>::infinity()) {
            for (auto &w : m_watches) {
                if (const auto *h = std::get_if<TimeHorizon>(&w.cond); h && !w.hit && h->t <= earliest) {
                    w.hit = Hit{h->t, std::nullopt};
                }
            }
            m_t = earliest;
            return;
        }
        m_t = e.time;

        if (m_state.clip() && !m_state.clip()->contains(e.center)) {
            return;
        }
        if (!m_state.intersects(e.center, e.radius)) {
            return;
        }
        if (m_rule) {
            m_log.types.push_back(parent_type(e));
        }
        m_state.insert_accepted(e);
        m_log.events.push_back(e);
        for (auto &w : m_watches) {
            if (!w.hit && satisfied_by(w, e)) {
                w.hit = Hit{e.time, e.id};
            }
        }
    }

public:
    // Type of the latest event covering p, else the seed rule's.
    [[nodiscard]] std::uint8_t type_at(Point p) const
    {
        if (!m_rule) {
            throw contract_violation("types are not enabled");
        }
        // Balls sit in their cell in insertion order, so the newest covering ball of each
        // cell is found scanning backwards.
        std::optional<std::uint32_t> latest;
        const auto &grid = m_state.index().grid();
        const CellKey c = grid.key(p);
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                const auto *slots = grid.find({c.ix + dx, c.iy + dy});
                if (slots == nullptr) {
                    continue;
                }
                for (auto it = slots->rbegin(); it != slots->rend(); ++it) {
                    const double ex = it->x - p.x, ey = it->y - p.y;
                    if (ex * ex + ey * ey <= it->r * it->r) {
                        if (!latest || it->index > *latest) {
                            latest = it->index;
                        }
                        break;
                    }
                }
            }
        }
        return latest ? m_log.types[*latest] : seed_type(*m_rule, p);
    }

private:
    struct Watch {
        StopCondition cond;
        std::optional<Hit> hit;
        std::optional<SegmentCover> cover;
    };

    static std::optional<Window> clip_of(const WindowPolicy &p)
    {
        if (const auto *f = std::get_if<FixedWindow>(&p)) {
            return f->q;
        }
        return std::nullopt;
    }

    Event draw()
    {
        const double r0 = m_measure.max_radius();
        if (const auto *f = std::get_if<FixedWindow>(&m_policy)) {
            return next_candidate(m_rng, f->q, m_measure, m_t);
        }
        if (std::holds_alternative<AdaptiveWindow>(m_policy)) {
            return next_candidate(m_rng, m_state.inflated_bbox(r0), m_measure, m_t);
        }
        const auto cells = m_state.frontier();
        Event e;
        if (cells.empty()) {
            e.time = std::numeric_limits<double>::infinity();
            return e;
        }
        const double side = m_state.cell_size();
        const double rate = static_cast<double>(cells.size()) * side * side * m_measure.total_mass();
        e.time = m_t + exponential(m_rng, rate);
        const Window w = m_state.cell_window(cells[uniform_index(m_rng, cells.size())]);
        e.center = {uniform(m_rng, w.x_lo, w.x_hi), uniform(m_rng, w.y_lo, w.y_hi)};
        e.radius = m_measure.sample(m_rng);
        return e;
    }

    [[nodiscard]] bool holds_now(const Watch &w) const
    {
        return std::visit(
            [&](const auto &c) -> bool {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, PointCovered>) {
                    return m_state.covers(c.z);
                } else if constexpr (std::is_same_v<T, HalfPlaneReached>) {
                    if (const auto &bb = m_state.bbox()) {
                        return bb->x_hi >= c.x;
                    }
                    // Unbounded seed without a clip: only a half-plane reaches every x.
                    return true;
                } else if constexpr (std::is_same_v<T, SegmentCovered>) {
                    return w.cover->covered();
                } else if constexpr (std::is_same_v<T, TimeHorizon>) {
                    return c.t <= m_t;
                } else {
                    return m_log.events.size() >= c.n;
                }
            },
            w.cond);
    }

    bool satisfied_by(Watch &w, const Event &e)
    {
        const auto &clip = m_state.clip();
        return std::visit(
            [&](const auto &c) -> bool {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, PointCovered>) {
                    return (!clip || clip->contains(c.z)) && e.ball().contains(c.z);
                } else if constexpr (std::is_same_v<T, HalfPlaneReached>) {
                    const double reach = clip ? std::min(e.center.x + e.radius, clip->x_hi) : e.center.x + e.radius;
                    return reach >= c.x;
                } else if constexpr (std::is_same_v<T, SegmentCovered>) {
                    w.cover->add_ball(e.ball());
                    return w.cover->covered();
                } else if constexpr (std::is_same_v<T, TimeHorizon>) {
                    return false;
                } else {
                    return m_log.events.size() >= c.n;
                }
            },
            w.cond);
    }

    // Piece of S_{t-} met by an event ball, with a rectangle (in the frame o + s·u + t·u⊥)
    // containing its intersection with the ball.
    struct ParentPiece {
        bool half_plane;
        Point center; // disk centre, or (x0, 0) for a half-plane
        double radius;
        Point o;
        Point u;
        double s0, s1, half;

        [[nodiscard]] bool contains(Point p) const
        {
            return half_plane ? p.x <= center.x : Ball{center, radius}.contains(p);
        }
    };

    static std::optional<ParentPiece> disk_piece(const Ball &b, Point c2, double r2)
    {
        const double r1 = b.radius;
        const double d = distance(b.center, c2);
        if (d >= r1 + r2) {
            return std::nullopt;
        }
        if (d + r2 <= r1) {
            return ParentPiece{false, c2, r2, c2, {1.0, 0.0}, -r2, r2, r2};
        }
        if (d + r1 <= r2) {
            return ParentPiece{false, c2, r2, b.center, {1.0, 0.0}, -r1, r1, r1};
        }
        const Point u{(c2.x - b.center.x) / d, (c2.y - b.center.y) / d};
        const double xc = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
        const double half = (xc >= 0.0 && xc <= d) ? std::sqrt(std::max(0.0, r1 * r1 - xc * xc)) : std::min(r1, r2);
        return ParentPiece{false, c2, r2, b.center, u, d - r2, r1, half};
    }

    static std::optional<ParentPiece> half_plane_piece(const Ball &b, double x0)
    {
        const double r = b.radius;
        const double gap = x0 - b.center.x;
        if (gap <= -r) {
            return std::nullopt;
        }
        const double half = gap < 0.0 ? std::sqrt(r * r - gap * gap) : r;
        return ParentPiece{true, {x0, 0.0}, 0.0, b.center, {1.0, 0.0}, -r, std::min(r, gap), half};
    }

    static void seed_pieces(const SeedRegion &seed, const Ball &b, std::vector<ParentPiece> &out)
    {
        std::visit(
            [&](const auto &s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, HalfPlane>) {
                    if (auto q = half_plane_piece(b, s.x0)) {
                        out.push_back(*q);
                    }
                } else if constexpr (std::is_same_v<T, Disk>) {
                    if (auto q = disk_piece(b, s.center, s.radius)) {
                        out.push_back(*q);
                    }
                } else if constexpr (std::is_same_v<T, SeedUnion>) {
                    for (const auto &part : s.parts) {
                        seed_pieces(part, b, out);
                    }
                }
                // Point sets have no area and never carry a parent.
            },
            seed.variant());
    }

    // Parent location uniform on B(z, r) ∩ S_{t-}. A piece is drawn with probability
    // proportional to its rectangle, a point uniformly in the rectangle, and the point is
    // kept with probability 1/(number of pieces containing it).
    std::uint8_t parent_type(const Event &e)
    {
        const Ball b = e.ball();
        std::vector<ParentPiece> pieces;
        seed_pieces(m_state.seed(), b, pieces);
        m_state.index().scan_near(b.center, [&](const BallIndex::Slot &s) {
            if (auto q = disk_piece(b, {s.x, s.y}, s.r)) {
                pieces.push_back(*q);
            }
            return false;
        });
        std::vector<double> cumulative;
        double total = 0.0;
        for (const auto &q : pieces) {
            total += (q.s1 - q.s0) * 2.0 * q.half;
            cumulative.push_back(total);
        }
        const auto &clip = m_state.clip();
        for (std::uint64_t trial = 0; total > 0.0 && trial < m_opts.parent_trials; ++trial) {
            const double pick = uniform01(m_rng) * total;
            const auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                                    cumulative.begin());
            const ParentPiece &q = pieces[std::min(k, pieces.size() - 1)];
            const double s = q.s0 + (q.s1 - q.s0) * uniform01(m_rng);
            const double t = q.half * (2.0 * uniform01(m_rng) - 1.0);
            const Point p{q.o.x + s * q.u.x - t * q.u.y, q.o.y + s * q.u.y + t * q.u.x};
            if (!b.contains(p) || !q.contains(p) || (clip && !clip->contains(p))) {
                continue;
            }
            std::size_t count = 0;
            for (const auto &other : pieces) {
                count += other.contains(p) ? 1 : 0;
            }
            if (uniform01(m_rng) * static_cast<double>(count) < 1.0) {
                return type_at(p);
            }
        }
        throw degenerate_intersection("no parent location found in the event ball; the seed likely has "
                                      "null area where the event meets it");
    }

    StopReport report_for(std::size_t handle)
    {
        const Hit &h = *m_watches[handle].hit;
        StopReport r{h.time, h.event_id, m_log.events.size(), m_log.candidate_count, false};
        if (const auto *f = std::get_if<FixedWindow>(&m_policy); f && h.event_id) {
            r.truncated = geodesic_touches_boundary(*h.event_id, f->q);
        }
        return r;
    }

    // A random geodesic to the trigger leaves the window through its top, bottom or right
    // edge. The left edge is excluded: with the default margin only seed territory lies
    // beyond it. The walk uses its own generator so the main stream is untouched.
    [[nodiscard]] bool geodesic_touches_boundary(std::uint64_t trigger_id, const Window &q) const
    {
        Rng walk(m_log.candidate_count ^ (m_log.replica_id * 0x9e3779b97f4a7c15ull) ^ m_log.master_seed);
        const Chain g = extract_geodesic(m_log, trigger_id, m_state.seed(), walk);
        for (const auto &l : g.links) {
            if (l.is_seed()) {
                continue;
            }
            if (l.center.y + l.radius > q.y_hi || l.center.y - l.radius < q.y_lo || l.center.x + l.radius > q.x_hi) {
                return true;
            }
        }
        return false;
    }

    RadiusMeasure m_measure;
    Rng m_rng;
    WindowPolicy m_policy;
    SimulationOptions m_opts;
    OccupiedState m_state;
    EventLog m_log;
    double m_t = 0.0;
    std::vector<Watch> m_watches;
    std::optional<TypeRule> m_rule;
};

/// Applies a scripted candidate sequence in order until `stop` holds (or the script ends,
/// in which case the report carries no trigger and the time of the last candidate).
inline std::pair<EventLog, StopReport> run_scripted(const SeedRegion &seed, const RadiusMeasure &m,
                                                    const std::vector<Event> &candidates, const StopCondition &stop,
                                                    std::optional<Window> clip = std::nullopt)
{
    const WindowPolicy policy = clip ? WindowPolicy{FixedWindow{*clip}} : WindowPolicy{AdaptiveWindow{}};
    Simulator sim(seed, m, Rng{}, policy);
    const auto h = sim.watch(stop);
    for (const auto &e : candidates) {
        if (sim.hit(h)) {
            break;
        }
        sim.offer(e);
    }
    StopReport r{sim.now(), std::nullopt, sim.log().events.size(), sim.log().candidate_count, false};
    if (const auto &hit = sim.hit(h)) {
        r.stop_time = hit->time;
        r.trigger_event_id = hit->event_id;
    }
    return {sim.take_log(), r};
}

/// One run to `stop`. Returns the accepted-event log and the stop report.
inline std::pair<EventLog, StopReport> run_forward(const SeedRegion &seed, const RadiusMeasure &m, Rng rng,
                                                   const StopCondition &stop, const WindowPolicy &policy = AdaptiveWindow{},
                                                   SimulationOptions opts = {})
{
    Simulator sim(seed, m, std::move(rng), policy, opts);
    const StopReport r = sim.run(stop);
    return {sim.take_log(), r};
}

using HittingTarget = std::variant<PointCovered, HalfPlaneReached, SegmentCovered>;

inline double hitting_time(const SeedRegion &seed, const RadiusMeasure &m, Rng rng, const HittingTarget &target,
                           const WindowPolicy &policy = AdaptiveWindow{}, SimulationOptions opts = {})
{
    const StopCondition stop = std::visit([](const auto &t) -> StopCondition { return t; }, target);
    return run_forward(seed, m, std::move(rng), stop, policy, opts).second.stop_time;
}

// The default restricted window for a half-plane run towards (x, 0):
// [-2 R0, x + A √x] × [-A √x, A √x].
inline Window default_halfplane_window(double x, double a, double r0)
{
    const double half = a * std::sqrt(std::max(x, 0.0));
    return Window::make(-2.0 * r0, x + std::max(half, r0), -std::max(half, r0), std::max(half, r0));
}

/// Several occupied states driven by one candidate stream drawn uniformly on `master`.
/// Each state accepts a candidate iff its centre lies in the state's clip window (if any)
/// and the ball meets the state. States without a clip see the true process only while
/// `master` holds their R0-inflated bounding box; step() throws otherwise.
class CoupledRun
{
public:
    CoupledRun(const RadiusMeasure &m, Rng rng, Window master) : m_measure(m), m_rng(std::move(rng)), m_master(master)
    {
        m_master.validate();
    }

    std::size_t add_state(SeedRegion seed, std::optional<Window> clip)
    {
        m_states.emplace_back(std::move(seed), m_measure.max_radius(), clip);
        m_logs.emplace_back();
        m_logs.back().clip = clip;
        return m_states.size() - 1;
    }

    [[nodiscard]] const OccupiedState &state(std::size_t i) const
    {
        return m_states.at(i);
    }
    [[nodiscard]] const EventLog &log(std::size_t i) const
    {
        return m_logs.at(i);
    }
    [[nodiscard]] double now() const noexcept
    {
        return m_t;
    }
    [[nodiscard]] std::uint64_t candidates() const noexcept
    {
        return m_candidates;
    }

    void step()
    {
        Event e = next_candidate(m_rng, m_master, m_measure, m_t);
        e.id = ++m_candidates;
        m_t = e.time;
        for (std::size_t i = 0; i < m_states.size(); ++i) {
            auto &s = m_states[i];
            if (!s.clip()) {
                const Window need = s.inflated_bbox(m_measure.max_radius());
                if (!(need.x_lo >= m_master.x_lo && need.x_hi <= m_master.x_hi && need.y_lo >= m_master.y_lo
                      && need.y_hi <= m_master.y_hi)) {
                    throw contract_violation("coupled state outgrew the master window");
                }
            } else if (!s.clip()->contains(e.center)) {
                continue;
            }
            if (s.intersects(e.center, e.radius)) {
                s.insert_accepted(e);
                m_logs[i].events.push_back(e);
            }
        }
    }

private:
    RadiusMeasure m_measure;
    Rng m_rng;
    Window m_master;
    double m_t = 0.0;
    std::uint64_t m_candidates = 0;
    std::vector<OccupiedState> m_states;
    std::vector<EventLog> m_logs;
};

} // namespace slfv

#endif
