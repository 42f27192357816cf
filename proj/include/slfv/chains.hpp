#ifndef SLFV_CHAINS_HPP
#define SLFV_CHAINS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <slfv/errors.hpp>
#include <slfv/events.hpp>
#include <slfv/geometry.hpp>
#include <slfv/measure.hpp>
#include <slfv/random.hpp>
#include <slfv/seed_region.hpp>
#include <slfv/spatial_grid.hpp>

namespace slfv
{

// One vertex of a chain: (time, centre, radius) of an event, or the seed marker
// (no event id, radius 0) which may only open a chain.
struct ChainLink {
    double time = 0.0;
    Point center;
    double radius = 0.0;
    std::optional<std::uint64_t> event_id;

    [[nodiscard]] bool is_seed() const noexcept
    {
        return !event_id.has_value();
    }
    [[nodiscard]] Ball ball() const noexcept
    {
        return {center, radius};
    }
};

enum class ChainKind { geodesic, slow, generic };

struct Chain {
    std::vector<ChainLink> links;
    ChainKind kind = ChainKind::generic;
};

struct ChainStats {
    std::uint64_t n_jumps = 0;
    double y_end = 0.0;
    double max_abs_y = 0.0;
    double strip_radius = 0.0;
    double x_advance_max = 0.0;
};

inline bool links_meet(const Ball &a, const Ball &b, const std::optional<Window> &clip)
{
    return clip ? balls_meet_within(a, b, *clip) : balls_meet(a, b);
}

/// Spatial index over the events of a finished log (index = position in the log).
class EventIndex
{
public:
    explicit EventIndex(const EventLog &log) : m_log(&log), m_index(max_radius_of(log))
    {
        for (std::size_t i = 0; i < log.events.size(); ++i) {
            m_index.add(static_cast<std::uint32_t>(i), log.events[i].ball());
        }
    }

    [[nodiscard]] const EventLog &log() const noexcept
    {
        return *m_log;
    }
    [[nodiscard]] const BallIndex &balls() const noexcept
    {
        return m_index;
    }

private:
    static double max_radius_of(const EventLog &log)
    {
        double r = 0.0;
        for (const auto &e : log.events) {
            r = std::max(r, e.radius);
        }
        return r > 0.0 ? r : 1.0;
    }

    const EventLog *m_log;
    BallIndex m_index;
};

/// Backward closure from (z, t) over the logged events with time in (t - s, t]: start
/// from the event at time t whose ball holds z, or from z itself (a radius-0 link with no
/// event id); then, going back in time, add every event meeting the union so far.
inline std::vector<ChainLink> ancestral_skeleton(const EventLog &log, Point z, double t, double s)
{
    if (s < 0.0) {
        throw contract_violation("skeleton duration must be non-negative");
    }
    const auto &ev = log.events;
    // Events at or before t.
    auto end = std::upper_bound(ev.begin(), ev.end(), t, [](double v, const Event &e) { return v < e.time; });
    double r_max = 0.0;
    for (auto it = ev.begin(); it != end; ++it) {
        r_max = std::max(r_max, it->radius);
    }
    BallIndex united(r_max > 0.0 ? r_max : 1.0);
    std::vector<ChainLink> links;

    auto it = end;
    if (it != ev.begin() && std::prev(it)->time == t && std::prev(it)->ball().contains(z)) {
        --it;
        links.push_back({it->time, it->center, it->radius, it->id});
    } else {
        links.push_back({t, z, 0.0, std::nullopt});
        // Leave any event at exactly time t out: only strictly earlier events extend it.
        while (it != ev.begin() && std::prev(it)->time == t) {
            --it;
        }
    }
    united.add(0, links.front().ball());

    const std::optional<Window> &clip = log.clip;
    while (it != ev.begin()) {
        --it;
        if (!(it->time > t - s)) {
            break;
        }
        const Ball b = it->ball();
        const bool hit = united.scan_near(b.center, [&](const BallIndex::Slot &sl) {
            return links_meet(b, Ball{{sl.x, sl.y}, sl.r}, clip);
        });
        if (hit) {
            united.add(static_cast<std::uint32_t>(links.size()), b);
            links.push_back({it->time, it->center, it->radius, it->id});
        }
    }
    return links;
}

inline bool skeleton_meets_seed(const std::vector<ChainLink> &skeleton, const SeedRegion &seed,
                                const std::optional<Window> &clip = std::nullopt)
{
    return std::any_of(skeleton.begin(), skeleton.end(), [&](const ChainLink &l) {
        return l.radius == 0.0 ? seed.contains(l.center, clip) : seed.meets(l.ball(), clip);
    });
}

/// Random geodesic ending at `trigger_id`: walking back from the trigger, each step picks
/// uniformly among the strictly earlier logged events whose balls meet the current ball,
/// plus the seed when the current ball meets it; picking the seed ends the walk. The
/// returned chain runs forward in time and opens with a seed link placed at the point of
/// the seed nearest the first event's centre.
inline Chain extract_geodesic(const EventIndex &index, std::uint64_t trigger_id, const SeedRegion &seed, Rng &rng)
{
    const EventLog &log = index.log();
    const auto start = log.find(trigger_id);
    if (!start) {
        throw not_found("trigger event is not in the log");
    }
    const std::optional<Window> &clip = log.clip;
    std::vector<ChainLink> backwards;
    std::vector<std::uint32_t> options;
    std::size_t cur = *start;
    while (true) {
        const Event &e = log.events[cur];
        backwards.push_back({e.time, e.center, e.radius, e.id});
        const Ball b = e.ball();
        options.clear();
        index.balls().scan_near(b.center, [&](const BallIndex::Slot &s) {
            if (s.index < cur && links_meet(b, Ball{{s.x, s.y}, s.r}, clip)) {
                options.push_back(s.index);
            }
            return false;
        });
        const bool seed_option = seed.meets(b, clip);
        const std::size_t n = options.size() + (seed_option ? 1 : 0);
        if (n == 0) {
            throw contract_violation("logged event meets neither the seed nor an earlier event");
        }
        // Scan order depends on the grid layout only; sort so the choice is canonical.
        std::sort(options.begin(), options.end());
        const auto pick = static_cast<std::size_t>(uniform_index(rng, n));
        if (pick == options.size()) {
            const Point anchor = *seed.closest_point(b.center, clip);
            backwards.push_back({0.0, anchor, 0.0, std::nullopt});
            break;
        }
        cur = options[pick];
    }
    std::reverse(backwards.begin(), backwards.end());
    return Chain{std::move(backwards), ChainKind::geodesic};
}

inline Chain extract_geodesic(const EventLog &log, std::uint64_t trigger_id, const SeedRegion &seed, Rng &rng)
{
    const EventIndex index(log);
    return extract_geodesic(index, trigger_id, seed, rng);
}

inline ChainStats chain_stats(const Chain &c)
{
    ChainStats st;
    if (c.links.empty()) {
        return st;
    }
    st.n_jumps = c.links.size() - (c.links.front().is_seed() ? 1 : 0);
    st.y_end = c.links.back().center.y;
    st.x_advance_max = -std::numeric_limits<double>::infinity();
    for (const auto &l : c.links) {
        st.max_abs_y = std::max(st.max_abs_y, std::abs(l.center.y));
        st.strip_radius = std::max(st.strip_radius, std::abs(l.center.y) + l.radius);
        st.x_advance_max = std::max(st.x_advance_max, l.center.x + l.radius);
    }
    return st;
}

// Chain invariants: strictly increasing times after the seed link, consecutive balls
// meeting, and a first link that is (or meets) the seed.
inline bool is_valid_chain(const Chain &c, const SeedRegion &seed, const std::optional<Window> &clip = std::nullopt)
{
    if (c.links.empty()) {
        return false;
    }
    for (std::size_t i = 1; i < c.links.size(); ++i) {
        const auto &a = c.links[i - 1];
        const auto &b = c.links[i];
        if (b.is_seed()) {
            return false;
        }
        if (!a.is_seed() && !(b.time > a.time || (b.time == a.time && *b.event_id > *a.event_id))) {
            return false;
        }
        if (!links_meet(a.ball(), b.ball(), clip)) {
            return false;
        }
    }
    const auto &first = c.links.front();
    return first.is_seed() ? seed.contains(first.center, clip) : seed.meets(first.ball(), clip);
}

// ⌈x / δ⌉ with ratios within 1e-9 of an integer rounded (3 / 0.3 is 10, not 11).
inline std::uint64_t slow_chain_steps(double x, double delta)
{
    if (!(x > 0.0)) {
        return 0;
    }
    const double q = x / delta;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) {
        return static_cast<std::uint64_t>(r);
    }
    return static_cast<std::uint64_t>(std::ceil(q));
}

struct SlowChain {
    SlowChainParams params;
    std::vector<double> waits;
    double total = 0.0;
    // True when the waits follow the exact law of the box-confined subsequence (the step
    // rate uses the full tail mass); otherwise the total is a stochastic upper bound.
    bool exact_law = true;
};

/// The slow coverage chain towards (x, 0), sampled from its law: ⌈x/δ⌉ i.i.d.
/// exponential waits at the step rate.
inline SlowChain sample_slow_chain(const SlowChainParams &params, double x, Rng &rng)
{
    SlowChain c;
    c.params = params;
    c.exact_law = params.step_rate >= 2.0 * params.delta * params.delta * params.eta;
    const std::uint64_t n = slow_chain_steps(x, params.delta);
    c.waits.reserve(n);
    for (std::uint64_t j = 0; j < n; ++j) {
        c.waits.push_back(exponential(rng, params.step_rate));
        c.total += c.waits.back();
    }
    return c;
}

struct ScannedSlowChain {
    std::vector<std::size_t> event_indices;
    std::uint64_t steps_needed = 0;
    bool complete = false;
    double total = 0.0;
};

/// The slow chain read off a logged event stream: step j is the first logged event after
/// the previous step with radius > 3δ and centre in ((j-1)δ, jδ) × (-δ, δ).
inline ScannedSlowChain scan_slow_chain(const EventLog &log, const SlowChainParams &params, double x)
{
    ScannedSlowChain sc;
    sc.steps_needed = slow_chain_steps(x, params.delta);
    const double d = params.delta;
    std::uint64_t j = 1;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < log.events.size() && j <= sc.steps_needed; ++i) {
        const Event &e = log.events[i];
        if (!(e.time > t_prev) || !(e.radius > 3.0 * d)) {
            continue;
        }
        const double lo = static_cast<double>(j - 1) * d;
        const double hi = static_cast<double>(j) * d;
        if (e.center.x > lo && e.center.x < hi && e.center.y > -d && e.center.y < d) {
            sc.event_indices.push_back(i);
            t_prev = e.time;
            ++j;
        }
    }
    sc.complete = sc.event_indices.size() == sc.steps_needed;
    sc.total = t_prev;
    return sc;
}

} // namespace slfv

#endif
