#ifndef SLFV_EVENTS_HPP
#define SLFV_EVENTS_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <slfv/errors.hpp>
#include <slfv/geometry.hpp>
#include <slfv/measure.hpp>
#include <slfv/random.hpp>

namespace slfv
{

// A point (t, z, r) of the driving Poisson process. `id` is the generation index of the
// candidate, so ids increase with time and break floating-point ties in time.
struct Event {
    std::uint64_t id = 0;
    double time = 0.0;
    Point center;
    double radius = 0.0;

    [[nodiscard]] Ball ball() const noexcept
    {
        return {center, radius};
    }
};

/// Accepted events of one run, in time order, plus what is needed to reproduce it.
struct EventLog {
    std::vector<Event> events;
    // Per-event type tag for two-type runs; empty otherwise.
    std::vector<std::uint8_t> types;
    std::uint64_t candidate_count = 0;
    std::optional<Window> clip;
    std::uint64_t master_seed = 0;
    std::uint64_t replica_id = 0;

    [[nodiscard]] std::size_t size() const noexcept
    {
        return events.size();
    }

    // Index of the event with the given id.
    [[nodiscard]] std::optional<std::size_t> find(std::uint64_t id) const noexcept
    {
        auto it = std::lower_bound(events.begin(), events.end(), id,
                                   [](const Event &e, std::uint64_t v) { return e.id < v; });
        if (it == events.end() || it->id != id) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - events.begin());
    }
};

// Next candidate of the Poisson process restricted to `w`: exponential waiting time at
// rate area(w) * total_mass, uniform centre, radius from the normalised measure.
inline Event next_candidate(Rng &rng, const Window &w, const RadiusMeasure &m, double t_now)
{
    if (!(w.area() > 0.0)) {
        throw invalid_window("candidate window has zero area");
    }
    Event e;
    e.time = t_now + exponential(rng, w.area() * m.total_mass());
    e.center = {uniform(rng, w.x_lo, w.x_hi), uniform(rng, w.y_lo, w.y_hi)};
    e.radius = m.sample(rng);
    return e;
}

inline void write_events_csv(std::ostream &os, const EventLog &log)
{
    os << "id,time,cx,cy,radius\n";
    char buf[160];
    for (const auto &e : log.events) {
        std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.17g\n", static_cast<unsigned long long>(e.id),
                      e.time, e.center.x, e.center.y, e.radius);
        os << buf;
    }
}

inline EventLog read_events_csv(std::istream &is)
{
    EventLog log;
    std::string line;
    if (!std::getline(is, line) || line.rfind("id,time,cx,cy,radius", 0) != 0) {
        throw error("events csv: missing header id,time,cx,cy,radius");
    }
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        Event e;
        char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
        if (!(ls >> e.id >> c1 >> e.time >> c2 >> e.center.x >> c3 >> e.center.y >> c4 >> e.radius) || c1 != ','
            || c2 != ',' || c3 != ',' || c4 != ',') {
            throw error("events csv: malformed line " + std::to_string(lineno));
        }
        if (!log.events.empty() && !(e.id > log.events.back().id && e.time >= log.events.back().time)) {
            throw error("events csv: events out of order at line " + std::to_string(lineno));
        }
        log.events.push_back(e);
    }
    return log;
}

} // namespace slfv

#endif
