#ifndef SLFV_TESTS_ORACLES_HPP
#define SLFV_TESTS_ORACLES_HPP

// Brute-force reference implementations used as test oracles.

#include <array>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <vector>

#include <slfv/events.hpp>
#include <slfv/geometry.hpp>
#include <slfv/seed_region.hpp>

namespace oracle
{

// Upper chi-square quantile by the Wilson-Hilferty approximation; z is the standard
// normal quantile of the same level (2.326 for 1%).
inline double chi2_upper(double df, double z)
{
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

struct Occupied {
    slfv::SeedRegion seed;
    std::vector<slfv::Ball> balls;
    std::optional<slfv::Window> clip;

    [[nodiscard]] bool covers(slfv::Point p) const
    {
        if (clip && !clip->contains(p)) {
            return false;
        }
        if (seed.contains(p, clip)) {
            return true;
        }
        for (const auto &b : balls) {
            if (b.contains(p)) {
                return true;
            }
        }
        return false;
    }

    // Linear scan over every stored ball.
    [[nodiscard]] bool intersects(const slfv::Ball &q) const
    {
        if (seed.meets(q, clip)) {
            return true;
        }
        for (const auto &b : balls) {
            if (clip ? slfv::balls_meet_within(q, b, *clip) : slfv::balls_meet(q, b)) {
                return true;
            }
        }
        return false;
    }

    // Lattice check of the segment from anchor to z with spacing h.
    [[nodiscard]] bool segment_covered_lattice(slfv::Point anchor, slfv::Point z, double h) const
    {
        const double len = slfv::distance(anchor, z);
        const auto n = static_cast<std::size_t>(std::ceil(len / h));
        for (std::size_t i = 0; i <= n; ++i) {
            const double u = n == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(n);
            if (!covers(anchor + u * (z - anchor))) {
                return false;
            }
        }
        return true;
    }
};

inline std::vector<slfv::Event> scripted(std::initializer_list<std::array<double, 4>> rows)
{
    std::vector<slfv::Event> out;
    std::uint64_t id = 0;
    for (const auto &r : rows) {
        out.push_back(slfv::Event{++id, r[0], {r[1], r[2]}, r[3]});
    }
    return out;
}

} // namespace oracle

#endif
