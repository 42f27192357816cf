#ifndef SLFV_MEASURE_HPP
#define SLFV_MEASURE_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <slfv/errors.hpp>
#include <slfv/random.hpp>

namespace slfv
{

struct RadiusAtom {
    double radius = 0.0;
    double mass = 0.0;
};

// Mass spread uniformly over the radii (lo, hi].
struct UniformPiece {
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.0;
};

/// Finite intensity measure of reproduction radii: finitely many atoms plus finitely
/// many uniform densities. Immutable once built; R0, total mass and the Yule-rate
/// bound M0 = ∫ π (R0 + r)² μ(dr) are cached at construction.
class RadiusMeasure
{
public:
    RadiusMeasure(std::vector<RadiusAtom> atoms, std::vector<UniformPiece> pieces)
        : m_atoms(std::move(atoms)), m_pieces(std::move(pieces))
    {
        for (const auto &a : m_atoms) {
            if (!(a.radius > 0.0) || !std::isfinite(a.radius) || !(a.mass >= 0.0) || !std::isfinite(a.mass)) {
                throw invalid_measure("atom needs radius > 0 and finite mass >= 0");
            }
        }
        for (const auto &p : m_pieces) {
            if (!(p.lo >= 0.0) || !(p.lo < p.hi) || !std::isfinite(p.hi) || !(p.mass >= 0.0)
                || !std::isfinite(p.mass)) {
                throw invalid_measure("uniform piece needs 0 <= lo < hi and finite mass >= 0");
            }
        }
        double r0 = 0.0;
        for (const auto &a : m_atoms) {
            if (a.mass > 0.0) {
                r0 = std::max(r0, a.radius);
            }
            m_total += a.mass;
        }
        for (const auto &p : m_pieces) {
            if (p.mass > 0.0) {
                r0 = std::max(r0, p.hi);
            }
            m_total += p.mass;
        }
        if (!(m_total > 0.0)) {
            throw invalid_measure("measure has no mass");
        }
        m_r0 = r0;

        double m0 = 0.0;
        for (const auto &a : m_atoms) {
            m0 += a.mass * std::numbers::pi * (m_r0 + a.radius) * (m_r0 + a.radius);
        }
        for (const auto &p : m_pieces) {
            const auto cube = [&](double r) { return (m_r0 + r) * (m_r0 + r) * (m_r0 + r) / 3.0; };
            m0 += p.mass / (p.hi - p.lo) * std::numbers::pi * (cube(p.hi) - cube(p.lo));
        }
        m_m0 = m0;

        double acc = 0.0;
        for (const auto &a : m_atoms) {
            acc += a.mass;
            m_cumulative.push_back(acc / m_total);
        }
        for (const auto &p : m_pieces) {
            acc += p.mass;
            m_cumulative.push_back(acc / m_total);
        }
    }

    // The unit model: every event has radius 1, total rate 1.
    static RadiusMeasure unit()
    {
        return RadiusMeasure({{1.0, 1.0}}, {});
    }

    [[nodiscard]] const std::vector<RadiusAtom> &atoms() const noexcept
    {
        return m_atoms;
    }
    [[nodiscard]] const std::vector<UniformPiece> &pieces() const noexcept
    {
        return m_pieces;
    }

    [[nodiscard]] double max_radius() const noexcept
    {
        return m_r0;
    }
    [[nodiscard]] double total_mass() const noexcept
    {
        return m_total;
    }
    [[nodiscard]] double yule_rate_bound() const noexcept
    {
        return m_m0;
    }

    // μ((a, ∞)).
    [[nodiscard]] double tail_mass(double a) const noexcept
    {
        double t = 0.0;
        for (const auto &at : m_atoms) {
            if (at.radius > a) {
                t += at.mass;
            }
        }
        for (const auto &p : m_pieces) {
            if (a < p.lo) {
                t += p.mass;
            } else if (a < p.hi) {
                t += p.mass * (p.hi - a) / (p.hi - p.lo);
            }
        }
        return t;
    }

    // Radius drawn from μ / total_mass.
    [[nodiscard]] double sample(Rng &rng) const
    {
        if (m_cumulative.size() == 1 && m_pieces.empty()) {
            return m_atoms.front().radius;
        }
        const double u = uniform01(rng);
        auto it = std::upper_bound(m_cumulative.begin(), m_cumulative.end(), u);
        auto k = static_cast<std::size_t>(std::distance(m_cumulative.begin(), it));
        k = std::min(k, m_cumulative.size() - 1);
        // upper_bound lands on the first component with positive mass.
        if (k < m_atoms.size()) {
            return m_atoms[k].radius;
        }
        const auto &p = m_pieces[k - m_atoms.size()];
        // 1 - U lies in (0, 1], so the radius is in (lo, hi].
        return p.hi - (p.hi - p.lo) * uniform01(rng);
    }

private:
    std::vector<RadiusAtom> m_atoms;
    std::vector<UniformPiece> m_pieces;
    double m_total = 0.0;
    double m_r0 = 0.0;
    double m_m0 = 0.0;
    std::vector<double> m_cumulative;
};

// Parameters of the box-confined slow coverage chain: boxes of width delta and half
// height delta, events of radius > 3 delta, which occur in each box at step_rate.
struct SlowChainParams {
    double delta = 0.0;
    double eta = 0.0;
    double step_rate = 0.0;
};

inline SlowChainParams make_slow_chain_params(const RadiusMeasure &m, double delta)
{
    if (!(delta > 0.0) || !(3.0 * delta < m.max_radius())) {
        throw no_valid_delta("slow chain needs 0 < 3 delta < R0");
    }
    const double eta = m.tail_mass(3.0 * delta);
    if (!(eta > 0.0)) {
        throw no_valid_delta("no mass above 3 delta");
    }
    return {delta, eta, 2.0 * delta * delta * eta};
}

/// Slow-chain parameters. With an override, uses it; otherwise maximises the step-rate
/// lower bound 2 δ² μ((3δ, ∞)) over the grid δ_k = k R0 / 3000, k = 1..1000, keeping
/// only grid points at or above `grid_floor`; ties go to the larger δ.
inline SlowChainParams slow_chain_params(const RadiusMeasure &m, std::optional<double> delta_override = std::nullopt,
                                         double grid_floor = 0.0)
{
    if (delta_override) {
        return make_slow_chain_params(m, *delta_override);
    }
    constexpr int grid_points = 1000;
    const double top = m.max_radius() / 3.0;
    std::optional<SlowChainParams> best;
    for (int k = 1; k <= grid_points; ++k) {
        const double delta = top * k / grid_points;
        if (delta < grid_floor) {
            continue;
        }
        const double eta = m.tail_mass(3.0 * delta);
        if (!(eta > 0.0)) {
            continue;
        }
        const double rate = 2.0 * delta * delta * eta;
        if (!best || rate >= best->step_rate) {
            best = SlowChainParams{delta, eta, rate};
        }
    }
    if (!best) {
        throw no_valid_delta("no grid delta above the floor has mass beyond 3 delta");
    }
    return *best;
}

} // namespace slfv

#endif
