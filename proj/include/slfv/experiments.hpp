#ifndef SLFV_EXPERIMENTS_HPP
#define SLFV_EXPERIMENTS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <slfv/chains.hpp>
#include <slfv/io.hpp>
#include <slfv/measure.hpp>
#include <slfv/parallel.hpp>
#include <slfv/simulator.hpp>
#include <slfv/stats.hpp>

namespace slfv
{

using json = nlohmann::ordered_json;

struct ExperimentResult {
    ExperimentResult(std::string id_, Table records_, json summary_ = json::object())
        : id(std::move(id_)), records(std::move(records_)), summary(std::move(summary_))
    {
    }

    std::string id;
    Table records;
    json summary;
    // Set when the numbers should not be trusted (budget exhaustion, heavy truncation).
    bool flagged = false;
    std::vector<std::string> flags;

    void flag(std::string why)
    {
        flagged = true;
        flags.push_back(std::move(why));
    }

    // Final summary: the aggregates plus sample metadata and flags.
    [[nodiscard]] json summary_json() const
    {
        json j;
        j["experiment"] = id;
        j["n_records"] = records.size();
        j["flagged"] = flagged;
        j["flags"] = flags;
        for (const auto &[k, v] : summary.items()) {
            j[k] = v;
        }
        return j;
    }
};

// Stream tags keep the designs of different experiments disjoint.
enum class StreamTag : std::uint32_t { point = 1, halfplane = 2, shape = 3, slow = 4, sectors = 5, skeleton = 6 };

inline Rng design_stream(std::uint64_t master, std::uint64_t replica, double x, StreamTag tag)
{
    return replica_stream(master, replica, std::bit_cast<std::uint64_t>(x), static_cast<std::uint32_t>(tag));
}

// ---------------------------------------------------------------------------------------
// Point-seed sweep: one run per (x, replica) from {0} up to the bulk coverage of (x, 0),
// recording τ(H^x), τ((x,0)), σ((x,0)) and the statistics of a geodesic to H^x.

struct PointRecord {
    double x = 0.0;
    std::uint64_t replica = 0;
    double tau_h = 0.0;
    double tau_pt = 0.0;
    double sigma = 0.0;
    std::uint64_t n_events = 0;
    std::uint64_t n_candidates = 0;
    std::uint64_t n_jumps = 0;
    double y_end = 0.0;
    double max_abs_y = 0.0;
    double strip_radius = 0.0;
    bool budget_hit = false;
};

struct SweepConfig {
    std::vector<double> xs{25.0, 50.0, 100.0, 200.0, 400.0};
    std::size_t reps = 200;
    std::uint64_t master_seed = 1;
    WindowPolicy policy = FrontierWindow{};
    SimulationOptions sim{};
    // Stop at τ(H^x) instead of σ((x,0)) (τ((x,0)) and σ are then left at NaN).
    bool halfplane_only = false;
};

inline PointRecord point_replica(const RadiusMeasure &m, double x, std::uint64_t rep, const SweepConfig &c)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    PointRecord r;
    r.x = x;
    r.replica = rep;
    Simulator sim(SeedRegion::origin(), m, design_stream(c.master_seed, rep, x, StreamTag::point), c.policy, c.sim);
    sim.set_stream_metadata(c.master_seed, rep);
    const auto h_plane = sim.watch(HalfPlaneReached{x});
    const auto h_point = sim.watch(PointCovered{{x, 0.0}});
    const auto h_bulk = sim.watch(SegmentCovered{{x, 0.0}});
    try {
        sim.advance_until(c.halfplane_only ? h_plane : h_bulk);
    } catch (const budget_exceeded &) {
        r.budget_hit = true;
    }
    const auto time_of = [&](std::size_t h) { return sim.hit(h) ? sim.hit(h)->time : nan; };
    r.tau_h = time_of(h_plane);
    r.tau_pt = time_of(h_point);
    r.sigma = time_of(h_bulk);
    r.n_events = sim.log().events.size();
    r.n_candidates = sim.log().candidate_count;
    if (sim.hit(h_plane) && sim.hit(h_plane)->event_id) {
        // The walk draws from a generator seeded off the main stream.
        Rng walk(sim.rng()());
        const Chain g = extract_geodesic(sim.log(), *sim.hit(h_plane)->event_id, sim.state().seed(), walk);
        const ChainStats st = chain_stats(g);
        r.n_jumps = st.n_jumps;
        r.y_end = st.y_end;
        r.max_abs_y = st.max_abs_y;
        r.strip_radius = st.strip_radius;
    }
    return r;
}

inline std::vector<PointRecord> point_sweep(const RadiusMeasure &m, const SweepConfig &c)
{
    const std::size_t n = c.xs.size() * c.reps;
    return run_replicas(n, [&](std::size_t i) { return point_replica(m, c.xs[i / c.reps], i % c.reps, c); });
}

inline Table point_table(const std::vector<PointRecord> &recs)
{
    Table t({"x", "replica", "tau_h", "tau_pt", "sigma", "n_events", "n_candidates", "n_jumps", "y_end", "max_abs_y",
             "strip_radius", "budget_exceeded"});
    for (const auto &r : recs) {
        t.row() << r.x << r.replica << r.tau_h << r.tau_pt << r.sigma << r.n_events << r.n_candidates << r.n_jumps
                << r.y_end << r.max_abs_y << r.strip_radius << r.budget_hit;
    }
    return t;
}

// Records at abscissa x that finished, projected through f.
template <class F>
std::vector<double> column(const std::vector<PointRecord> &recs, double x, F f)
{
    std::vector<double> out;
    for (const auto &r : recs) {
        if (r.x == x && !r.budget_hit) {
            out.push_back(f(r));
        }
    }
    return out;
}

inline std::vector<double> distinct_xs(const std::vector<PointRecord> &recs)
{
    std::vector<double> xs;
    for (const auto &r : recs) {
        xs.push_back(r.x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

inline void flag_budget(ExperimentResult &res, const std::vector<PointRecord> &recs)
{
    const auto n = std::count_if(recs.begin(), recs.end(), [](const PointRecord &r) { return r.budget_hit; });
    res.summary["budget_exceeded"] = n;
    if (n > 0) {
        res.flag(std::to_string(n) + " replicas exhausted the candidate budget");
    }
}

inline std::uint64_t jump_floor(double x, double r0)
{
    return x > 0.0 ? static_cast<std::uint64_t>(std::ceil(x / (2.0 * r0))) : 0;
}

/// ν: means of τ(H^x)/x and τ((x,0))/x per x, drift between consecutive x, and
/// nu_hat = mean τ(H^x)/x at the largest x.
inline ExperimentResult nu_result(const std::vector<PointRecord> &recs, double r0)
{
    ExperimentResult res{"nu", point_table(recs), json::object()};
    const auto xs = distinct_xs(recs);
    json per_x = json::array();
    std::vector<std::vector<double>> tau_h_over_x;
    for (double x : xs) {
        auto th = column(recs, x, [&](const PointRecord &r) { return x > 0.0 ? r.tau_h / x : r.tau_h; });
        auto tp = column(recs, x, [&](const PointRecord &r) { return x > 0.0 ? r.tau_pt / x : r.tau_pt; });
        json e;
        e["x"] = x;
        e["n"] = th.size();
        if (!th.empty()) {
            e["mean_tau_h_over_x"] = stats::mean(th);
            e["se_tau_h_over_x"] = stats::std_error(th);
        }
        if (!tp.empty() && std::none_of(tp.begin(), tp.end(), [](double v) { return std::isnan(v); })) {
            e["mean_tau_pt_over_x"] = stats::mean(tp);
            e["se_tau_pt_over_x"] = stats::std_error(tp);
        }
        per_x.push_back(e);
        tau_h_over_x.push_back(std::move(th));
    }
    res.summary["per_x"] = per_x;

    json drift = json::array();
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const auto &a = tau_h_over_x[i - 1];
        const auto &b = tau_h_over_x[i];
        if (a.size() < 2 || b.size() < 2) {
            continue;
        }
        const double d = stats::mean(b) - stats::mean(a);
        const double se = stats::pooled_se(a, b);
        drift.push_back({{"x_from", xs[i - 1]}, {"x_to", xs[i]}, {"difference", d}, {"pooled_se", se},
                         {"within_2se", std::abs(d) <= 2.0 * se}});
    }
    res.summary["drift"] = drift;

    std::uint64_t order_violations = 0, floor_violations = 0, nonpositive = 0;
    for (const auto &r : recs) {
        if (r.budget_hit) {
            continue;
        }
        if (!std::isnan(r.tau_pt) && !(r.tau_h <= r.tau_pt)) {
            ++order_violations;
        }
        if (r.x > 0.0) {
            if (!(r.tau_h > 0.0)) {
                ++nonpositive;
            }
            if (r.n_jumps < jump_floor(r.x, r0) || r.n_events < jump_floor(r.x, r0)) {
                ++floor_violations;
            }
        }
    }
    res.summary["ordering_violations"] = order_violations;
    res.summary["jump_floor_violations"] = floor_violations;
    res.summary["nonpositive_tau"] = nonpositive;
    if (!xs.empty() && !tau_h_over_x.back().empty() && xs.back() > 0.0) {
        res.summary["nu_hat"] = stats::mean(tau_h_over_x.back());
        res.summary["nu_hat_se"] = stats::std_error(tau_h_over_x.back());
        res.summary["nu_hat_n"] = tau_h_over_x.back().size();
    }
    flag_budget(res, recs);
    return res;
}

/// ξ: least-squares slope of log median |Y_end| against log x, the same for the
/// median of max |Y| along the geodesic, quantiles of |Y_end|/√x, and a KS comparison
/// of |Y_end|/√x between the two largest x.
inline ExperimentResult exponent_result(const std::vector<PointRecord> &recs, double lower_scale = 0.05)
{
    ExperimentResult res{"exponent", point_table(recs), json::object()};
    const auto xs = distinct_xs(recs);
    json per_x = json::array();
    std::vector<double> lx, ly, lm;
    std::vector<std::vector<double>> scaled;
    std::uint64_t def_violations = 0;
    for (const auto &r : recs) {
        if (!r.budget_hit && !(std::abs(r.y_end) <= r.max_abs_y && r.max_abs_y <= r.strip_radius)) {
            ++def_violations;
        }
    }
    for (double x : xs) {
        if (!(x > 0.0)) {
            continue;
        }
        auto ay = column(recs, x, [](const PointRecord &r) { return std::abs(r.y_end); });
        auto am = column(recs, x, [](const PointRecord &r) { return r.max_abs_y; });
        if (ay.empty()) {
            continue;
        }
        std::vector<double> s;
        for (double v : ay) {
            s.push_back(v / std::sqrt(x));
        }
        const double med = stats::median(ay);
        const double med_max = stats::median(am);
        json e;
        e["x"] = x;
        e["n"] = ay.size();
        e["median_abs_y_end"] = med;
        e["median_max_abs_y"] = med_max;
        json q = json::array();
        for (int k = 1; k <= 9; ++k) {
            q.push_back(stats::quantile(s, k / 10.0));
        }
        e["abs_y_end_over_sqrt_x_deciles"] = q;
        const auto below = std::count_if(s.begin(), s.end(), [&](double v) { return v < lower_scale; });
        e["frac_below_lower_scale"] = static_cast<double>(below) / static_cast<double>(s.size());
        per_x.push_back(e);
        if (!(med > 0.0)) {
            throw fit_undefined("median |Y_end| is 0 at x = " + format_double(x) + "; the log-log fit is undefined");
        }
        lx.push_back(std::log(x));
        ly.push_back(std::log(med));
        lm.push_back(std::log(std::max(med_max, std::numeric_limits<double>::min())));
        scaled.push_back(std::move(s));
    }
    res.summary["lower_scale"] = lower_scale;
    res.summary["per_x"] = per_x;
    res.summary["definition_violations"] = def_violations;
    if (lx.size() < 2) {
        throw fit_undefined("exponent fit needs at least two positive x values");
    }
    const auto fit = stats::least_squares(lx, ly);
    res.summary["xi_hat"] = fit.slope;
    res.summary["xi_se"] = fit.slope_se;
    res.summary["xi_intercept"] = fit.intercept;
    res.summary["xi_n_points"] = fit.n;
    res.summary["xi_max_abs_y_hat"] = stats::least_squares(lx, lm).slope;
    const auto &a = scaled[scaled.size() - 2];
    const auto &b = scaled.back();
    const auto ks = stats::ks_two_sample(a, b);
    res.summary["ks_last_two"] = {{"d", ks.d},
                                  {"p_value", ks.p_value},
                                  {"n1", ks.n1},
                                  {"n2", ks.n2},
                                  {"critical_0_01", stats::ks_critical(1.628, ks.n1, ks.n2)}};
    flag_budget(res, recs);
    return res;
}

/// Front-bulk gap σ((x,0)) - τ(H^x) from the point-seed sweep.
inline ExperimentResult gap_result(const std::vector<PointRecord> &recs)
{
    ExperimentResult res{"gap", point_table(recs), json::object()};
    const auto xs = distinct_xs(recs);
    json per_x = json::array();
    std::vector<double> medians;
    std::uint64_t negative = 0;
    for (const auto &r : recs) {
        if (!r.budget_hit && !(r.sigma - r.tau_h >= 0.0)) {
            ++negative;
        }
    }
    for (double x : xs) {
        auto g = column(recs, x, [](const PointRecord &r) { return r.sigma - r.tau_h; });
        if (g.empty()) {
            medians.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double sx = x > 0.0 ? std::sqrt(x) : 1.0;
        const double med = stats::median(g);
        medians.push_back(med);
        per_x.push_back({{"x", x},
                         {"n", g.size()},
                         {"median_gap", med},
                         {"q90_gap", stats::quantile(g, 0.9)},
                         {"median_gap_over_sqrt_x", med / sx},
                         {"q90_gap_over_sqrt_x", stats::quantile(g, 0.9) / sx}});
    }
    json ratios = json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            if (medians[i] > 0.0) {
                ratios.push_back({{"x_lo", xs[i]}, {"x_hi", xs[j]}, {"median_ratio", medians[j] / medians[i]}});
            }
        }
    }
    res.summary["per_x"] = per_x;
    res.summary["median_ratios"] = ratios;
    res.summary["negative_gaps"] = negative;
    flag_budget(res, recs);
    return res;
}

inline double median_gap_ratio(const ExperimentResult &gap, double x_lo, double x_hi)
{
    for (const auto &r : gap.summary["median_ratios"]) {
        if (r["x_lo"].get<double>() == x_lo && r["x_hi"].get<double>() == x_hi) {
            return r["median_ratio"].get<double>();
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline ExperimentResult estimate_nu(const RadiusMeasure &m, const SweepConfig &c)
{
    return nu_result(point_sweep(m, c), m.max_radius());
}

inline ExperimentResult exponent_fit(const RadiusMeasure &m, const SweepConfig &c)
{
    return exponent_result(point_sweep(m, c));
}

// ---------------------------------------------------------------------------------------
// Half-plane seed in the restricted window.

struct HalfplaneRecord {
    double x = 0.0;
    std::uint64_t replica = 0;
    double tau = 0.0;
    double sigma = 0.0;
    std::uint64_t n_events = 0;
    std::uint64_t n_candidates = 0;
    bool truncated = false;
    bool budget_hit = false;
};

struct HalfplaneConfig {
    double x = 50.0;
    std::size_t reps = 500;
    double window_a = 6.0;
    std::uint64_t master_seed = 1;
    SimulationOptions sim{};
    bool bulk = false;
    std::optional<Window> window;
};

inline HalfplaneRecord halfplane_replica(const RadiusMeasure &m, std::uint64_t rep, const HalfplaneConfig &c)
{
    HalfplaneRecord r;
    r.x = c.x;
    r.replica = rep;
    const Window q = c.window ? *c.window : default_halfplane_window(c.x, c.window_a, m.max_radius());
    Simulator sim(HalfPlane{0.0}, m, design_stream(c.master_seed, rep, c.x, StreamTag::halfplane), FixedWindow{q},
                  c.sim);
    sim.set_stream_metadata(c.master_seed, rep);
    const auto h_point = sim.watch(PointCovered{{c.x, 0.0}});
    const auto h_bulk = sim.watch(SegmentCovered{{c.x, 0.0}});
    try {
        const StopReport rep_point = sim.advance_until(h_point);
        r.tau = rep_point.stop_time;
        r.truncated = rep_point.truncated;
        if (c.bulk) {
            r.sigma = sim.advance_until(h_bulk).stop_time;
        } else {
            r.sigma = std::numeric_limits<double>::quiet_NaN();
        }
    } catch (const budget_exceeded &) {
        r.budget_hit = true;
        r.tau = sim.hit(h_point) ? sim.hit(h_point)->time : std::numeric_limits<double>::quiet_NaN();
        r.sigma = std::numeric_limits<double>::quiet_NaN();
    }
    r.n_events = sim.log().events.size();
    r.n_candidates = sim.log().candidate_count;
    return r;
}

inline std::vector<HalfplaneRecord> halfplane_sweep(const RadiusMeasure &m, const HalfplaneConfig &c)
{
    return run_replicas(c.reps, [&](std::size_t i) { return halfplane_replica(m, i, c); });
}

/// Duality: τ^{0}(H^x) (exact, point seed) against τ^H((x,0)) in the restricted window.
inline ExperimentResult duality_check(const RadiusMeasure &m, const HalfplaneConfig &c, double max_truncation = 0.05)
{
    SweepConfig pc;
    pc.xs = {c.x};
    pc.reps = c.reps;
    pc.master_seed = c.master_seed;
    pc.sim = c.sim;
    pc.halfplane_only = true;
    const auto point = point_sweep(m, pc);
    const auto half = halfplane_sweep(m, c);

    ExperimentResult res{"duality", Table({"side", "replica", "tau", "truncated", "n_events", "n_candidates"}),
                         json::object()};
    std::vector<double> a, b;
    std::uint64_t budget = 0, truncated = 0;
    for (const auto &r : point) {
        res.records.row() << "point_to_halfplane" << r.replica << r.tau_h << false << r.n_events << r.n_candidates;
        if (r.budget_hit) {
            ++budget;
        } else {
            a.push_back(r.tau_h);
        }
    }
    for (const auto &r : half) {
        res.records.row() << "halfplane_to_point" << r.replica << r.tau << r.truncated << r.n_events
                          << r.n_candidates;
        truncated += r.truncated ? 1 : 0;
        if (r.budget_hit) {
            ++budget;
        } else {
            b.push_back(r.tau);
        }
    }
    const Window q = c.window ? *c.window : default_halfplane_window(c.x, c.window_a, m.max_radius());
    res.summary["x"] = c.x;
    res.summary["window"] = {q.x_lo, q.x_hi, q.y_lo, q.y_hi};
    const double trunc_rate = half.empty() ? 0.0 : static_cast<double>(truncated) / static_cast<double>(half.size());
    res.summary["truncation_rate"] = trunc_rate;
    if (!a.empty() && !b.empty()) {
        const auto ks = stats::ks_two_sample(a, b);
        res.summary["ks_d"] = ks.d;
        res.summary["ks_p_value"] = ks.p_value;
        res.summary["ks_critical_0_01"] = stats::ks_critical(1.628, ks.n1, ks.n2);
        res.summary["n_point"] = ks.n1;
        res.summary["n_halfplane"] = ks.n2;
        res.summary["mean_tau_point"] = stats::mean(a);
        res.summary["mean_tau_halfplane"] = stats::mean(b);
    }
    res.summary["budget_exceeded"] = budget;
    if (budget > 0) {
        res.flag(std::to_string(budget) + " replicas exhausted the candidate budget");
    }
    if (trunc_rate > max_truncation) {
        res.flag("truncation rate " + format_double(trunc_rate) + " exceeds " + format_double(max_truncation)
                 + "; enlarge the window");
    }
    return res;
}

/// Gap σ^H((x,0)) - τ^H((x,0)) from half-plane runs in the restricted window.
inline ExperimentResult halfplane_gap(const RadiusMeasure &m, const std::vector<double> &xs, HalfplaneConfig c)
{
    c.bulk = true;
    ExperimentResult res{"gap", Table({"x", "replica", "tau", "sigma", "gap", "truncated", "budget_exceeded"}),
                         json::object()};
    json per_x = json::array();
    std::uint64_t negative = 0, budget = 0;
    for (double x : xs) {
        c.x = x;
        const auto recs = halfplane_sweep(m, c);
        std::vector<double> g;
        for (const auto &r : recs) {
            res.records.row() << x << r.replica << r.tau << r.sigma << (r.sigma - r.tau) << r.truncated
                              << r.budget_hit;
            if (r.budget_hit) {
                ++budget;
                continue;
            }
            if (!(r.sigma - r.tau >= 0.0)) {
                ++negative;
            }
            g.push_back(r.sigma - r.tau);
        }
        if (!g.empty()) {
            const double sx = x > 0.0 ? std::sqrt(x) : 1.0;
            per_x.push_back({{"x", x},
                             {"n", g.size()},
                             {"median_gap", stats::median(g)},
                             {"q90_gap", stats::quantile(g, 0.9)},
                             {"median_gap_over_sqrt_x", stats::median(g) / sx},
                             {"q90_gap_over_sqrt_x", stats::quantile(g, 0.9) / sx}});
        }
    }
    res.summary["mode"] = "halfplane-window";
    res.summary["per_x"] = per_x;
    res.summary["negative_gaps"] = negative;
    res.summary["budget_exceeded"] = budget;
    if (budget > 0) {
        res.flag(std::to_string(budget) + " replicas exhausted the candidate budget");
    }
    return res;
}

/// Coupled nested windows for the half-plane run to (x, 0): every window sees the same
/// candidates (drawn on the largest window), so hitting times are ordered pathwise.
struct WindowRow {
    std::uint64_t replica = 0;
    std::vector<double> tau;
};

inline std::vector<WindowRow> window_convergence_runs(const RadiusMeasure &m, double x,
                                                      const std::vector<Window> &windows, std::size_t reps,
                                                      std::uint64_t master_seed, std::uint64_t candidate_budget)
{
    if (windows.empty()) {
        throw contract_violation("window_convergence needs at least one window");
    }
    Window master = windows.front();
    for (const auto &w : windows) {
        master = hull(master, w);
    }
    return run_replicas(reps, [&](std::size_t rep) {
        CoupledRun run(m, design_stream(master_seed, rep, x, StreamTag::halfplane), master);
        for (const auto &w : windows) {
            run.add_state(HalfPlane{0.0}, w);
        }
        const Point z{x, 0.0};
        WindowRow row{rep, std::vector<double>(windows.size(), std::numeric_limits<double>::quiet_NaN())};
        std::size_t open = windows.size();
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (run.state(i).covers(z)) {
                row.tau[i] = 0.0;
                --open;
            }
        }
        std::vector<std::size_t> sizes(windows.size(), 0);
        while (open > 0) {
            if (run.candidates() >= candidate_budget) {
                throw budget_exceeded(run.log(0), StopReport{run.now(), std::nullopt, run.log(0).events.size(),
                                                             run.candidates(), false});
            }
            run.step();
            for (std::size_t i = 0; i < windows.size(); ++i) {
                const auto &ev = run.log(i).events;
                if (ev.size() != sizes[i]) {
                    sizes[i] = ev.size();
                    if (std::isnan(row.tau[i]) && windows[i].contains(z) && ev.back().ball().contains(z)) {
                        row.tau[i] = ev.back().time;
                        --open;
                    }
                }
            }
        }
        return row;
    });
}

inline ExperimentResult window_convergence(const RadiusMeasure &m, double x, const std::vector<Window> &windows,
                                           std::size_t reps, std::uint64_t master_seed,
                                           std::uint64_t candidate_budget = 1'000'000'000)
{
    const auto rows = window_convergence_runs(m, x, windows, reps, master_seed, candidate_budget);
    std::vector<std::string> header{"replica"};
    for (std::size_t i = 0; i < windows.size(); ++i) {
        header.push_back("tau_w" + std::to_string(i));
    }
    ExperimentResult res{"window_convergence", Table(header), json::object()};
    std::vector<std::vector<double>> cols(windows.size());
    std::uint64_t order_violations = 0;
    for (const auto &r : rows) {
        auto row = res.records.row();
        row << r.replica;
        for (std::size_t i = 0; i < r.tau.size(); ++i) {
            row << r.tau[i];
            cols[i].push_back(r.tau[i]);
            // Windows listed increasing: a larger window never hits later.
            if (i > 0 && !(r.tau[i] <= r.tau[i - 1])) {
                ++order_violations;
            }
        }
    }
    json per_w = json::array();
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto &w = windows[i];
        per_w.push_back({{"window", {w.x_lo, w.x_hi, w.y_lo, w.y_hi}},
                         {"mean_tau", stats::mean(cols[i])},
                         {"se_tau", stats::std_error(cols[i])}});
    }
    res.summary["x"] = x;
    res.summary["per_window"] = per_w;
    res.summary["ordering_violations"] = order_violations;
    if (windows.size() >= 2) {
        const auto &a = cols[cols.size() - 2];
        const auto &b = cols.back();
        const double d = stats::mean(a) - stats::mean(b);
        const double se = stats::pooled_se(a, b);
        res.summary["largest_pair_difference"] = d;
        res.summary["largest_pair_pooled_se"] = se;
        res.summary["largest_pair_within_2se"] = std::abs(d) <= 2.0 * se;
    }
    return res;
}

// ---------------------------------------------------------------------------------------
// Shape.

// Farthest distance from the origin covered by the ball along the unit direction u
// (negative when the ray misses the ball).
inline double ray_reach(const Ball &b, Point u)
{
    const double along = dot(b.center, u);
    const double perp2 = norm2(b.center) - along * along;
    const double disc = b.radius * b.radius - perp2;
    if (disc < 0.0) {
        return -1.0;
    }
    return along + std::sqrt(disc);
}

struct ShapeConfig {
    std::vector<double> ts{20.0, 80.0};
    std::size_t n_dir = 16;
    std::size_t reps = 100;
    double nu_hat = 0.0;
    std::uint64_t master_seed = 1;
    SimulationOptions sim{};
};

struct ShapeRecord {
    std::uint64_t replica = 0;
    // reach[t index][direction]
    std::vector<std::vector<double>> reach;
};

// R(t, θ) for every t in ts (ascending) from a log: the largest covered distance along
// each ray among the balls present at t. The seed point contributes 0.
inline std::vector<std::vector<double>> directional_reach(const EventLog &log, const std::vector<double> &ts,
                                                          std::size_t n_dir)
{
    std::vector<Point> dirs;
    for (std::size_t k = 0; k < n_dir; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_dir);
        dirs.push_back({std::cos(a), std::sin(a)});
    }
    std::vector<std::vector<double>> out(ts.size(), std::vector<double>(n_dir, 0.0));
    std::vector<double> cur(n_dir, 0.0);
    std::size_t ti = 0;
    for (const auto &e : log.events) {
        while (ti < ts.size() && e.time > ts[ti]) {
            out[ti++] = cur;
        }
        if (ti == ts.size()) {
            break;
        }
        const Ball b = e.ball();
        for (std::size_t k = 0; k < n_dir; ++k) {
            cur[k] = std::max(cur[k], ray_reach(b, dirs[k]));
        }
    }
    while (ti < ts.size()) {
        out[ti++] = cur;
    }
    return out;
}

inline ExperimentResult shape_scan(const RadiusMeasure &m, const ShapeConfig &c)
{
    if (c.n_dir < 8) {
        throw contract_violation("shape scan needs at least 8 directions");
    }
    if (!(c.nu_hat > 0.0)) {
        throw contract_violation("shape scan needs a positive nu_hat");
    }
    auto ts = c.ts;
    std::sort(ts.begin(), ts.end());
    const auto recs = run_replicas(c.reps, [&](std::size_t rep) {
        Simulator sim(SeedRegion::origin(), m, design_stream(c.master_seed, rep, 0.0, StreamTag::shape),
                      FrontierWindow{}, c.sim);
        sim.run(TimeHorizon{ts.back()});
        return ShapeRecord{rep, directional_reach(sim.log(), ts, c.n_dir)};
    });

    ExperimentResult res{"shape", Table({"replica", "t", "theta", "reach"}), json::object()};
    const double inv_nu = 1.0 / c.nu_hat;
    std::vector<std::vector<double>> maxdev(ts.size());
    std::uint64_t monotone_violations = 0;
    const std::size_t quarter = c.n_dir / 4;
    std::vector<std::vector<double>> r0(ts.size()), r90(ts.size());
    for (const auto &r : recs) {
        for (std::size_t ti = 0; ti < ts.size(); ++ti) {
            double dev = 0.0;
            for (std::size_t k = 0; k < c.n_dir; ++k) {
                const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c.n_dir);
                res.records.row() << r.replica << ts[ti] << theta << r.reach[ti][k];
                dev = std::max(dev, std::abs(r.reach[ti][k] / ts[ti] - inv_nu));
                if (ti > 0 && r.reach[ti][k] < r.reach[ti - 1][k]) {
                    ++monotone_violations;
                }
            }
            maxdev[ti].push_back(dev);
            r0[ti].push_back(r.reach[ti][0]);
            r90[ti].push_back(r.reach[ti][quarter]);
        }
    }
    json per_t = json::array();
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        const double d = stats::mean(r0[ti]) - stats::mean(r90[ti]);
        const double se = stats::pooled_se(r0[ti], r90[ti]);
        per_t.push_back({{"t", ts[ti]},
                         {"mean_max_deviation", stats::mean(maxdev[ti])},
                         {"median_max_deviation", stats::median(maxdev[ti])},
                         {"mean_reach_theta0", stats::mean(r0[ti])},
                         {"mean_reach_theta_quarter", stats::mean(r90[ti])},
                         {"isotropy_difference", d},
                         {"isotropy_pooled_se", se},
                         {"isotropy_within_2se", std::abs(d) <= 2.0 * se}});
    }
    std::size_t decreased = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (maxdev.back()[i] <= maxdev.front()[i]) {
            ++decreased;
        }
    }
    res.summary["nu_hat"] = c.nu_hat;
    res.summary["n_dir"] = c.n_dir;
    res.summary["per_t"] = per_t;
    res.summary["monotone_violations"] = monotone_violations;
    res.summary["paired_decrease_fraction"] =
        recs.empty() ? 0.0 : static_cast<double>(decreased) / static_cast<double>(recs.size());
    return res;
}

// ---------------------------------------------------------------------------------------
// Tail bounds.

// P(Gamma(n, rate) > s): the Poisson(rate·s) lower tail below n, in log space.
inline double erlang_tail(std::uint64_t n, double rate, double s)
{
    if (n == 0) {
        return s < 0.0 ? 1.0 : 0.0;
    }
    if (!(s > 0.0)) {
        return 1.0;
    }
    const double lambda = rate * s;
    double total = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        total += std::exp(-lambda + kk * std::log(lambda) - std::lgamma(kk + 1.0));
    }
    return std::min(total, 1.0);
}

// Chernoff bound (α e^{1-α})^n on P(Σ_{i<=n} E_i > α n) for unit exponentials, written
// for the sum of n Exp(rate) variables exceeding s.
inline double chernoff_tail(std::uint64_t n, double rate, double s)
{
    if (n == 0) {
        return 0.0;
    }
    const double alpha = rate * s / static_cast<double>(n);
    if (!(alpha > 1.0)) {
        return 1.0;
    }
    return std::exp(static_cast<double>(n) * (std::log(alpha) + 1.0 - alpha));
}

struct SlowPoint {
    double x = 3.0;
    double beta = 40.0;
};

struct TailConfig {
    std::optional<double> delta = 0.3;
    double grid_floor = 0.0;
    std::vector<SlowPoint> slow_points{{3.0, 40.0}, {3.0, 35.0}};
    std::size_t samples = 100'000;
    // Jump-count tail: P(N(x) >= θ x) with θ = theta_factor · M0.
    std::optional<double> n_tail_x = 25.0;
    double theta_factor = 4.0;
    std::size_t n_tail_reps = 1000;
    double n_tail_guard = 1e-2;
    // Coverage tail: P(σ((x,0)) > β x) against exp(-δ η β x).
    std::optional<SlowPoint> coverage;
    std::size_t coverage_reps = 200;
    std::uint64_t master_seed = 1;
    SimulationOptions sim{};
};

/// Empirical exceedance frequencies against the closed-form bounds. A point passes when
/// the frequency is at most bound + 3 binomial σ (σ evaluated at the bound). Slow-chain
/// rows also carry the Chernoff bound and the exact Erlang tail for the same event.
inline ExperimentResult tail_validator(const RadiusMeasure &m, const TailConfig &c)
{
    ExperimentResult res{"slowchain",
                         Table({"check", "x", "beta", "theta", "n", "exceedances", "frequency", "bound",
                                "binomial_sigma", "status", "chernoff_bound", "exact_tail"}),
                         json::object()};
    const SlowChainParams p = slow_chain_params(m, c.delta, c.grid_floor);
    const double threshold = 3.0 / (p.eta * p.delta * p.delta);
    res.summary["delta"] = p.delta;
    res.summary["eta"] = p.eta;
    res.summary["step_rate"] = p.step_rate;
    res.summary["beta_threshold"] = threshold;
    json points = json::array();
    bool all_pass = true;

    const auto judge = [&](std::uint64_t exceed, std::size_t n, double bound) {
        const double freq = static_cast<double>(exceed) / static_cast<double>(n);
        const double sigma = stats::binomial_sigma(bound, n);
        return std::pair{freq, freq <= bound + 3.0 * sigma};
    };

    for (std::size_t i = 0; i < c.slow_points.size(); ++i) {
        const auto &sp = c.slow_points[i];
        const double bound = std::exp(-p.delta * p.eta * sp.beta * sp.x);
        const std::uint64_t steps = slow_chain_steps(sp.x, p.delta);
        const double chern = chernoff_tail(steps, p.step_rate, sp.beta * sp.x);
        const double exact = erlang_tail(steps, p.step_rate, sp.beta * sp.x);
        json e{{"check", "slow_chain"}, {"x", sp.x}, {"beta", sp.beta}, {"bound", bound},
               {"chernoff_bound", chern}, {"exact_tail", exact}};
        if (!(sp.beta > threshold)) {
            e["status"] = "skipped";
            res.records.row() << "slow_chain" << sp.x << sp.beta << 0.0 << std::uint64_t{0} << std::uint64_t{0}
                              << 0.0 << bound << 0.0 << "skipped" << chern << exact;
            points.push_back(e);
            continue;
        }
        Rng rng = design_stream(c.master_seed, i, sp.x, StreamTag::slow);
        std::uint64_t exceed = 0;
        for (std::size_t s = 0; s < c.samples; ++s) {
            if (sample_slow_chain(p, sp.x, rng).total > sp.beta * sp.x) {
                ++exceed;
            }
        }
        const auto [freq, pass] = judge(exceed, c.samples, bound);
        const double sigma = stats::binomial_sigma(bound, c.samples);
        all_pass = all_pass && pass;
        e["n"] = c.samples;
        e["exceedances"] = exceed;
        e["frequency"] = freq;
        e["status"] = pass ? "pass" : "fail";
        const auto [cfreq, cpass] = judge(exceed, c.samples, chern);
        e["chernoff_status"] = cpass ? "pass" : "fail";
        points.push_back(e);
        res.records.row() << "slow_chain" << sp.x << sp.beta << 0.0 << static_cast<std::uint64_t>(c.samples)
                          << exceed << freq << bound << sigma << (pass ? "pass" : "fail") << chern << exact;
    }

    if (c.n_tail_x) {
        SweepConfig sc;
        sc.xs = {*c.n_tail_x};
        sc.reps = c.n_tail_reps;
        sc.master_seed = c.master_seed;
        sc.sim = c.sim;
        sc.halfplane_only = true;
        const auto recs = point_sweep(m, sc);
        const double theta = c.theta_factor * m.yule_rate_bound();
        std::uint64_t exceed = 0, done = 0;
        for (const auto &r : recs) {
            if (r.budget_hit) {
                continue;
            }
            ++done;
            if (static_cast<double>(r.n_jumps) >= theta * r.x) {
                ++exceed;
            }
        }
        const auto [freq, pass] = done > 0 ? judge(exceed, done, c.n_tail_guard) : std::pair{0.0, false};
        all_pass = all_pass && pass;
        points.push_back({{"check", "jump_count"}, {"x", *c.n_tail_x}, {"theta", theta}, {"n", done},
                          {"exceedances", exceed}, {"frequency", freq}, {"bound", c.n_tail_guard},
                          {"status", pass ? "pass" : "fail"}});
        res.records.row() << "jump_count" << *c.n_tail_x << 0.0 << theta << done << exceed << freq << c.n_tail_guard
                          << stats::binomial_sigma(c.n_tail_guard, std::max<std::uint64_t>(done, 1))
                          << (pass ? "pass" : "fail") << 0.0 << 0.0;
    }

    if (c.coverage) {
        const auto &cp = *c.coverage;
        const double bound = std::exp(-p.delta * p.eta * cp.beta * cp.x);
        if (!(cp.beta > threshold)) {
            points.push_back({{"check", "coverage"}, {"x", cp.x}, {"beta", cp.beta}, {"status", "skipped"}});
            res.records.row() << "coverage" << cp.x << cp.beta << 0.0 << std::uint64_t{0} << std::uint64_t{0} << 0.0
                              << bound << 0.0 << "skipped" << 0.0 << 0.0;
        } else {
            SweepConfig sc;
            sc.xs = {cp.x};
            sc.reps = c.coverage_reps;
            sc.master_seed = c.master_seed;
            sc.sim = c.sim;
            const auto recs = point_sweep(m, sc);
            std::uint64_t exceed = 0, done = 0;
            for (const auto &r : recs) {
                if (r.budget_hit) {
                    continue;
                }
                ++done;
                exceed += r.sigma > cp.beta * cp.x ? 1 : 0;
            }
            const auto [freq, pass] = done > 0 ? judge(exceed, done, bound) : std::pair{0.0, false};
            all_pass = all_pass && pass;
            points.push_back({{"check", "coverage"}, {"x", cp.x}, {"beta", cp.beta}, {"n", done},
                              {"exceedances", exceed}, {"frequency", freq}, {"bound", bound},
                              {"status", pass ? "pass" : "fail"}});
            res.records.row() << "coverage" << cp.x << cp.beta << 0.0 << done << exceed << freq << bound
                              << stats::binomial_sigma(bound, std::max<std::uint64_t>(done, 1))
                              << (pass ? "pass" : "fail") << 0.0 << 0.0;
        }
    }
    res.summary["points"] = points;
    res.summary["all_pass"] = all_pass;
    return res;
}

// ---------------------------------------------------------------------------------------
// Two types.

struct SectorsConfig {
    double t = 50.0;
    std::size_t reps = 100;
    double seed_radius = 5.0;
    TypeRule rule = SplitX{0.0};
    std::size_t n_dir = 64;
    std::uint64_t master_seed = 1;
    SimulationOptions sim{};
};

/// Two-type run from a disk seed; per replica, the type of the outermost ball along each
/// of n_dir rays at time t.
inline ExperimentResult sectors_run(const RadiusMeasure &m, const SectorsConfig &c)
{
    struct Row {
        std::uint64_t replica;
        std::vector<double> reach;
        std::vector<int> type;
    };
    const auto rows = run_replicas(c.reps, [&](std::size_t rep) {
        Simulator sim(Disk{{0.0, 0.0}, c.seed_radius}, m, design_stream(c.master_seed, rep, c.t, StreamTag::sectors),
                      AdaptiveWindow{}, c.sim);
        sim.enable_types(c.rule);
        sim.run(TimeHorizon{c.t});
        Row row{rep, std::vector<double>(c.n_dir, c.seed_radius), std::vector<int>(c.n_dir, -1)};
        for (std::size_t k = 0; k < c.n_dir; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c.n_dir);
            row.type[k] = seed_type(c.rule, Point{c.seed_radius * std::cos(a), c.seed_radius * std::sin(a)});
        }
        const auto &ev = sim.log().events;
        for (std::size_t i = 0; i < ev.size(); ++i) {
            for (std::size_t k = 0; k < c.n_dir; ++k) {
                const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c.n_dir);
                const double r = ray_reach(ev[i].ball(), {std::cos(a), std::sin(a)});
                if (r > row.reach[k]) {
                    row.reach[k] = r;
                    row.type[k] = sim.log().types[i];
                }
            }
        }
        return row;
    });
    ExperimentResult res{"sectors", Table({"replica", "theta", "reach", "type"}), json::object()};
    std::size_t both = 0;
    std::vector<double> share;
    for (const auto &r : rows) {
        std::size_t ones = 0;
        for (std::size_t k = 0; k < c.n_dir; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c.n_dir);
            res.records.row() << r.replica << a << r.reach[k] << r.type[k];
            ones += r.type[k] == 1 ? 1 : 0;
        }
        both += (ones > 0 && ones < c.n_dir) ? 1 : 0;
        share.push_back(static_cast<double>(ones) / static_cast<double>(c.n_dir));
    }
    res.summary["t"] = c.t;
    res.summary["n_dir"] = c.n_dir;
    res.summary["both_types_fraction"] =
        rows.empty() ? 0.0 : static_cast<double>(both) / static_cast<double>(rows.size());
    res.summary["mean_type1_share"] = share.empty() ? 0.0 : stats::mean(share);
    return res;
}

// ---------------------------------------------------------------------------------------
// Forward/backward agreement: z ∈ S_t ⇔ the skeleton of (z, t) over [0, t] meets the seed.

struct SkeletonConfig {
    std::size_t runs = 1000;
    std::uint64_t events = 50;
    std::size_t points = 20;
    std::uint64_t master_seed = 1;
};

inline ExperimentResult skeleton_check(const RadiusMeasure &m, const SkeletonConfig &c)
{
    struct Row {
        Point z;
        bool forward;
        bool backward;
    };
    const auto runs = run_replicas(c.runs, [&](std::size_t rep) {
        Rng rng = design_stream(c.master_seed, rep, 0.0, StreamTag::skeleton);
        Simulator sim(SeedRegion::origin(), m, rng, AdaptiveWindow{});
        const StopReport rp = sim.run(EventCount{c.events});
        // Query points: half uniform on the box around S, half inside random balls.
        Rng qrng(sim.rng()());
        const Window box = sim.state().inflated_bbox(0.5 * m.max_radius());
        std::vector<Row> rows;
        const auto &ev = sim.log().events;
        for (std::size_t k = 0; k < c.points; ++k) {
            Point z;
            if (k % 2 == 0 || ev.empty()) {
                z = {uniform(qrng, box.x_lo, box.x_hi), uniform(qrng, box.y_lo, box.y_hi)};
            } else {
                const Event &e = ev[uniform_index(qrng, ev.size())];
                const double rho = e.radius * std::sqrt(uniform01(qrng)) * 1.05;
                const double phi = 2.0 * std::numbers::pi * uniform01(qrng);
                z = {e.center.x + rho * std::cos(phi), e.center.y + rho * std::sin(phi)};
            }
            const bool fwd = sim.state().covers(z);
            const auto skel = ancestral_skeleton(sim.log(), z, rp.stop_time, rp.stop_time);
            rows.push_back({z, fwd, skeleton_meets_seed(skel, sim.state().seed())});
        }
        return rows;
    });
    ExperimentResult res{"skeleton_check", Table({"run", "point", "zx", "zy", "covered", "skeleton_meets_seed"}),
                         json::object()};
    std::uint64_t agree = 0, total = 0, covered = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (std::size_t k = 0; k < runs[r].size(); ++k) {
            const auto &row = runs[r][k];
            res.records.row() << static_cast<std::uint64_t>(r) << static_cast<std::uint64_t>(k) << row.z.x << row.z.y
                              << row.forward << row.backward;
            agree += row.forward == row.backward ? 1 : 0;
            covered += row.forward ? 1 : 0;
            ++total;
        }
    }
    res.summary["queries"] = total;
    res.summary["agreements"] = agree;
    res.summary["covered_queries"] = covered;
    res.summary["agreement_fraction"] = total ? static_cast<double>(agree) / static_cast<double>(total) : 1.0;
    return res;
}

} // namespace slfv

#endif
