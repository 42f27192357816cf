// slfv: command-line front end for the simulator and the experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <slfv/config.hpp>
#include <slfv/events.hpp>
#include <slfv/experiments.hpp>
#include <slfv/io.hpp>
#include <slfv/simulator.hpp>

#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace slfv;

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_flagged = 3;

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> x;
    std::optional<std::vector<double>> xs;
    std::optional<std::size_t> reps;
    std::optional<double> window_a;
};

class Output
{
public:
    explicit Output(fs::path dir) : m_dir(std::move(dir))
    {
        std::error_code ec;
        fs::create_directories(m_dir, ec);
        if (ec || !fs::is_directory(m_dir)) {
            throw config_error("cannot create output directory " + m_dir.string());
        }
    }

    void table(const std::string &name, const Table &t)
    {
        t.write((m_dir / name).string());
        m_files.push_back(name);
    }

    void events(const std::string &name, const EventLog &log)
    {
        std::ofstream os(m_dir / name, std::ios::binary);
        if (!os) {
            throw config_error("cannot write " + (m_dir / name).string());
        }
        write_events_csv(os, log);
        m_files.push_back(name);
    }

    void json_file(const std::string &name, const json &j)
    {
        std::ofstream os(m_dir / name, std::ios::binary);
        if (!os) {
            throw config_error("cannot write " + (m_dir / name).string());
        }
        os << j.dump(2) << '\n';
        m_files.push_back(name);
    }

    // <id>.csv and <id>_summary.json.
    void result(const ExperimentResult &r)
    {
        table(r.id + ".csv", r.records);
        json_file(r.id + "_summary.json", r.summary_json());
    }

    void finish()
    {
        const auto check = tools::write_manifest(m_dir, m_files);
        if (check.had_previous) {
            if (check.changed.empty()) {
                std::cerr << "manifest: outputs identical to the previous run\n";
            } else {
                std::cerr << "manifest: " << check.changed.size() << " file(s) differ from the previous run\n";
            }
        }
    }

    [[nodiscard]] const fs::path &dir() const noexcept
    {
        return m_dir;
    }

private:
    fs::path m_dir;
    std::vector<std::string> m_files;
};

RunConfig resolve(const Overrides &o)
{
    RunConfig c = o.config ? load_config(*o.config) : RunConfig{};
    if (o.seed) {
        c.master_seed = *o.seed;
    }
    if (o.out) {
        c.output_dir = *o.out;
    }
    if (o.x) {
        c.x = *o.x;
    }
    if (o.xs) {
        c.xs = *o.xs;
    }
    if (o.window_a) {
        if (!(*o.window_a > 0.0)) {
            throw config_error("--window-a: expected a positive number");
        }
        c.window_a = *o.window_a;
    }
    for (double x : c.xs) {
        if (!(x >= 0.0)) {
            throw config_error("xs: expected non-negative values");
        }
    }
    if (!std::is_sorted(c.xs.begin(), c.xs.end())) {
        throw config_error("xs: expected increasing values");
    }
    return c;
}

SimulationOptions sim_options(const RunConfig &c)
{
    SimulationOptions s;
    s.candidate_budget = c.candidate_budget;
    return s;
}

std::size_t reps_or(const Overrides &o, std::size_t fallback)
{
    return o.reps ? *o.reps : fallback;
}

void report(const ExperimentResult &r)
{
    std::cout << r.summary_json().dump(2) << '\n';
}

int finish(Output &out, const std::vector<const ExperimentResult *> &results)
{
    bool flagged = false;
    for (const auto *r : results) {
        out.result(*r);
        flagged = flagged || r->flagged;
    }
    out.finish();
    for (const auto *r : results) {
        report(*r);
    }
    return flagged ? exit_flagged : exit_ok;
}

SweepConfig sweep_config(const RunConfig &c, const Overrides &o)
{
    SweepConfig s;
    s.xs = c.xs;
    s.reps = reps_or(o, c.reps);
    s.master_seed = c.master_seed;
    s.sim = sim_options(c);
    return s;
}

// Target point of a stop condition, used to size the default restricted window.
double stop_reach(const StopCondition &s)
{
    return std::visit(
        [](const auto &v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PointCovered> || std::is_same_v<T, SegmentCovered>) {
                return v.z.x;
            } else if constexpr (std::is_same_v<T, HalfPlaneReached>) {
                return v.x;
            } else {
                return 50.0;
            }
        },
        s);
}

int cmd_simulate(const RunConfig &c, const Overrides &o)
{
    const SeedRegion seed = c.seed ? *c.seed : SeedRegion::origin();
    const StopCondition stop = c.stop ? *c.stop : StopCondition{HalfPlaneReached{c.x}};
    WindowPolicy policy = AdaptiveWindow{};
    if (c.policy == "frontier") {
        policy = FrontierWindow{};
    } else if (c.policy == "fixed" || (c.policy == "auto" && !seed.is_compact())) {
        policy = FixedWindow{c.window ? *c.window
                                      : default_halfplane_window(stop_reach(stop), c.window_a,
                                                                 c.measure.max_radius())};
    }
    const std::size_t reps = reps_or(o, c.simulate_reps);
    Output out(c.output_dir);
    Table summary({"replica", "stop_time", "n_events", "n_candidates", "truncated", "budget_exceeded", "n_jumps",
                   "y_end", "max_abs_y", "strip_radius"});
    bool flagged = false;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Simulator sim(seed, c.measure, replica_stream(c.master_seed, rep), policy, sim_options(c));
        sim.set_stream_metadata(c.master_seed, rep);
        StopReport rp;
        bool budget = false;
        try {
            rp = sim.run(stop);
        } catch (const budget_exceeded &e) {
            rp = e.report();
            budget = true;
            flagged = true;
        }
        ChainStats st;
        std::optional<Chain> geo;
        if (rp.trigger_event_id) {
            Rng walk(sim.rng()());
            geo = extract_geodesic(sim.log(), *rp.trigger_event_id, sim.state().seed(), walk);
            st = chain_stats(*geo);
        }
        summary.row() << static_cast<std::uint64_t>(rep) << rp.stop_time << rp.accepted_count << rp.candidate_count
                      << rp.truncated << budget << st.n_jumps << st.y_end << st.max_abs_y << st.strip_radius;
        const std::string suffix = reps == 1 ? "" : "_" + std::to_string(rep);
        out.events("events" + suffix + ".csv", sim.log());
        if (geo) {
            out.table("geodesic" + suffix + ".csv", geodesic_table(*geo));
        }
    }
    out.table("run_summary.csv", summary);
    out.finish();
    std::cout << "wrote " << reps << " replica(s) to " << out.dir().string() << '\n';
    return flagged ? exit_flagged : exit_ok;
}

int cmd_nu(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    const auto r = estimate_nu(c.measure, sweep_config(c, o));
    return finish(out, {&r});
}

int cmd_exponent(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    const auto r = exponent_fit(c.measure, sweep_config(c, o));
    return finish(out, {&r});
}

int cmd_gap(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    if (c.gap_mode == "halfplane-window") {
        HalfplaneConfig h;
        h.reps = reps_or(o, c.reps);
        h.window_a = c.window_a;
        h.master_seed = c.master_seed;
        h.sim = sim_options(c);
        const auto r = halfplane_gap(c.measure, c.xs, h);
        return finish(out, {&r});
    }
    const auto r = gap_result(point_sweep(c.measure, sweep_config(c, o)));
    return finish(out, {&r});
}

int cmd_duality(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    HalfplaneConfig h;
    h.x = c.x;
    h.reps = reps_or(o, c.duality_reps);
    h.window_a = c.window_a;
    h.master_seed = c.master_seed;
    h.sim = sim_options(c);
    const auto r = duality_check(c.measure, h);
    return finish(out, {&r});
}

int cmd_shape(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    ShapeConfig s = c.shape;
    s.reps = reps_or(o, s.reps);
    s.master_seed = c.master_seed;
    s.sim = sim_options(c);
    if (!c.shape_nu_given) {
        SweepConfig sc;
        sc.xs = {c.shape_nu_x};
        sc.reps = c.shape_nu_reps;
        sc.master_seed = c.master_seed;
        sc.sim = s.sim;
        sc.halfplane_only = true;
        const auto nu = nu_result(point_sweep(c.measure, sc), c.measure.max_radius());
        s.nu_hat = nu.summary.at("nu_hat").get<double>();
    }
    const auto r = shape_scan(c.measure, s);
    return finish(out, {&r});
}

int cmd_slowchain(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    TailConfig t = c.tail;
    t.master_seed = c.master_seed;
    t.sim = sim_options(c);
    if (o.reps) {
        t.n_tail_reps = *o.reps;
    }
    const auto r = tail_validator(c.measure, t);
    return finish(out, {&r});
}

int cmd_sectors(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    SectorsConfig s = c.sectors;
    s.reps = reps_or(o, s.reps);
    s.master_seed = c.master_seed;
    s.sim = sim_options(c);
    const auto r = sectors_run(c.measure, s);
    return finish(out, {&r});
}

int cmd_skeleton(const RunConfig &c, const Overrides &o)
{
    Output out(c.output_dir);
    SkeletonConfig s = c.skeleton;
    s.runs = reps_or(o, s.runs);
    s.master_seed = c.master_seed;
    const auto r = skeleton_check(c.measure, s);
    return finish(out, {&r});
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Monte Carlo simulator for the infinite-parent spatial Lambda-Fleming-Viot growth process"};
    app.require_subcommand(1);
    Overrides o;

    const auto add_common = [&](CLI::App *sub) {
        sub->add_option_function<std::string>("--config", [&](const std::string &v) { o.config = v; },
                                              "JSON run configuration");
        sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { o.seed = v; }, "master seed");
        sub->add_option_function<std::string>("--out", [&](const std::string &v) { o.out = v; },
                                              "output directory");
        sub->add_option_function<double>("--x", [&](double v) { o.x = v; }, "target abscissa");
        sub->add_option_function<std::vector<double>>(
               "--xs", [&](const std::vector<double> &v) { o.xs = v; }, "comma-separated abscissae")
            ->delimiter(',');
        sub->add_option_function<std::size_t>("--reps", [&](std::size_t v) { o.reps = v; }, "replicas");
        sub->add_option_function<double>("--window-a", [&](double v) { o.window_a = v; },
                                         "strip half-width factor A of the restricted window");
    };

    struct Command {
        const char *name;
        const char *help;
        int (*run)(const RunConfig &, const Overrides &);
    };
    const Command commands[] = {
        {"simulate", "run the process and write events, run summary and geodesic", cmd_simulate},
        {"nu", "estimate the front speed constant", cmd_nu},
        {"exponent", "fit the wandering exponent of geodesics", cmd_exponent},
        {"gap", "front-bulk gap scaling", cmd_gap},
        {"duality", "compare point-to-plane and plane-to-point hitting times", cmd_duality},
        {"shape", "directional reach against the limiting ball", cmd_shape},
        {"slowchain", "validate the slow-chain and coverage tail bounds", cmd_slowchain},
        {"sectors", "two-type runs from a split disk", cmd_sectors},
        {"skeleton-check", "forward/backward coverage agreement", cmd_skeleton},
    };
    std::vector<std::pair<CLI::App *, const Command *>> subs;
    for (const auto &cmd : commands) {
        CLI::App *sub = app.add_subcommand(cmd.name, cmd.help);
        add_common(sub);
        subs.emplace_back(sub, &cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        const RunConfig c = resolve(o);
        for (const auto &[sub, cmd] : subs) {
            if (sub->parsed()) {
                return cmd->run(c, o);
            }
        }
    } catch (const config_error &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const fit_undefined &e) {
        std::cerr << "fit undefined: " << e.what() << '\n';
        return exit_flagged;
    } catch (const budget_exceeded &e) {
        std::cerr << e.what() << '\n';
        return exit_flagged;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_failure;
}
