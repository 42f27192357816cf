#ifndef SLFV_CONFIG_HPP
#define SLFV_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <slfv/errors.hpp>
#include <slfv/experiments.hpp>
#include <slfv/measure.hpp>
#include <slfv/seed_region.hpp>
#include <slfv/simulator.hpp>

namespace slfv
{

/// Parsed run configuration. Every section is optional except "measure"; absent fields
/// keep the defaults below.
struct RunConfig {
    RadiusMeasure measure = RadiusMeasure::unit();
    std::optional<SeedRegion> seed;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    std::uint64_t candidate_budget = 1'000'000'000;
    double window_a = 6.0;

    // simulate
    std::optional<StopCondition> stop;
    std::size_t simulate_reps = 1;
    std::string policy = "auto";
    std::optional<Window> window;

    // nu / exponent / gap
    std::vector<double> xs{25.0, 50.0, 100.0, 200.0, 400.0};
    std::size_t reps = 200;
    std::string gap_mode = "point-seed";

    // duality
    double x = 50.0;
    std::size_t duality_reps = 500;

    ShapeConfig shape{};
    double shape_nu_x = 200.0;
    std::size_t shape_nu_reps = 50;
    bool shape_nu_given = false;

    TailConfig tail{};
    SectorsConfig sectors{};
    SkeletonConfig skeleton{};
};

namespace detail
{

class ConfigReader
{
public:
    using json = nlohmann::json;

    [[noreturn]] static void fail(const std::string &path, const std::string &what)
    {
        throw config_error((path.empty() ? std::string("/") : path) + ": " + what);
    }

    static void only_keys(const json &j, const std::string &path, std::initializer_list<const char *> keys)
    {
        if (!j.is_object()) {
            fail(path, "expected an object");
        }
        for (const auto &[k, v] : j.items()) {
            bool known = false;
            for (const char *allowed : keys) {
                known = known || k == allowed;
            }
            if (!known) {
                fail(path + "/" + k, "unknown key");
            }
        }
    }

    static const json &req(const json &j, const char *key, const std::string &path)
    {
        if (!j.contains(key)) {
            fail(path + "/" + key, "missing required key");
        }
        return j[key];
    }

    static double number(const json &j, const std::string &path)
    {
        if (!j.is_number()) {
            fail(path, "expected a number");
        }
        return j.get<double>();
    }

    static double positive(const json &j, const std::string &path)
    {
        const double v = number(j, path);
        if (!(v > 0.0)) {
            fail(path, "expected a positive number");
        }
        return v;
    }

    static std::uint64_t count(const json &j, const std::string &path)
    {
        if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
            fail(path, "expected a non-negative integer");
        }
        return j.get<std::uint64_t>();
    }

    static std::string string(const json &j, const std::string &path)
    {
        if (!j.is_string()) {
            fail(path, "expected a string");
        }
        return j.get<std::string>();
    }

    static std::vector<double> numbers(const json &j, const std::string &path)
    {
        if (!j.is_array()) {
            fail(path, "expected an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            out.push_back(number(j[i], path + "/" + std::to_string(i)));
        }
        return out;
    }

    static Point point(const json &j, const std::string &path)
    {
        const auto v = numbers(j, path);
        if (v.size() != 2) {
            fail(path, "expected [x, y]");
        }
        return {v[0], v[1]};
    }

    static Window window(const json &j, const std::string &path)
    {
        const auto v = numbers(j, path);
        if (v.size() != 4) {
            fail(path, "expected [x_lo, x_hi, y_lo, y_hi]");
        }
        try {
            return Window::make(v[0], v[1], v[2], v[3]);
        } catch (const invalid_window &e) {
            fail(path, e.what());
        }
    }

    static RadiusMeasure measure(const json &j, const std::string &path)
    {
        only_keys(j, path, {"atoms", "uniform"});
        std::vector<RadiusAtom> atoms;
        std::vector<UniformPiece> pieces;
        if (j.contains("atoms")) {
            const auto &a = j["atoms"];
            if (!a.is_array()) {
                fail(path + "/atoms", "expected an array");
            }
            for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string p = path + "/atoms/" + std::to_string(i);
                only_keys(a[i], p, {"r", "mass"});
                if (!a[i].contains("r") || !a[i].contains("mass")) {
                    fail(p, "atom needs \"r\" and \"mass\"");
                }
                atoms.push_back({number(a[i]["r"], p + "/r"), number(a[i]["mass"], p + "/mass")});
            }
        }
        if (j.contains("uniform")) {
            const auto &u = j["uniform"];
            if (!u.is_array()) {
                fail(path + "/uniform", "expected an array");
            }
            for (std::size_t i = 0; i < u.size(); ++i) {
                const std::string p = path + "/uniform/" + std::to_string(i);
                only_keys(u[i], p, {"lo", "hi", "mass"});
                if (!u[i].contains("lo") || !u[i].contains("hi") || !u[i].contains("mass")) {
                    fail(p, "uniform piece needs \"lo\", \"hi\" and \"mass\"");
                }
                pieces.push_back({number(u[i]["lo"], p + "/lo"), number(u[i]["hi"], p + "/hi"),
                                  number(u[i]["mass"], p + "/mass")});
            }
        }
        try {
            return RadiusMeasure(std::move(atoms), std::move(pieces));
        } catch (const invalid_measure &e) {
            fail(path, e.what());
        }
    }

    static SeedRegion seed(const json &j, const std::string &path)
    {
        if (!j.is_object() || !j.contains("type")) {
            fail(path, "seed needs a \"type\"");
        }
        const std::string type = string(j["type"], path + "/type");
        if (type == "point") {
            only_keys(j, path, {"type", "points"});
            PointSet ps;
            if (!j.contains("points")) {
                ps.points.push_back({0.0, 0.0});
            } else {
                if (!j["points"].is_array()) {
                    fail(path + "/points", "expected an array of [x, y]");
                }
                for (std::size_t i = 0; i < j["points"].size(); ++i) {
                    ps.points.push_back(point(j["points"][i], path + "/points/" + std::to_string(i)));
                }
            }
            return ps;
        }
        if (type == "halfplane") {
            only_keys(j, path, {"type", "x0"});
            return HalfPlane{j.contains("x0") ? number(j["x0"], path + "/x0") : 0.0};
        }
        if (type == "disk") {
            only_keys(j, path, {"type", "center", "radius"});
            if (!j.contains("radius")) {
                fail(path, "disk needs \"radius\"");
            }
            return Disk{j.contains("center") ? point(j["center"], path + "/center") : Point{0.0, 0.0},
                        positive(j["radius"], path + "/radius")};
        }
        if (type == "union") {
            only_keys(j, path, {"type", "parts"});
            if (!j.contains("parts") || !j["parts"].is_array()) {
                fail(path + "/parts", "expected an array of seeds");
            }
            SeedUnion u;
            for (std::size_t i = 0; i < j["parts"].size(); ++i) {
                u.parts.push_back(seed(j["parts"][i], path + "/parts/" + std::to_string(i)));
            }
            return u;
        }
        fail(path + "/type", "unknown seed type \"" + type + "\"");
    }

    static StopCondition stop(const json &j, const std::string &path)
    {
        if (!j.is_object() || !j.contains("type")) {
            fail(path, "stop needs a \"type\"");
        }
        const std::string type = string(j["type"], path + "/type");
        if (type == "point") {
            only_keys(j, path, {"type", "z"});
            return PointCovered{point(req(j, "z", path), path + "/z")};
        }
        if (type == "halfplane") {
            only_keys(j, path, {"type", "x"});
            return HalfPlaneReached{number(req(j, "x", path), path + "/x")};
        }
        if (type == "segment") {
            only_keys(j, path, {"type", "z", "anchor"});
            SegmentCovered s{point(req(j, "z", path), path + "/z")};
            if (j.contains("anchor")) {
                s.anchor = point(j["anchor"], path + "/anchor");
            }
            return s;
        }
        if (type == "time") {
            only_keys(j, path, {"type", "t"});
            return TimeHorizon{number(req(j, "t", path), path + "/t")};
        }
        if (type == "events") {
            only_keys(j, path, {"type", "n"});
            return EventCount{count(req(j, "n", path), path + "/n")};
        }
        fail(path + "/type", "unknown stop type \"" + type + "\"");
    }

    static TypeRule type_rule(const json &j, const std::string &path)
    {
        if (!j.is_object() || !j.contains("type")) {
            fail(path, "type rule needs a \"type\"");
        }
        const std::string type = string(j["type"], path + "/type");
        if (type == "split_x" || type == "split_y") {
            only_keys(j, path, {"type", "threshold"});
            const double t = j.contains("threshold") ? number(j["threshold"], path + "/threshold") : 0.0;
            return type == "split_x" ? TypeRule{SplitX{t}} : TypeRule{SplitY{t}};
        }
        if (type == "sectors") {
            only_keys(j, path, {"type", "count", "center"});
            Sectors s;
            if (j.contains("count")) {
                s.count = static_cast<int>(count(j["count"], path + "/count"));
                if (s.count < 1) {
                    fail(path + "/count", "expected at least one sector");
                }
            }
            if (j.contains("center")) {
                s.center = point(j["center"], path + "/center");
            }
            return s;
        }
        fail(path + "/type", "unknown type rule \"" + type + "\"");
    }
};

} // namespace detail

/// Parses and validates a configuration document. Throws config_error naming the JSON
/// path of the first problem.
inline RunConfig parse_config(const nlohmann::json &j)
{
    using R = detail::ConfigReader;
    RunConfig c;
    R::only_keys(j, "",
                 {"measure", "seed", "master_seed", "output_dir", "candidate_budget", "window_a", "simulate", "nu",
                  "exponent", "gap", "duality", "shape", "slowchain", "sectors", "skeleton_check"});
    if (!j.contains("measure")) {
        R::fail("/measure", "missing required key");
    }
    c.measure = R::measure(j["measure"], "/measure");
    if (j.contains("seed")) {
        c.seed = R::seed(j["seed"], "/seed");
    }
    if (j.contains("master_seed")) {
        c.master_seed = R::count(j["master_seed"], "/master_seed");
    }
    if (j.contains("output_dir")) {
        c.output_dir = R::string(j["output_dir"], "/output_dir");
    }
    if (j.contains("candidate_budget")) {
        c.candidate_budget = R::count(j["candidate_budget"], "/candidate_budget");
    }
    if (j.contains("window_a")) {
        c.window_a = R::positive(j["window_a"], "/window_a");
    }
    if (j.contains("simulate")) {
        const auto &s = j["simulate"];
        R::only_keys(s, "/simulate", {"stop", "reps", "policy", "window"});
        if (s.contains("stop")) {
            c.stop = R::stop(s["stop"], "/simulate/stop");
        }
        if (s.contains("reps")) {
            c.simulate_reps = R::count(s["reps"], "/simulate/reps");
        }
        if (s.contains("policy")) {
            c.policy = R::string(s["policy"], "/simulate/policy");
            if (c.policy != "auto" && c.policy != "adaptive" && c.policy != "frontier" && c.policy != "fixed") {
                R::fail("/simulate/policy", "expected auto, adaptive, frontier or fixed");
            }
        }
        if (s.contains("window")) {
            c.window = R::window(s["window"], "/simulate/window");
        }
    }
    for (const char *key : {"nu", "exponent", "gap"}) {
        if (!j.contains(key)) {
            continue;
        }
        const std::string p = std::string("/") + key;
        const auto &s = j[key];
        if (std::string(key) == "gap") {
            R::only_keys(s, p, {"xs", "reps", "mode"});
            if (s.contains("mode")) {
                c.gap_mode = R::string(s["mode"], p + "/mode");
                if (c.gap_mode != "point-seed" && c.gap_mode != "halfplane-window") {
                    R::fail(p + "/mode", "expected point-seed or halfplane-window");
                }
            }
        } else {
            R::only_keys(s, p, {"xs", "reps"});
        }
        if (s.contains("xs")) {
            c.xs = R::numbers(s["xs"], p + "/xs");
        }
        if (s.contains("reps")) {
            c.reps = R::count(s["reps"], p + "/reps");
        }
    }
    if (j.contains("duality")) {
        const auto &s = j["duality"];
        R::only_keys(s, "/duality", {"x", "reps"});
        if (s.contains("x")) {
            c.x = R::number(s["x"], "/duality/x");
        }
        if (s.contains("reps")) {
            c.duality_reps = R::count(s["reps"], "/duality/reps");
        }
    }
    if (j.contains("shape")) {
        const auto &s = j["shape"];
        R::only_keys(s, "/shape", {"ts", "n_dir", "reps", "nu_hat", "nu_x", "nu_reps"});
        if (s.contains("ts")) {
            c.shape.ts = R::numbers(s["ts"], "/shape/ts");
        }
        if (s.contains("n_dir")) {
            c.shape.n_dir = R::count(s["n_dir"], "/shape/n_dir");
        }
        if (s.contains("reps")) {
            c.shape.reps = R::count(s["reps"], "/shape/reps");
        }
        if (s.contains("nu_hat")) {
            c.shape.nu_hat = R::positive(s["nu_hat"], "/shape/nu_hat");
            c.shape_nu_given = true;
        }
        if (s.contains("nu_x")) {
            c.shape_nu_x = R::positive(s["nu_x"], "/shape/nu_x");
        }
        if (s.contains("nu_reps")) {
            c.shape_nu_reps = R::count(s["nu_reps"], "/shape/nu_reps");
        }
    }
    if (j.contains("slowchain")) {
        const auto &s = j["slowchain"];
        R::only_keys(s, "/slowchain",
                     {"delta", "grid_floor", "points", "samples", "n_tail_x", "theta_factor", "n_tail_reps",
                      "coverage", "coverage_reps"});
        if (s.contains("delta")) {
            c.tail.delta = s["delta"].is_null() ? std::nullopt
                                                : std::optional<double>(R::positive(s["delta"], "/slowchain/delta"));
        }
        if (s.contains("grid_floor")) {
            c.tail.grid_floor = R::number(s["grid_floor"], "/slowchain/grid_floor");
        }
        if (s.contains("points")) {
            c.tail.slow_points.clear();
            for (std::size_t i = 0; i < s["points"].size(); ++i) {
                const std::string p = "/slowchain/points/" + std::to_string(i);
                R::only_keys(s["points"][i], p, {"x", "beta"});
                c.tail.slow_points.push_back(
                    {R::number(R::req(s["points"][i], "x", p), p + "/x"), R::number(R::req(s["points"][i], "beta", p), p + "/beta")});
            }
        }
        if (s.contains("samples")) {
            c.tail.samples = R::count(s["samples"], "/slowchain/samples");
        }
        if (s.contains("n_tail_x")) {
            c.tail.n_tail_x = s["n_tail_x"].is_null()
                                  ? std::nullopt
                                  : std::optional<double>(R::positive(s["n_tail_x"], "/slowchain/n_tail_x"));
        }
        if (s.contains("theta_factor")) {
            c.tail.theta_factor = R::positive(s["theta_factor"], "/slowchain/theta_factor");
        }
        if (s.contains("n_tail_reps")) {
            c.tail.n_tail_reps = R::count(s["n_tail_reps"], "/slowchain/n_tail_reps");
        }
        if (s.contains("coverage")) {
            R::only_keys(s["coverage"], "/slowchain/coverage", {"x", "beta"});
            c.tail.coverage = SlowPoint{R::number(R::req(s["coverage"], "x", "/slowchain/coverage"), "/slowchain/coverage/x"),
                                        R::number(R::req(s["coverage"], "beta", "/slowchain/coverage"), "/slowchain/coverage/beta")};
        }
        if (s.contains("coverage_reps")) {
            c.tail.coverage_reps = R::count(s["coverage_reps"], "/slowchain/coverage_reps");
        }
    }
    if (j.contains("sectors")) {
        const auto &s = j["sectors"];
        R::only_keys(s, "/sectors", {"t", "reps", "seed_radius", "rule", "n_dir"});
        if (s.contains("t")) {
            c.sectors.t = R::positive(s["t"], "/sectors/t");
        }
        if (s.contains("reps")) {
            c.sectors.reps = R::count(s["reps"], "/sectors/reps");
        }
        if (s.contains("seed_radius")) {
            c.sectors.seed_radius = R::positive(s["seed_radius"], "/sectors/seed_radius");
        }
        if (s.contains("rule")) {
            c.sectors.rule = R::type_rule(s["rule"], "/sectors/rule");
        }
        if (s.contains("n_dir")) {
            c.sectors.n_dir = R::count(s["n_dir"], "/sectors/n_dir");
        }
    }
    if (j.contains("skeleton_check")) {
        const auto &s = j["skeleton_check"];
        R::only_keys(s, "/skeleton_check", {"runs", "events", "points"});
        if (s.contains("runs")) {
            c.skeleton.runs = R::count(s["runs"], "/skeleton_check/runs");
        }
        if (s.contains("events")) {
            c.skeleton.events = R::count(s["events"], "/skeleton_check/events");
        }
        if (s.contains("points")) {
            c.skeleton.points = R::count(s["points"], "/skeleton_check/points");
        }
    }
    return c;
}

inline RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot read config file " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw config_error(path + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace slfv

#endif
