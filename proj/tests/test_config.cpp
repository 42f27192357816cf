#include <catch_amalgamated.hpp>

#include <numbers>
#include <string>

#include <slfv/config.hpp>

using namespace slfv;

namespace
{

std::string error_of(const nlohmann::json &j)
{
    try {
        parse_config(j);
    } catch (const config_error &e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("a full configuration parses")
{
    const auto j = nlohmann::json::parse(R"({
        "measure": {"atoms": [{"r": 1.0, "mass": 1.0}], "uniform": [{"lo": 0.0, "hi": 2.0, "mass": 1.0}]},
        "seed": {"type": "union", "parts": [{"type": "point", "points": [[0, 0], [1, 1]]},
                                            {"type": "disk", "center": [3, 0], "radius": 0.5}]},
        "master_seed": 9,
        "output_dir": "results",
        "candidate_budget": 1000,
        "window_a": 4,
        "simulate": {"stop": {"type": "segment", "z": [5, 0], "anchor": [1, 0]}, "reps": 3, "policy": "adaptive"},
        "nu": {"xs": [10, 20], "reps": 40},
        "gap": {"mode": "halfplane-window"},
        "duality": {"x": 30, "reps": 250},
        "shape": {"ts": [5, 10], "n_dir": 12, "reps": 7, "nu_hat": 0.2},
        "sectors": {"t": 10, "rule": {"type": "sectors", "count": 6}},
        "skeleton_check": {"runs": 5, "events": 10, "points": 3}
    })");
    const RunConfig c = parse_config(j);
    CHECK(c.measure.max_radius() == 2.0);
    CHECK(c.measure.total_mass() == 2.0);
    REQUIRE(c.seed);
    CHECK(c.seed->contains({1, 1}));
    CHECK(c.seed->contains({3.4, 0}));
    CHECK_FALSE(c.seed->contains({2, 0}));
    CHECK(c.master_seed == 9);
    CHECK(c.output_dir == "results");
    CHECK(c.candidate_budget == 1000);
    CHECK(c.window_a == 4);
    REQUIRE(c.stop);
    const auto *seg = std::get_if<SegmentCovered>(&*c.stop);
    REQUIRE(seg);
    CHECK(seg->anchor == Point{1, 0});
    CHECK(c.simulate_reps == 3);
    CHECK(c.policy == "adaptive");
    CHECK(c.xs == std::vector<double>{10, 20});
    CHECK(c.reps == 40);
    CHECK(c.gap_mode == "halfplane-window");
    CHECK(c.x == 30);
    CHECK(c.duality_reps == 250);
    CHECK(c.shape.n_dir == 12);
    CHECK(c.shape_nu_given);
    CHECK(std::holds_alternative<Sectors>(c.sectors.rule));
    CHECK(c.skeleton.runs == 5);
}

TEST_CASE("defaults")
{
    const RunConfig c = parse_config(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1}]}})"));
    CHECK(c.measure.yule_rate_bound() == Catch::Approx(4 * std::numbers::pi));
    CHECK(c.xs == std::vector<double>{25, 50, 100, 200, 400});
    CHECK(c.reps == 200);
    CHECK(c.window_a == 6);
    CHECK(c.duality_reps == 500);
    CHECK_FALSE(c.seed.has_value());
}

TEST_CASE("configuration errors name the JSON path")
{
    CHECK(error_of(nlohmann::json::parse(R"({})")).rfind("/measure:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": []}})")).rfind("/measure:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1}]}, "bogus": 1})"))
              .rfind("/bogus:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1, "x": 2}]}})"))
              .rfind("/measure/atoms/0/x:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": "a", "mass": 1}]}})"))
              .rfind("/measure/atoms/0/r:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1}]}, "nu": {"reps": -3}})"))
              .rfind("/nu/reps:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1}]},
                                   "simulate": {"stop": {"type": "point"}}})"))
              .rfind("/simulate/stop/z:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1}]},
                                   "seed": {"type": "blob"}})"))
              .rfind("/seed/type:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1}]},
                                   "simulate": {"window": [0, 0, 0, 1]}})"))
              .rfind("/simulate/window:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"({"measure": {"atoms": [{"r": 1, "mass": 1}]},
                                   "gap": {"mode": "other"}})"))
              .rfind("/gap/mode:", 0) == 0);
    CHECK(error_of(nlohmann::json::parse(R"([1, 2])")).rfind("/:", 0) == 0);
}

TEST_CASE("loading a missing file is a configuration error")
{
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), config_error);
}
