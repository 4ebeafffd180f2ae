#include <algorithm>
#include <cstdio>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "scenegen/defaults.hpp"
#include "scenegen/scenario.hpp"

using namespace scenegen;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    std::string path = "scenegen_test_" + name + ".json";
    std::ofstream out(path);
    out << body;
    return path;
}

FunctionalScenario seed(const std::string& id) {
    for (const auto& s : default_seed_scenarios())
        if (s.id == id) return s;
    throw std::runtime_error("no seed " + id);
}

RiskAction catalog_action(const std::string& name) {
    for (const auto& a : default_action_catalog())
        if (a.action == name) return a;
    throw std::runtime_error("no action " + name);
}

}  // namespace

TEST_CASE("parse_scenario") {
    SECTION("following fixture round-trips with ego and lead vehicle") {
        auto path = write_temp("following", R"({
            "id": "following",
            "maneuver": "following",
            "road": "straight_two_lane",
            "roles": [{"role": "ego", "required": true},
                      {"role": "lead_vehicle", "required": true},
                      {"role": "obstacle", "required": false}]
        })");
        auto s = parse_scenario(path);
        std::remove(path.c_str());
        CHECK(s.id == "following");
        CHECK(s.maneuver == Maneuver::following);
        CHECK(s.has_role(Role::ego));
        CHECK(s.has_role(Role::lead_vehicle));
        CHECK(s.roles.size() == 3);

        // serialization round-trip
        auto back = functional_from_json(functional_to_json(s));
        CHECK(back.id == s.id);
        CHECK(back.roles == s.roles);
    }

    SECTION("two ego roles rejected") {
        auto path = write_temp("two_egos", R"({
            "id": "bad", "maneuver": "lane_keeping", "road": "straight_two_lane",
            "roles": [{"role": "ego"}, {"role": "ego"}]
        })");
        CHECK_THROWS_AS(parse_scenario(path), InvalidInput);
        std::remove(path.c_str());
    }

    SECTION("left turn on a straight road rejected") {
        auto path = write_temp("left_turn", R"({
            "id": "bad", "maneuver": "left_turn_intersection", "road": "straight_two_lane",
            "roles": [{"role": "ego"}, {"role": "oncoming_vehicle"}]
        })");
        CHECK_THROWS_AS(parse_scenario(path), InvalidInput);
        std::remove(path.c_str());
    }

    SECTION("unknown maneuver rejected") {
        auto path = write_temp("unknown", R"({
            "id": "bad", "maneuver": "hover", "road": "straight_two_lane",
            "roles": [{"role": "ego"}]
        })");
        CHECK_THROWS_AS(parse_scenario(path), InvalidInput);
        std::remove(path.c_str());
    }

    SECTION("missing file rejected") {
        CHECK_THROWS_AS(parse_scenario("does_not_exist.json"), InvalidInput);
    }
}

TEST_CASE("precond") {
    SECTION("pedestrian_dart needs a pedestrian role") {
        CHECK_FALSE(precond(seed("following"), catalog_action("pedestrian_dart")));
        CHECK(precond(seed("pedestrian_crossing"), catalog_action("pedestrian_dart")));
    }

    SECTION("sudden_brake on following is admissible") {
        CHECK(precond(seed("following"), catalog_action("sudden_brake")));
    }

    SECTION("run_red_light needs an intersection") {
        CHECK_FALSE(precond(seed("overtaking"), catalog_action("run_red_light")));
        CHECK(precond(seed("left_turn_intersection"), catalog_action("run_red_light")));
    }

    SECTION("baseline action admissible everywhere") {
        for (const auto& s : default_seed_scenarios())
            CHECK(precond(s, catalog_action("none")));
    }

    SECTION("every shipped pattern is admissible on every seed") {
        // enumeration of the contract table: patterns constrain only the
        // environment, which no functional seed pre-binds
        for (const auto& s : default_seed_scenarios())
            for (const auto& e : default_pattern_catalog().patterns)
                CHECK(precond(s, e.pattern));
    }

    SECTION("a logical scenario rejects contradicting environment assignments") {
        auto schema = canonical_schema();
        auto sidx = [&](const std::string& v, const std::string& s) {
            return static_cast<int>(schema.state_index(schema.index_of(v), s));
        };
        StaticCombination rain_flood;
        rain_flood.assignments["weather"] = sidx("weather", "rain");
        rain_flood.assignments["surface_condition"] = sidx("surface_condition", "flooded");
        auto logical = make_logical(seed("following"), rain_flood, std::nullopt);

        StaticCombination also_rain;
        also_rain.assignments["weather"] = sidx("weather", "rain");
        CHECK(precond(logical, also_rain));

        StaticCombination snow;
        snow.assignments["weather"] = sidx("weather", "snow");
        CHECK_FALSE(precond(logical, snow));
    }

    SECTION("monotone: adding actors never falsifies a true precondition") {
        auto actions = default_action_catalog();
        auto extras = {Role::lead_vehicle, Role::oncoming_vehicle, Role::pedestrian,
                       Role::obstacle};
        for (const auto& s : default_seed_scenarios())
            for (const auto& a : actions) {
                if (!precond(s, a)) continue;
                for (auto extra : extras) {
                    auto grown = s;
                    grown.roles.emplace_back(extra, false);
                    CHECK(precond(grown, a));
                }
            }
    }
}

TEST_CASE("concretize") {
    auto schema = canonical_schema();
    StaticCombination env;
    env.assignments["weather"] = static_cast<int>(
        schema.state_index(schema.index_of("weather"), "rain"));

    SECTION("degenerate ranges give n identical scenarios") {
        auto logical = make_logical(seed("following"), env, std::nullopt);
        for (auto& [name, r] : logical.ranges) r.max = r.min;
        auto list = concretize(logical, 5, 13);
        REQUIRE(list.size() == 5);
        for (const auto& cs : list) {
            CHECK(cs.params == list.front().params);
            for (std::size_t i = 0; i < cs.actors.size(); ++i) {
                CHECK(cs.actors[i].x == list.front().actors[i].x);
                CHECK(cs.actors[i].speed == list.front().actors[i].speed);
            }
        }
    }

    SECTION("same seed twice gives identical lists") {
        auto logical = make_logical(seed("overtaking"), env, catalog_action("sudden_brake"));
        auto a = concretize(logical, 20, 99);
        auto b = concretize(logical, 20, 99);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].params == b[i].params);
    }

    SECTION("gap uniform on [10,30] by KS test") {
        auto logical = make_logical(seed("following"), env, std::nullopt);
        logical.ranges["gap"] = {10.0, 30.0};
        auto list = concretize(logical, 1000, 7);
        std::vector<double> gaps;
        for (const auto& cs : list) gaps.push_back(cs.params.at("gap"));
        std::sort(gaps.begin(), gaps.end());
        double d = 0;
        const double n = static_cast<double>(gaps.size());
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            double f = (gaps[i] - 10.0) / 20.0;
            d = std::max(d, std::max(std::abs(f - i / n), std::abs((i + 1) / n - f)));
        }
        // critical value at alpha = 0.01 for n = 1000
        CHECK(d < 1.628 / std::sqrt(n));
    }

    SECTION("lowering preserves identity") {
        auto fs = seed("overtaking");
        auto action = catalog_action("sudden_brake");
        auto logical = make_logical(fs, env, action);
        auto list = concretize(logical, 50, 21);
        for (const auto& cs : list) {
            // bound values inside the logical ranges
            for (const auto& [name, value] : cs.params) {
                const auto& r = logical.ranges.at(name);
                CHECK(value >= r.min);
                CHECK(value <= r.max);
            }
            // environment matches the chosen combination
            CHECK(cs.environment.assignments == env.assignments);
            // actors mirror the functional roles, in order
            REQUIRE(cs.actors.size() == fs.roles.size());
            for (std::size_t i = 0; i < cs.actors.size(); ++i)
                CHECK(cs.actors[i].role == fs.roles[i].first);
            REQUIRE(cs.action.has_value());
            CHECK(cs.action->action == "sudden_brake");
        }
    }

    SECTION("collision-free placements at t=0") {
        auto logical = make_logical(seed("overtaking"), env, std::nullopt);
        for (const auto& cs : concretize(logical, 100, 3))
            for (std::size_t i = 0; i < cs.actors.size(); ++i)
                for (std::size_t j = i + 1; j < cs.actors.size(); ++j) {
                    const auto& a = cs.actors[i];
                    const auto& b = cs.actors[j];
                    bool overlap = std::abs(a.x - b.x) * 2 < a.length + b.length &&
                                   std::abs(a.y - b.y) * 2 < a.width + b.width;
                    CHECK_FALSE(overlap);
                }
    }

    SECTION("ranges that force overlap are rejected") {
        LogicalScenario logical;
        logical.functional_id = "bad";
        logical.roles = {{Role::ego, true}, {Role::obstacle, true}};
        logical.ranges["ego_speed"] = {10.0, 10.0};
        logical.ranges["obstacle_distance"] = {1.0, 1.0};
        CHECK_THROWS_AS(concretize(logical, 1, 5), InvalidInput);
    }

    SECTION("n = 0 rejected") {
        auto logical = make_logical(seed("following"), env, std::nullopt);
        CHECK_THROWS_AS(concretize(logical, 0, 1), InvalidInput);
    }
}
