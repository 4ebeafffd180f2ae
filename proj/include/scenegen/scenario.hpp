#ifndef SCENEGEN_SCENARIO_HPP
#define SCENEGEN_SCENARIO_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenegen/patterns.hpp"
#include "scenegen/schema.hpp"

namespace scenegen {

enum class Maneuver {
    lane_keeping,
    pedestrian_crossing,
    following,
    overtaking,
    left_turn_intersection
};

enum class Road { straight_two_lane, intersection };

enum class Role { ego, lead_vehicle, oncoming_vehicle, pedestrian, obstacle };

inline std::string to_string(Maneuver m) {
    switch (m) {
        case Maneuver::lane_keeping: return "lane_keeping";
        case Maneuver::pedestrian_crossing: return "pedestrian_crossing";
        case Maneuver::following: return "following";
        case Maneuver::overtaking: return "overtaking";
        case Maneuver::left_turn_intersection: return "left_turn_intersection";
    }
    return "?";
}

inline std::string to_string(Road r) {
    return r == Road::straight_two_lane ? "straight_two_lane" : "intersection";
}

inline std::string to_string(Role r) {
    switch (r) {
        case Role::ego: return "ego";
        case Role::lead_vehicle: return "lead_vehicle";
        case Role::oncoming_vehicle: return "oncoming_vehicle";
        case Role::pedestrian: return "pedestrian";
        case Role::obstacle: return "obstacle";
    }
    return "?";
}

/// Highest abstraction level: a maneuver, the actors it involves, and the
/// road type, with no parameters bound.
struct FunctionalScenario {
    std::string id;
    Maneuver maneuver = Maneuver::lane_keeping;
    std::vector<std::pair<Role, bool>> roles;  // (role, required)
    Road road = Road::straight_two_lane;

    bool has_role(Role r) const {
        for (const auto& [role, req] : roles)
            if (role == r) return true;
        return false;
    }

    void validate() const {
        std::size_t egos = 0;
        for (const auto& [role, req] : roles)
            if (role == Role::ego) ++egos;
        if (egos != 1) throw InvalidInput("scenario '" + id + "' must have exactly one ego");
        if (maneuver == Maneuver::left_turn_intersection && road != Road::intersection)
            throw InvalidInput("left_turn_intersection requires an intersection road");
    }
};

enum class TriggerKind { gap_below, time_elapsed, ego_in_zone };

struct Trigger {
    TriggerKind kind = TriggerKind::time_elapsed;
    double threshold = 1.0;  // m for gap_below/ego_in_zone, s for time_elapsed
};

/// A scripted hazardous behavior with its contract precondition.
struct RiskAction {
    Role actor = Role::lead_vehicle;
    std::string action;  // actor_action state name
    Trigger trigger;
    std::vector<Role> required_roles;
    std::optional<Road> required_road;
    bool baseline = false;  // the no-action reference entry

    void validate() const {
        if (!baseline && action == "none") throw InvalidInput("risk action cannot be 'none'");
        if (trigger.threshold <= 0 && !baseline)
            throw InvalidInput("trigger threshold must be positive");
    }
};

struct ParamRange {
    double min = 0, max = 0;
};

/// Intermediate level: parameter ranges plus a bound static environment.
struct LogicalScenario {
    std::string functional_id;
    Maneuver maneuver = Maneuver::lane_keeping;
    Road road = Road::straight_two_lane;
    std::vector<std::pair<Role, bool>> roles;
    std::map<std::string, ParamRange> ranges;
    StaticCombination environment;
    std::optional<RiskAction> action;

    void validate() const {
        if (ranges.empty()) throw InvalidInput("logical scenario has no parameter ranges");
        for (const auto& [name, r] : ranges)
            if (r.min > r.max) throw InvalidInput("range '" + name + "' has min > max");
    }
};

struct ActorPlacement {
    Role role = Role::ego;
    double x = 0, y = 0;       // m
    double heading = 0;        // rad
    double speed = 0;          // m/s
    double length = 4.6, width = 1.8;
};

/// Fully bound, directly executable instance.
struct ConcreteScenario {
    std::string id;
    Maneuver maneuver = Maneuver::lane_keeping;
    Road road = Road::straight_two_lane;
    std::vector<ActorPlacement> actors;
    std::map<std::string, double> params;
    StaticCombination environment;
    std::optional<RiskAction> action;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline Maneuver parse_maneuver(const std::string& s) {
    for (auto m : {Maneuver::lane_keeping, Maneuver::pedestrian_crossing, Maneuver::following,
                   Maneuver::overtaking, Maneuver::left_turn_intersection})
        if (to_string(m) == s) return m;
    throw InvalidInput("unknown maneuver '" + s + "'");
}

inline Road parse_road(const std::string& s) {
    for (auto r : {Road::straight_two_lane, Road::intersection})
        if (to_string(r) == s) return r;
    throw InvalidInput("unknown road '" + s + "'");
}

inline Role parse_role(const std::string& s) {
    for (auto r : {Role::ego, Role::lead_vehicle, Role::oncoming_vehicle, Role::pedestrian,
                   Role::obstacle})
        if (to_string(r) == s) return r;
    throw InvalidInput("unknown role '" + s + "'");
}

}  // namespace detail

inline FunctionalScenario functional_from_json(const nlohmann::json& j) {
    FunctionalScenario s;
    s.id = j.at("id").get<std::string>();
    s.maneuver = detail::parse_maneuver(j.at("maneuver").get<std::string>());
    s.road = detail::parse_road(j.at("road").get<std::string>());
    for (const auto& r : j.at("roles"))
        s.roles.emplace_back(detail::parse_role(r.at("role").get<std::string>()),
                             r.value("required", true));
    s.validate();
    return s;
}

inline nlohmann::json functional_to_json(const FunctionalScenario& s) {
    nlohmann::json roles = nlohmann::json::array();
    for (const auto& [role, req] : s.roles)
        roles.push_back({{"role", to_string(role)}, {"required", req}});
    return {{"id", s.id},
            {"maneuver", to_string(s.maneuver)},
            {"road", to_string(s.road)},
            {"roles", roles}};
}

inline FunctionalScenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open scenario file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("scenario file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return functional_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("scenario file '" + path + "' malformed: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Contract preconditions (Alg. 1 lines 4 and 8)

/// A static combination is admissible when it does not contradict environment
/// assignments the scenario has already fixed.
inline bool precond(const LogicalScenario& scenario, const StaticCombination& combo) {
    for (const auto& [var, state] : combo.assignments) {
        auto it = scenario.environment.assignments.find(var);
        if (it != scenario.environment.assignments.end() && it->second != state) return false;
    }
    return true;
}

inline bool precond(const FunctionalScenario&, const StaticCombination&) {
    return true;  // a functional scenario fixes no environment yet
}

/// A risk action is admissible when the roles and road features it needs are
/// present.
template <typename Scenario>
inline bool precond_action(const Scenario& scenario, const RiskAction& action) {
    for (auto r : action.required_roles) {
        bool found = false;
        for (const auto& [role, req] : scenario.roles)
            if (role == r) found = true;
        if (!found) return false;
    }
    if (action.required_road && *action.required_road != scenario.road) return false;
    return true;
}

inline bool precond(const FunctionalScenario& s, const RiskAction& a) {
    return precond_action(s, a);
}
inline bool precond(const LogicalScenario& s, const RiskAction& a) {
    return precond_action(s, a);
}

// ---------------------------------------------------------------------------
// Lowering

/// Default parameter ranges per maneuver; thresholds are filled from the
/// attached action's trigger.
inline LogicalScenario make_logical(const FunctionalScenario& fs, const StaticCombination& combo,
                                    const std::optional<RiskAction>& action) {
    LogicalScenario ls;
    ls.functional_id = fs.id;
    ls.maneuver = fs.maneuver;
    ls.road = fs.road;
    ls.roles = fs.roles;
    ls.environment = combo;
    ls.action = action;

    ls.ranges["ego_speed"] = {9.0, 14.0};
    if (fs.has_role(Role::lead_vehicle)) {
        ls.ranges["lead_speed"] = {7.0, 11.0};
        ls.ranges["gap"] = {15.0, 30.0};
    }
    if (fs.has_role(Role::oncoming_vehicle)) {
        ls.ranges["oncoming_speed"] = {8.0, 12.0};
        // at an intersection the oncoming car needs braking room before the
        // stop line
        ls.ranges["oncoming_distance"] =
            fs.road == Road::intersection ? ParamRange{85.0, 115.0} : ParamRange{50.0, 80.0};
    }
    if (fs.has_role(Role::pedestrian)) ls.ranges["pedestrian_distance"] = {25.0, 45.0};
    if (fs.has_role(Role::obstacle)) ls.ranges["obstacle_distance"] = {40.0, 70.0};
    if (action && !action->baseline) {
        double t = action->trigger.threshold;
        ls.ranges["trigger_threshold"] = {t * 0.8, t * 1.2};
    }
    ls.validate();
    return ls;
}

/// Draw n concrete instances with parameters uniform over the logical
/// ranges. Deterministic per seed; initial placements are collision-free.
inline std::vector<ConcreteScenario> concretize(const LogicalScenario& logical, std::size_t n,
                                                std::uint64_t seed) {
    if (n < 1) throw InvalidInput("concretize requires n >= 1");
    logical.validate();

    std::vector<ConcreteScenario> out;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        ConcreteScenario cs;
        cs.id = logical.functional_id + "#" + std::to_string(i);
        cs.maneuver = logical.maneuver;
        cs.road = logical.road;
        cs.environment = logical.environment;
        cs.action = logical.action;
        for (const auto& [name, r] : logical.ranges) {
            std::uniform_real_distribution<double> u(r.min, r.max);
            cs.params[name] = r.min == r.max ? r.min : u(rng);
        }

        const double lane_w = 3.5;
        auto p = [&](const std::string& k, double dflt) {
            auto it = cs.params.find(k);
            return it == cs.params.end() ? dflt : it->second;
        };

        for (const auto& [role, required] : logical.roles) {
            ActorPlacement a;
            a.role = role;
            switch (role) {
                case Role::ego:
                    a.x = 0;
                    a.y = 0;
                    a.speed = p("ego_speed", 10.0);
                    break;
                case Role::lead_vehicle:
                    a.x = p("gap", 20.0) + a.length;
                    a.y = 0;
                    a.speed = p("lead_speed", 8.0);
                    break;
                case Role::oncoming_vehicle:
                    a.x = p("oncoming_distance", 60.0);
                    a.y = lane_w;
                    a.heading = 3.14159265358979;
                    a.speed = p("oncoming_speed", 10.0);
                    break;
                case Role::pedestrian:
                    a.x = p("pedestrian_distance", 30.0);
                    a.y = -lane_w;  // kerbside, ready to cross
                    a.length = 0.6;
                    a.width = 0.6;
                    a.speed = 0;
                    break;
                case Role::obstacle:
                    a.x = p("obstacle_distance", 50.0);
                    a.y = 0;
                    a.length = 2.0;
                    a.width = 1.8;
                    a.speed = 0;
                    break;
            }
            cs.actors.push_back(a);
        }

        // axis-aligned overlap check at t = 0
        for (std::size_t u = 0; u < cs.actors.size(); ++u)
            for (std::size_t v = u + 1; v < cs.actors.size(); ++v) {
                const auto& a = cs.actors[u];
                const auto& b = cs.actors[v];
                if (std::abs(a.x - b.x) * 2 < a.length + b.length &&
                    std::abs(a.y - b.y) * 2 < a.width + b.width)
                    throw InvalidInput("ranges force overlapping initial placements");
            }
        out.push_back(std::move(cs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shipped risky-action catalog

inline std::vector<RiskAction> default_action_catalog() {
    std::vector<RiskAction> actions;
    actions.push_back({Role::lead_vehicle, "sudden_brake", {TriggerKind::gap_below, 18.0},
                       {Role::lead_vehicle}, std::nullopt, false});
    actions.push_back({Role::lead_vehicle, "lane_change", {TriggerKind::gap_below, 15.0},
                       {Role::lead_vehicle, Role::obstacle}, std::nullopt, false});
    actions.push_back({Role::pedestrian, "pedestrian_dart", {TriggerKind::gap_below, 16.0},
                       {Role::pedestrian}, std::nullopt, false});
    actions.push_back({Role::oncoming_vehicle, "run_red_light", {TriggerKind::time_elapsed, 2.0},
                       {Role::oncoming_vehicle}, Road::intersection, false});
    actions.push_back({Role::ego, "none", {TriggerKind::time_elapsed, 1.0}, {}, std::nullopt, true});
    return actions;
}

/// The five seed functional scenarios.
inline std::vector<FunctionalScenario> default_seed_scenarios() {
    std::vector<FunctionalScenario> seeds;
    seeds.push_back({"lane_keeping", Maneuver::lane_keeping, {{Role::ego, true}},
                     Road::straight_two_lane});
    seeds.push_back({"pedestrian_crossing", Maneuver::pedestrian_crossing,
                     {{Role::ego, true}, {Role::pedestrian, true}}, Road::straight_two_lane});
    seeds.push_back({"following", Maneuver::following,
                     {{Role::ego, true}, {Role::lead_vehicle, true}, {Role::obstacle, false}},
                     Road::straight_two_lane});
    seeds.push_back({"overtaking", Maneuver::overtaking,
                     {{Role::ego, true}, {Role::lead_vehicle, true}, {Role::oncoming_vehicle, false}},
                     Road::straight_two_lane});
    seeds.push_back({"left_turn_intersection", Maneuver::left_turn_intersection,
                     {{Role::ego, true}, {Role::oncoming_vehicle, true}, {Role::pedestrian, false}},
                     Road::intersection});
    for (const auto& s : seeds) s.validate();
    return seeds;
}

}  // namespace scenegen

#endif
