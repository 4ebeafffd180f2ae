#ifndef SCENEGEN_JSON_IO_HPP
#define SCENEGEN_JSON_IO_HPP

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenegen/bayesnet.hpp"
#include "scenegen/discovery.hpp"
#include "scenegen/metrics.hpp"
#include "scenegen/riskgen.hpp"
#include "scenegen/scenario.hpp"
#include "scenegen/validation.hpp"

namespace scenegen {

// ---------------------------------------------------------------------------
// File helpers

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Schema / net / constraints

inline nlohmann::json schema_to_json(const VariableSchema& schema) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : schema.variables())
        vars.push_back({{"name", v.name}, {"states", v.states}});
    return vars;
}

inline VariableSchema schema_from_json(const nlohmann::json& j) {
    std::vector<VariableSchema::Variable> vars;
    for (const auto& v : j)
        vars.push_back({v.at("name").get<std::string>(),
                        v.at("states").get<std::vector<std::string>>()});
    return VariableSchema(std::move(vars));
}

/// Net layout: schema, edge list by name, and one CPT per node with rows in
/// parent-configuration order (last parent varying fastest).
inline nlohmann::json net_to_json(const CausalBayesNet& net) {
    const auto& schema = net.schema();
    nlohmann::json edges = nlohmann::json::array();
    for (auto [u, v] : net.dag().edges())
        edges.push_back({net.dag().name(u), net.dag().name(v)});
    nlohmann::json cpts = nlohmann::json::array();
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& c = net.cpt(i);
        nlohmann::json parents = nlohmann::json::array();
        for (auto p : c.parents) parents.push_back(schema.var(p).name);
        cpts.push_back({{"child", schema.var(c.child).name},
                        {"parents", parents},
                        {"table", c.table}});
    }
    return {{"schema", schema_to_json(schema)}, {"edges", edges}, {"cpts", cpts}};
}

inline CausalBayesNet net_from_json(const nlohmann::json& j) {
    auto schema = schema_from_json(j.at("schema"));
    std::vector<std::string> names;
    for (const auto& v : schema.variables()) names.push_back(v.name);
    Dag dag(names);
    for (const auto& e : j.at("edges"))
        dag.add_edge(dag.index_of(e.at(0).get<std::string>()),
                     dag.index_of(e.at(1).get<std::string>()));
    std::vector<Cpt> cpts;
    for (const auto& cj : j.at("cpts")) {
        Cpt c;
        c.child = schema.index_of(cj.at("child").get<std::string>());
        for (const auto& p : cj.at("parents"))
            c.parents.push_back(schema.index_of(p.get<std::string>()));
        c.table = cj.at("table").get<std::vector<std::vector<double>>>();
        cpts.push_back(std::move(c));
    }
    return CausalBayesNet(std::move(dag), std::move(schema), std::move(cpts));
}

inline KnowledgeConstraints constraints_from_json(const nlohmann::json& j) {
    KnowledgeConstraints c;
    for (const auto& e : j.value("required_edges", nlohmann::json::array()))
        c.required_edges.insert({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    for (const auto& e : j.value("forbidden_edges", nlohmann::json::array()))
        c.forbidden_edges.insert({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    for (const auto& t : j.value("tiers", nlohmann::json::array()))
        c.tiers.push_back(t.get<std::vector<std::string>>());
    return c;
}

inline std::string dag_to_dot(const Dag& dag) {
    std::ostringstream out;
    out << "digraph G {\n";
    for (const auto& n : dag.nodes()) out << "  \"" << n << "\";\n";
    for (auto [u, v] : dag.edges())
        out << "  \"" << dag.name(u) << "\" -> \"" << dag.name(v) << "\";\n";
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Scenarios

inline nlohmann::json trigger_to_json(const Trigger& t) {
    std::string kind = t.kind == TriggerKind::gap_below     ? "gap_below"
                       : t.kind == TriggerKind::time_elapsed ? "time_elapsed"
                                                             : "ego_in_zone";
    return {{"kind", kind}, {"threshold", t.threshold}};
}

inline Trigger trigger_from_json(const nlohmann::json& j) {
    Trigger t;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "gap_below") t.kind = TriggerKind::gap_below;
    else if (kind == "time_elapsed") t.kind = TriggerKind::time_elapsed;
    else if (kind == "ego_in_zone") t.kind = TriggerKind::ego_in_zone;
    else throw InvalidInput("unknown trigger kind '" + kind + "'");
    t.threshold = j.at("threshold").get<double>();
    return t;
}

inline nlohmann::json action_to_json(const RiskAction& a) {
    nlohmann::json roles = nlohmann::json::array();
    for (auto r : a.required_roles) roles.push_back(to_string(r));
    nlohmann::json j = {{"actor", to_string(a.actor)},
                        {"action", a.action},
                        {"trigger", trigger_to_json(a.trigger)},
                        {"required_roles", roles},
                        {"baseline", a.baseline}};
    if (a.required_road) j["required_road"] = to_string(*a.required_road);
    return j;
}

inline RiskAction action_from_json(const nlohmann::json& j) {
    RiskAction a;
    a.actor = detail::parse_role(j.at("actor").get<std::string>());
    a.action = j.at("action").get<std::string>();
    a.trigger = trigger_from_json(j.at("trigger"));
    for (const auto& r : j.at("required_roles"))
        a.required_roles.push_back(detail::parse_role(r.get<std::string>()));
    if (j.contains("required_road"))
        a.required_road = detail::parse_road(j.at("required_road").get<std::string>());
    a.baseline = j.value("baseline", false);
    return a;
}

inline nlohmann::json combination_to_json(const StaticCombination& c) {
    return {{"label", c.label}, {"assignments", c.assignments}};
}

inline StaticCombination combination_from_json(const nlohmann::json& j) {
    StaticCombination c;
    c.label = j.value("label", "");
    c.assignments = j.at("assignments").get<std::map<std::string, int>>();
    return c;
}

inline nlohmann::json logical_to_json(const LogicalScenario& s) {
    nlohmann::json roles = nlohmann::json::array();
    for (const auto& [role, req] : s.roles)
        roles.push_back({{"role", to_string(role)}, {"required", req}});
    nlohmann::json ranges = nlohmann::json::object();
    for (const auto& [name, r] : s.ranges) ranges[name] = {r.min, r.max};
    nlohmann::json j = {{"functional_id", s.functional_id},
                        {"maneuver", to_string(s.maneuver)},
                        {"road", to_string(s.road)},
                        {"roles", roles},
                        {"ranges", ranges},
                        {"environment", combination_to_json(s.environment)}};
    if (s.action) j["action"] = action_to_json(*s.action);
    return j;
}

inline LogicalScenario logical_from_json(const nlohmann::json& j) {
    LogicalScenario s;
    s.functional_id = j.at("functional_id").get<std::string>();
    s.maneuver = detail::parse_maneuver(j.at("maneuver").get<std::string>());
    s.road = detail::parse_road(j.at("road").get<std::string>());
    for (const auto& r : j.at("roles"))
        s.roles.emplace_back(detail::parse_role(r.at("role").get<std::string>()),
                             r.value("required", true));
    for (const auto& [name, r] : j.at("ranges").items())
        s.ranges[name] = {r.at(0).get<double>(), r.at(1).get<double>()};
    s.environment = combination_from_json(j.at("environment"));
    if (j.contains("action")) s.action = action_from_json(j.at("action"));
    s.validate();
    return s;
}

inline nlohmann::json risk_scenario_to_json(const RiskScenario& rs) {
    return {{"scenario", logical_to_json(rs.scenario)},
            {"severity", rs.severity},
            {"exposure", rs.exposure},
            {"risk_priority", rs.risk_priority},
            {"provenance",
             {{"seed_id", rs.provenance.seed_id},
              {"pattern", rs.provenance.pattern_label},
              {"action", rs.provenance.action}}}};
}

inline RiskScenario risk_scenario_from_json(const nlohmann::json& j) {
    RiskScenario rs;
    rs.scenario = logical_from_json(j.at("scenario"));
    rs.severity = j.at("severity").get<double>();
    rs.exposure = j.at("exposure").get<double>();
    rs.risk_priority = j.at("risk_priority").get<double>();
    const auto& p = j.at("provenance");
    rs.provenance = {p.at("seed_id").get<std::string>(), p.at("pattern").get<std::string>(),
                     p.at("action").get<std::string>()};
    return rs;
}

inline nlohmann::json generation_report_to_json(const GenerationReport& r) {
    return {{"iterations", r.iterations},
            {"scenarios_emitted", r.scenarios_emitted},
            {"yield_per_iteration",
             r.iterations ? static_cast<double>(r.scenarios_emitted) /
                                static_cast<double>(r.iterations)
                          : 0.0},
            {"per_seed", r.per_seed},
            {"phase_seconds", r.phase_seconds}};
}

/// One summary row per scored scenario: provenance plus S, E and RP.
inline std::string risk_scenarios_to_csv(const std::vector<RiskScenario>& scenarios) {
    std::ostringstream out;
    out << "seed,pattern,action,severity,exposure,risk_priority\n";
    out << std::setprecision(12);
    for (const auto& rs : scenarios)
        out << rs.provenance.seed_id << ",\"" << rs.provenance.pattern_label << "\","
            << rs.provenance.action << "," << rs.severity << "," << rs.exposure << ","
            << rs.risk_priority << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Validation

inline nlohmann::json refutation_to_json(const RefutationReport& r) {
    std::string method = r.method == RefuterMethod::RCC   ? "random_common_cause"
                         : r.method == RefuterMethod::PTR ? "placebo_treatment"
                                                          : "data_subset";
    nlohmann::json j = {{"method", method},
                        {"estimated_effect", r.estimated_effect},
                        {"new_effect", r.new_effect},
                        {"high_confidence", r.high_confidence}};
    if (r.p_value) j["p_value"] = *r.p_value;
    return j;
}

// ---------------------------------------------------------------------------
// Simulation logs and metrics

/// One CSV row per actor per step.
inline void write_sim_log_csv(const std::string& path, const SimLog& log) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    out << "t,actor,role,x,y,heading,speed,throttle,brake,steer,ego_route_offset\n";
    out << std::setprecision(9);
    for (const auto& s : log.steps) {
        for (std::size_t i = 0; i < s.states.size(); ++i) {
            const auto& v = s.states[i];
            bool is_ego = i == log.ego;
            out << s.t << "," << i << "," << to_string(log.roles[i]) << "," << v.x << "," << v.y
                << "," << v.heading << "," << v.speed << "," << (is_ego ? s.throttle : 0.0) << ","
                << (is_ego ? s.brake : 0.0) << "," << (is_ego ? s.steer : 0.0) << ","
                << (is_ego ? s.ego_route_offset : 0.0) << "\n";
        }
    }
}

inline nlohmann::json events_to_json(const SimLog& log) {
    auto type_name = [](EventType t) {
        switch (t) {
            case EventType::action_trigger: return "action_trigger";
            case EventType::collision: return "collision";
            case EventType::signal_violation: return "signal_violation";
            case EventType::route_complete: return "route_complete";
        }
        return "?";
    };
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : log.events)
        events.push_back({{"t", e.t}, {"type", type_name(e.type)}, {"actor", e.actor}});
    return events;
}

inline nlohmann::json metric_report_to_json(const MetricReport& r, const Verdict& v) {
    nlohmann::json j = {{"distance", r.distance},
                        {"duration", r.duration},
                        {"crash", r.crash},
                        {"mean_speed", r.mean_speed},
                        {"speed_sd", r.speed_sd},
                        {"lateral_sd", r.lateral_sd},
                        {"lat_accel_max", r.lat_accel_max},
                        {"traj_offset_mean", r.traj_offset_mean},
                        {"collision_count", r.collision_count},
                        {"sign_compliant", r.sign_compliant},
                        {"throttle_mean", r.throttle_mean},
                        {"throttle_rate_max", r.throttle_rate_max},
                        {"lane_change_count", r.lane_change_count},
                        {"lane_change_mean_duration", r.lane_change_mean_duration},
                        {"steer_sd", r.steer_sd},
                        {"steering_reversal_rate", r.steering_reversal_rate},
                        {"steer_rate_max", r.steer_rate_max},
                        {"braking_count", r.braking_count},
                        {"risk_found", v.risk_found},
                        {"risk_reasons", v.reasons}};
    if (r.min_ttc) j["min_ttc"] = *r.min_ttc;
    if (r.reaction_time) j["reaction_time"] = *r.reaction_time;
    return j;
}

inline std::string metric_csv_header() {
    return "scenario,crash,min_ttc,sign_compliant,mean_speed,speed_sd,lateral_sd,"
           "lat_accel_max,steering_reversal_rate,lane_change_count,braking_count,"
           "reaction_time,risk_found,risk_reasons";
}

inline std::string metric_csv_row(const std::string& id, const MetricReport& r,
                                  const Verdict& v) {
    std::ostringstream out;
    out << std::setprecision(9);
    out << id << "," << (r.crash ? 1 : 0) << ",";
    if (r.min_ttc) out << *r.min_ttc;
    out << "," << (r.sign_compliant ? 1 : 0) << "," << r.mean_speed << "," << r.speed_sd << ","
        << r.lateral_sd << "," << r.lat_accel_max << "," << r.steering_reversal_rate << ","
        << r.lane_change_count << "," << r.braking_count << ",";
    if (r.reaction_time) out << *r.reaction_time;
    out << "," << (v.risk_found ? 1 : 0) << ",\"";
    for (std::size_t i = 0; i < v.reasons.size(); ++i)
        out << (i ? ";" : "") << v.reasons[i];
    out << "\"";
    return out.str();
}

}  // namespace scenegen

#endif
