#ifndef SCENEGEN_DEFAULTS_HPP
#define SCENEGEN_DEFAULTS_HPP

#include <string>
#include <vector>

#include "scenegen/bayesnet.hpp"
#include "scenegen/patterns.hpp"
#include "scenegen/schema.hpp"

namespace scenegen {

/// Canonical accident-record schema: the five static environment factors plus
/// road topology, the dynamic actor action, and the accident outcome.
inline VariableSchema canonical_schema() {
    return VariableSchema({
        {"weather", {"clear", "rain", "fog", "snow", "wind"}},
        {"lighting", {"daylight", "dusk_dawn", "dark_lit", "dark_unlit"}},
        {"surface_condition", {"dry", "wet", "flooded", "icy", "debris"}},
        {"road_damage", {"none", "worn_markings", "potholes", "construction"}},
        {"obstacle", {"none", "static_object", "construction_zone"}},
        {"junction", {"none", "intersection"}},
        {"actor_action", {"none", "sudden_brake", "lane_change", "pedestrian_dart", "run_red_light"}},
        {"severity", {"property", "injury", "fatal"}},
    });
}

inline const std::vector<std::string>& static_factor_names() {
    static const std::vector<std::string> names = {"weather", "lighting", "surface_condition",
                                                   "road_damage", "obstacle"};
    return names;
}

/// The six shipped static risk combination patterns, mapped onto the
/// canonical schema.
inline PatternCatalog default_pattern_catalog() {
    auto schema = canonical_schema();
    auto s = [&](const std::string& var, const std::string& state) {
        return static_cast<int>(schema.state_index(schema.index_of(var), state));
    };
    PatternCatalog cat;
    auto add = [&](std::string label, std::map<std::string, int> assignments, double support) {
        cat.patterns.push_back({StaticCombination{std::move(assignments), std::move(label)}, support});
    };
    // Supports are nominal frequencies used for catalog ordering only.
    add("Heavy Rain + Flooded Road",
        {{"weather", s("weather", "rain")}, {"surface_condition", s("surface_condition", "flooded")}},
        0.18);
    add("Night without Streetlights", {{"lighting", s("lighting", "dark_unlit")}}, 0.16);
    add("Dense Fog + Construction Area",
        {{"weather", s("weather", "fog")}, {"obstacle", s("obstacle", "construction_zone")}}, 0.12);
    add("Strong Wind + Loose Dry Surface",
        {{"weather", s("weather", "wind")}, {"surface_condition", s("surface_condition", "debris")}},
        0.10);
    add("Setting Sun + Slippery Roads",
        {{"lighting", s("lighting", "dusk_dawn")}, {"surface_condition", s("surface_condition", "wet")}},
        0.08);
    add("Sunset + Worn Road Markings",
        {{"lighting", s("lighting", "dusk_dawn")}, {"road_damage", s("road_damage", "worn_markings")}},
        0.06);
    return cat;
}

/// Hand-built reference net over the canonical schema. Structure:
/// weather -> surface_condition, weather -> lighting is NOT present (lighting
/// is a root), and severity depends on surface, lighting, obstacle and the
/// actor action. CPTs are generated from an additive risk score so that the
/// high-risk static patterns produce injury/fatal posteriors well above the
/// default deduce threshold.
inline CausalBayesNet default_net() {
    auto schema = canonical_schema();
    Dag dag(
        {"weather", "lighting", "surface_condition", "road_damage", "obstacle", "junction",
         "actor_action", "severity"});
    std::size_t weather = 0, lighting = 1, surface = 2, damage = 3, obstacle = 4, junction = 5,
                action = 6, severity = 7;
    dag.add_edge(weather, surface);
    dag.add_edge(weather, severity);
    dag.add_edge(lighting, severity);
    dag.add_edge(surface, severity);
    dag.add_edge(damage, severity);
    dag.add_edge(action, severity);

    std::vector<Cpt> cpts;

    cpts.push_back({weather, {}, {{0.55, 0.22, 0.09, 0.06, 0.08}}});
    cpts.push_back({lighting, {}, {{0.52, 0.14, 0.20, 0.14}}});
    // surface | weather: clear, rain, fog, snow, wind rows
    cpts.push_back({surface,
                    {weather},
                    {
                        {0.86, 0.06, 0.01, 0.02, 0.05},  // clear
                        {0.08, 0.62, 0.24, 0.02, 0.04},  // rain
                        {0.40, 0.45, 0.06, 0.05, 0.04},  // fog
                        {0.10, 0.25, 0.05, 0.55, 0.05},  // snow
                        {0.55, 0.08, 0.02, 0.05, 0.30},  // wind
                    }});
    cpts.push_back({damage, {}, {{0.70, 0.12, 0.10, 0.08}}});
    cpts.push_back({obstacle, {}, {{0.78, 0.12, 0.10}}});
    cpts.push_back({junction, {}, {{0.70, 0.30}}});
    cpts.push_back({action, {}, {{0.40, 0.20, 0.15, 0.15, 0.10}}});

    // severity | weather, lighting, surface, road_damage, action — additive
    // risk score with pairwise synergies for the known hazardous
    // co-occurrences, mapped to a (property, injury, fatal) distribution.
    Cpt sev;
    sev.child = severity;
    sev.parents = {weather, lighting, surface, damage, action};
    const double w_weather[] = {0.00, 0.05, 0.14, 0.04, 0.04};
    const double w_lighting[] = {0.00, 0.04, 0.03, 0.16};
    const double w_surface[] = {0.00, 0.05, 0.08, 0.10, 0.05};
    const double w_damage[] = {0.00, 0.03, 0.03, 0.04};
    const double w_action[] = {0.00, 0.12, 0.10, 0.13, 0.12};
    for (int w = 0; w < 5; ++w)
        for (int l = 0; l < 4; ++l)
            for (int s = 0; s < 5; ++s)
                for (int d = 0; d < 4; ++d)
                    for (int a = 0; a < 5; ++a) {
                        double risk = 0.02 + w_weather[w] + w_lighting[l] + w_surface[s] +
                                      w_damage[d] + w_action[a];
                        if (w == 1 && s == 2) risk += 0.17;  // rain on a flooded road
                        if (w == 4 && s == 4) risk += 0.20;  // crosswind over loose debris
                        if (l == 1 && s == 1) risk += 0.17;  // low sun on a wet surface
                        if (l == 1 && d == 1) risk += 0.16;  // low sun with worn markings
                        risk = std::min(0.95, std::max(0.02, risk));
                        double fatal = risk * risk * 0.35;
                        double injury = risk - fatal;
                        sev.table.push_back({1.0 - risk, injury, fatal});
                    }
    cpts.push_back(std::move(sev));

    return CausalBayesNet(std::move(dag), std::move(schema), std::move(cpts));
}

}  // namespace scenegen

#endif
