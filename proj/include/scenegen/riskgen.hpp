#ifndef SCENEGEN_RISKGEN_HPP
#define SCENEGEN_RISKGEN_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scenegen/bayesnet.hpp"
#include "scenegen/defaults.hpp"
#include "scenegen/patterns.hpp"
#include "scenegen/scenario.hpp"

namespace scenegen {

struct Provenance {
    std::string seed_id;
    std::string pattern_label;
    std::string action;
};

/// A logical scenario with its attached action, scored for ranking.
struct RiskScenario {
    LogicalScenario scenario;
    double severity = 0;       // S >= 0
    double exposure = 0;       // E in [0, 1]
    double risk_priority = 0;  // RP = S * E
    Provenance provenance;
};

struct GenerationReport {
    std::size_t iterations = 0;         // (pattern, action) evaluations
    std::size_t scenarios_emitted = 0;  // <= iterations
    std::map<std::string, std::size_t> per_seed;
    std::map<std::string, double> phase_seconds;
};

struct DeducedAction {
    RiskAction action;
    double risk = 0;  // P(severity in {injury, fatal} | evidence, action)
};

constexpr double kDefaultDeduceThreshold = 0.35;

namespace detail {

inline void require_static_evidence(const CausalBayesNet& net, const Evidence& evidence) {
    const auto& allowed = static_factor_names();
    for (const auto& [var, state] : evidence) {
        if (std::find(allowed.begin(), allowed.end(), var) == allowed.end())
            throw InvalidInput("evidence variable '" + var + "' is not a static factor");
        std::size_t idx = net.schema().index_of(var);
        if (state < 0 || static_cast<std::size_t>(state) >= net.schema().var(idx).states.size())
            throw InvalidInput("evidence state out of range for '" + var + "'");
    }
}

inline double injury_or_fatal_posterior(const CausalBayesNet& net, Evidence evidence,
                                        const std::string& action_state) {
    const auto& schema = net.schema();
    std::size_t av = schema.index_of("actor_action");
    evidence["actor_action"] = static_cast<int>(schema.state_index(av, action_state));
    auto post = infer_posterior(net, "severity", evidence);
    std::size_t sv = schema.index_of("severity");
    return post[schema.state_index(sv, "injury")] + post[schema.state_index(sv, "fatal")];
}

}  // namespace detail

/// Alg. 1 line 6: rank the catalog actions by the injury-or-fatal posterior
/// under the given static evidence; keep those at or above the threshold.
/// Ties preserve catalog order.
inline std::vector<DeducedAction> deduce(const Evidence& evidence, const CausalBayesNet& net,
                                         const std::vector<RiskAction>& actions,
                                         double threshold) {
    detail::require_static_evidence(net, evidence);
    if (threshold < 0 || threshold > 1) throw InvalidInput("deduce threshold must be in [0,1]");
    std::vector<DeducedAction> out;
    for (const auto& a : actions) {
        double risk = detail::injury_or_fatal_posterior(net, evidence, a.action);
        if (risk >= threshold) out.push_back({a, risk});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const DeducedAction& a, const DeducedAction& b) { return a.risk > b.risk; });
    return out;
}

/// Severity value map over {property, injury, fatal}.
inline const std::vector<double>& severity_values() {
    static const std::vector<double> v = {1.0, 2.0, 3.0};
    return v;
}

/// Alg. 1 line 10: S = expected severity value given evidence and action;
/// E = probability of the static evidence alone.
inline std::pair<double, double> calc_se(const CausalBayesNet& net, const Evidence& evidence,
                                         const std::string& action_state) {
    detail::require_static_evidence(net, evidence);
    const auto& schema = net.schema();
    Evidence with_action = evidence;
    std::size_t av = schema.index_of("actor_action");
    with_action["actor_action"] = static_cast<int>(schema.state_index(av, action_state));
    auto post = infer_posterior(net, "severity", with_action);
    double s = 0;
    for (std::size_t k = 0; k < post.size(); ++k) s += severity_values()[k] * post[k];
    double e = evidence.empty() ? 1.0 : evidence_probability(net, evidence);
    return {s, e};
}

/// Alg. 1 line 11.
inline double calc_rp(double s, double e) {
    if (s < 0) throw InvalidInput("severity must be >= 0");
    if (e < 0 || e > 1) throw InvalidInput("exposure must be in [0,1]");
    return s * e;
}

namespace detail {

inline Evidence pattern_evidence(const StaticCombination& combo) {
    Evidence ev;
    for (const auto& [var, state] : combo.assignments) ev[var] = state;
    return ev;
}

inline bool risk_scenario_order(const RiskScenario& a, const RiskScenario& b) {
    if (a.risk_priority != b.risk_priority) return a.risk_priority > b.risk_priority;
    auto ka = std::tie(a.provenance.seed_id, a.provenance.pattern_label, a.provenance.action);
    auto kb = std::tie(b.provenance.seed_id, b.provenance.pattern_label, b.provenance.action);
    return ka < kb;
}

}  // namespace detail

/// Algorithm 1: for every seed scenario, apply each admissible static
/// pattern, deduce the high-risk actions from the net, and emit one scored
/// logical scenario per admissible (pattern, action) pair.
inline std::pair<std::vector<RiskScenario>, GenerationReport> generate(
    const std::vector<FunctionalScenario>& seeds, const PatternCatalog& patterns,
    const std::vector<RiskAction>& actions, const CausalBayesNet& net,
    double threshold = kDefaultDeduceThreshold) {
    using clock = std::chrono::steady_clock;
    std::vector<RiskScenario> out;
    GenerationReport report;

    for (const auto& seed : seeds) {
        seed.validate();
        report.per_seed[seed.id] = 0;
        for (const auto& entry : patterns.patterns) {
            if (!precond(seed, entry.pattern)) continue;  // line 4
            Evidence ev = detail::pattern_evidence(entry.pattern);  // line 5

            auto t0 = clock::now();
            auto ranked = deduce(ev, net, actions, threshold);  // line 6
            report.phase_seconds["deduce"] +=
                std::chrono::duration<double>(clock::now() - t0).count();
            report.iterations += actions.size();

            auto t1 = clock::now();
            for (const auto& da : ranked) {  // lines 7-12
                if (!precond(seed, da.action)) continue;
                auto [s, e] = calc_se(net, ev, da.action.action);
                RiskScenario rs;
                rs.scenario = make_logical(seed, entry.pattern, da.action);
                rs.severity = s;
                rs.exposure = e;
                rs.risk_priority = calc_rp(s, e);
                rs.provenance = {seed.id, entry.pattern.label, da.action.action};
                out.push_back(std::move(rs));
                ++report.per_seed[seed.id];
                ++report.scenarios_emitted;
            }
            report.phase_seconds["score"] +=
                std::chrono::duration<double>(clock::now() - t1).count();
        }
    }
    std::sort(out.begin(), out.end(), detail::risk_scenario_order);
    return {std::move(out), std::move(report)};
}

/// Random baseline: every iteration draws one seed, one full static
/// assignment (uniform per factor), and one action. Only structural validity
/// (the action's role/road contract) is enforced; the deduce risk criterion
/// is applied post hoc so yields are comparable.
inline std::pair<std::vector<RiskScenario>, GenerationReport> random_baseline_generate(
    const std::vector<FunctionalScenario>& seeds, const CausalBayesNet& net,
    const std::vector<RiskAction>& actions, std::size_t budget, std::uint64_t rng_seed,
    double threshold = kDefaultDeduceThreshold) {
    if (budget < 1) throw InvalidInput("random baseline budget must be >= 1");
    if (seeds.empty() || actions.empty())
        throw InvalidInput("random baseline needs seeds and actions");
    const auto& schema = net.schema();
    std::mt19937_64 rng(rng_seed);
    std::vector<RiskScenario> out;
    GenerationReport report;
    for (const auto& seed : seeds) report.per_seed[seed.id] = 0;

    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    for (std::size_t it = 0; it < budget; ++it) {
        ++report.iterations;
        const auto& seed = seeds[rng() % seeds.size()];
        const auto& action = actions[rng() % actions.size()];

        StaticCombination combo;
        combo.label = "random";
        for (const auto& name : static_factor_names()) {
            std::size_t v = schema.index_of(name);
            combo.assignments[name] =
                static_cast<int>(rng() % schema.var(v).states.size());
        }

        if (!precond(seed, action)) continue;  // structurally invalid draw
        Evidence ev = detail::pattern_evidence(combo);
        double risk = detail::injury_or_fatal_posterior(net, ev, action.action);
        if (risk < threshold) continue;  // post-hoc risk criterion

        auto [s, e] = calc_se(net, ev, action.action);
        RiskScenario rs;
        rs.scenario = make_logical(seed, combo, action);
        rs.severity = s;
        rs.exposure = e;
        rs.risk_priority = calc_rp(s, e);
        rs.provenance = {seed.id, combo.label + "#" + std::to_string(it), action.action};
        out.push_back(std::move(rs));
        ++report.per_seed[seed.id];
        ++report.scenarios_emitted;
    }
    report.phase_seconds["sample"] = std::chrono::duration<double>(clock::now() - t0).count();
    std::sort(out.begin(), out.end(), detail::risk_scenario_order);
    return {std::move(out), std::move(report)};
}

}  // namespace scenegen

#endif
