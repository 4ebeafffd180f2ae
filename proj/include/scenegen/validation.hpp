#ifndef SCENEGEN_VALIDATION_HPP
#define SCENEGEN_VALIDATION_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scenegen/bayesnet.hpp"

namespace scenegen {

/// Treatment/baseline contrast on one variable.
struct Treatment {
    std::string variable;
    int treat_state = 1;
    int baseline_state = 0;
};

/// Outcome states are mapped to reals before taking expectations.
using ValueMap = std::vector<double>;  // indexed by outcome state

struct EffectEstimate {
    Treatment treatment;
    std::string outcome;
    double value = 0.0;
    std::vector<std::string> adjustment_set;
    std::size_t skipped_strata = 0;
};

enum class RefuterMethod { RCC, PTR, DSR };

struct RefutationReport {
    RefuterMethod method = RefuterMethod::RCC;
    double estimated_effect = 0.0;
    double new_effect = 0.0;
    std::optional<double> p_value;  // present for PTR and DSR only
    bool high_confidence = false;
};

namespace detail {

// Relative 10% band with an absolute 0.01 floor for near-zero originals.
inline bool within_confidence_band(double original, double deviation) {
    return std::abs(deviation) <= std::max(0.10 * std::abs(original), 0.01);
}

}  // namespace detail

/// ATE = E[Y | do(T=t)] - E[Y | do(T=t0)] by the adjustment formula with
/// Z = parents(T). Strata with zero probability are skipped and the stratum
/// weights renormalized.
inline EffectEstimate estimate_effect(const CausalBayesNet& net, const Treatment& treatment,
                                      const std::string& outcome, const ValueMap& value_map) {
    const auto& schema = net.schema();
    std::size_t t_idx = schema.index_of(treatment.variable);
    std::size_t y_idx = schema.index_of(outcome);
    if (t_idx == y_idx) throw InvalidInput("treatment equals outcome");
    if (schema.arity(t_idx) < 2) throw InvalidInput("treatment needs at least 2 states");
    if (value_map.size() != schema.arity(y_idx)) throw InvalidInput("value_map arity mismatch");

    EffectEstimate est;
    est.treatment = treatment;
    est.outcome = outcome;

    auto parents = net.dag().sorted_parents(t_idx);
    for (auto p : parents) est.adjustment_set.push_back(schema.var(p).name);

    // Outcome among the treatment's parents: conditioning on it pins the
    // contrast to zero, which is also the true interventional effect (the
    // outcome cannot be a descendant of the treatment).
    if (std::find(parents.begin(), parents.end(), y_idx) != parents.end()) {
        est.value = 0.0;
        return est;
    }

    // enumerate parent configurations
    std::size_t combos = 1;
    for (auto p : parents) combos *= schema.arity(p);

    double weighted = 0.0, weight_sum = 0.0;
    for (std::size_t c = 0; c < combos; ++c) {
        Evidence ez;
        std::size_t rem = c;
        for (std::size_t d = parents.size(); d-- > 0;) {
            ez[schema.var(parents[d]).name] = static_cast<int>(rem % schema.arity(parents[d]));
            rem /= schema.arity(parents[d]);
        }
        double pz = evidence_probability(net, ez);
        if (pz <= 0) {
            ++est.skipped_strata;
            continue;
        }
        double contrast = 0.0;
        bool usable = true;
        for (int arm = 0; arm < 2; ++arm) {
            auto ev = ez;
            ev[treatment.variable] = arm == 0 ? treatment.treat_state : treatment.baseline_state;
            try {
                auto post = infer_posterior(net, outcome, ev);
                double mean = 0;
                for (std::size_t y = 0; y < post.size(); ++y) mean += value_map[y] * post[y];
                contrast += (arm == 0 ? 1.0 : -1.0) * mean;
            } catch (const ZeroProbabilityEvidence&) {
                usable = false;
                break;
            }
        }
        if (!usable) {
            ++est.skipped_strata;
            continue;
        }
        weighted += pz * contrast;
        weight_sum += pz;
    }
    if (weight_sum <= 0) throw InvalidInput("no usable adjustment strata");
    est.value = weighted / weight_sum;
    return est;
}

namespace detail {

/// Empirical adjusted ATE on raw data columns. `extra` optionally appends a
/// synthetic covariate column to the adjustment set.
inline double empirical_ate(const Dataset& data, std::size_t t_idx, int t_state, int b_state,
                            std::size_t y_idx, const ValueMap& value_map,
                            const std::vector<std::size_t>& adjust_cols,
                            const std::vector<int>* treatment_override,
                            const std::vector<int>* extra) {
    const auto& schema = data.schema();
    std::map<std::vector<int>, std::array<std::array<double, 2>, 2>> strata;
    // strata[z] = {{count_t, sum_t}, {count_b, sum_b}}
    std::map<std::vector<int>, double> z_count;

    for (std::size_t row = 0; row < data.size(); ++row) {
        std::vector<int> z;
        for (auto c : adjust_cols) z.push_back(data.value(row, c));
        if (extra) z.push_back((*extra)[row]);
        z_count[z] += 1.0;
        int t = treatment_override ? (*treatment_override)[row] : data.value(row, t_idx);
        double y = value_map[static_cast<std::size_t>(data.value(row, y_idx))];
        if (t == t_state) {
            strata[z][0][0] += 1.0;
            strata[z][0][1] += y;
        } else if (t == b_state) {
            strata[z][1][0] += 1.0;
            strata[z][1][1] += y;
        }
    }

    double weighted = 0, weight_sum = 0;
    for (const auto& [z, cell] : strata) {
        if (cell[0][0] <= 0 || cell[1][0] <= 0) continue;  // stratum skipped
        double contrast = cell[0][1] / cell[0][0] - cell[1][1] / cell[1][0];
        double w = z_count.at(z);
        weighted += w * contrast;
        weight_sum += w;
    }
    if (weight_sum <= 0) throw InvalidInput("no usable strata in data");
    return weighted / weight_sum;
}

struct EstimationSetup {
    std::size_t t_idx, y_idx;
    int t_state, b_state;
    std::vector<std::size_t> adjust_cols;
    ValueMap values;
};

inline EstimationSetup make_setup(const CausalBayesNet& net, const Dataset& data,
                                  const Treatment& treatment, const std::string& outcome,
                                  const ValueMap& value_map) {
    const auto& schema = data.schema();
    EstimationSetup s;
    s.t_idx = schema.index_of(treatment.variable);
    s.y_idx = schema.index_of(outcome);
    s.t_state = treatment.treat_state;
    s.b_state = treatment.baseline_state;
    s.values = value_map;
    std::size_t t_node = net.schema().index_of(treatment.variable);
    for (auto p : net.dag().sorted_parents(t_node))
        s.adjust_cols.push_back(schema.index_of(net.schema().var(p).name));
    return s;
}

}  // namespace detail

/// Random Common Cause: append an independent uniform covariate to the data,
/// add it to the adjustment set, and re-estimate. A robust estimate barely
/// moves.
inline RefutationReport refute_random_common_cause(const CausalBayesNet& net, const Dataset& data,
                                                   const Treatment& treatment,
                                                   const std::string& outcome,
                                                   const ValueMap& value_map,
                                                   std::uint64_t seed) {
    auto s = detail::make_setup(net, data, treatment, outcome, value_map);
    RefutationReport rep;
    rep.method = RefuterMethod::RCC;
    rep.estimated_effect = detail::empirical_ate(data, s.t_idx, s.t_state, s.b_state, s.y_idx,
                                                 s.values, s.adjust_cols, nullptr, nullptr);

    std::mt19937_64 rng(seed);
    std::vector<int> covariate(data.size());
    for (auto& v : covariate) v = static_cast<int>(rng() % 2);
    rep.new_effect = detail::empirical_ate(data, s.t_idx, s.t_state, s.b_state, s.y_idx, s.values,
                                           s.adjust_cols, nullptr, &covariate);
    rep.high_confidence =
        detail::within_confidence_band(rep.estimated_effect, rep.new_effect - rep.estimated_effect);
    return rep;
}

/// Placebo Treatment: replace the treatment column with a permuted copy; the
/// re-estimated effect should collapse towards zero.
inline RefutationReport refute_placebo_treatment(const CausalBayesNet& net, const Dataset& data,
                                                 const Treatment& treatment,
                                                 const std::string& outcome,
                                                 const ValueMap& value_map, std::size_t n_placebos,
                                                 std::uint64_t seed) {
    if (n_placebos < 20) throw InvalidInput("n_placebos must be at least 20");
    auto s = detail::make_setup(net, data, treatment, outcome, value_map);
    RefutationReport rep;
    rep.method = RefuterMethod::PTR;
    rep.estimated_effect = detail::empirical_ate(data, s.t_idx, s.t_state, s.b_state, s.y_idx,
                                                 s.values, s.adjust_cols, nullptr, nullptr);

    std::vector<int> column(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) column[i] = data.value(i, s.t_idx);

    double sum = 0;
    std::size_t exceed = 0;
    for (std::size_t k = 0; k < n_placebos; ++k) {
        std::mt19937_64 rng(seed + k);  // independent per replication
        auto placebo = column;
        std::shuffle(placebo.begin(), placebo.end(), rng);
        double e = detail::empirical_ate(data, s.t_idx, s.t_state, s.b_state, s.y_idx, s.values,
                                         s.adjust_cols, &placebo, nullptr);
        sum += e;
        if (std::abs(e) >= std::abs(rep.estimated_effect)) ++exceed;
    }
    rep.new_effect = sum / static_cast<double>(n_placebos);
    rep.p_value = static_cast<double>(exceed) / static_cast<double>(n_placebos);
    rep.high_confidence = detail::within_confidence_band(rep.estimated_effect, rep.new_effect);
    return rep;
}

/// Data Subset: re-estimate on random subsets; a stable estimate stays close
/// to the full-data value.
inline RefutationReport refute_data_subset(const CausalBayesNet& net, const Dataset& data,
                                           const Treatment& treatment, const std::string& outcome,
                                           const ValueMap& value_map, double subset_fraction,
                                           std::size_t n_subsets, std::uint64_t seed) {
    if (subset_fraction <= 0.0 || subset_fraction >= 1.0)
        throw InvalidInput("subset_fraction must be in (0,1)");
    if (n_subsets < 20) throw InvalidInput("n_subsets must be at least 20");
    auto s = detail::make_setup(net, data, treatment, outcome, value_map);
    RefutationReport rep;
    rep.method = RefuterMethod::DSR;
    rep.estimated_effect = detail::empirical_ate(data, s.t_idx, s.t_state, s.b_state, s.y_idx,
                                                 s.values, s.adjust_cols, nullptr, nullptr);

    std::size_t m = static_cast<std::size_t>(subset_fraction * static_cast<double>(data.size()));
    if (m == 0) throw InvalidInput("subset too small to estimate on");

    std::vector<double> estimates;
    for (std::size_t k = 0; k < n_subsets; ++k) {
        std::mt19937_64 rng(seed + k);
        std::vector<std::size_t> idx(data.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        Dataset sub(data.schema());
        for (std::size_t i = 0; i < m; ++i) sub.add_row(data.rows()[idx[i]]);
        estimates.push_back(detail::empirical_ate(sub, s.t_idx, s.t_state, s.b_state, s.y_idx,
                                                  s.values, s.adjust_cols, nullptr, nullptr));
    }
    double sum = 0;
    for (double e : estimates) sum += e;
    rep.new_effect = sum / static_cast<double>(n_subsets);

    double mean_dev = 0;
    for (double e : estimates) mean_dev += std::abs(e - rep.estimated_effect);
    mean_dev /= static_cast<double>(n_subsets);
    std::size_t beyond = 0;
    for (double e : estimates)
        if (std::abs(e - rep.estimated_effect) > mean_dev) ++beyond;
    rep.p_value = static_cast<double>(beyond) / static_cast<double>(n_subsets);
    rep.high_confidence =
        detail::within_confidence_band(rep.estimated_effect, rep.new_effect - rep.estimated_effect);
    return rep;
}

}  // namespace scenegen

#endif
