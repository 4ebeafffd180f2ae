#ifndef SCENEGEN_DISCOVERY_HPP
#define SCENEGEN_DISCOVERY_HPP

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "scenegen/bayesnet.hpp"
#include "scenegen/dag.hpp"
#include "scenegen/schema.hpp"

namespace scenegen {

using EdgeSet = std::set<std::pair<std::string, std::string>>;

/// Expert knowledge for structure search: edges that must appear, edges that
/// may not, and an optional tier ordering (no edge from a later tier to an
/// earlier one).
struct KnowledgeConstraints {
    EdgeSet required_edges;
    EdgeSet forbidden_edges;
    std::vector<std::vector<std::string>> tiers;
};

enum class CiMethod { g_square, chi_square, mutual_information };

struct DiscoveryParams {
    double ess = 10.0;
    std::size_t max_parents = 4;
    std::size_t max_iterations = 200;
    double ci_alpha = 0.05;
    CiMethod ci_method = CiMethod::g_square;
    int restarts = 5;
};

struct CiResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool independent = true;
};

// ---------------------------------------------------------------------------
// BDeu score

namespace detail {

inline double bdeu_family_score(const Dataset& data, std::size_t child,
                                const std::vector<std::size_t>& parents, double ess) {
    const auto& schema = data.schema();
    std::size_t r = schema.arity(child);
    std::size_t q = 1;
    for (auto p : parents) q *= schema.arity(p);

    std::map<std::size_t, std::vector<double>> counts;  // parent config -> child counts
    for (std::size_t row = 0; row < data.size(); ++row) {
        std::size_t j = 0;
        for (auto p : parents)
            j = j * schema.arity(p) + static_cast<std::size_t>(data.value(row, p));
        auto& c = counts[j];
        if (c.empty()) c.assign(r, 0.0);
        c[static_cast<std::size_t>(data.value(row, child))] += 1.0;
    }

    double a_ij = ess / static_cast<double>(q);
    double a_ijk = ess / static_cast<double>(q * r);
    double score = 0;
    for (const auto& [j, c] : counts) {
        double n_ij = 0;
        for (double v : c) n_ij += v;
        score += std::lgamma(a_ij) - std::lgamma(a_ij + n_ij);
        for (double v : c) score += std::lgamma(a_ijk + v) - std::lgamma(a_ijk);
    }
    return score;
}

}  // namespace detail

/// BDeu log marginal likelihood of the data given a dag (decomposes over
/// families). Empty-data score is 0 for any structure.
inline double bdeu_score(const Dag& dag, const Dataset& data, double ess) {
    if (ess <= 0) throw InvalidInput("ess must be positive");
    const auto& schema = data.schema();
    double total = 0;
    for (std::size_t i = 0; i < dag.size(); ++i) {
        std::size_t child = schema.index_of(dag.name(i));
        std::vector<std::size_t> parents;
        for (auto p : dag.sorted_parents(i)) parents.push_back(schema.index_of(dag.name(p)));
        total += detail::bdeu_family_score(data, child, parents, ess);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Conditional independence tests

/// Test x ⟂ y | z on categorical data. For g_square and chi_square the
/// p-value comes from the chi-square tail with
/// df = (r_x-1)(r_y-1) * (#non-empty z strata); empty strata are skipped.
/// mutual_information uses a 200-draw permutation test within z strata.
inline CiResult ci_test(const Dataset& data, const std::string& x, const std::string& y,
                        const std::vector<std::string>& z, CiMethod method, double alpha) {
    const auto& schema = data.schema();
    std::size_t xi = schema.index_of(x);
    std::size_t yi = schema.index_of(y);
    if (xi == yi) throw InvalidInput("ci_test requires x != y");
    std::vector<std::size_t> zi;
    for (const auto& name : z) {
        std::size_t i = schema.index_of(name);
        if (i == xi || i == yi) throw InvalidInput("conditioning set contains x or y");
        zi.push_back(i);
    }

    std::size_t rx = schema.arity(xi), ry = schema.arity(yi);

    // stratify rows by z configuration
    std::map<std::size_t, std::vector<std::size_t>> strata;
    for (std::size_t row = 0; row < data.size(); ++row) {
        std::size_t s = 0;
        for (auto v : zi) s = s * schema.arity(v) + static_cast<std::size_t>(data.value(row, v));
        strata[s].push_back(row);
    }

    auto stratum_tables = [&](const std::vector<std::vector<std::size_t>>& groups) {
        std::vector<std::vector<std::vector<double>>> tables;
        for (const auto& rows : groups) {
            std::vector<std::vector<double>> t(rx, std::vector<double>(ry, 0.0));
            for (auto row : rows)
                t[static_cast<std::size_t>(data.value(row, xi))]
                 [static_cast<std::size_t>(data.value(row, yi))] += 1.0;
            tables.push_back(std::move(t));
        }
        return tables;
    };

    std::vector<std::vector<std::size_t>> groups;
    for (auto& [s, rows] : strata) groups.push_back(rows);
    auto tables = stratum_tables(groups);

    auto pair_stat = [&](const std::vector<std::vector<std::vector<double>>>& ts, CiMethod m) {
        double stat = 0;
        for (const auto& t : ts) {
            double n = 0;
            std::vector<double> rsum(rx, 0.0), csum(ry, 0.0);
            for (std::size_t a = 0; a < rx; ++a)
                for (std::size_t b = 0; b < ry; ++b) {
                    rsum[a] += t[a][b];
                    csum[b] += t[a][b];
                    n += t[a][b];
                }
            if (n == 0) continue;
            for (std::size_t a = 0; a < rx; ++a)
                for (std::size_t b = 0; b < ry; ++b) {
                    double e = rsum[a] * csum[b] / n;
                    double o = t[a][b];
                    if (m == CiMethod::chi_square) {
                        if (e > 0) stat += (o - e) * (o - e) / e;
                    } else {  // g_square and mutual information share 2*O*ln(O/E)
                        if (o > 0 && e > 0) stat += 2.0 * o * std::log(o / e);
                    }
                }
        }
        return stat;
    };

    CiResult res;
    if (method == CiMethod::mutual_information) {
        double total_n = static_cast<double>(data.size());
        if (total_n == 0) return res;
        double observed_g = pair_stat(tables, CiMethod::g_square);
        res.statistic = observed_g / (2.0 * total_n);  // conditional MI in nats

        std::mt19937_64 rng(0x0c11u);
        std::size_t exceed = 0;
        const int n_perm = 200;
        for (int p = 0; p < n_perm; ++p) {
            // permute x within each stratum
            std::vector<std::vector<std::vector<double>>> perm_tables;
            for (const auto& rows : groups) {
                std::vector<int> xs, ys;
                for (auto row : rows) {
                    xs.push_back(data.value(row, xi));
                    ys.push_back(data.value(row, yi));
                }
                std::shuffle(xs.begin(), xs.end(), rng);
                std::vector<std::vector<double>> t(rx, std::vector<double>(ry, 0.0));
                for (std::size_t i = 0; i < xs.size(); ++i)
                    t[static_cast<std::size_t>(xs[i])][static_cast<std::size_t>(ys[i])] += 1.0;
                perm_tables.push_back(std::move(t));
            }
            if (pair_stat(perm_tables, CiMethod::g_square) >= observed_g) ++exceed;
        }
        res.p_value = static_cast<double>(exceed + 1) / static_cast<double>(n_perm + 1);
    } else {
        res.statistic = pair_stat(tables, method);
        std::size_t nonempty = 0;
        for (const auto& rows : groups)
            if (!rows.empty()) ++nonempty;
        double df = static_cast<double>((rx - 1) * (ry - 1) * std::max<std::size_t>(nonempty, 0));
        if (df <= 0 || res.statistic <= 0) {
            res.p_value = 1.0;
        } else {
            boost::math::chi_squared dist(df);
            res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
        }
    }
    res.independent = res.p_value >= alpha;
    return res;
}

// ---------------------------------------------------------------------------
// Constrained greedy structure search

namespace detail {

struct SearchContext {
    const Dataset& data;
    const DiscoveryParams& params;
    std::vector<std::string> node_names;
    std::vector<int> tier_of;  // -1 when no tiers given
    std::set<std::pair<std::size_t, std::size_t>> required;
    std::set<std::pair<std::size_t, std::size_t>> forbidden;
    mutable std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> family_cache;

    double family(std::size_t child, std::vector<std::size_t> parents) const {
        std::sort(parents.begin(), parents.end());
        auto key = std::make_pair(child, parents);
        auto it = family_cache.find(key);
        if (it != family_cache.end()) return it->second;
        const auto& schema = data.schema();
        std::vector<std::size_t> cols;
        for (auto p : parents) cols.push_back(schema.index_of(node_names[p]));
        double s = bdeu_family_score(data, schema.index_of(node_names[child]), cols, params.ess);
        family_cache.emplace(std::move(key), s);
        return s;
    }

    bool edge_allowed(std::size_t u, std::size_t v) const {
        if (forbidden.count({u, v})) return false;
        if (tier_of[u] >= 0 && tier_of[v] >= 0 && tier_of[u] > tier_of[v]) return false;
        return true;
    }
};

inline double dag_score(const SearchContext& ctx, const Dag& dag) {
    double total = 0;
    for (std::size_t i = 0; i < dag.size(); ++i) total += ctx.family(i, dag.sorted_parents(i));
    return total;
}

/// One hill-climbing run from a start graph; add/delete/reverse moves, best
/// improvement, lexicographic tie-break by move ordinal.
inline std::pair<Dag, double> hill_climb(const SearchContext& ctx, Dag dag) {
    const std::size_t n = dag.size();
    double score = dag_score(ctx, dag);

    for (std::size_t iter = 0; iter < ctx.params.max_iterations; ++iter) {
        double best_delta = 1e-9;
        int best_kind = -1;  // 0 add, 1 delete, 2 reverse
        std::size_t best_u = 0, best_v = 0;

        auto consider = [&](int kind, std::size_t u, std::size_t v, double delta) {
            if (delta > best_delta) {
                best_delta = delta;
                best_kind = kind;
                best_u = u;
                best_v = v;
            }
        };

        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = 0; v < n; ++v) {
                if (u == v) continue;
                if (!dag.has_edge(u, v)) {
                    if (!ctx.edge_allowed(u, v)) continue;
                    if (dag.parents(v).size() >= ctx.params.max_parents) continue;
                    if (!dag.edge_addable(u, v)) continue;
                    auto pv = dag.sorted_parents(v);
                    double old_f = ctx.family(v, pv);
                    pv.push_back(u);
                    consider(0, u, v, ctx.family(v, pv) - old_f);
                } else {
                    bool req = ctx.required.count({u, v}) != 0;
                    auto pv = dag.sorted_parents(v);
                    double old_f = ctx.family(v, pv);
                    auto pv_minus = pv;
                    pv_minus.erase(std::find(pv_minus.begin(), pv_minus.end(), u));
                    double del_delta = ctx.family(v, pv_minus) - old_f;
                    if (!req) consider(1, u, v, del_delta);
                    // reverse u->v into v->u
                    if (!req && ctx.edge_allowed(v, u) &&
                        dag.parents(u).size() < ctx.params.max_parents) {
                        dag.remove_edge(u, v);
                        bool ok = dag.edge_addable(v, u);
                        dag.add_edge(u, v);
                        if (ok) {
                            auto pu = dag.sorted_parents(u);
                            double old_fu = ctx.family(u, pu);
                            pu.push_back(v);
                            consider(2, u, v, del_delta + ctx.family(u, pu) - old_fu);
                        }
                    }
                }
            }
        }

        if (best_kind < 0) break;
        if (best_kind == 0) {
            dag.add_edge(best_u, best_v);
        } else if (best_kind == 1) {
            dag.remove_edge(best_u, best_v);
        } else {
            dag.remove_edge(best_u, best_v);
            dag.add_edge(best_v, best_u);
        }
        score += best_delta;
    }
    return {dag, dag_score(ctx, dag)};
}

}  // namespace detail

/// BDeu-scored greedy DAG hill climbing under knowledge constraints, with a
/// marginal-independence CI pre-pass that forbids edges between variables the
/// chosen test declares independent. Seeded random restarts; best score wins.
inline Dag greedy_search(const Dataset& data, const KnowledgeConstraints& constraints,
                         const DiscoveryParams& params, std::uint64_t seed) {
    const auto& schema = data.schema();
    std::vector<std::string> names;
    for (const auto& v : schema.variables()) names.push_back(v.name);
    const std::size_t n = names.size();

    auto index_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < n; ++i)
            if (names[i] == name) return i;
        throw InvalidInput("constraint names unknown variable '" + name + "'");
    };

    detail::SearchContext ctx{data, params, names, std::vector<int>(n, -1), {}, {}, {}};
    for (std::size_t t = 0; t < constraints.tiers.size(); ++t)
        for (const auto& name : constraints.tiers[t]) ctx.tier_of[index_of(name)] = static_cast<int>(t);
    for (const auto& [a, b] : constraints.forbidden_edges)
        ctx.forbidden.insert({index_of(a), index_of(b)});
    for (const auto& [a, b] : constraints.required_edges) {
        auto e = std::make_pair(index_of(a), index_of(b));
        if (ctx.forbidden.count(e))
            throw InvalidInput("edge " + a + "->" + b + " both required and forbidden");
        ctx.required.insert(e);
    }

    // CI pre-pass: marginal independence forbids the edge in both directions.
    if (data.size() > 0) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (ctx.required.count({a, b}) || ctx.required.count({b, a})) continue;
                auto r = ci_test(data, names[a], names[b], {}, params.ci_method, params.ci_alpha);
                if (r.independent) {
                    ctx.forbidden.insert({a, b});
                    ctx.forbidden.insert({b, a});
                }
            }
        }
    }

    // Start graph: required edges only.
    Dag start(names);
    for (const auto& [u, v] : ctx.required) {
        if (!ctx.edge_allowed(u, v))
            throw InvalidInput("required edge violates forbidden/tier constraints");
        if (!start.edge_addable(u, v)) throw InvalidInput("required edges form a cycle");
        if (start.parents(v).size() >= params.max_parents)
            throw InvalidInput("required edges exceed max_parents");
        start.add_edge(u, v);
    }

    auto [best, best_score] = detail::hill_climb(ctx, start);

    std::mt19937_64 rng(seed);
    for (int restart = 1; restart < params.restarts; ++restart) {
        Dag g = start;
        // random admissible warm start
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::size_t attempts = 2 * n;
        for (std::size_t a = 0; a < attempts; ++a) {
            std::size_t u = pick(rng), v = pick(rng);
            if (u == v || g.has_edge(u, v)) continue;
            if (!ctx.edge_allowed(u, v)) continue;
            if (g.parents(v).size() >= params.max_parents) continue;
            if (g.edge_addable(u, v)) g.add_edge(u, v);
        }
        auto [cand, cand_score] = detail::hill_climb(ctx, g);
        if (cand_score > best_score + 1e-9) {
            best = cand;
            best_score = cand_score;
        }
    }
    return best;
}

}  // namespace scenegen

#endif
