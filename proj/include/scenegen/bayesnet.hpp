#ifndef SCENEGEN_BAYESNET_HPP
#define SCENEGEN_BAYESNET_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "scenegen/dag.hpp"
#include "scenegen/schema.hpp"

namespace scenegen {

/// Raised when conditioning on evidence with probability zero.
class ZeroProbabilityEvidence : public std::runtime_error {
public:
    ZeroProbabilityEvidence() : std::runtime_error("evidence has probability zero") {}
};

/// Conditional probability table for one child given an ordered parent list.
/// Rows are indexed by the parent configuration with the LAST parent varying
/// fastest; each row is a distribution over child states.
struct Cpt {
    std::size_t child = 0;
    std::vector<std::size_t> parents;
    std::vector<std::vector<double>> table;  // [row][child_state]

    std::size_t row_index(const std::vector<int>& assignment,
                          const VariableSchema& schema) const {
        std::size_t row = 0;
        for (auto p : parents) row = row * schema.arity(p) + static_cast<std::size_t>(assignment[p]);
        return row;
    }

    void validate(const VariableSchema& schema) const {
        std::size_t rows = 1;
        for (auto p : parents) rows *= schema.arity(p);
        if (table.size() != rows) throw InvalidInput("cpt row count mismatch");
        for (const auto& row : table) {
            if (row.size() != schema.arity(child)) throw InvalidInput("cpt row width mismatch");
            double sum = 0;
            for (double v : row) {
                if (v < 0.0 || v > 1.0) throw InvalidInput("cpt entry out of [0,1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("cpt row does not sum to 1");
        }
    }
};

/// Discrete Bayesian network with causal edge semantics: a DAG, a schema, and
/// one CPT per node. Immutable after construction; queries are pure.
class CausalBayesNet {
public:
    CausalBayesNet(Dag dag, VariableSchema schema, std::vector<Cpt> cpts)
        : dag_(std::move(dag)), schema_(std::move(schema)), cpts_(std::move(cpts)) {
        if (dag_.size() != schema_.size() || cpts_.size() != schema_.size())
            throw InvalidInput("net component size mismatch");
        for (std::size_t i = 0; i < dag_.size(); ++i)
            if (dag_.name(i) != schema_.var(i).name)
                throw InvalidInput("dag/schema node order mismatch");
        std::vector<char> seen(schema_.size(), 0);
        for (const auto& c : cpts_) {
            if (seen[c.child]) throw InvalidInput("duplicate cpt for one child");
            seen[c.child] = 1;
            auto dp = dag_.sorted_parents(c.child);
            auto cp = c.parents;
            std::sort(cp.begin(), cp.end());
            if (dp != cp) throw InvalidInput("cpt parents do not match dag parents");
            c.validate(schema_);
        }
        cpt_of_.resize(schema_.size());
        for (std::size_t i = 0; i < cpts_.size(); ++i) cpt_of_[cpts_[i].child] = i;
    }

    const Dag& dag() const { return dag_; }
    const VariableSchema& schema() const { return schema_; }
    const Cpt& cpt(std::size_t node) const { return cpts_[cpt_of_[node]]; }
    const std::vector<Cpt>& cpts() const { return cpts_; }

private:
    Dag dag_;
    VariableSchema schema_;
    std::vector<Cpt> cpts_;
    std::vector<std::size_t> cpt_of_;
};

namespace detail {

/// Table over a subset of variables; index runs with the LAST scope variable
/// varying fastest.
struct Factor {
    std::vector<std::size_t> scope;  // net variable indices
    std::vector<double> values;

    static std::size_t table_size(const std::vector<std::size_t>& scope,
                                  const VariableSchema& schema) {
        std::size_t n = 1;
        for (auto v : scope) n *= schema.arity(v);
        return n;
    }
};

inline Factor cpt_to_factor(const Cpt& c, const VariableSchema& schema) {
    Factor f;
    f.scope = c.parents;
    f.scope.push_back(c.child);
    f.values.resize(Factor::table_size(f.scope, schema));
    std::size_t idx = 0;
    for (const auto& row : c.table)
        for (double v : row) f.values[idx++] = v;
    return f;
}

/// Fix a variable to one state, dropping it from the scope.
inline Factor restrict_factor(const Factor& f, std::size_t var, int state,
                              const VariableSchema& schema) {
    auto pos_it = std::find(f.scope.begin(), f.scope.end(), var);
    if (pos_it == f.scope.end()) return f;
    std::size_t pos = static_cast<std::size_t>(pos_it - f.scope.begin());

    Factor out;
    out.scope = f.scope;
    out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
    out.values.resize(Factor::table_size(out.scope, schema));

    std::vector<int> assign(f.scope.size(), 0);
    std::size_t out_idx = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (assign[pos] == state) out.values[out_idx++] = f.values[i];
        // odometer increment, last position fastest
        for (std::size_t d = f.scope.size(); d-- > 0;) {
            if (++assign[d] < static_cast<int>(schema.arity(f.scope[d]))) break;
            assign[d] = 0;
        }
    }
    return out;
}

inline Factor multiply(const Factor& a, const Factor& b, const VariableSchema& schema) {
    Factor out;
    out.scope = a.scope;
    for (auto v : b.scope)
        if (std::find(out.scope.begin(), out.scope.end(), v) == out.scope.end())
            out.scope.push_back(v);
    out.values.assign(Factor::table_size(out.scope, schema), 0.0);

    std::vector<std::size_t> pos_a, pos_b;
    for (auto v : a.scope)
        pos_a.push_back(static_cast<std::size_t>(
            std::find(out.scope.begin(), out.scope.end(), v) - out.scope.begin()));
    for (auto v : b.scope)
        pos_b.push_back(static_cast<std::size_t>(
            std::find(out.scope.begin(), out.scope.end(), v) - out.scope.begin()));

    std::vector<int> assign(out.scope.size(), 0);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        std::size_t ia = 0, ib = 0;
        for (std::size_t d = 0; d < a.scope.size(); ++d)
            ia = ia * schema.arity(a.scope[d]) + static_cast<std::size_t>(assign[pos_a[d]]);
        for (std::size_t d = 0; d < b.scope.size(); ++d)
            ib = ib * schema.arity(b.scope[d]) + static_cast<std::size_t>(assign[pos_b[d]]);
        out.values[i] = a.values[ia] * b.values[ib];
        for (std::size_t d = out.scope.size(); d-- > 0;) {
            if (++assign[d] < static_cast<int>(schema.arity(out.scope[d]))) break;
            assign[d] = 0;
        }
    }
    return out;
}

inline Factor sum_out(const Factor& f, std::size_t var, const VariableSchema& schema) {
    auto pos_it = std::find(f.scope.begin(), f.scope.end(), var);
    if (pos_it == f.scope.end()) return f;
    std::size_t pos = static_cast<std::size_t>(pos_it - f.scope.begin());

    Factor out;
    out.scope = f.scope;
    out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
    out.values.assign(Factor::table_size(out.scope, schema), 0.0);

    std::vector<std::size_t> pos_out;
    for (std::size_t d = 0; d < f.scope.size(); ++d)
        if (d != pos) pos_out.push_back(d);

    std::vector<int> assign(f.scope.size(), 0);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        std::size_t io = 0;
        for (auto d : pos_out)
            io = io * schema.arity(f.scope[d]) + static_cast<std::size_t>(assign[d]);
        out.values[io] += f.values[i];
        for (std::size_t d = f.scope.size(); d-- > 0;) {
            if (++assign[d] < static_cast<int>(schema.arity(f.scope[d]))) break;
            assign[d] = 0;
        }
    }
    return out;
}

/// Min-fill elimination order over the variables to eliminate; ties broken by
/// variable name.
inline std::vector<std::size_t> min_fill_order(std::vector<std::vector<std::size_t>> factor_scopes,
                                               std::set<std::size_t> to_eliminate,
                                               const VariableSchema& schema) {
    // moralized interaction graph over all mentioned vars
    std::set<std::size_t> vars;
    for (const auto& s : factor_scopes) vars.insert(s.begin(), s.end());
    std::map<std::size_t, std::set<std::size_t>> nb;
    for (auto v : vars) nb[v] = {};
    for (const auto& s : factor_scopes)
        for (auto a : s)
            for (auto b : s)
                if (a != b) nb[a].insert(b);

    std::vector<std::size_t> order;
    while (!to_eliminate.empty()) {
        std::size_t best = 0;
        std::size_t best_fill = SIZE_MAX;
        std::string best_name;
        for (auto v : to_eliminate) {
            std::size_t fill = 0;
            const auto& n = nb[v];
            for (auto a : n)
                for (auto b : n)
                    if (a < b && !nb[a].count(b)) ++fill;
            if (fill < best_fill ||
                (fill == best_fill && schema.var(v).name < best_name)) {
                best_fill = fill;
                best = v;
                best_name = schema.var(v).name;
            }
        }
        order.push_back(best);
        auto n = nb[best];
        for (auto a : n)
            for (auto b : n)
                if (a != b) {
                    nb[a].insert(b);
                    nb[b].insert(a);
                }
        for (auto a : n) nb[a].erase(best);
        nb.erase(best);
        to_eliminate.erase(best);
    }
    return order;
}

/// Multiply all factors after restricting by evidence and sum out every
/// variable not in `keep`. Returns the resulting (possibly scalar) factor.
inline Factor eliminate(const CausalBayesNet& net, const Evidence& evidence,
                        const std::set<std::size_t>& keep) {
    const auto& schema = net.schema();
    std::vector<Factor> factors;
    for (std::size_t i = 0; i < schema.size(); ++i)
        factors.push_back(cpt_to_factor(net.cpt(i), schema));

    for (const auto& [name, state] : evidence) {
        std::size_t v = schema.index_of(name);
        for (auto& f : factors) f = restrict_factor(f, v, state, schema);
    }

    std::set<std::size_t> to_elim;
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (!keep.count(i) && !evidence.count(schema.var(i).name)) to_elim.insert(i);

    std::vector<std::vector<std::size_t>> scopes;
    for (const auto& f : factors) scopes.push_back(f.scope);
    auto order = min_fill_order(scopes, to_elim, schema);

    for (auto v : order) {
        Factor product;
        product.values = {1.0};
        std::vector<Factor> rest;
        for (auto& f : factors) {
            if (std::find(f.scope.begin(), f.scope.end(), v) != f.scope.end())
                product = multiply(product, f, schema);
            else
                rest.push_back(std::move(f));
        }
        rest.push_back(sum_out(product, v, schema));
        factors = std::move(rest);
    }

    Factor result;
    result.values = {1.0};
    for (const auto& f : factors) result = multiply(result, f, schema);
    return result;
}

}  // namespace detail

/// Maximum-a-posteriori Dirichlet fit: CPT row entry
/// (N_ijk + pseudocount) / (N_ij + pseudocount * r_i).
inline CausalBayesNet fit_parameters(const Dag& dag, const Dataset& data, double pseudocount) {
    const auto& schema = data.schema();
    if (pseudocount < 0) throw InvalidInput("pseudocount must be non-negative");
    if (pseudocount == 0 && data.size() == 0)
        throw InvalidInput("cannot fit with no data and zero pseudocount");

    std::vector<std::size_t> node_to_col(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) node_to_col[i] = schema.index_of(dag.name(i));

    // Build a schema restricted to (and ordered like) the dag's nodes.
    std::vector<VariableSchema::Variable> vars;
    for (std::size_t i = 0; i < dag.size(); ++i) vars.push_back(schema.var(node_to_col[i]));
    VariableSchema net_schema(std::move(vars));

    std::vector<Cpt> cpts;
    for (std::size_t child = 0; child < dag.size(); ++child) {
        Cpt c;
        c.child = child;
        c.parents = dag.sorted_parents(child);
        std::size_t rows = 1;
        for (auto p : c.parents) rows *= net_schema.arity(p);
        std::size_t r = net_schema.arity(child);
        std::vector<std::vector<double>> counts(rows, std::vector<double>(r, 0.0));

        for (std::size_t row = 0; row < data.size(); ++row) {
            std::size_t idx = 0;
            for (auto p : c.parents)
                idx = idx * net_schema.arity(p) +
                      static_cast<std::size_t>(data.value(row, node_to_col[p]));
            counts[idx][static_cast<std::size_t>(data.value(row, node_to_col[child]))] += 1.0;
        }
        c.table.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            double nij = 0;
            for (double v : counts[i]) nij += v;
            double denom = nij + pseudocount * static_cast<double>(r);
            c.table[i].resize(r);
            if (denom == 0) throw InvalidInput("empty stratum with zero pseudocount");
            for (std::size_t k = 0; k < r; ++k)
                c.table[i][k] = (counts[i][k] + pseudocount) / denom;
        }
        cpts.push_back(std::move(c));
    }
    return CausalBayesNet(dag, std::move(net_schema), std::move(cpts));
}

/// Exact P(query | evidence) by variable elimination (min-fill order).
inline std::vector<double> infer_posterior(const CausalBayesNet& net, const std::string& query,
                                           const Evidence& evidence) {
    const auto& schema = net.schema();
    validate_evidence(schema, evidence);
    if (evidence.count(query)) throw InvalidInput("query variable appears in evidence");
    std::size_t q = schema.index_of(query);

    auto f = detail::eliminate(net, evidence, {q});
    if (f.scope.size() != 1 || f.scope[0] != q) throw std::logic_error("elimination failed");
    double z = 0;
    for (double v : f.values) z += v;
    if (z <= 0) throw ZeroProbabilityEvidence();
    for (double& v : f.values) v /= z;
    return f.values;
}

/// Exact marginal probability of a (possibly partial) evidence assignment.
inline double evidence_probability(const CausalBayesNet& net, const Evidence& evidence) {
    const auto& schema = net.schema();
    validate_evidence(schema, evidence);
    if (evidence.empty()) return 1.0;

    if (evidence.size() == schema.size()) {
        // full assignment: chain rule in log space
        std::vector<int> assign(schema.size());
        for (const auto& [name, state] : evidence) assign[schema.index_of(name)] = state;
        double log_p = 0;
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const auto& c = net.cpt(i);
            double p = c.table[c.row_index(assign, schema)][static_cast<std::size_t>(assign[i])];
            if (p <= 0) return 0.0;
            log_p += std::log(p);
        }
        return std::exp(log_p);
    }

    auto f = detail::eliminate(net, evidence, {});
    double z = 0;
    for (double v : f.values) z += v;
    return std::min(1.0, std::max(0.0, z));
}

/// n i.i.d. ancestral samples; deterministic per seed.
inline Dataset sample(const CausalBayesNet& net, std::size_t n, std::uint64_t seed) {
    const auto& schema = net.schema();
    Dataset out(schema);
    auto order = net.dag().topological_order();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        AccidentRecord rec;
        rec.values.assign(schema.size(), 0);
        for (auto v : order) {
            const auto& c = net.cpt(v);
            const auto& row = c.table[c.row_index(rec.values, schema)];
            double u = unif(rng);
            double acc = 0;
            int state = static_cast<int>(row.size()) - 1;
            for (std::size_t k = 0; k < row.size(); ++k) {
                acc += row[k];
                if (u < acc) {
                    state = static_cast<int>(k);
                    break;
                }
            }
            rec.values[v] = state;
        }
        out.add_row(std::move(rec));
    }
    return out;
}

}  // namespace scenegen

#endif
