// Test-only reference implementations, kept independent of the library's
// inference and search code paths. Everything here works by brute force.
#ifndef SCENEGEN_TESTS_ORACLES_HPP
#define SCENEGEN_TESTS_ORACLES_HPP

#include <cmath>
#include <random>
#include <vector>

#include "scenegen/bayesnet.hpp"

namespace oracles {

using scenegen::CausalBayesNet;
using scenegen::Dag;
using scenegen::Evidence;
using scenegen::VariableSchema;

// Visit every full assignment of the schema.
template <typename Fn>
void for_each_assignment(const VariableSchema& schema, Fn&& fn) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < schema.size(); ++i) total *= schema.arity(i);
    std::vector<int> assign(schema.size(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (std::size_t d = schema.size(); d-- > 0;) {
            assign[d] = static_cast<int>(rem % schema.arity(d));
            rem /= schema.arity(d);
        }
        fn(assign);
    }
}

inline double joint_probability(const CausalBayesNet& net, const std::vector<int>& assign) {
    double p = 1.0;
    const auto& schema = net.schema();
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& c = net.cpt(i);
        p *= c.table[c.row_index(assign, schema)][static_cast<std::size_t>(assign[i])];
    }
    return p;
}

inline bool matches(const CausalBayesNet& net, const std::vector<int>& assign,
                    const Evidence& ev) {
    for (const auto& [name, state] : ev)
        if (assign[net.schema().index_of(name)] != state) return false;
    return true;
}

// P(evidence) by full-joint summation.
inline double enum_evidence_probability(const CausalBayesNet& net, const Evidence& ev) {
    double p = 0;
    for_each_assignment(net.schema(), [&](const std::vector<int>& a) {
        if (matches(net, a, ev)) p += joint_probability(net, a);
    });
    return p;
}

// P(query | evidence) by full-joint summation.
inline std::vector<double> enum_posterior(const CausalBayesNet& net, const std::string& query,
                                          const Evidence& ev) {
    std::size_t q = net.schema().index_of(query);
    std::vector<double> num(net.schema().arity(q), 0.0);
    for_each_assignment(net.schema(), [&](const std::vector<int>& a) {
        if (matches(net, a, ev)) num[static_cast<std::size_t>(a[q])] += joint_probability(net, a);
    });
    double z = 0;
    for (double v : num) z += v;
    for (double& v : num) v /= z;
    return num;
}

// Interventional distribution P(target | do(treated = state)) by enumerating
// the mutilated network (incoming edges of the treated node severed).
inline std::vector<double> enum_do_marginal(const CausalBayesNet& net, std::size_t treated,
                                            int state, std::size_t target) {
    const auto& schema = net.schema();
    std::vector<double> out(schema.arity(target), 0.0);
    for_each_assignment(schema, [&](const std::vector<int>& a) {
        if (a[treated] != state) return;
        double p = 1.0;
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (i == treated) continue;  // severed: do() fixes this node
            const auto& c = net.cpt(i);
            p *= c.table[c.row_index(a, schema)][static_cast<std::size_t>(a[i])];
        }
        out[static_cast<std::size_t>(a[target])] += p;
    });
    return out;
}

// Random DAG with the given arities; edge i->j allowed only for i<j under a
// random node permutation.
inline Dag random_dag(std::size_t n, double edge_prob, std::mt19937_64& rng) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    Dag dag(names);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < edge_prob) dag.add_edge(perm[i], perm[j]);
    return dag;
}

// Random net with strictly positive CPT entries.
inline CausalBayesNet random_net(const Dag& dag, const std::vector<std::size_t>& arities,
                                 std::mt19937_64& rng) {
    std::vector<VariableSchema::Variable> vars;
    for (std::size_t i = 0; i < dag.size(); ++i) {
        VariableSchema::Variable v;
        v.name = dag.name(i);
        for (std::size_t s = 0; s < arities[i]; ++s) v.states.push_back("s" + std::to_string(s));
        vars.push_back(std::move(v));
    }
    VariableSchema schema(std::move(vars));
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<scenegen::Cpt> cpts;
    for (std::size_t child = 0; child < dag.size(); ++child) {
        scenegen::Cpt c;
        c.child = child;
        c.parents = dag.sorted_parents(child);
        std::size_t rows = 1;
        for (auto p : c.parents) rows *= schema.arity(p);
        c.table.resize(rows);
        for (auto& row : c.table) {
            row.resize(schema.arity(child));
            double z = 0;
            for (double& v : row) {
                v = u(rng);
                z += v;
            }
            for (double& v : row) v /= z;
        }
        cpts.push_back(std::move(c));
    }
    return CausalBayesNet(dag, std::move(schema), std::move(cpts));
}

}  // namespace oracles

#endif
