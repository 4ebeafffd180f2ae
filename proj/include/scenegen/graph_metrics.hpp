#ifndef SCENEGEN_GRAPH_METRICS_HPP
#define SCENEGEN_GRAPH_METRICS_HPP

#include <array>
#include <set>
#include <string>
#include <vector>

#include "scenegen/dag.hpp"

namespace scenegen {

/// Pattern of a Markov equivalence class: compelled edges stay directed,
/// reversible edges become undirected.
struct Cpdag {
    std::vector<std::string> nodes;
    std::set<std::pair<std::size_t, std::size_t>> directed;    // u -> v
    std::set<std::pair<std::size_t, std::size_t>> undirected;  // u - v, stored with u < v

    bool adjacent(std::size_t a, std::size_t b) const {
        return directed.count({a, b}) || directed.count({b, a}) ||
               undirected.count({std::min(a, b), std::max(a, b)});
    }

    bool operator==(const Cpdag& o) const {
        return nodes == o.nodes && directed == o.directed && undirected == o.undirected;
    }
};

/// DAG -> CPDAG: keep v-structure edges directed, undirect the rest, then
/// close under the Meek orientation rules.
inline Cpdag to_cpdag(const Dag& dag) {
    const std::size_t n = dag.size();
    Cpdag g;
    g.nodes = dag.nodes();

    auto dag_adjacent = [&](std::size_t a, std::size_t b) {
        return dag.has_edge(a, b) || dag.has_edge(b, a);
    };

    // v-structure edges are compelled
    std::set<std::pair<std::size_t, std::size_t>> compelled;
    for (std::size_t c = 0; c < n; ++c) {
        const auto& par = dag.parents(c);
        for (std::size_t i = 0; i < par.size(); ++i)
            for (std::size_t j = i + 1; j < par.size(); ++j)
                if (!dag_adjacent(par[i], par[j])) {
                    compelled.insert({par[i], c});
                    compelled.insert({par[j], c});
                }
    }

    for (const auto& [u, v] : dag.edges()) {
        if (compelled.count({u, v}))
            g.directed.insert({u, v});
        else
            g.undirected.insert({std::min(u, v), std::max(u, v)});
    }

    // Meek rules R1-R3 to fixpoint (R4 cannot fire without background
    // knowledge).
    bool changed = true;
    auto orient = [&](std::size_t a, std::size_t b) {
        g.undirected.erase({std::min(a, b), std::max(a, b)});
        g.directed.insert({a, b});
        changed = true;
    };
    while (changed) {
        changed = false;
        std::vector<std::pair<std::size_t, std::size_t>> und(g.undirected.begin(),
                                                             g.undirected.end());
        for (auto [x, y] : und) {
            if (!g.undirected.count({x, y})) continue;
            for (int flip = 0; flip < 2; ++flip) {
                std::size_t a = flip ? y : x;
                std::size_t b = flip ? x : y;
                // R1: c -> a, c not adjacent to b  =>  a -> b
                bool done = false;
                for (std::size_t c = 0; c < n && !done; ++c)
                    if (g.directed.count({c, a}) && c != b && !g.adjacent(c, b)) {
                        orient(a, b);
                        done = true;
                    }
                if (done) break;
                // R2: a -> c -> b  =>  a -> b
                for (std::size_t c = 0; c < n && !done; ++c)
                    if (g.directed.count({a, c}) && g.directed.count({c, b})) {
                        orient(a, b);
                        done = true;
                    }
                if (done) break;
                // R3: a - c, a - d, c -> b, d -> b, c and d non-adjacent  =>  a -> b
                for (std::size_t c = 0; c < n && !done; ++c) {
                    if (!g.undirected.count({std::min(a, c), std::max(a, c)}) ||
                        !g.directed.count({c, b}))
                        continue;
                    for (std::size_t d = 0; d < n && !done; ++d) {
                        if (d == c || !g.undirected.count({std::min(a, d), std::max(a, d)}) ||
                            !g.directed.count({d, b}))
                            continue;
                        if (!g.adjacent(c, d)) {
                            orient(a, b);
                            done = true;
                        }
                    }
                }
                if (done) break;
            }
        }
    }
    return g;
}

/// Structural Hamming Distance between two patterns: one count per node pair
/// whose edge status (absent / undirected / direction) differs.
inline std::size_t shd(const Cpdag& a, const Cpdag& b) {
    if (a.nodes != b.nodes) throw InvalidInput("shd: node sets differ");
    const std::size_t n = a.nodes.size();
    std::size_t dist = 0;
    auto status = [](const Cpdag& g, std::size_t i, std::size_t j) {
        if (g.undirected.count({i, j})) return 1;  // i < j by construction
        if (g.directed.count({i, j})) return 2;
        if (g.directed.count({j, i})) return 3;
        return 0;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (status(a, i, j) != status(b, i, j)) ++dist;
    return dist;
}

/// d-separation of x and y given z, by reachability over active paths.
inline bool d_separated(const Dag& dag, std::size_t x, std::size_t y,
                        const std::set<std::size_t>& z) {
    const std::size_t n = dag.size();
    // ancestors of z (inclusive)
    std::vector<char> anc_z(n, 0);
    {
        std::vector<std::size_t> stack(z.begin(), z.end());
        for (auto v : z) anc_z[v] = 1;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (auto p : dag.parents(u))
                if (!anc_z[p]) {
                    anc_z[p] = 1;
                    stack.push_back(p);
                }
        }
    }

    // states: (node, direction) with direction 0 = arrived via edge into the
    // node (from a parent), 1 = arrived via edge out of a child (from a child)
    std::vector<std::array<char, 2>> seen(n, {0, 0});
    std::vector<std::pair<std::size_t, int>> stack;
    // leaving x in both directions
    stack.push_back({x, 0});
    stack.push_back({x, 1});
    seen[x][0] = seen[x][1] = 1;

    while (!stack.empty()) {
        auto [u, dir] = stack.back();
        stack.pop_back();
        bool in_z = z.count(u) != 0;

        if (u == y && !in_z) return false;

        if (dir == 1) {  // arrived from a child (edge pointing away from u)
            if (!in_z) {
                for (auto c : dag.children(u))
                    if (!seen[c][0]) {
                        seen[c][0] = 1;
                        stack.push_back({c, 0});
                    }
                for (auto p : dag.parents(u))
                    if (!seen[p][1]) {
                        seen[p][1] = 1;
                        stack.push_back({p, 1});
                    }
            }
        } else {  // arrived from a parent: u is a (potential) collider
            if (!in_z) {
                for (auto c : dag.children(u))
                    if (!seen[c][0]) {
                        seen[c][0] = 1;
                        stack.push_back({c, 0});
                    }
            }
            if (anc_z[u]) {  // collider open when u (or a descendant) is in z
                for (auto p : dag.parents(u))
                    if (!seen[p][1]) {
                        seen[p][1] = 1;
                        stack.push_back({p, 1});
                    }
            }
        }
    }
    return true;
}

namespace detail {

/// Adjustment-criterion validity of Z for the ordered pair (i, j) in `truth`.
inline bool valid_adjustment(const Dag& truth, std::size_t i, std::size_t j,
                             const std::set<std::size_t>& z) {
    if (z.count(j))  // adjusting for the outcome collapses the estimate to P(j)
        return !truth.reaches(i, j) || i == j;

    // nodes on proper causal paths from i to j (excluding i)
    std::set<std::size_t> causal_nodes;
    for (std::size_t w = 0; w < truth.size(); ++w)
        if (w != i && truth.reaches(i, w) && truth.reaches(w, j)) causal_nodes.insert(w);

    // forbidden set: descendants of causal-path nodes
    std::set<std::size_t> forb = causal_nodes;
    for (auto w : causal_nodes)
        for (auto d : truth.descendants(w)) forb.insert(d);
    for (auto v : z)
        if (forb.count(v)) return false;

    // proper backdoor graph: drop the first edge of every proper causal path
    Dag pbd = truth;
    for (auto c : truth.children(i))
        if (causal_nodes.count(c)) pbd.remove_edge(i, c);
    return d_separated(pbd, i, j, z);
}

}  // namespace detail

/// Structural Interventional Distance: ordered pairs (i, j) whose estimated
/// parent set is not a valid adjustment set in the true graph.
inline std::size_t sid(const Dag& true_dag, const Dag& est_dag) {
    if (true_dag.nodes() != est_dag.nodes()) throw InvalidInput("sid: node sets differ");
    const std::size_t n = true_dag.size();
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::size_t> z;
        for (auto p : est_dag.parents(i)) z.insert(p);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!detail::valid_adjustment(true_dag, i, j, z)) ++count;
        }
    }
    return count;
}

}  // namespace scenegen

#endif
