#ifndef SCENEGEN_DAG_HPP
#define SCENEGEN_DAG_HPP

#include <algorithm>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "scenegen/schema.hpp"

namespace scenegen {

/// Directed acyclic graph over named nodes. Acyclicity is enforced on every
/// mutation that could break it.
class Dag {
public:
    Dag() = default;

    explicit Dag(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!index_.emplace(nodes_[i], i).second)
                throw InvalidInput("duplicate node '" + nodes_[i] + "'");
        }
        adj_.assign(nodes_.size(), {});
        radj_.assign(nodes_.size(), {});
    }

    std::size_t size() const { return nodes_.size(); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::string& name(std::size_t i) const { return nodes_.at(i); }
    std::size_t index_of(const std::string& n) const {
        auto it = index_.find(n);
        if (it == index_.end()) throw InvalidInput("unknown node '" + n + "'");
        return it->second;
    }
    bool has_node(const std::string& n) const { return index_.count(n) != 0; }

    bool has_edge(std::size_t from, std::size_t to) const {
        const auto& a = adj_[from];
        return std::find(a.begin(), a.end(), to) != a.end();
    }

    void add_edge(std::size_t from, std::size_t to) {
        if (from == to) throw InvalidInput("self-loop on '" + nodes_[from] + "'");
        if (has_edge(from, to)) throw InvalidInput("duplicate edge");
        if (reaches(to, from))
            throw InvalidInput("edge " + nodes_[from] + "->" + nodes_[to] + " creates a cycle");
        adj_[from].push_back(to);
        radj_[to].push_back(from);
    }

    void remove_edge(std::size_t from, std::size_t to) {
        auto& a = adj_[from];
        auto it = std::find(a.begin(), a.end(), to);
        if (it == a.end()) throw InvalidInput("edge not present");
        a.erase(it);
        auto& r = radj_[to];
        r.erase(std::find(r.begin(), r.end(), from));
    }

    /// True if adding from->to would keep the graph acyclic.
    bool edge_addable(std::size_t from, std::size_t to) const {
        return from != to && !has_edge(from, to) && !reaches(to, from);
    }

    const std::vector<std::size_t>& children(std::size_t i) const { return adj_[i]; }
    const std::vector<std::size_t>& parents(std::size_t i) const { return radj_[i]; }

    std::vector<std::size_t> sorted_parents(std::size_t i) const {
        auto p = radj_[i];
        std::sort(p.begin(), p.end());
        return p;
    }

    std::vector<std::pair<std::size_t, std::size_t>> edges() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t u = 0; u < adj_.size(); ++u)
            for (auto v : adj_[u]) out.emplace_back(u, v);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& a : adj_) n += a.size();
        return n;
    }

    /// Topological order (Kahn; ties broken by node index for determinism).
    std::vector<std::size_t> topological_order() const {
        std::vector<std::size_t> indeg(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) indeg[i] = radj_[i].size();
        std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (indeg[i] == 0) ready.push(i);
        std::vector<std::size_t> order;
        while (!ready.empty()) {
            std::size_t u = ready.top();
            ready.pop();
            order.push_back(u);
            for (auto v : adj_[u])
                if (--indeg[v] == 0) ready.push(v);
        }
        return order;
    }

    /// Directed reachability from -> to (including from == to).
    bool reaches(std::size_t from, std::size_t to) const {
        if (from == to) return true;
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<std::size_t> stack{from};
        seen[from] = 1;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (auto v : adj_[u]) {
                if (v == to) return true;
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        return false;
    }

    std::set<std::size_t> descendants(std::size_t i) const {
        std::set<std::size_t> out;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (auto v : adj_[u])
                if (out.insert(v).second) stack.push_back(v);
        }
        return out;
    }

    bool operator==(const Dag& other) const {
        return nodes_ == other.nodes_ && edges() == other.edges();
    }

private:
    std::vector<std::string> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> adj_;   // children
    std::vector<std::vector<std::size_t>> radj_;  // parents
};

}  // namespace scenegen

#endif
