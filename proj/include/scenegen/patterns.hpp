#ifndef SCENEGEN_PATTERNS_HPP
#define SCENEGEN_PATTERNS_HPP

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "scenegen/schema.hpp"

namespace scenegen {

/// Joint assignment of static environment factors, e.g. weather=rain with
/// surface_condition=flooded. Keys are variable names, values state indices.
struct StaticCombination {
    std::map<std::string, int> assignments;
    std::string label;
};

struct PatternCatalog {
    struct Entry {
        StaticCombination pattern;
        double support = 0.0;
    };
    std::vector<Entry> patterns;
};

namespace detail {

inline std::string pattern_label(const VariableSchema& schema,
                                 const std::map<std::string, int>& assignments) {
    std::string label;
    for (const auto& [name, state] : assignments) {
        if (!label.empty()) label += "+";
        label += name + "=" +
                 schema.var(schema.index_of(name)).states[static_cast<std::size_t>(state)];
    }
    return label;
}

}  // namespace detail

/// k-modes clustering over the static columns (Hamming distance, 10 restarts,
/// up to 100 iterations), reporting centroid patterns with their exact
/// empirical support.
inline PatternCatalog mine_static_patterns(const Dataset& data,
                                           const std::vector<std::string>& static_vars,
                                           std::size_t k, double min_support) {
    const auto& schema = data.schema();
    std::vector<std::size_t> cols;
    for (const auto& name : static_vars) cols.push_back(schema.index_of(name));

    PatternCatalog catalog;
    if (k == 0 || data.size() == 0) return catalog;

    const std::size_t n = data.size();
    const std::size_t d = cols.size();
    k = std::min(k, n);

    auto project = [&](std::size_t row) {
        std::vector<int> v(d);
        for (std::size_t j = 0; j < d; ++j) v[j] = data.value(row, cols[j]);
        return v;
    };

    auto hamming = [&](const std::vector<int>& a, const std::vector<int>& b) {
        std::size_t h = 0;
        for (std::size_t j = 0; j < d; ++j) h += (a[j] != b[j]);
        return h;
    };

    std::vector<std::vector<int>> points(n);
    for (std::size_t i = 0; i < n; ++i) points[i] = project(i);

    std::vector<std::vector<int>> best_modes;
    std::size_t best_cost = SIZE_MAX;
    std::mt19937_64 rng(0x5ce9e6);  // fixed: mining is deterministic

    for (int restart = 0; restart < 10; ++restart) {
        // initialize modes from distinct random rows
        std::vector<std::vector<int>> modes;
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < n && modes.size() < k; ++i) {
            if (std::find(modes.begin(), modes.end(), points[idx[i]]) == modes.end())
                modes.push_back(points[idx[i]]);
        }

        std::vector<std::size_t> assign(n, 0);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t best_c = 0, best_h = SIZE_MAX;
                for (std::size_t c = 0; c < modes.size(); ++c) {
                    std::size_t h = hamming(points[i], modes[c]);
                    if (h < best_h) {
                        best_h = h;
                        best_c = c;
                    }
                }
                if (assign[i] != best_c) {
                    assign[i] = best_c;
                    changed = true;
                }
            }
            // recompute modes: per-column majority within each cluster
            for (std::size_t c = 0; c < modes.size(); ++c) {
                for (std::size_t j = 0; j < d; ++j) {
                    std::vector<std::size_t> counts(schema.arity(cols[j]), 0);
                    for (std::size_t i = 0; i < n; ++i)
                        if (assign[i] == c) ++counts[static_cast<std::size_t>(points[i][j])];
                    std::size_t arg = 0;
                    for (std::size_t s = 1; s < counts.size(); ++s)
                        if (counts[s] > counts[arg]) arg = s;
                    modes[c][j] = static_cast<int>(arg);
                }
            }
            if (!changed) break;
        }

        std::size_t cost = 0;
        for (std::size_t i = 0; i < n; ++i) cost += hamming(points[i], modes[assign[i]]);
        if (cost < best_cost) {
            best_cost = cost;
            best_modes = modes;
        }
    }

    // Dedupe modes, compute exact support, filter and sort.
    std::sort(best_modes.begin(), best_modes.end());
    best_modes.erase(std::unique(best_modes.begin(), best_modes.end()), best_modes.end());

    for (const auto& mode : best_modes) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (points[i] == mode) ++count;
        double support = static_cast<double>(count) / static_cast<double>(n);
        if (support < min_support) continue;
        StaticCombination combo;
        for (std::size_t j = 0; j < d; ++j) combo.assignments[static_vars[j]] = mode[j];
        combo.label = detail::pattern_label(schema, combo.assignments);
        catalog.patterns.push_back({std::move(combo), support});
    }

    std::sort(catalog.patterns.begin(), catalog.patterns.end(),
              [](const PatternCatalog::Entry& a, const PatternCatalog::Entry& b) {
                  if (a.support != b.support) return a.support > b.support;
                  return a.pattern.label < b.pattern.label;
              });
    if (catalog.patterns.size() > k) catalog.patterns.resize(k);
    return catalog;
}

}  // namespace scenegen

#endif
