#ifndef SCENEGEN_SCHEMA_HPP
#define SCENEGEN_SCHEMA_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace scenegen {

/// Error raised when an input violates a documented contract.
class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

/// Ordered list of categorical variables, each with its ordered state labels.
class VariableSchema {
public:
    struct Variable {
        std::string name;
        std::vector<std::string> states;
    };

    VariableSchema() = default;

    explicit VariableSchema(std::vector<Variable> variables) : vars_(std::move(variables)) {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            const auto& v = vars_[i];
            if (v.states.size() < 2)
                throw InvalidInput("variable '" + v.name + "' needs at least 2 states");
            if (!index_.emplace(v.name, i).second)
                throw InvalidInput("duplicate variable name '" + v.name + "'");
            std::unordered_map<std::string, int> seen;
            for (std::size_t s = 0; s < v.states.size(); ++s) {
                if (!seen.emplace(v.states[s], 1).second)
                    throw InvalidInput("duplicate state '" + v.states[s] + "' in variable '" +
                                       v.name + "'");
            }
        }
    }

    std::size_t size() const { return vars_.size(); }
    const Variable& var(std::size_t i) const { return vars_.at(i); }
    const std::vector<Variable>& variables() const { return vars_; }

    std::size_t arity(std::size_t i) const { return vars_.at(i).states.size(); }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw InvalidInput("unknown variable '" + name + "'");
        return it->second;
    }

    std::size_t state_index(std::size_t var, const std::string& label) const {
        const auto& states = vars_.at(var).states;
        auto it = std::find(states.begin(), states.end(), label);
        if (it == states.end())
            throw InvalidInput("unknown state '" + label + "' for variable '" + vars_[var].name +
                               "'");
        return static_cast<std::size_t>(it - states.begin());
    }

    std::optional<std::size_t> try_state_index(std::size_t var, const std::string& label) const {
        const auto& states = vars_.at(var).states;
        auto it = std::find(states.begin(), states.end(), label);
        if (it == states.end()) return std::nullopt;
        return static_cast<std::size_t>(it - states.begin());
    }

    bool operator==(const VariableSchema& other) const {
        if (vars_.size() != other.vars_.size()) return false;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name != other.vars_[i].name || vars_[i].states != other.vars_[i].states)
                return false;
        return true;
    }

private:
    std::vector<Variable> vars_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// One categorical observation: a state index per schema variable.
struct AccidentRecord {
    std::vector<int> values;
};

/// Rows of records conforming to a schema.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(VariableSchema schema) : schema_(std::move(schema)) {}

    const VariableSchema& schema() const { return schema_; }
    const std::vector<AccidentRecord>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    void add_row(AccidentRecord rec) {
        if (rec.values.size() != schema_.size())
            throw InvalidInput("record width mismatch");
        for (std::size_t i = 0; i < rec.values.size(); ++i) {
            if (rec.values[i] < 0 || static_cast<std::size_t>(rec.values[i]) >= schema_.arity(i))
                throw InvalidInput("state index out of range for variable '" +
                                   schema_.var(i).name + "'");
        }
        rows_.push_back(std::move(rec));
    }

    int value(std::size_t row, std::size_t var) const { return rows_.at(row).values.at(var); }

private:
    VariableSchema schema_;
    std::vector<AccidentRecord> rows_;
};

/// Partial assignment of variables (by name) to state indices.
using Evidence = std::map<std::string, int>;

inline void validate_evidence(const VariableSchema& schema, const Evidence& ev) {
    for (const auto& [name, state] : ev) {
        std::size_t i = schema.index_of(name);
        if (state < 0 || static_cast<std::size_t>(state) >= schema.arity(i))
            throw InvalidInput("evidence state out of range for '" + name + "'");
    }
}

}  // namespace scenegen

#endif
