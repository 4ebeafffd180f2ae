#ifndef SCENEGEN_CSV_HPP
#define SCENEGEN_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scenegen/schema.hpp"

namespace scenegen {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parse a CSV of state labels into a Dataset. Columns may appear in any
/// order; they are matched to the schema by header name. Rows with empty
/// cells are dropped.
inline Dataset parse_records(const std::string& path, const VariableSchema& schema) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");

    std::string header_line;
    if (!std::getline(in, header_line) || detail::trim(header_line).empty())
        throw InvalidInput("empty header in '" + path + "'");

    auto header = detail::split_csv_line(header_line);
    for (auto& h : header) h = detail::trim(h);

    // column position of each schema variable
    std::vector<int> col_of(schema.size(), -1);
    for (std::size_t v = 0; v < schema.size(); ++v) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == schema.var(v).name) {
                col_of[v] = static_cast<int>(c);
                break;
            }
        }
        if (col_of[v] < 0)
            throw InvalidInput("missing column '" + schema.var(v).name + "' in '" + path + "'");
    }

    Dataset data(schema);
    std::string line;
    std::size_t row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        AccidentRecord rec;
        rec.values.resize(schema.size());
        bool missing = false;
        for (std::size_t v = 0; v < schema.size(); ++v) {
            std::size_t c = static_cast<std::size_t>(col_of[v]);
            std::string cell = c < cells.size() ? detail::trim(cells[c]) : "";
            if (cell.empty()) {
                missing = true;
                break;
            }
            auto idx = schema.try_state_index(v, cell);
            if (!idx)
                throw InvalidInput("row " + std::to_string(row_no) + ", column '" +
                                   schema.var(v).name + "': unknown state label '" + cell + "'");
            rec.values[v] = static_cast<int>(*idx);
        }
        if (!missing) data.add_row(std::move(rec));
    }
    return data;
}

/// Write a Dataset as CSV in schema column order.
inline void write_records(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    const auto& schema = data.schema();
    for (std::size_t v = 0; v < schema.size(); ++v)
        out << (v ? "," : "") << schema.var(v).name;
    out << "\n";
    for (const auto& row : data.rows()) {
        for (std::size_t v = 0; v < schema.size(); ++v)
            out << (v ? "," : "") << schema.var(v).states[static_cast<std::size_t>(row.values[v])];
        out << "\n";
    }
}

}  // namespace scenegen

#endif
