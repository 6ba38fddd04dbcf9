#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pathlasso/errors.hpp"
#include "pathlasso/schema.hpp"

namespace pathlasso {

// A cell is either missing, a parsed number, or a category label.
using Cell = std::optional<std::variant<double, std::string>>;

inline bool cell_missing(const Cell& c) { return !c.has_value(); }

inline double cell_number(const Cell& c) { return std::get<double>(*c); }

inline const std::string& cell_label(const Cell& c) { return std::get<std::string>(*c); }

struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return columns.size(); }

  std::size_t column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw SchemaError("unknown column: " + name);
    return static_cast<std::size_t>(it - columns.begin());
  }

  const Cell& at(std::size_t row, const std::string& name) const {
    return rows[row][column_index(name)];
  }
};

namespace detail {

// One record, honoring quoted fields; handles CRLF line endings.
inline std::vector<std::string> split_delimited(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == delim) {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') return std::nullopt;
  return v;
}

inline bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

}  // namespace detail

// Reads delimiter-separated text with a header row. Keeps one column per
// schema variable, in schema order. Unparseable numeric cells become missing.
inline RawTable load_table(std::istream& source, const Schema& schema, char delim = ',') {
  std::string header_line;
  if (!std::getline(source, header_line)) throw FormatError("input is empty");
  const auto header = detail::split_delimited(header_line, delim);

  std::map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header_index.count(header[i])) throw FormatError("duplicate header column: " + header[i]);
    header_index[header[i]] = i;
  }

  std::vector<std::size_t> source_col(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto it = header_index.find(schema[j].name);
    if (it == header_index.end()) throw SchemaError(schema[j].name);
    source_col[j] = it->second;
  }

  RawTable table;
  for (const auto& v : schema) table.columns.push_back(v.name);

  std::string line;
  while (std::getline(source, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = detail::split_delimited(line, delim);
    std::vector<Cell> row(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string raw =
          source_col[j] < fields.size() ? fields[source_col[j]] : std::string();
      if (detail::is_missing_token(raw)) {
        row[j] = std::nullopt;
        continue;
      }
      if (schema[j].kind == VariableKind::continuous ||
          schema[j].role == VariableRole::weight || schema[j].role == VariableRole::id) {
        const auto num = detail::parse_number(raw);
        if (num) {
          row[j] = Cell(std::in_place, *num);
        } else {
          row[j] = std::nullopt;  // unparseable numeric cell
        }
      } else {
        row[j] = Cell(std::in_place, raw);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline RawTable load_table_from_string(const std::string& text, const Schema& schema,
                                       char delim = ',') {
  std::istringstream in(text);
  return load_table(in, schema, delim);
}

}  // namespace pathlasso
