#pragma once

/*
 * Result tables and their CSV / JSON serialization.
 *
 * CSV layout:
 *   # jtmodel <version>
 *   # provenance: <compact JSON>
 *   name (unit),name (unit),...,status
 *   rows; reals at 17 significant digits, empty cells for "not applicable"
 * Text columns carry no unit annotation.
 */

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "jtmodel/errors.hpp"

namespace jt::io {

inline constexpr const char* kVersion = "0.1.0";

struct ColumnSpec {
  std::string name;
  std::string unit;  // empty for text columns
  bool text = false;

  std::string header() const { return text ? name : name + " (" + unit + ")"; }
  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using Cell = std::variant<std::monostate, double, std::string>;

inline ColumnSpec numeric(std::string name, std::string unit) { return {std::move(name), std::move(unit), false}; }
inline ColumnSpec text(std::string name) { return {std::move(name), {}, true}; }

class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {}

  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  nlohmann::json& provenance() noexcept { return provenance_; }
  const nlohmann::json& provenance() const noexcept { return provenance_; }

  Index column_index(const std::string& name) const {
    for (std::size_t k = 0; k < columns_.size(); ++k)
      if (columns_[k].name == name) return static_cast<Index>(k);
    throw ConfigError("result table has no column '" + name + "'");
  }

  // Cells in column order. A row with a non-finite number must say why in
  // its "status" column.
  void add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw ConfigError("result row has the wrong number of cells");
    for (std::size_t k = 0; k < row.size(); ++k) {
      const bool is_text = std::holds_alternative<std::string>(row[k]);
      const bool is_num = std::holds_alternative<double>(row[k]);
      if ((columns_[k].text && is_num) || (!columns_[k].text && is_text))
        throw ConfigError("cell type does not match column '" + columns_[k].name + "'");
    }
    rows_.push_back(std::move(row));
  }

  double number(std::size_t row, const std::string& column) const {
    const Cell& c = rows_.at(row).at(static_cast<std::size_t>(column_index(column)));
    if (const double* v = std::get_if<double>(&c)) return *v;
    return std::nan("");
  }

  std::string text_at(std::size_t row, const std::string& column) const {
    const Cell& c = rows_.at(row).at(static_cast<std::size_t>(column_index(column)));
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return {};
  }

  friend bool operator==(const ResultTable&, const ResultTable&) = default;

 private:
  std::vector<ColumnSpec> columns_;
  std::vector<std::vector<Cell>> rows_;
  nlohmann::json provenance_;
};

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const ResultTable& t) {
  out << "# jtmodel " << kVersion << '\n';
  out << "# provenance: " << t.provenance().dump() << '\n';
  for (std::size_t k = 0; k < t.columns().size(); ++k) out << (k ? "," : "") << detail::csv_escape(t.columns()[k].header());
  out << '\n';
  for (const auto& row : t.rows()) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      if (const double* v = std::get_if<double>(&row[k])) out << format_real(*v);
      else if (const auto* s = std::get_if<std::string>(&row[k])) out << detail::csv_escape(*s);
    }
    out << '\n';
  }
}

inline nlohmann::json table_to_json(const ResultTable& t) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["provenance"] = t.provenance();
  j["columns"] = nlohmann::json::array();
  for (const auto& c : t.columns()) {
    nlohmann::json cj = {{"name", c.name}};
    if (!c.text) cj["unit"] = c.unit;
    j["columns"].push_back(cj);
  }
  j["rows"] = nlohmann::json::array();
  for (const auto& row : t.rows()) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) {
      if (const double* v = std::get_if<double>(&cell)) {
        r.push_back(std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(format_real(*v)));
      } else if (const auto* s = std::get_if<std::string>(&cell)) {
        r.push_back(*s);
      } else {
        r.push_back(nullptr);
      }
    }
    j["rows"].push_back(r);
  }
  return j;
}

inline void write_table(std::ostream& out, const ResultTable& t, const std::string& format) {
  if (format == "csv") {
    write_csv(out, t);
  } else if (format == "json") {
    out << table_to_json(t).dump(2) << '\n';
  } else {
    throw ConfigError("unknown output format '" + format + "'");
  }
}

inline void write_table(const std::string& path, const ResultTable& t, const std::string& format) {
  if (path.empty() || path == "-") {
    write_table(std::cout, t, format);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file " + path);
  write_table(out, t, format);
}

inline ResultTable read_csv(std::istream& in) {
  std::string line;
  nlohmann::json provenance;
  std::vector<ColumnSpec> cols;
  while (std::getline(in, line)) {
    if (line.rfind("# provenance: ", 0) == 0) {
      provenance = nlohmann::json::parse(line.substr(14));
      continue;
    }
    if (line.rfind("#", 0) == 0) continue;
    for (const auto& h : detail::csv_split(line)) {
      const auto open = h.rfind(" (");
      if (open != std::string::npos && h.back() == ')') {
        cols.push_back(numeric(h.substr(0, open), h.substr(open + 2, h.size() - open - 3)));
      } else {
        cols.push_back(text(h));
      }
    }
    break;
  }
  if (cols.empty()) throw ConfigError("CSV input has no header row");
  ResultTable t(cols);
  t.provenance() = provenance;
  while (std::getline(in, line)) {
    const auto fields = detail::csv_split(line);
    if (fields.size() != cols.size()) throw ConfigError("CSV row has " + std::to_string(fields.size()) + " fields");
    std::vector<Cell> row;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (cols[k].text) {
        row.emplace_back(fields[k]);
      } else if (fields[k].empty()) {
        row.emplace_back(std::monostate{});
      } else {
        row.emplace_back(std::strtod(fields[k].c_str(), nullptr));
      }
    }
    t.add_row(std::move(row));
  }
  return t;
}

inline ResultTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_csv(in);
}

}  // namespace jt::io
