// CSV reading/writing. All doubles are emitted with 17 significant digits so
// that files round-trip bit-exactly and repeated runs are byte-identical.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ehsid/errors.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

inline std::string format_double(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

/// A named-column table; all columns must have equal length.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline std::string to_csv_string(const CsvTable& table) {
  for (const auto& c : table.columns) {
    if (c.size() != table.rows())
      throw DataError("csv: ragged columns");
  }
  std::ostringstream out;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << ',';
    out << table.header[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j) out << ',';
      out << format_double(table.columns[j][i]);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline void write_csv(const std::string& path, const CsvTable& table) {
  write_text_file(path, to_csv_string(table));
}

inline std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(context + ": cannot parse number '" + s + "'");
  }
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto& name : split_line(line, ',')) table.header.push_back(name);
  table.columns.resize(table.header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line, ',');
    if (fields.size() != table.header.size())
      throw DataError("'" + path + "': row " + std::to_string(row) +
                      " has wrong field count");
    for (std::size_t j = 0; j < fields.size(); ++j)
      table.columns[j].push_back(parse_double(fields[j], path));
    ++row;
  }
  return table;
}

inline int column_index(const CsvTable& table, const std::string& name) {
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (table.header[j] == name) return static_cast<int>(j);
  throw DataError("csv: missing column '" + name + "'");
}

}  // namespace ehsid
