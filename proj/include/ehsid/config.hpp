// Flat key-value config files with [section] headers and per-key unit tags:
//
//   [plant]
//   piston_area = 12.5 in2
//   load_mass   = 500 kg
//
// Dimensioned entries carry a unit token after the value; a bare number is
// taken as the SI base unit. Unknown keys and unknown units are rejected.
#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ehsid/errors.hpp"
#include "ehsid/units.hpp"

namespace ehsid {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

class ConfigFile {
public:
  ConfigFile() = default;

  static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>") {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty())
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
        cfg.sections_[section];  // record presence even if empty
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": entry outside any [section]");
      auto& sec = cfg.sections_[section];
      if (sec.count(key))
        throw ConfigError(origin + ": duplicate key '" + section + "." + key + "'");
      sec[key] = value;
    }
    return cfg;
  }

  static ConfigFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
  }

  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

  void require_section(const std::string& section) const {
    if (!has_section(section))
      throw ConfigError(origin_ + ": missing required section [" + section + "]");
  }

  bool has_key(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
  }

  /// Raw string value; marks the key as consumed.
  std::string get_string(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end() || !it->second.count(key))
      throw ConfigError(origin_ + ": missing key '" + section + "." + key + "'");
    consumed_.insert(section + "." + key);
    return it->second.at(key);
  }

  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    if (!has_key(section, key)) return fallback;
    return get_string(section, key);
  }

  /// "value [unit]" converted to SI for the expected dimension.
  double get_quantity(const std::string& section, const std::string& key,
                      Dimension dim) const {
    return parse_quantity(get_string(section, key), dim, section + "." + key);
  }

  double get_quantity_or(const std::string& section, const std::string& key,
                         Dimension dim, double fallback) const {
    if (!has_key(section, key)) return fallback;
    return get_quantity(section, key, dim);
  }

  double get_number(const std::string& section, const std::string& key) const {
    return get_quantity(section, key, Dimension::dimensionless);
  }

  double get_number_or(const std::string& section, const std::string& key,
                       double fallback) const {
    if (!has_key(section, key)) return fallback;
    return get_number(section, key);
  }

  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has_key(section, key)) return fallback;
    std::string v = get_string(section, key);
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError(origin_ + ": '" + section + "." + key + "' must be true/false");
  }

  /// Comma-separated list of quantities sharing one trailing unit tag,
  /// e.g. "0.05, 0.1, 0.2 Hz".
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               Dimension dim) const {
    std::string raw = get_string(section, key);
    std::string unit;
    // a trailing non-numeric token applies to every element
    auto last_space = raw.find_last_of(" \t");
    if (last_space != std::string::npos) {
      std::string tail = trim(raw.substr(last_space + 1));
      if (!tail.empty() && !(std::isdigit(static_cast<unsigned char>(tail[0])) ||
                             tail[0] == '-' || tail[0] == '+' || tail[0] == '.')) {
        unit = tail;
        raw = raw.substr(0, last_space);
      }
    }
    std::vector<double> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty())
        throw ConfigError(origin_ + ": empty element in list '" + section + "." + key + "'");
      out.push_back(parse_quantity(item + (unit.empty() ? "" : " " + unit), dim,
                                   section + "." + key));
    }
    if (out.empty())
      throw ConfigError(origin_ + ": empty list '" + section + "." + key + "'");
    return out;
  }

  /// After loading, every present key must have been consumed by a getter.
  void reject_unknown_keys() const {
    for (const auto& [section, entries] : sections_) {
      for (const auto& [key, value] : entries) {
        if (!consumed_.count(section + "." + key))
          throw ConfigError(origin_ + ": unknown key '" + section + "." + key + "'");
      }
    }
  }

  const std::string& origin() const { return origin_; }

private:
  double parse_quantity(const std::string& raw, Dimension dim, const std::string& where) const {
    std::istringstream in(raw);
    double value = 0.0;
    if (!(in >> value))
      throw ConfigError(origin_ + ": '" + where + "' is not a number: '" + raw + "'");
    std::string unit;
    in >> unit;
    std::string leftover;
    if (in >> leftover)
      throw ConfigError(origin_ + ": trailing text after unit in '" + where + "'");
    if (dim == Dimension::dimensionless) {
      if (!unit.empty())
        throw ConfigError(origin_ + ": '" + where + "' takes a bare number, got unit '" + unit + "'");
      return value;
    }
    return convert_to_si(value, unit, dim, where);
  }

  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> sections_;
  mutable std::set<std::string> consumed_;
};

}  // namespace ehsid
