// Unit tags for config files. Every dimensioned entry is converted to SI
// base units at load time so the rest of the library sees one unit system.
#pragma once

#include <map>
#include <string>

#include "ehsid/errors.hpp"

namespace ehsid {

enum class Dimension {
  dimensionless,
  length,
  area,
  volume,
  pressure,
  mass,
  force,
  stiffness,          // N/m
  damping,            // N/(m/s)
  voltage,
  time,
  frequency_hz,
  angular_frequency,  // rad/s
  valve_gain,         // m/V
  flow_gain,          // m^2/s
  flow_pressure,      // m^3/(s*Pa)
  density,            // kg/m^3
  velocity,           // m/s
};

struct UnitDef {
  Dimension dim;
  double to_si;
};

inline const std::map<std::string, UnitDef>& unit_table() {
  static const std::map<std::string, UnitDef> table = {
      {"m", {Dimension::length, 1.0}},
      {"cm", {Dimension::length, 1e-2}},
      {"mm", {Dimension::length, 1e-3}},
      {"in", {Dimension::length, 0.0254}},
      {"m2", {Dimension::area, 1.0}},
      {"cm2", {Dimension::area, 1e-4}},
      {"mm2", {Dimension::area, 1e-6}},
      {"in2", {Dimension::area, 0.00064516}},
      {"m3", {Dimension::volume, 1.0}},
      {"L", {Dimension::volume, 1e-3}},
      {"in3", {Dimension::volume, 1.6387064e-5}},
      {"Pa", {Dimension::pressure, 1.0}},
      {"kPa", {Dimension::pressure, 1e3}},
      {"MPa", {Dimension::pressure, 1e6}},
      {"bar", {Dimension::pressure, 1e5}},
      {"psi", {Dimension::pressure, 6894.757293168361}},
      {"kg", {Dimension::mass, 1.0}},
      {"N", {Dimension::force, 1.0}},
      {"N_per_m", {Dimension::stiffness, 1.0}},
      {"N_per_m_per_s", {Dimension::damping, 1.0}},
      {"N_s_per_m", {Dimension::damping, 1.0}},
      {"V", {Dimension::voltage, 1.0}},
      {"s", {Dimension::time, 1.0}},
      {"ms", {Dimension::time, 1e-3}},
      {"min", {Dimension::time, 60.0}},
      {"Hz", {Dimension::frequency_hz, 1.0}},
      {"rad_per_s", {Dimension::angular_frequency, 1.0}},
      {"m_per_V", {Dimension::valve_gain, 1.0}},
      {"m2_per_s", {Dimension::flow_gain, 1.0}},
      {"m3_per_s_per_Pa", {Dimension::flow_pressure, 1.0}},
      {"kg_per_m3", {Dimension::density, 1.0}},
      {"m_per_s", {Dimension::velocity, 1.0}},
  };
  return table;
}

/// Convert "value unit" to SI. An empty unit string means the value is
/// already in the SI base unit of the expected dimension.
inline double convert_to_si(double value, const std::string& unit, Dimension expected,
                            const std::string& key) {
  if (unit.empty()) return value;
  auto it = unit_table().find(unit);
  if (it == unit_table().end())
    throw ConfigError("unknown unit '" + unit + "' for key '" + key + "'");
  if (it->second.dim != expected)
    throw ConfigError("unit '" + unit + "' has the wrong dimension for key '" + key + "'");
  return value * it->second.to_si;
}

}  // namespace ehsid
