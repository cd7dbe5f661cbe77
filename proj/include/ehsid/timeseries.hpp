#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ehsid/errors.hpp"

namespace ehsid {

/// Uniformly sampled signal. samples[i] holds the value at t0 + i*dt.
/// Units depend on context: volts for commands, metres for positions.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double back_time() const { return time_at(samples.empty() ? 0 : samples.size() - 1); }
};

inline void validate(const TimeSeries& ts, const std::string& name = "series") {
  if (!(ts.dt > 0.0)) throw ConfigError(name + ": sample period must be positive");
  if (ts.samples.empty()) throw DataError(name + ": no samples");
  if (!std::isfinite(ts.t0)) throw DataError(name + ": non-finite start time");
  for (std::size_t i = 0; i < ts.samples.size(); ++i) {
    if (!std::isfinite(ts.samples[i]))
      throw DataError(name + ": non-finite value at sample " + std::to_string(i));
  }
}

inline bool aligned(const TimeSeries& a, const TimeSeries& b) {
  return a.t0 == b.t0 && a.dt == b.dt && a.size() == b.size();
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double mean(const TimeSeries& ts) { return mean(ts.samples); }

inline double rms(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace ehsid
