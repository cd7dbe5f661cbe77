// Excitation and test signal generation. Excitation frequencies are chosen
// relative to the target system's bandwidth: chirps sweep 0.1..2 x wBw and
// multisines place tones at {0.1, 0.5, 2} x wBw.
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ehsid/errors.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

/// Frequency band for a bandwidth-matched sweep: [0.1*wBw, 2*wBw].
inline std::pair<double, double> excitation_band(double omega_bw) {
  if (!(omega_bw > 0.0) || !std::isfinite(omega_bw))
    throw ConfigError("excitation_band: bandwidth must be positive");
  return {0.1 * omega_bw, 2.0 * omega_bw};
}

/// Tone placement for a bandwidth-matched multisine: {0.1, 0.5, 2} x wBw.
inline std::vector<double> multisine_frequencies(double omega_bw) {
  if (!(omega_bw > 0.0) || !std::isfinite(omega_bw))
    throw ConfigError("multisine_frequencies: bandwidth must be positive");
  return {0.1 * omega_bw, 0.5 * omega_bw, 2.0 * omega_bw};
}

/// Linear frequency sweep x(t) = A*cos(phi0 + 2*pi*(k/2*t^2 + f0*t)) with
/// k = (f1 - f0)/T; instantaneous frequency runs from f0 at t=0 to f1 at t=T.
struct ChirpSpec {
  double amplitude = 1.0;   // V
  double f0 = 0.0;          // Hz
  double f1 = 0.0;          // Hz
  double duration = 0.0;    // s
  double dt = 0.0;          // s
  double initial_phase = 0.0;  // rad
};

inline void validate(const ChirpSpec& s) {
  if (!(s.amplitude > 0.0)) throw ConfigError("chirp: amplitude must be positive");
  if (!(s.f0 > 0.0) || !(s.f1 >= s.f0)) throw ConfigError("chirp: require 0 < f0 <= f1");
  if (!(s.duration > 0.0)) throw ConfigError("chirp: duration must be positive");
  if (!(s.dt > 0.0)) throw ConfigError("chirp: dt must be positive");
  if (s.dt > 0.5 / s.f1)
    throw ConfigError("chirp: dt violates the Nyquist limit 1/(2*f1)");
}

/// Sum of equal-amplitude sines at distinct angular frequencies; peak value
/// is bounded by n*A for n components.
struct MultisineSpec {
  double amplitude = 1.0;                 // V, per component
  std::vector<double> component_freqs;    // rad/s
  double duration = 0.0;                  // s
  double dt = 0.0;                        // s
};

inline void validate(const MultisineSpec& s) {
  if (!(s.amplitude > 0.0)) throw ConfigError("multisine: amplitude must be positive");
  if (s.component_freqs.empty()) throw ConfigError("multisine: no component frequencies");
  double w_max = 0.0;
  for (double w : s.component_freqs) {
    if (!(w > 0.0)) throw ConfigError("multisine: frequencies must be positive");
    w_max = std::max(w_max, w);
  }
  for (std::size_t i = 0; i < s.component_freqs.size(); ++i)
    for (std::size_t j = i + 1; j < s.component_freqs.size(); ++j)
      if (s.component_freqs[i] == s.component_freqs[j])
        throw ConfigError("multisine: duplicate component frequency");
  if (!(s.duration > 0.0)) throw ConfigError("multisine: duration must be positive");
  if (!(s.dt > 0.0)) throw ConfigError("multisine: dt must be positive");
  if (s.dt > std::numbers::pi / w_max)
    throw ConfigError("multisine: dt violates the Nyquist limit pi/max(w)");
}

enum class TestSignalKind { step, sine, square, triangular, sawtooth, staircase };

inline TestSignalKind test_signal_kind_from_string(const std::string& name) {
  if (name == "step") return TestSignalKind::step;
  if (name == "sine") return TestSignalKind::sine;
  if (name == "square") return TestSignalKind::square;
  if (name == "triangular") return TestSignalKind::triangular;
  if (name == "sawtooth") return TestSignalKind::sawtooth;
  if (name == "staircase") return TestSignalKind::staircase;
  throw ConfigError("unknown test signal kind '" + name + "'");
}

inline std::string to_string(TestSignalKind kind) {
  switch (kind) {
    case TestSignalKind::step: return "step";
    case TestSignalKind::sine: return "sine";
    case TestSignalKind::square: return "square";
    case TestSignalKind::triangular: return "triangular";
    case TestSignalKind::sawtooth: return "sawtooth";
    case TestSignalKind::staircase: return "staircase";
  }
  return "?";
}

struct StaircaseLevel {
  double hold = 0.0;   // s
  double level = 0.0;  // V
};

struct TestSignalSpec {
  TestSignalKind kind = TestSignalKind::step;
  double amplitude = 1.0;  // V
  double frequency = 0.0;  // Hz; ignored for step and staircase
  double duration = 0.0;   // s
  double dt = 0.0;         // s
  std::vector<StaircaseLevel> staircase_levels;
};

inline void validate(const TestSignalSpec& s) {
  if (!(s.amplitude > 0.0)) throw ConfigError("test signal: amplitude must be positive");
  if (!(s.duration > 0.0)) throw ConfigError("test signal: duration must be positive");
  if (!(s.dt > 0.0)) throw ConfigError("test signal: dt must be positive");
  const bool periodic = s.kind != TestSignalKind::step && s.kind != TestSignalKind::staircase;
  if (periodic && !(s.frequency > 0.0))
    throw ConfigError("test signal: frequency must be positive for periodic kinds");
  if (s.kind == TestSignalKind::staircase && s.staircase_levels.empty())
    throw ConfigError("test signal: staircase needs at least one (hold, level) entry");
}

namespace detail {

// samples at t = 0, dt, ..., largest multiple of dt <= T (t = 0 inclusive)
inline std::size_t sample_count(double duration, double dt) {
  return static_cast<std::size_t>(std::floor(duration / dt * (1.0 + 1e-12))) + 1;
}

inline double fractional_cycle(double f, double t) {
  double phase = f * t;
  return phase - std::floor(phase);
}

}  // namespace detail

inline TimeSeries chirp(const ChirpSpec& s) {
  validate(s);
  const double sweep_rate = (s.f1 - s.f0) / s.duration;
  TimeSeries out;
  out.t0 = 0.0;
  out.dt = s.dt;
  const std::size_t n = detail::sample_count(s.duration, s.dt);
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * s.dt;
    const double phase = s.initial_phase +
                         2.0 * std::numbers::pi * (0.5 * sweep_rate * t * t + s.f0 * t);
    out.samples.push_back(s.amplitude * std::cos(phase));
  }
  return out;
}

inline TimeSeries multisine(const MultisineSpec& s) {
  validate(s);
  TimeSeries out;
  out.t0 = 0.0;
  out.dt = s.dt;
  const std::size_t n = detail::sample_count(s.duration, s.dt);
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * s.dt;
    double v = 0.0;
    for (double w : s.component_freqs) v += std::sin(w * t);
    out.samples.push_back(s.amplitude * v);
  }
  return out;
}

inline TimeSeries test_signal(const TestSignalSpec& s) {
  validate(s);
  TimeSeries out;
  out.t0 = 0.0;
  out.dt = s.dt;
  const std::size_t n = detail::sample_count(s.duration, s.dt);
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * s.dt;
    double v = 0.0;
    switch (s.kind) {
      case TestSignalKind::step:
        v = (i == 0) ? 0.0 : s.amplitude;  // step happens at t = 0+
        break;
      case TestSignalKind::sine:
        v = s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * t);
        break;
      case TestSignalKind::square: {
        const double p = detail::fractional_cycle(s.frequency, t);
        v = (p < 0.5) ? s.amplitude : -s.amplitude;
        break;
      }
      case TestSignalKind::triangular: {
        const double p = detail::fractional_cycle(s.frequency, t);
        if (p < 0.25)
          v = 4.0 * p * s.amplitude;
        else if (p < 0.75)
          v = (2.0 - 4.0 * p) * s.amplitude;
        else
          v = (4.0 * p - 4.0) * s.amplitude;
        break;
      }
      case TestSignalKind::sawtooth: {
        const double p = detail::fractional_cycle(s.frequency, t);
        v = s.amplitude * (2.0 * p - 1.0);
        break;
      }
      case TestSignalKind::staircase: {
        double elapsed = 0.0;
        v = s.staircase_levels.back().level;  // hold the final level once exhausted
        for (const auto& lv : s.staircase_levels) {
          if (t < elapsed + lv.hold) {
            v = lv.level;
            break;
          }
          elapsed += lv.hold;
        }
        break;
      }
    }
    out.samples.push_back(v);
  }
  return out;
}

}  // namespace ehsid
