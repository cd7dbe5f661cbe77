// Model-quality metrics (best-fit %, MSE, FPE, RMSE) and step-response
// transient analysis (rise time, settling time, overshoot).
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ehsid/errors.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

struct FitReport {
  double best_fit_percent = 0.0;
  double mse = 0.0;   // squared output units
  double fpe = 0.0;   // squared output units
  double rmse = 0.0;  // output units
  std::size_t n_samples = 0;
  std::size_t n_params = 0;
};

struct TransientMetrics {
  double rise_time = 0.0;       // s, 10% -> 90% of the final value
  double settling_time = 0.0;   // s, last entry into the +/-2% band
  double overshoot_percent = 0.0;
  double steady_state_error = 0.0;  // reference - final value
};

namespace detail {

inline void check_pair(const TimeSeries& measured, const TimeSeries& simulated,
                       std::size_t min_len) {
  if (measured.size() != simulated.size())
    throw DataError("metrics: series length mismatch");
  if (measured.dt != simulated.dt)
    throw DataError("metrics: series sample period mismatch");
  if (measured.size() < min_len)
    throw DataError("metrics: series too short");
}

}  // namespace detail

inline double mse(const TimeSeries& measured, const TimeSeries& simulated) {
  detail::check_pair(measured, simulated, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double r = measured.samples[i] - simulated.samples[i];
    acc += r * r;
  }
  return acc / static_cast<double>(measured.size());
}

inline double rmse(const TimeSeries& measured, const TimeSeries& simulated) {
  return std::sqrt(mse(measured, simulated));
}

/// Normalized-RMSE goodness of fit:
///   100 * (1 - ||y - yhat|| / ||y - mean(y)||)
/// 100% is exact reproduction; a constant measured series leaves the
/// normalization undefined.
inline double best_fit(const TimeSeries& measured, const TimeSeries& simulated) {
  detail::check_pair(measured, simulated, 2);
  const double ybar = mean(measured);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double r = measured.samples[i] - simulated.samples[i];
    const double c = measured.samples[i] - ybar;
    num += r * r;
    den += c * c;
  }
  if (den == 0.0)
    throw MetricError("best_fit: measured series is constant; fit undefined");
  return 100.0 * (1.0 - std::sqrt(num) / std::sqrt(den));
}

/// Akaike final prediction error: mse * (1 + d/N) / (1 - d/N).
inline double fpe(double mse_value, std::size_t n_samples, std::size_t n_params) {
  if (n_samples <= n_params)
    throw MetricError("fpe: need more samples than parameters");
  const double ratio = static_cast<double>(n_params) / static_cast<double>(n_samples);
  return mse_value * (1.0 + ratio) / (1.0 - ratio);
}

inline FitReport make_fit_report(const TimeSeries& measured, const TimeSeries& simulated,
                                 std::size_t n_params) {
  FitReport rep;
  rep.n_samples = measured.size();
  rep.n_params = n_params;
  rep.mse = mse(measured, simulated);
  rep.rmse = std::sqrt(rep.mse);
  rep.fpe = fpe(rep.mse, rep.n_samples, rep.n_params);
  rep.best_fit_percent = best_fit(measured, simulated);
  return rep;
}

/// Step-response transients. The final value is the last sample; the response
/// must have settled (the final 10% of samples inside the settling band),
/// otherwise the metric is reported as undefined rather than guessed.
inline TransientMetrics transient_metrics(const TimeSeries& response, double reference_level,
                                          double settle_band = 0.02, double rise_lo = 0.1,
                                          double rise_hi = 0.9) {
  validate(response, "response");
  if (response.size() < 3) throw DataError("transient_metrics: series too short");
  const std::vector<double>& y = response.samples;
  const double final_value = y.back();
  const double band = settle_band * std::abs(final_value);

  const std::size_t tail_start = y.size() - std::max<std::size_t>(1, y.size() / 10);
  for (std::size_t i = tail_start; i < y.size(); ++i) {
    if (std::abs(y[i] - final_value) > band)
      throw MetricError("transient_metrics: response has not settled; settling time undefined");
  }
  if (!(final_value > 0.0))
    throw MetricError("transient_metrics: non-positive final value; overshoot undefined");

  auto first_crossing = [&](double level) -> double {
    if (y.front() >= level) return response.time_at(0);
    for (std::size_t i = 1; i < y.size(); ++i) {
      if (y[i] >= level) {
        const double frac = (level - y[i - 1]) / (y[i] - y[i - 1]);
        return response.time_at(i - 1) + frac * response.dt;
      }
    }
    return response.back_time();
  };

  TransientMetrics m;
  m.rise_time = first_crossing(rise_hi * final_value) - first_crossing(rise_lo * final_value);

  std::size_t last_outside = 0;
  bool any_outside = false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(y[i] - final_value) > band) {
      last_outside = i;
      any_outside = true;
    }
  }
  m.settling_time = any_outside ? response.time_at(last_outside + 1) - response.t0 : 0.0;

  const double peak = *std::max_element(y.begin(), y.end());
  m.overshoot_percent = 100.0 * std::max(0.0, peak - final_value) / final_value;
  m.steady_state_error = reference_level - final_value;
  return m;
}

}  // namespace ehsid
