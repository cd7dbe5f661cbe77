// Nonlinear-gain PID control: a PID whose three terms share one
// error-dependent gain k(e) = k0 + k1*(1 - sech(k2*e)), plus Ziegler-Nichols
// tuning via a simulated critical-gain search and closed-loop simulation
// against either the nonlinear plant or an identified model.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "ehsid/errors.hpp"
#include "ehsid/linear_model.hpp"
#include "ehsid/plant.hpp"
#include "ehsid/sysid.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

struct NpidConfig {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  // nonlinear gain constants: k0 minimum, k1 range, k2 rate
  double k0 = 1.0;
  double k1 = 3.0;
  double k2 = 0.05;
  double u_min = -10.0;  // V
  double u_max = 10.0;   // V
  double derivative_filter_tau = 0.0;  // s; 0 selects the 5*dt default
  bool anti_windup = true;
};

inline void validate(const NpidConfig& c) {
  if (!(c.k0 > 0.0)) throw ConfigError("npid: k0 must be positive");
  if (c.k1 < 0.0 || c.k2 < 0.0) throw ConfigError("npid: k1 and k2 must be >= 0");
  if (!(c.u_min < c.u_max)) throw ConfigError("npid: require u_min < u_max");
  if (c.kp < 0.0 || c.ki < 0.0 || c.kd < 0.0)
    throw ConfigError("npid: gains must be >= 0");
  if (c.derivative_filter_tau < 0.0)
    throw ConfigError("npid: derivative filter time must be >= 0");
}

/// k(e) = k0 + k1*(1 - sech(k2*e)), evaluated through the exponential form
/// with sech taken as 0 once |k2*e| > 40 (it is below 1e-17 there).
/// Bounds: k(0) = k0, k -> k0 + k1 as |e| -> infinity.
inline double nonlinear_gain(double e, double k0, double k1, double k2) {
  const double x = k2 * e;
  double sech = 0.0;
  if (std::abs(x) <= 40.0) sech = 2.0 / (std::exp(x) + std::exp(-x));
  return k0 + k1 * (1.0 - sech);
}

/// Discrete controller state; single-owner during a simulation run.
struct ControllerState {
  double integral = 0.0;             // trapezoidal accumulation of e, V*s-equivalent
  double prev_error = 0.0;           // raw error one step back
  double prev_filtered_error = 0.0;  // low-passed error for the derivative
  bool initialized = false;
};

/// One NPID update:
///   u = k(e) * (Kp*e + Ki*integral(e) + Kd*d/dt filt(e))
/// with trapezoidal integration, a first-order-filtered backward-difference
/// derivative, output clamping, and conditional integration while the output
/// is saturated in the direction of the error. On the first call the filter
/// is seeded with e (no derivative kick) and the trapezoid sees a zero
/// previous error (the first step contributes dt*e/2).
inline double npid_step(ControllerState& state, double e, double dt, const NpidConfig& cfg) {
  if (!std::isfinite(e)) throw InputError("npid_step: non-finite error");
  if (!(dt > 0.0)) throw ConfigError("npid_step: dt must be positive");

  const double tau = cfg.derivative_filter_tau > 0.0 ? cfg.derivative_filter_tau : 5.0 * dt;
  if (!state.initialized) {
    state.prev_filtered_error = e;
    state.prev_error = 0.0;
    state.initialized = true;
  }

  const double filtered = state.prev_filtered_error +
                          (dt / (tau + dt)) * (e - state.prev_filtered_error);
  const double derivative = (filtered - state.prev_filtered_error) / dt;
  const double integral_candidate = state.integral + 0.5 * dt * (e + state.prev_error);

  const double k = nonlinear_gain(e, cfg.k0, cfg.k1, cfg.k2);
  const double raw = k * (cfg.kp * e + cfg.ki * integral_candidate + cfg.kd * derivative);

  bool accept_integral = true;
  if (cfg.anti_windup) {
    if ((raw > cfg.u_max && e > 0.0) || (raw < cfg.u_min && e < 0.0)) accept_integral = false;
  }
  double u = raw;
  if (!accept_integral)
    u = k * (cfg.kp * e + cfg.ki * state.integral + cfg.kd * derivative);
  else
    state.integral = integral_candidate;

  state.prev_error = e;
  state.prev_filtered_error = filtered;
  return std::clamp(u, cfg.u_min, cfg.u_max);
}

/// Anything a feedback loop can drive: the nonlinear plant, an identified
/// ARX model, or a continuous transfer function.
class ControlTarget {
public:
  virtual ~ControlTarget() = default;
  virtual void reset() = 0;
  virtual double output() const = 0;
  virtual void advance(double u, double dt) = 0;
  /// Preferred loop period, or 0 when any period works.
  virtual double native_period() const { return 0.0; }
};

/// Nonlinear plant target; output is the position deviation from the initial
/// state so references are expressed as displacements.
class PlantTarget final : public ControlTarget {
public:
  PlantTarget(const PlantParams& params, const PlantState& initial, double max_step = 1e-3)
      : params_(params), initial_(initial), state_(initial), max_step_(max_step) {
    validate(params_);
  }

  void reset() override { state_ = initial_; }
  double output() const override { return state_.position - initial_.position; }

  void advance(double u, double dt) override {
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt / max_step_ - 1e-12)));
    const double h = dt / substeps;
    for (int i = 0; i < substeps; ++i) state_ = step_rk4(state_, u, h, params_);
  }

  const PlantState& state() const { return state_; }

private:
  PlantParams params_;
  PlantState initial_;
  PlantState state_;
  double max_step_;
};

/// Identified-model target; steps the ARX difference equation at the model's
/// own sample period. Requires nk >= 1 (a sampled loop cannot honor direct
/// feedthrough).
class ArxTarget final : public ControlTarget {
public:
  explicit ArxTarget(const ArxModel& model) : model_(model) {
    validate(model_);
    if (model_.nk < 1)
      throw ConfigError("ArxTarget: closed-loop simulation needs nk >= 1");
    reset();
  }

  void reset() override {
    y_past_.assign(static_cast<std::size_t>(model_.na), 0.0);
    u_past_.assign(static_cast<std::size_t>(model_.nk + model_.nb - 1), 0.0);
    y_ = 0.0;
  }

  double output() const override { return y_; }
  double native_period() const override { return model_.sample_time; }

  void advance(double u, double dt) override {
    if (std::abs(dt - model_.sample_time) > 1e-9 * model_.sample_time)
      throw ConfigError("ArxTarget: loop period must equal the model sample time");
    // u_past_[0] is the command applied this period; the model's y(t+1) uses
    // u(t+1-nk-(j-1)), i.e. u_past_[nk + j - 2].
    for (std::size_t i = u_past_.size() - 1; i > 0; --i) u_past_[i] = u_past_[i - 1];
    u_past_[0] = u;
    double v = 0.0;
    for (int i = 1; i <= model_.na; ++i)
      v -= model_.a[static_cast<std::size_t>(i - 1)] * y_past_[static_cast<std::size_t>(i - 1)];
    for (int j = 1; j <= model_.nb; ++j)
      v += model_.b[static_cast<std::size_t>(j - 1)] * u_past_[static_cast<std::size_t>(model_.nk + j - 2)];
    if (!std::isfinite(v) || std::abs(v) > 1e15)
      throw DivergenceError("ArxTarget: model output diverged");
    if (!y_past_.empty()) {
      for (std::size_t i = y_past_.size() - 1; i > 0; --i) y_past_[i] = y_past_[i - 1];
      y_past_[0] = v;
    }
    y_ = v;
  }

private:
  ArxModel model_;
  std::vector<double> y_past_;  // most recent first
  std::vector<double> u_past_;  // most recent first (u_past_[0] is current)
  double y_ = 0.0;
};

/// Continuous transfer-function target (used for tuning oracles).
class TfTarget final : public ControlTarget {
public:
  explicit TfTarget(const LinearTf& tf, double max_step = 1e-3) : sim_(tf), max_step_(max_step) {}
  void reset() override { sim_.reset(); }
  double output() const override { return sim_.output(); }
  void advance(double u, double dt) override { sim_.advance(u, dt, max_step_); }

private:
  TfSimulator sim_;
  double max_step_;
};

struct ZnResult {
  double critical_gain = 0.0;    // Kcr
  double critical_period = 0.0;  // Tcr, s
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

/// Classic ultimate-cycle PID rule: Kp = 0.6 Kcr, Ti = 0.5 Tcr, Td = 0.125 Tcr.
inline ZnResult ziegler_nichols(double critical_gain, double critical_period) {
  if (!(critical_gain > 0.0) || !(critical_period > 0.0))
    throw ConfigError("ziegler_nichols: Kcr and Tcr must be positive");
  ZnResult r;
  r.critical_gain = critical_gain;
  r.critical_period = critical_period;
  r.kp = 0.6 * critical_gain;
  const double ti = 0.5 * critical_period;
  const double td = 0.125 * critical_period;
  r.ki = r.kp / ti;
  r.kd = r.kp * td;
  return r;
}

struct CriticalGainOptions {
  double gain_lo = 1e-2;
  double gain_hi = 1e2;
  double sim_time = 60.0;   // s per trial
  double dt = 1e-3;         // loop period, s
  double step_reference = 1.0;
  double sustain_tolerance = 0.05;  // amplitude ratio band counted as sustained
  int max_iterations = 60;
};

namespace detail {

struct OscillationAnalysis {
  enum class Kind { none, decaying, sustained, growing } kind = Kind::none;
  double period = 0.0;  // mean peak-to-peak period over the last cycles
};

/// Classify the tail of a step response by the amplitude trend of successive
/// oscillation cycles, measured between alternating local extrema.
inline OscillationAnalysis classify_oscillation(const std::vector<double>& y, double dt,
                                                double tolerance) {
  OscillationAnalysis res;
  if (y.size() < 8) return res;
  double lo = y[0], hi = y[0];
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  if (!(span > 0.0)) return res;
  const double noise = 1e-9 * span;

  std::vector<double> ext_val;
  std::vector<std::size_t> ext_idx;
  std::vector<int> ext_sign;  // +1 maximum, -1 minimum
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    int sign = 0;
    if (y[i] >= y[i - 1] && y[i] > y[i + 1] + noise)
      sign = +1;
    else if (y[i] <= y[i - 1] && y[i] < y[i + 1] - noise)
      sign = -1;
    if (sign == 0) continue;
    if (!ext_sign.empty() && ext_sign.back() == sign) {
      // same-type extremum in a row: keep the more extreme one
      if ((sign > 0 && y[i] > ext_val.back()) || (sign < 0 && y[i] < ext_val.back())) {
        ext_val.back() = y[i];
        ext_idx.back() = i;
      }
      continue;
    }
    ext_val.push_back(y[i]);
    ext_idx.push_back(i);
    ext_sign.push_back(sign);
  }

  std::vector<std::size_t> peak_idx;
  for (std::size_t i = 0; i < ext_sign.size(); ++i)
    if (ext_sign[i] > 0) peak_idx.push_back(ext_idx[i]);
  if (ext_val.size() < 6 || peak_idx.size() < 3) return res;

  // half-cycle amplitudes between successive extrema
  std::vector<double> amp;
  for (std::size_t i = 1; i < ext_val.size(); ++i)
    amp.push_back(0.5 * std::abs(ext_val[i] - ext_val[i - 1]));

  const std::size_t use = std::min<std::size_t>(amp.size(), 10);  // about 5 cycles
  const std::size_t begin = amp.size() - use;
  const std::size_t half = use / 2;
  double first_half = 0.0, second_half = 0.0;
  for (std::size_t i = 0; i < half; ++i) first_half += amp[begin + i];
  for (std::size_t i = half; i < use; ++i) second_half += amp[begin + i];
  first_half /= static_cast<double>(half);
  second_half /= static_cast<double>(use - half);
  if (first_half <= 1e-6 * span) return res;  // numeric ripple, not oscillation

  const double ratio = second_half / first_half;
  if (ratio > 1.0 + tolerance)
    res.kind = OscillationAnalysis::Kind::growing;
  else if (ratio < 1.0 - tolerance)
    res.kind = OscillationAnalysis::Kind::decaying;
  else
    res.kind = OscillationAnalysis::Kind::sustained;

  const std::size_t n_p = std::min<std::size_t>(peak_idx.size(), 6);  // last 5 periods
  double period_sum = 0.0;
  for (std::size_t i = peak_idx.size() - n_p + 1; i < peak_idx.size(); ++i)
    period_sum += static_cast<double>(peak_idx[i] - peak_idx[i - 1]) * dt;
  res.period = period_sum / static_cast<double>(n_p - 1);
  return res;
}

inline OscillationAnalysis probe_p_only_loop(ControlTarget& target, double gain,
                                             const CriticalGainOptions& opt) {
  target.reset();
  const std::size_t n = static_cast<std::size_t>(std::llround(opt.sim_time / opt.dt));
  std::vector<double> y;
  y.reserve(n);
  try {
    for (std::size_t i = 0; i < n; ++i) {
      const double meas = target.output();
      y.push_back(meas);
      const double u = gain * (opt.step_reference - meas);
      target.advance(u, opt.dt);
    }
  } catch (const DivergenceError&) {
    OscillationAnalysis res;
    res.kind = OscillationAnalysis::Kind::growing;
    // best-effort period from what was recorded
    OscillationAnalysis partial = classify_oscillation(y, opt.dt, opt.sustain_tolerance);
    res.period = partial.period;
    return res;
  }
  // analyze the tail only, past the initial transient
  const std::size_t skip = y.size() / 4;
  std::vector<double> tail(y.begin() + static_cast<long>(skip), y.end());
  return classify_oscillation(tail, opt.dt, opt.sustain_tolerance);
}

}  // namespace detail

/// Software ultimate-cycle experiment: bisect the proportional gain of a
/// unity-feedback P-only loop between a decaying and a growing step-response
/// oscillation until the oscillation is amplitude-sustained; returns
/// (Kcr, Tcr).
inline std::pair<double, double> find_critical_gain(ControlTarget& target,
                                                    const CriticalGainOptions& opt = {}) {
  if (!(opt.gain_lo > 0.0) || !(opt.gain_hi > opt.gain_lo))
    throw ConfigError("find_critical_gain: bad gain bounds");
  using Kind = detail::OscillationAnalysis::Kind;

  auto at_hi = detail::probe_p_only_loop(target, opt.gain_hi, opt);
  if (at_hi.kind == Kind::none || at_hi.kind == Kind::decaying)
    throw TuningError(
        "find_critical_gain: no growing oscillation up to the upper gain bound; "
        "the loop has no critical gain in range - supply gains manually");
  auto at_lo = detail::probe_p_only_loop(target, opt.gain_lo, opt);
  if (at_lo.kind == Kind::growing)
    throw TuningError(
        "find_critical_gain: oscillation already grows at the lower gain bound; "
        "lower the search bounds or supply gains manually");
  if (at_lo.kind == Kind::sustained) return {opt.gain_lo, at_lo.period};

  double lo = opt.gain_lo, hi = opt.gain_hi;
  double best_gain = hi;
  double best_period = at_hi.period;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double mid = std::sqrt(lo * hi);  // geometric: bounds may span decades
    auto res = detail::probe_p_only_loop(target, mid, opt);
    if (res.kind == Kind::sustained) {
      best_gain = mid;
      best_period = res.period;
      break;
    }
    if (res.kind == Kind::growing) {
      hi = mid;
      best_gain = mid;
      if (res.period > 0.0) best_period = res.period;
    } else {
      lo = mid;
    }
    if ((hi - lo) < 1e-4 * hi) {
      best_gain = 0.5 * (hi + lo);
      auto fin = detail::probe_p_only_loop(target, best_gain, opt);
      if (fin.period > 0.0) best_period = fin.period;
      break;
    }
  }
  if (!(best_period > 0.0))
    throw TuningError("find_critical_gain: could not measure an oscillation period");
  return {best_gain, best_period};
}

struct ClosedLoopResult {
  TimeSeries position;      // y, aligned with the reference
  TimeSeries command;       // u
  TimeSeries error;         // e = r - y
  TimeSeries gain;          // instantaneous k(e)
};

/// Sampled closed loop: per reference sample, e = r - y, u = npid_step(e),
/// u held on the target for one period. Row i records the state before
/// sample i's command acts.
inline ClosedLoopResult simulate_closed_loop(ControlTarget& target, const NpidConfig& cfg,
                                             const TimeSeries& reference) {
  validate(cfg);
  validate(reference, "reference");
  const double native = target.native_period();
  if (native > 0.0 && std::abs(reference.dt - native) > 1e-9 * native)
    throw ConfigError("simulate_closed_loop: reference period must match the target's sample time");

  ClosedLoopResult out;
  for (TimeSeries* ts : {&out.position, &out.command, &out.error, &out.gain}) {
    ts->t0 = reference.t0;
    ts->dt = reference.dt;
    ts->samples.reserve(reference.size());
  }
  ControllerState state;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double y = target.output();
    const double e = reference.samples[i] - y;
    double u = 0.0;
    try {
      u = npid_step(state, e, reference.dt, cfg);
      target.advance(u, reference.dt);
    } catch (const DivergenceError& ex) {
      throw DivergenceError(std::string(ex.what()) + " (reference sample " + std::to_string(i) + ")");
    }
    out.position.samples.push_back(y);
    out.command.samples.push_back(u);
    out.error.samples.push_back(e);
    out.gain.samples.push_back(nonlinear_gain(e, cfg.k0, cfg.k1, cfg.k2));
  }
  return out;
}

}  // namespace ehsid
