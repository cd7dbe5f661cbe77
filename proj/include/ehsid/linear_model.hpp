// Analytic linearization of the actuator and frequency-domain helpers.
#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ehsid/errors.hpp"
#include "ehsid/plant.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

/// Continuous-time transfer function, coefficients in descending powers of s.
struct LinearTf {
  std::vector<double> num;
  std::vector<double> den;
};

inline void validate(const LinearTf& tf) {
  if (tf.den.empty() || tf.num.empty()) throw ConfigError("transfer function: empty polynomial");
  if (tf.den.front() == 0.0) throw ConfigError("transfer function: zero leading denominator coefficient");
  if (tf.num.size() >= tf.den.size())
    throw ConfigError("transfer function: must be strictly proper");
  for (double c : tf.num)
    if (!std::isfinite(c)) throw ConfigError("transfer function: non-finite numerator");
  for (double c : tf.den)
    if (!std::isfinite(c)) throw ConfigError("transfer function: non-finite denominator");
}

struct LinearizationConstants {
  double actuator_gain = 0.0;    // Ka = Kq*Kv/Ap
  double natural_frequency = 0.0;  // wa = Ap*sqrt(4*beta/(Vt*M))
  double damping_ratio = 0.0;      // za = sqrt((4*beta/Vt)*(Kc+Ctp))/(2*Ap)
};

inline LinearizationConstants linearization_constants(const PlantParams& p) {
  validate(p);
  const double vt = p.total_volume();
  if (!(vt > 0.0) || !(p.load_mass > 0.0))
    throw ConfigError("linearization: total volume and load mass must be positive");
  LinearizationConstants c;
  c.actuator_gain = p.flow_gain_coeff * p.servo_valve_gain / p.piston_area;
  c.natural_frequency = p.piston_area * std::sqrt(4.0 * p.bulk_modulus / (vt * p.load_mass));
  c.damping_ratio = std::sqrt((4.0 * p.bulk_modulus / vt) *
                              (p.flow_pressure_coeff + p.total_leakage_coeff)) /
                    (2.0 * p.piston_area);
  return c;
}

/// Third-order linearized position model
///
///     G(s) = wa*Ka / (s^3 + 2*za*wa*s^2 + wa*s)
///
/// built verbatim from the defining form. Note the s^1 coefficient is wa, not
/// the conventional wa^2; the form is reproduced as defined rather than
/// silently corrected, so the resonant corner sits at sqrt(wa).
inline LinearTf linearized_tf(const PlantParams& p) {
  const LinearizationConstants c = linearization_constants(p);
  LinearTf tf;
  tf.num = {c.natural_frequency * c.actuator_gain};
  tf.den = {1.0, 2.0 * c.damping_ratio * c.natural_frequency, c.natural_frequency, 0.0};
  return tf;
}

inline std::complex<double> polyval(const std::vector<double>& coeffs, std::complex<double> s) {
  std::complex<double> acc(0.0, 0.0);
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

inline std::complex<double> evaluate(const LinearTf& tf, std::complex<double> s) {
  return polyval(tf.num, s) / polyval(tf.den, s);
}

/// |T(jw)| for the unity-feedback closed loop T = G/(1+G).
inline double closed_loop_magnitude(const LinearTf& g, double w) {
  const std::complex<double> jw(0.0, w);
  const std::complex<double> n = polyval(g.num, jw);
  const std::complex<double> d = polyval(g.den, jw);
  return std::abs(n / (d + n));
}

/// -3 dB bandwidth of the unity-feedback closed loop: the lowest frequency at
/// which |T(jw)| drops below 1/sqrt(2) of its value at the low end of the
/// search grid. Searched over [1e-3, 1e5] rad/s on a log grid, refined by
/// bisection.
inline double bandwidth(const LinearTf& g) {
  validate(g);
  constexpr double w_lo = 1e-3;
  constexpr double w_hi = 1e5;
  constexpr int points_per_decade = 200;
  const double reference = closed_loop_magnitude(g, w_lo);
  if (!(reference > 0.0) || !std::isfinite(reference))
    throw AnalysisError("bandwidth: closed loop has no finite low-frequency response");
  const double target = reference / std::sqrt(2.0);

  const int decades = 8;
  const int n = decades * points_per_decade;
  double prev_w = w_lo;
  double prev_m = reference;
  for (int i = 1; i <= n; ++i) {
    const double w = w_lo * std::pow(10.0, static_cast<double>(i) / points_per_decade);
    const double m = closed_loop_magnitude(g, w);
    if (m < target) {
      // bisect the bracketing interval
      double a = prev_w, b = w;
      for (int it = 0; it < 80 && (b - a) > 1e-12 * b; ++it) {
        const double mid = 0.5 * (a + b);
        if (closed_loop_magnitude(g, mid) < target)
          b = mid;
        else
          a = mid;
      }
      return 0.5 * (a + b);
    }
    prev_w = w;
    prev_m = m;
  }
  (void)prev_m;
  throw AnalysisError("bandwidth: no -3 dB crossing in [1e-3, 1e5] rad/s");
}

/// Fixed-step simulator for a strictly proper transfer function in
/// controllable canonical form; used for linear reference responses and as a
/// tuning target.
class TfSimulator {
public:
  explicit TfSimulator(const LinearTf& tf) {
    validate(tf);
    const double lead = tf.den.front();
    order_ = tf.den.size() - 1;
    den_.assign(tf.den.begin() + 1, tf.den.end());
    for (double& c : den_) c /= lead;
    num_.assign(order_, 0.0);
    const std::size_t offset = order_ - tf.num.size();
    for (std::size_t i = 0; i < tf.num.size(); ++i) num_[offset + i] = tf.num[i] / lead;
    state_.assign(order_, 0.0);
  }

  void reset() { std::fill(state_.begin(), state_.end(), 0.0); }

  double output() const {
    double y = 0.0;
    for (std::size_t i = 0; i < order_; ++i) y += num_[i] * state_[order_ - 1 - i];
    return y;
  }

  /// Advance by dt with constant input u (internally substepped RK4).
  void advance(double u, double dt, double max_step = 1e-3) {
    if (!(dt > 0.0)) throw ConfigError("TfSimulator: dt must be positive");
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt / max_step - 1e-12)));
    const double h = dt / substeps;
    for (int k = 0; k < substeps; ++k) rk4_step(u, h);
  }

private:
  void derivative(const std::vector<double>& x, double u, std::vector<double>& dx) const {
    // phase-variable chain: x[i]' = x[i+1], top integrator closes the loop
    for (std::size_t i = 0; i + 1 < order_; ++i) dx[i] = x[i + 1];
    double top = u;
    for (std::size_t i = 0; i < order_; ++i) top -= den_[i] * x[order_ - 1 - i];
    dx[order_ - 1] = top;
  }

  void rk4_step(double u, double h) {
    std::vector<double> k1(order_), k2(order_), k3(order_), k4(order_), tmp(order_);
    derivative(state_, u, k1);
    for (std::size_t i = 0; i < order_; ++i) tmp[i] = state_[i] + 0.5 * h * k1[i];
    derivative(tmp, u, k2);
    for (std::size_t i = 0; i < order_; ++i) tmp[i] = state_[i] + 0.5 * h * k2[i];
    derivative(tmp, u, k3);
    for (std::size_t i = 0; i < order_; ++i) tmp[i] = state_[i] + h * k3[i];
    derivative(tmp, u, k4);
    for (std::size_t i = 0; i < order_; ++i)
      state_[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (double x : state_)
      if (!std::isfinite(x)) throw DivergenceError("TfSimulator: state diverged");
  }

  std::size_t order_ = 0;
  std::vector<double> num_;  // numerator padded to length order_
  std::vector<double> den_;  // normalized, without the leading 1
  std::vector<double> state_;
};

/// Open-loop response of a transfer function to a sampled input (ZOH).
/// Output row i is the state at time t_i, matching the plant convention.
inline TimeSeries simulate_tf_open_loop(const LinearTf& tf, const TimeSeries& input,
                                        double max_step = 1e-3) {
  validate(input, "input");
  TfSimulator sim(tf);
  TimeSeries out;
  out.t0 = input.t0;
  out.dt = input.dt;
  out.samples.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    out.samples.push_back(sim.output());
    sim.advance(input.samples[i], input.dt, max_step);
  }
  return out;
}

}  // namespace ehsid
