// Nonlinear model of an electro-hydraulic servo actuator: proportional spool
// valve feeding a symmetric double-acting cylinder that drives a sprung,
// damped load with regularized Coulomb friction and elastic end stops.
// State is integrated with fixed-step classical RK4.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ehsid/errors.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

struct PlantParams {
  // Supply circuit. Supply/return pressures and fluid density are not part of
  // the actuator's catalogued constants; the defaults below (3000 psi supply,
  // 1 bar return, mineral-oil density) are assumptions and should be set
  // explicitly in configs when known.
  double supply_pressure = 20.68e6;   // Ps, Pa
  double return_pressure = 0.1e6;     // Pr, Pa
  double fluid_density = 850.0;       // rho, kg/m^3

  // Servo valve
  double servo_valve_gain = 2.2e-6;   // Kv, m/V
  double max_opening = 0.0178;        // Om, m
  double discharge_coeff = 0.6;       // Cf
  double leakage_area = 1e-12;        // ka, m^2 (cross-port)
  double valve_area = 2.318e-4;       // As, m^2

  // Cylinder and load
  double piston_area = 0.0080645;     // Ap, m^2 (12.5 in2)
  double piston_stroke = 1.524;       // Xs, m (60 in)
  double dead_volume = 3.048e-4;      // Vd, m^3 per chamber
  double bulk_modulus = 1.5168466044970393e9;  // beta, Pa (2.2e5 psi)
  double load_mass = 500.0;           // M, kg
  double spring_stiffness = 20.0;     // Ks, N/m, acts about mid-stroke
  double damping_coeff = 100.0;       // Bs, N/(m/s)
  double coulomb_friction = 450.0;    // alpha1, N
  double viscous_friction = 64.0;     // alpha2, N/(m/s)
  double contact_stiffness = 6.14e8;  // Cs, N/m
  double contact_damping = 200.0;     // Cd, N/(m/s)

  // Small-signal coefficients consumed only by the linearized model. The
  // catalogue lists flow_gain_coeff = 1.8e-6; flow_pressure_coeff and
  // total_leakage_coeff have no catalogued values, so the defaults here are
  // placeholders on the scale of the valve's null-region leakage.
  double flow_gain_coeff = 1.8e-6;      // Kq
  double flow_pressure_coeff = 1e-16;   // Kc, m^3/(s*Pa)
  double total_leakage_coeff = 3e-17;   // Ctp, m^3/(s*Pa)

  // Catalogued but unused by any model equation; kept for completeness.
  double specific_heat_ratio = 1.4;

  double input_limit = 10.0;                  // u clamp, V
  double friction_smoothing_velocity = 1e-3;  // v_eps, m/s

  double total_volume() const { return dead_volume + piston_area * piston_stroke; }
  double orifice_gain() const {
    return discharge_coeff * (valve_area / max_opening) * std::sqrt(2.0 / fluid_density);
  }
  double mid_pressure() const { return 0.5 * (supply_pressure + return_pressure); }
};

inline void validate(const PlantParams& p) {
  if (!(p.supply_pressure > p.return_pressure) || !(p.return_pressure >= 0.0))
    throw ConfigError("plant: require Ps > Pr >= 0");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("plant: ") + name + " must be strictly positive");
  };
  positive(p.piston_area, "piston_area");
  positive(p.piston_stroke, "piston_stroke");
  positive(p.dead_volume, "dead_volume");
  positive(p.valve_area, "valve_area");
  positive(p.max_opening, "max_opening");
  positive(p.bulk_modulus, "bulk_modulus");
  positive(p.load_mass, "load_mass");
  positive(p.spring_stiffness, "spring_stiffness");
  positive(p.contact_stiffness, "contact_stiffness");
  positive(p.fluid_density, "fluid_density");
  positive(p.input_limit, "input_limit");
  positive(p.friction_smoothing_velocity, "friction_smoothing_velocity");
  if (!(p.discharge_coeff > 0.0 && p.discharge_coeff <= 1.0))
    throw ConfigError("plant: discharge_coeff must be in (0, 1]");
  if (p.leakage_area < 0.0) throw ConfigError("plant: leakage_area must be >= 0");
  if (p.damping_coeff < 0.0 || p.viscous_friction < 0.0 || p.coulomb_friction < 0.0 ||
      p.contact_damping < 0.0)
    throw ConfigError("plant: damping and friction coefficients must be >= 0");
}

/// Piston position, velocity and the two chamber pressures; the ODE state.
struct PlantState {
  double position = 0.0;   // Xp, m, in [0, Xs] apart from elastic end penetration
  double velocity = 0.0;   // m/s
  double pressure1 = 0.0;  // Pa
  double pressure2 = 0.0;  // Pa

  /// Rest state: mid-stroke, balanced chambers at the supply/return midpoint.
  static PlantState equilibrium(const PlantParams& p) {
    PlantState s;
    s.position = 0.5 * p.piston_stroke;
    s.velocity = 0.0;
    s.pressure1 = p.mid_pressure();
    s.pressure2 = p.mid_pressure();
    return s;
  }
};

struct StateDerivative {
  double d_position = 0.0;
  double d_velocity = 0.0;
  double d_pressure1 = 0.0;
  double d_pressure2 = 0.0;
};

/// Spool displacement commanded by u: Kv * u with the command clamped to the
/// input limit and the result clamped to the mechanical opening.
inline double valve_displacement(double u, const PlantParams& p) {
  if (!std::isfinite(u)) throw InputError("valve_displacement: non-finite command");
  double cmd = std::clamp(u, -p.input_limit, p.input_limit);
  return std::clamp(p.servo_valve_gain * cmd, -p.max_opening, p.max_opening);
}

struct Flows {
  double q1 = 0.0;  // metered flow into chamber 1, m^3/s (negative: draining)
  double q2 = 0.0;  // metered flow out of chamber 2, m^3/s (negative: filling)
};

/// Sign-switched square-root orifice law. For xv >= 0 the supply meters into
/// chamber 1 and chamber 2 drains to the return; for xv < 0 the roles swap.
/// A negative pressure drop under a radical means no flow, not an error.
inline Flows orifice_flows(double xv, double p1, double p2, const PlantParams& p) {
  const double gain = p.orifice_gain();
  auto root = [](double dp) { return std::sqrt(std::max(dp, 0.0)); };
  Flows f;
  if (xv >= 0.0) {
    f.q1 = gain * xv * root(p.supply_pressure - p1);
    f.q2 = gain * xv * root(p2 - p.return_pressure);
  } else {
    f.q1 = gain * xv * root(p1 - p.return_pressure);
    f.q2 = gain * xv * root(p.supply_pressure - p2);
  }
  return f;
}

/// Constant-area cross-port leakage through the spool clearance, positive
/// from chamber 1 to chamber 2.
inline double leakage_flow(double p1, double p2, const PlantParams& p) {
  const double gain = p.discharge_coeff * p.leakage_area * std::sqrt(2.0 / p.fluid_density);
  double dp = p1 - p2;
  double sign = dp >= 0.0 ? 1.0 : -1.0;
  return sign * gain * std::sqrt(std::abs(dp));
}

/// One-sided elastic contact at the stroke ends; returns the force term that
/// enters the balance opposing positive acceleration. Damping acts only
/// while penetrating.
inline double contact_force(double position, double velocity, const PlantParams& p) {
  if (position > p.piston_stroke)
    return p.contact_stiffness * (position - p.piston_stroke) + p.contact_damping * velocity;
  if (position < 0.0)
    return p.contact_stiffness * position + p.contact_damping * velocity;
  return 0.0;
}

inline double friction_force(double velocity, const PlantParams& p) {
  return p.coulomb_friction * std::tanh(velocity / p.friction_smoothing_velocity) +
         p.viscous_friction * velocity;
}

inline StateDerivative plant_derivatives(const PlantState& s, double u, const PlantParams& p) {
  const double ap = p.piston_area;
  const double v1 = p.dead_volume + ap * s.position;
  const double v2 = p.dead_volume + ap * (p.piston_stroke - s.position);
  if (!(v1 > 0.0) || !(v2 > 0.0))
    throw ConfigError("plant_derivatives: degenerate chamber volume");

  const double xv = valve_displacement(u, p);
  const Flows f = orifice_flows(xv, s.pressure1, s.pressure2, p);
  const double qleak = leakage_flow(s.pressure1, s.pressure2, p);

  StateDerivative d;
  d.d_position = s.velocity;
  d.d_pressure1 = p.bulk_modulus / v1 * (f.q1 - qleak - ap * s.velocity);
  d.d_pressure2 = p.bulk_modulus / v2 * (ap * s.velocity - f.q2 + qleak);

  const double spring = p.spring_stiffness * (s.position - 0.5 * p.piston_stroke);
  const double force = ap * (s.pressure1 - s.pressure2) - friction_force(s.velocity, p) -
                       spring - p.damping_coeff * s.velocity -
                       contact_force(s.position, s.velocity, p);
  d.d_velocity = force / p.load_mass;
  return d;
}

namespace detail {

constexpr double kMaxStep = 1e-3;  // s; stability guard for the pressure states

inline PlantState rk4_stage_sum(const PlantState& s, double dt, const StateDerivative& k1,
                                const StateDerivative& k2, const StateDerivative& k3,
                                const StateDerivative& k4) {
  PlantState out = s;
  out.position += dt / 6.0 * (k1.d_position + 2.0 * k2.d_position + 2.0 * k3.d_position + k4.d_position);
  out.velocity += dt / 6.0 * (k1.d_velocity + 2.0 * k2.d_velocity + 2.0 * k3.d_velocity + k4.d_velocity);
  out.pressure1 += dt / 6.0 * (k1.d_pressure1 + 2.0 * k2.d_pressure1 + 2.0 * k3.d_pressure1 + k4.d_pressure1);
  out.pressure2 += dt / 6.0 * (k1.d_pressure2 + 2.0 * k2.d_pressure2 + 2.0 * k3.d_pressure2 + k4.d_pressure2);
  return out;
}

inline PlantState advance(const PlantState& s, double h, const StateDerivative& d) {
  PlantState out = s;
  out.position += h * d.d_position;
  out.velocity += h * d.d_velocity;
  out.pressure1 += h * d.d_pressure1;
  out.pressure2 += h * d.d_pressure2;
  return out;
}

}  // namespace detail

/// Classical 4th-order step with zero-order-hold input. Chamber pressures are
/// clamped to [Pr, Ps] afterwards: a valve-fed chamber cannot leave that band.
inline PlantState step_rk4(const PlantState& s, double u, double dt, const PlantParams& p) {
  if (!(dt > 0.0) || dt > detail::kMaxStep * (1.0 + 1e-9))
    throw ConfigError("step_rk4: dt must be in (0, 1 ms]");
  const StateDerivative k1 = plant_derivatives(s, u, p);
  const StateDerivative k2 = plant_derivatives(detail::advance(s, dt / 2.0, k1), u, p);
  const StateDerivative k3 = plant_derivatives(detail::advance(s, dt / 2.0, k2), u, p);
  const StateDerivative k4 = plant_derivatives(detail::advance(s, dt, k3), u, p);
  PlantState next = detail::rk4_stage_sum(s, dt, k1, k2, k3, k4);
  next.pressure1 = std::clamp(next.pressure1, p.return_pressure, p.supply_pressure);
  next.pressure2 = std::clamp(next.pressure2, p.return_pressure, p.supply_pressure);
  if (!std::isfinite(next.position) || !std::isfinite(next.velocity) ||
      !std::isfinite(next.pressure1) || !std::isfinite(next.pressure2))
    throw DivergenceError("step_rk4: non-finite state after integration step");
  return next;
}

/// Full-state record sampled at the input's period. Row i is the state at
/// time t0 + i*dt, before input sample i acts over [t_i, t_i + dt).
struct Trajectory {
  std::vector<double> t, u, xp, vp, p1, p2;
  std::size_t size() const { return t.size(); }
};

inline Trajectory simulate_trajectory(const TimeSeries& input, const PlantState& initial,
                                      const PlantParams& params, int substeps) {
  validate(input, "input");
  validate(params);
  if (substeps < 1) throw ConfigError("simulate: substeps must be >= 1");
  const double h = input.dt / static_cast<double>(substeps);
  if (h > detail::kMaxStep * (1.0 + 1e-9))
    throw ConfigError("simulate: internal step " + std::to_string(h) +
                      " s exceeds 1 ms; raise substeps");
  Trajectory traj;
  traj.t.reserve(input.size());
  PlantState s = initial;
  for (std::size_t i = 0; i < input.size(); ++i) {
    traj.t.push_back(input.time_at(i));
    traj.u.push_back(input.samples[i]);
    traj.xp.push_back(s.position);
    traj.vp.push_back(s.velocity);
    traj.p1.push_back(s.pressure1);
    traj.p2.push_back(s.pressure2);
    for (int k = 0; k < substeps; ++k) {
      try {
        s = step_rk4(s, input.samples[i], h, params);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (input sample " + std::to_string(i) +
                              ", substep " + std::to_string(k) + ")");
      }
    }
  }
  return traj;
}

/// Piston position sampled at the input's period (zero-order-hold input).
inline TimeSeries simulate_open_loop(const TimeSeries& input, const PlantState& initial,
                                     const PlantParams& params, int substeps) {
  Trajectory traj = simulate_trajectory(input, initial, params, substeps);
  TimeSeries out;
  out.t0 = input.t0;
  out.dt = input.dt;
  out.samples = std::move(traj.xp);
  return out;
}

}  // namespace ehsid
