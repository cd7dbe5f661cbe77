#include "doctest.h"

#include <cmath>

#include "ehsid/plant.hpp"
#include "ehsid/signals.hpp"

using namespace ehsid;

namespace {

PlantParams table_params() { return PlantParams{}; }

}  // namespace

TEST_CASE("valve displacement: gain, saturation, input validity") {
  const PlantParams p = table_params();
  CHECK(valve_displacement(0.0, p) == 0.0);
  CHECK(valve_displacement(10.0, p) == doctest::Approx(2.2e-5).epsilon(1e-15));
  // command clamps at +/-10 V before the valve gain applies
  CHECK(valve_displacement(15.0, p) == doctest::Approx(2.2e-5).epsilon(1e-15));
  CHECK(valve_displacement(-15.0, p) == doctest::Approx(-2.2e-5).epsilon(1e-15));
  CHECK_THROWS_AS(valve_displacement(std::nan(""), p), InputError);
  CHECK_THROWS_AS(valve_displacement(std::numeric_limits<double>::infinity(), p), InputError);
}

TEST_CASE("orifice flows: zero opening, zero pressure drop, golden value") {
  const PlantParams p = table_params();
  const double mid = p.mid_pressure();

  Flows f = orifice_flows(0.0, mid, mid, p);
  CHECK(f.q1 == 0.0);
  CHECK(f.q2 == 0.0);
  CHECK(leakage_flow(mid, mid, p) == 0.0);

  // chamber 1 at supply pressure: no drop under the radical, no flow
  f = orifice_flows(1e-5, p.supply_pressure, p.supply_pressure, p);
  CHECK(f.q1 == 0.0);

  // golden value: direct evaluation of Cf*(As/Om)*sqrt(2/rho)*xv*sqrt(Ps-P1)
  f = orifice_flows(1e-5, 1e6, mid, p);
  const double k1 = 0.6 * (2.318e-4 / 0.0178) * std::sqrt(2.0 / 850.0);
  const double expected = k1 * 1e-5 * std::sqrt(20.68e6 - 1e6);
  CHECK(f.q1 == doctest::Approx(1.681367938483389e-05).epsilon(1e-12));
  CHECK(f.q1 == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("orifice flows mirror when the spool reverses and chambers swap") {
  const PlantParams p = table_params();
  const double p1 = 4e6, p2 = 11e6;
  for (double xv : {1e-6, 5e-6, 2.2e-5}) {
    const Flows fwd = orifice_flows(xv, p1, p2, p);
    const Flows rev = orifice_flows(-xv, p2, p1, p);
    // q1 measures inflow, q2 outflow, so the mirrored pair swaps and negates
    CHECK(rev.q1 == doctest::Approx(-fwd.q2).epsilon(1e-14));
    CHECK(rev.q2 == doctest::Approx(-fwd.q1).epsilon(1e-14));
  }
}

TEST_CASE("cross-port leakage follows the orifice law") {
  const PlantParams p = table_params();
  const double q = leakage_flow(2e6, 1e6, p);
  CHECK(q == doctest::Approx(2.9104275004359953e-11).epsilon(1e-12));
  CHECK(leakage_flow(1e6, 2e6, p) == doctest::Approx(-q).epsilon(1e-14));
}

TEST_CASE("equilibrium is a fixed point of the derivatives") {
  const PlantParams p = table_params();
  const PlantState s = PlantState::equilibrium(p);
  const StateDerivative d = plant_derivatives(s, 0.0, p);
  CHECK(d.d_position == 0.0);
  CHECK(d.d_velocity == 0.0);
  CHECK(d.d_pressure1 == 0.0);
  CHECK(d.d_pressure2 == 0.0);
}

TEST_CASE("force balance: pressure difference and friction terms") {
  const PlantParams p = table_params();

  PlantState s = PlantState::equilibrium(p);
  s.pressure1 = s.pressure2 + 1e5;
  StateDerivative d = plant_derivatives(s, 0.0, p);
  CHECK(d.d_velocity == doctest::Approx(1e5 * p.piston_area / p.load_mass).epsilon(1e-12));
  CHECK(d.d_velocity == doctest::Approx(1.6129).epsilon(1e-4));

  s = PlantState::equilibrium(p);
  s.velocity = 1.0;
  d = plant_derivatives(s, 0.0, p);
  // alpha1*tanh(1/v_eps) + alpha2*1 + Bs*1, tanh saturated at 1
  CHECK(d.d_velocity == doctest::Approx(-(450.0 + 64.0 + 100.0) / 500.0).epsilon(1e-9));
}

TEST_CASE("degenerate chamber volume is a configuration error") {
  PlantParams p = table_params();
  PlantState s = PlantState::equilibrium(p);
  s.position = -2.0 * p.dead_volume / p.piston_area;  // drives V1 below zero
  CHECK_THROWS_AS(plant_derivatives(s, 0.0, p), ConfigError);
}

TEST_CASE("rk4 step: fixed point, dt guard, pressure clamp") {
  const PlantParams p = table_params();
  const PlantState eq = PlantState::equilibrium(p);

  PlantState next = step_rk4(eq, 0.0, 1e-3, p);
  CHECK(next.position == doctest::Approx(eq.position).epsilon(1e-15));
  CHECK(next.velocity == doctest::Approx(0.0));
  CHECK(next.pressure1 == doctest::Approx(eq.pressure1).epsilon(1e-15));

  CHECK_THROWS_AS(step_rk4(eq, 0.0, 0.0, p), ConfigError);
  CHECK_THROWS_AS(step_rk4(eq, 0.0, 2e-3, p), ConfigError);

  // hold full positive command against the supply; pressures stay in band
  PlantState s = eq;
  for (int i = 0; i < 2000; ++i) {
    s = step_rk4(s, 10.0, 1e-3, p);
    CHECK(s.pressure1 >= p.return_pressure);
    CHECK(s.pressure1 <= p.supply_pressure);
    CHECK(s.pressure2 >= p.return_pressure);
    CHECK(s.pressure2 <= p.supply_pressure);
  }
}

TEST_CASE("positive command moves the piston forward") {
  const PlantParams p = table_params();
  TimeSeries u{0.0, 0.01, std::vector<double>(101, 1.0)};
  TimeSeries y = simulate_open_loop(u, PlantState::equilibrium(p), p, 10);
  CHECK(y.samples.back() > y.samples.front());
  // monotone: velocity never goes negative under a steady positive command
  for (std::size_t i = 1; i < y.size(); ++i) CHECK(y.samples[i] >= y.samples[i - 1]);
}

TEST_CASE("integrator self-convergence is fourth order") {
  PlantParams p = table_params();
  p.friction_smoothing_velocity = 0.05;  // keep the friction knee gentle
  const PlantState eq = PlantState::equilibrium(p);

  auto endpoint = [&](double dt) {
    PlantState s = eq;
    const int n = static_cast<int>(std::lround(1.0 / dt));
    for (int i = 0; i < n; ++i) s = step_rk4(s, 2.0, dt, p);
    return s.position;
  };
  const double x1 = endpoint(1e-3);
  const double x2 = endpoint(5e-4);
  const double x3 = endpoint(2.5e-4);
  const double e1 = std::abs(x1 - x2);
  const double e2 = std::abs(x2 - x3);
  REQUIRE(e2 > 0.0);
  CHECK(e1 / e2 >= 8.0);
  // halving dt moves the 1 s endpoint by far less than a micron
  CHECK(e1 < 1e-6);
}

TEST_CASE("open-loop simulation invariants under chirp excitation") {
  const PlantParams p = table_params();
  ChirpSpec spec;
  spec.amplitude = 9.0;
  spec.f0 = 0.1;
  spec.f1 = 2.0;
  spec.duration = 5.0;
  spec.dt = 1e-3;
  const TimeSeries u = chirp(spec);
  const Trajectory traj = simulate_trajectory(u, PlantState::equilibrium(p), p, 1);
  const double margin = p.supply_pressure * p.piston_area / p.contact_stiffness;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(traj.xp[i] >= -margin);
    CHECK(traj.xp[i] <= p.piston_stroke + margin);
    CHECK(traj.p1[i] >= p.return_pressure);
    CHECK(traj.p1[i] <= p.supply_pressure);
    CHECK(traj.p2[i] >= p.return_pressure);
    CHECK(traj.p2[i] <= p.supply_pressure);
  }
}

TEST_CASE("zero input from equilibrium holds position") {
  const PlantParams p = table_params();
  TimeSeries u{0.0, 0.05, std::vector<double>(41, 0.0)};
  TimeSeries y = simulate_open_loop(u, PlantState::equilibrium(p), p, 50);
  for (double v : y.samples) CHECK(v == doctest::Approx(0.5 * p.piston_stroke).epsilon(1e-12));
}

TEST_CASE("simulation errors carry context") {
  const PlantParams p = table_params();
  TimeSeries u{0.0, 0.05, std::vector<double>(10, 0.0)};
  CHECK_THROWS_AS(simulate_open_loop(u, PlantState::equilibrium(p), p, 0), ConfigError);
  // dt/substeps must come out at or below 1 ms
  CHECK_THROWS_AS(simulate_open_loop(u, PlantState::equilibrium(p), p, 10), ConfigError);
  CHECK_NOTHROW(simulate_open_loop(u, PlantState::equilibrium(p), p, 50));
}
