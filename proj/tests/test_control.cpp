#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "ehsid/control.hpp"
#include "support/reference_pid.hpp"

using namespace ehsid;
using testsupport::ReferencePid;

TEST_CASE("nonlinear gain law") {
  // constants giving k = 4 - 3*sech(0.05 e)
  const double k0 = 1.0, k1 = 3.0, k2 = 0.05;
  CHECK(nonlinear_gain(0.0, k0, k1, k2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nonlinear_gain(1e6, k0, k1, k2) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(nonlinear_gain(-1e6, k0, k1, k2) == doctest::Approx(4.0).epsilon(1e-12));
  // e = 20 -> 4 - 3*sech(1)
  CHECK(std::abs(nonlinear_gain(20.0, k0, k1, k2) - 2.0558371790083436) < 1e-9);
}

TEST_CASE("gain law properties: even, bounded, non-decreasing in |e|") {
  const double k0 = 1.0, k1 = 3.0, k2 = 0.05;
  double prev = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double e = static_cast<double>(i) * 2.0;  // up to |k2 e| = 40
    const double k = nonlinear_gain(e, k0, k1, k2);
    CHECK(nonlinear_gain(-e, k0, k1, k2) == doctest::Approx(k).epsilon(1e-14));
    CHECK(k >= k0);
    CHECK(k <= k0 + k1);
    if (i > 0) CHECK(k >= prev);
    // strictly below the ceiling while k1*sech is representable against k
    if (i <= 300) CHECK(k < k0 + k1);
    prev = k;
  }
}

TEST_CASE("npid basics") {
  NpidConfig cfg;
  cfg.kp = 2.0;
  cfg.ki = 0.0;
  cfg.kd = 0.0;
  cfg.k1 = 0.0;  // k == k0 == 1

  ControllerState st;
  CHECK(npid_step(st, 0.0, 0.1, cfg) == 0.0);

  // pure P: u = Kp*k(e)*e every step
  st = {};
  for (int i = 0; i < 5; ++i) CHECK(npid_step(st, 1.5, 0.1, cfg) == doctest::Approx(3.0));

  CHECK_THROWS_AS(npid_step(st, std::nan(""), 0.1, cfg), InputError);
  CHECK_THROWS_AS(npid_step(st, 1.0, 0.0, cfg), ConfigError);
}

TEST_CASE("npid trapezoidal integral convention") {
  NpidConfig cfg;
  cfg.kp = 0.0;
  cfg.ki = 2.0;
  cfg.kd = 0.0;
  cfg.k1 = 0.0;
  cfg.u_min = -100.0;
  cfg.u_max = 100.0;
  ControllerState st;
  double u = 0.0;
  for (int i = 0; i < 10; ++i) u = npid_step(st, 1.0, 0.1, cfg);
  // constant error over 1 s: trapezoid gives 0.95 (half-step at the start)
  CHECK(u == doctest::Approx(2.0 * 0.95).epsilon(1e-12));
  CHECK(st.integral == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("npid with k1 = 0 matches a reference linear PID") {
  NpidConfig cfg;
  cfg.kp = 3.0;
  cfg.ki = 1.2;
  cfg.kd = 0.4;
  cfg.k0 = 1.0;
  cfg.k1 = 0.0;
  cfg.u_min = -2.0;
  cfg.u_max = 2.0;
  cfg.derivative_filter_tau = 0.25;

  ReferencePid ref(3.0, 1.2, 0.4, -2.0, 2.0, 0.25);
  ControllerState st;
  std::mt19937 rng(11);
  std::normal_distribution<double> dist(0.0, 1.0);
  double e = 0.0;
  for (int i = 0; i < 2000; ++i) {
    e = 0.95 * e + 0.3 * dist(rng);  // correlated errors, saturating episodes
    const double u_lib = npid_step(st, e, 0.05, cfg);
    const double u_ref = ref.update(e, 0.05);
    CHECK(std::abs(u_lib - u_ref) < 1e-12);
  }
}

TEST_CASE("command saturation bound holds in closed loop") {
  LinearTf g{{1.0}, {1.0, 1.0, 0.0}};  // 1/(s(s+1))
  TfTarget target(g);
  NpidConfig cfg;
  cfg.kp = 50.0;
  cfg.ki = 10.0;
  cfg.kd = 0.0;
  cfg.u_min = -1.0;
  cfg.u_max = 1.0;
  TimeSeries ref;
  ref.t0 = 0.0;
  ref.dt = 0.01;
  ref.samples.assign(3000, 2.0);
  const ClosedLoopResult res = simulate_closed_loop(target, cfg, ref);
  for (double u : res.command.samples) {
    CHECK(u <= 1.0);
    CHECK(u >= -1.0);
  }
}

TEST_CASE("anti-windup shortens recovery after saturation") {
  auto settle_time = [](bool anti_windup) {
    LinearTf g{{1.0}, {1.0, 0.0}};  // integrator plant
    TfTarget target(g);
    NpidConfig cfg;
    cfg.kp = 1.0;
    cfg.ki = 0.8;
    cfg.kd = 0.0;
    cfg.u_min = -1.0;
    cfg.u_max = 1.0;
    cfg.anti_windup = anti_windup;
    TimeSeries ref;
    ref.t0 = 0.0;
    ref.dt = 0.01;
    ref.samples.assign(6000, 5.0);  // far enough to saturate for seconds
    const ClosedLoopResult res = simulate_closed_loop(target, cfg, ref);
    // first time the response stays within 2% of the reference for good
    std::size_t last_out = 0;
    for (std::size_t i = 0; i < res.position.size(); ++i)
      if (std::abs(res.position.samples[i] - 5.0) > 0.1) last_out = i;
    return last_out;
  };
  const std::size_t with_aw = settle_time(true);
  const std::size_t without_aw = settle_time(false);
  CHECK(with_aw < without_aw);
}

TEST_CASE("ziegler-nichols rule") {
  const ZnResult r = ziegler_nichols(10.0, 2.0);
  CHECK(r.kp == doctest::Approx(6.0));
  CHECK(r.ki == doctest::Approx(6.0));
  CHECK(r.kd == doctest::Approx(1.5));

  // gains scale linearly in Kcr for fixed Tcr
  const ZnResult r2 = ziegler_nichols(20.0, 2.0);
  CHECK(r2.kp == doctest::Approx(2.0 * r.kp));
  CHECK(r2.ki == doctest::Approx(2.0 * r.ki));
  CHECK(r2.kd == doctest::Approx(2.0 * r.kd));

  // Ti*Td = Tcr^2/16 for any inputs
  for (double tcr : {0.5, 2.0, 9.7}) {
    const ZnResult z = ziegler_nichols(3.0, tcr);
    const double ti = z.kp / z.ki;
    const double td = z.kd / z.kp;
    CHECK(ti * td == doctest::Approx(tcr * tcr / 16.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ziegler_nichols(0.0, 1.0), ConfigError);
}

TEST_CASE("critical gain search on the textbook third-order plant") {
  // G = 1/(s(s+1)(s+2)): marginal stability at K = 6, w = sqrt(2)
  LinearTf g{{1.0}, {1.0, 3.0, 2.0, 0.0}};
  TfTarget target(g);
  CriticalGainOptions opt;
  opt.gain_lo = 0.5;
  opt.gain_hi = 50.0;
  opt.sim_time = 60.0;
  opt.dt = 1e-3;
  auto [kcr, tcr] = find_critical_gain(target, opt);
  CHECK(kcr == doctest::Approx(6.0).epsilon(0.05));
  CHECK(tcr == doctest::Approx(2.0 * std::numbers::pi / std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("doubling the plant gain halves the critical gain") {
  LinearTf g2{{2.0}, {1.0, 3.0, 2.0, 0.0}};
  TfTarget target(g2);
  CriticalGainOptions opt;
  opt.gain_lo = 0.5;
  opt.gain_hi = 50.0;
  opt.sim_time = 60.0;
  opt.dt = 1e-3;
  auto [kcr, tcr] = find_critical_gain(target, opt);
  CHECK(kcr == doctest::Approx(3.0).epsilon(0.07));
  CHECK(tcr > 0.0);
}

TEST_CASE("first-order loops never oscillate: tuning failure") {
  LinearTf g{{1.0}, {1.0, 1.0}};
  TfTarget target(g);
  CriticalGainOptions opt;
  opt.gain_lo = 0.1;
  opt.gain_hi = 1000.0;
  opt.sim_time = 20.0;
  opt.dt = 1e-3;
  CHECK_THROWS_AS(find_critical_gain(target, opt), TuningError);
}

TEST_CASE("zero reference from rest stays at rest") {
  LinearTf g{{1.0}, {1.0, 1.0, 0.0}};
  TfTarget target(g);
  NpidConfig cfg;
  cfg.kp = 5.0;
  cfg.ki = 1.0;
  cfg.kd = 0.1;
  TimeSeries ref;
  ref.t0 = 0.0;
  ref.dt = 0.01;
  ref.samples.assign(500, 0.0);
  const ClosedLoopResult res = simulate_closed_loop(target, cfg, ref);
  for (std::size_t i = 0; i < res.position.size(); ++i) {
    CHECK(res.position.samples[i] == 0.0);
    CHECK(res.command.samples[i] == 0.0);
    CHECK(res.gain.samples[i] == doctest::Approx(cfg.k0));
  }
}

TEST_CASE("closed-loop runs are bit-identical across repeats") {
  auto run = [] {
    LinearTf g{{1.0}, {1.0, 2.0, 1.0, 0.0}};
    TfTarget target(g);
    NpidConfig cfg;
    cfg.kp = 2.0;
    cfg.ki = 0.5;
    cfg.kd = 0.2;
    TimeSeries ref;
    ref.t0 = 0.0;
    ref.dt = 0.01;
    ref.samples.assign(2000, 1.0);
    return simulate_closed_loop(target, cfg, ref);
  };
  const ClosedLoopResult a = run();
  const ClosedLoopResult b = run();
  REQUIRE(a.position.size() == b.position.size());
  CHECK(std::memcmp(a.position.samples.data(), b.position.samples.data(),
                    a.position.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.command.samples.data(), b.command.samples.data(),
                    a.command.size() * sizeof(double)) == 0);
}

TEST_CASE("instantaneous gain settles to k0 as the loop converges") {
  LinearTf g{{4.0}, {1.0, 2.0, 0.0}};  // well-damped position loop
  TfTarget target(g);
  NpidConfig cfg;
  cfg.kp = 1.0;
  cfg.ki = 0.2;
  cfg.kd = 0.0;
  cfg.k0 = 1.0;
  cfg.k1 = 3.0;
  cfg.k2 = 0.5;
  TimeSeries ref;
  ref.t0 = 0.0;
  ref.dt = 0.01;
  ref.samples.assign(8000, 1.0);
  const ClosedLoopResult res = simulate_closed_loop(target, cfg, ref);
  CHECK(res.gain.samples[1] > 1.05);  // large initial error engages the gain
  CHECK(res.gain.samples.back() == doctest::Approx(cfg.k0).epsilon(1e-4));
}
