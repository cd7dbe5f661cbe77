#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "ehsid/leastsq.hpp"
#include "ehsid/sysid.hpp"

using namespace ehsid;

namespace {

// Independent ARX data generator: plain difference-equation recursion used as
// the synthesize-and-recover oracle.
TimeSeries oracle_arx_response(const std::vector<double>& a, const std::vector<double>& b,
                               int nk, const TimeSeries& u) {
  TimeSeries y;
  y.t0 = u.t0;
  y.dt = u.dt;
  y.samples.assign(u.size(), 0.0);
  for (std::size_t t = 0; t < u.size(); ++t) {
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (t >= i + 1) v -= a[i] * y.samples[t - i - 1];
    for (std::size_t j = 0; j < b.size(); ++j) {
      const long idx = static_cast<long>(t) - nk - static_cast<long>(j);
      if (idx >= 0) v += b[j] * u.samples[static_cast<std::size_t>(idx)];
    }
    y.samples[t] = v;
  }
  return y;
}

// Five tones spread across the Nyquist band at integer cycle counts over
// `window` samples, so every contiguous window-sized stretch has an exactly
// zero sample mean.
TimeSeries pe_multisine(std::size_t total, std::size_t window, double dt) {
  TimeSeries u;
  u.t0 = 0.0;
  u.dt = dt;
  u.samples.reserve(total);
  const double fractions[] = {0.048, 0.143, 0.239, 0.35, 0.461};  // cycles per sample
  for (std::size_t i = 0; i < total; ++i) {
    double v = 0.0;
    for (double f : fractions) {
      const double k = std::max(1.0, std::round(f * static_cast<double>(window)));
      v += std::sin(2.0 * std::numbers::pi * k / static_cast<double>(window) *
                        static_cast<double>(i) +
                    0.29 * k);
    }
    u.samples.push_back(v);
  }
  return u;
}

TimeSeries pe_multisine(std::size_t n, double dt) { return pe_multisine(n, n, dt); }

Dataset drop_head(const Dataset& d, std::size_t burn) {
  Dataset out;
  out.u.t0 = d.u.time_at(burn);
  out.u.dt = d.u.dt;
  out.u.samples.assign(d.u.samples.begin() + static_cast<long>(burn), d.u.samples.end());
  out.y.t0 = out.u.t0;
  out.y.dt = d.y.dt;
  out.y.samples.assign(d.y.samples.begin() + static_cast<long>(burn), d.y.samples.end());
  return out;
}

const std::vector<double> kTrueA = {-1.5, 0.7, -0.1};
const std::vector<double> kTrueB = {0.05, 0.03, 0.01};

// `window` sets the tone commensuration (use the estimation length when the
// dataset will be split).
Dataset make_oracle_dataset_windowed(std::size_t n, std::size_t window, double noise_sigma = 0.0,
                                     unsigned seed = 1234) {
  TimeSeries u = pe_multisine(n + 100, window, 0.05);
  TimeSeries y = oracle_arx_response(kTrueA, kTrueB, 1, u);
  if (noise_sigma > 0.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, noise_sigma);
    for (double& v : y.samples) v += dist(rng);
  }
  return drop_head({u, y}, 100);  // discard the startup transient
}

Dataset make_oracle_dataset(std::size_t n, double noise_sigma = 0.0, unsigned seed = 1234) {
  return make_oracle_dataset_windowed(n, n, noise_sigma, seed);
}

}  // namespace

TEST_CASE("least squares residual is orthogonal to the regressors") {
  std::mt19937 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  const std::size_t m = 200, n = 5;
  Matrix a(m, n);
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = dist(rng);
    b[i] = dist(rng);
  }
  Matrix a_copy = a;
  std::vector<double> b_copy = b;
  const LeastSquaresSolution sol = solve_least_squares(a, b);
  REQUIRE(sol.x.size() == n);
  CHECK(sol.condition < 100.0);

  std::vector<double> resid(m);
  for (std::size_t i = 0; i < m; ++i) {
    double yhat = 0.0;
    for (std::size_t j = 0; j < n; ++j) yhat += a_copy(i, j) * sol.x[j];
    resid[i] = b_copy[i] - yhat;
  }
  double rnorm = 0.0;
  for (double r : resid) rnorm += r * r;
  rnorm = std::sqrt(rnorm);
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0, cnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      dot += a_copy(i, j) * resid[i];
      cnorm += a_copy(i, j) * a_copy(i, j);
    }
    CHECK(std::abs(dot) / (std::sqrt(cnorm) * rnorm) < 1e-8);
  }
}

TEST_CASE("resample: identity, DC preservation, anti-aliasing, bad ratio") {
  TimeSeries s;
  s.t0 = 0.0;
  s.dt = 1e-3;
  s.samples.assign(5001, 2.5);

  const TimeSeries same = resample(s, 1e-3);
  CHECK(same.samples == s.samples);

  const TimeSeries dec = resample(s, 0.05);
  CHECK(dec.dt == doctest::Approx(0.05));
  for (double v : dec.samples) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));

  // 20 Hz sine aliases onto DC at the new 20 Hz rate; the length-50 average
  // nulls it
  TimeSeries tone;
  tone.t0 = 0.0;
  tone.dt = 1e-3;
  for (int i = 0; i <= 5000; ++i)
    tone.samples.push_back(std::sin(2.0 * std::numbers::pi * 20.0 * i * 1e-3));
  const TimeSeries out = resample(tone, 0.05);
  CHECK(rms(out.samples) * 10.0 < rms(tone.samples));

  CHECK_THROWS_AS(resample(s, 2.5e-3 * 1.3), ConfigError);
}

TEST_CASE("split dataset: fractions, partition property, failure modes") {
  Dataset d;
  d.u.t0 = d.y.t0 = 0.0;
  d.u.dt = d.y.dt = 0.05;
  for (int i = 0; i < 1000; ++i) {
    d.u.samples.push_back(std::sin(0.1 * i));
    d.y.samples.push_back(std::cos(0.1 * i));
  }

  auto [est, val] = split_dataset(d, {0.8});
  CHECK(est.size() == 800);
  CHECK(val.size() == 200);
  auto [h1, h2] = split_dataset(d, {0.5});
  CHECK(h1.size() == 500);
  CHECK(h2.size() == 500);

  // estimation ++ validation reconstructs the original exactly
  std::vector<double> rebuilt = est.u.samples;
  rebuilt.insert(rebuilt.end(), val.u.samples.begin(), val.u.samples.end());
  CHECK(rebuilt == d.u.samples);
  CHECK(val.u.t0 == doctest::Approx(est.u.time_at(800)));

  CHECK_THROWS_AS(split_dataset(d, SplitSpec{0.0}), ConfigError);
  CHECK_THROWS_AS(split_dataset(d, SplitSpec{1.0}), ConfigError);
  Dataset tiny;
  tiny.u.t0 = tiny.y.t0 = 0.0;
  tiny.u.dt = tiny.y.dt = 1.0;
  tiny.u.samples = {1, 2, 3};
  tiny.y.samples = {1, 2, 3};
  CHECK_THROWS_AS(split_dataset(tiny, SplitSpec{0.5}), DataError);
}

TEST_CASE("arx fit recovers a known model from noise-free data") {
  const Dataset data = make_oracle_dataset(1000);
  const ArxModel m = arx_fit(data, 3, 3, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(m.a[i] - kTrueA[i]) < 1e-6);
    CHECK(std::abs(m.b[i] - kTrueB[i]) < 1e-6);
  }
  CHECK(m.sample_time == doctest::Approx(0.05));
}

TEST_CASE("arx fit of a pure delay") {
  TimeSeries u = pe_multisine(400, 0.05);
  TimeSeries y;
  y.t0 = u.t0;
  y.dt = u.dt;
  y.samples.assign(u.size(), 0.0);
  // y(t) = u(t-1) on every regression row; the t=0 sample takes the periodic
  // extension so the two signals share an identical sample mean
  y.samples[0] = u.samples[u.size() - 1];
  for (std::size_t t = 1; t < u.size(); ++t) y.samples[t] = u.samples[t - 1];
  const ArxModel m = arx_fit({u, y}, 0, 1, 1);
  REQUIRE(m.b.size() == 1);
  CHECK(m.a.empty());
  CHECK(std::abs(m.b[0] - 1.0) < 1e-12);
}

TEST_CASE("constant data is unidentifiable") {
  Dataset d;
  d.u.t0 = d.y.t0 = 0.0;
  d.u.dt = d.y.dt = 0.05;
  d.u.samples.assign(500, 3.0);
  d.y.samples.assign(500, 1.0);
  CHECK_THROWS_AS(arx_fit(d, 3, 3, 1), IdentifiabilityError);
}

TEST_CASE("dataset shorter than 10*(na+nb) is rejected") {
  const Dataset data = make_oracle_dataset(1000);
  Dataset small = data;
  small.u.samples.resize(59);
  small.y.samples.resize(59);
  CHECK_THROWS_AS(arx_fit(small, 3, 3, 1), DataError);
}

TEST_CASE("fit is invariant to joint amplitude scaling") {
  const Dataset data = make_oracle_dataset(800, 1e-3, 99);
  const ArxModel m1 = arx_fit(data, 3, 3, 1);
  Dataset scaled = data;
  for (double& v : scaled.u.samples) v *= 3.7;
  for (double& v : scaled.y.samples) v *= 3.7;
  const ArxModel m2 = arx_fit(scaled, 3, 3, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(m1.a[i] - m2.a[i]) < 1e-10);
    CHECK(std::abs(m1.b[i] - m2.b[i]) < 1e-10);
  }
}

TEST_CASE("fit is deterministic") {
  const Dataset data = make_oracle_dataset(800, 1e-3, 5);
  const ArxModel m1 = arx_fit(data, 3, 3, 1);
  const ArxModel m2 = arx_fit(data, 3, 3, 1);
  CHECK(std::memcmp(m1.a.data(), m2.a.data(), 3 * sizeof(double)) == 0);
  CHECK(std::memcmp(m1.b.data(), m2.b.data(), 3 * sizeof(double)) == 0);
}

TEST_CASE("arx simulate: zero numerator, unit delay, training reproduction") {
  ArxModel zero;
  zero.na = 2;
  zero.nb = 2;
  zero.nk = 1;
  zero.a = {-0.5, 0.1};
  zero.b = {0.0, 0.0};
  zero.sample_time = 0.05;
  TimeSeries u = pe_multisine(200, 0.05);
  const TimeSeries y0 = arx_simulate(zero, u);
  for (double v : y0.samples) CHECK(v == 0.0);

  ArxModel delay;
  delay.na = 0;
  delay.nb = 1;
  delay.nk = 1;
  delay.b = {1.0};
  delay.sample_time = 0.05;
  const TimeSeries yd = arx_simulate(delay, u);
  CHECK(yd.samples[0] == 0.0);
  for (std::size_t t = 1; t < u.size(); ++t)
    CHECK(yd.samples[t] == doctest::Approx(u.samples[t - 1]).epsilon(1e-15));

  // model fitted on noise-free data reproduces the training record
  const Dataset data = make_oracle_dataset(1000);
  const ArxModel m = arx_fit(data, 3, 3, 1);
  FreeRunValidation fr = validate_free_run(m, data);
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = fr.simulated.samples[i] - data.y.samples[i];
    acc += r * r;
  }
  CHECK(std::sqrt(acc / static_cast<double>(data.size())) < 1e-8);
}

TEST_CASE("unstable free run reports the sample index") {
  ArxModel runaway;
  runaway.na = 1;
  runaway.nb = 1;
  runaway.nk = 1;
  runaway.a = {-2.0};  // pole at 2
  runaway.b = {1.0};
  runaway.sample_time = 0.05;
  TimeSeries u;
  u.t0 = 0.0;
  u.dt = 0.05;
  u.samples.assign(5000, 1.0);
  CHECK_THROWS_AS(arx_simulate(runaway, u), DivergenceError);
}

TEST_CASE("order search ranks the true structure first") {
  // 1250 samples split 0.8 -> the 1000-sample estimation window carries an
  // integer number of cycles of every tone
  const Dataset data = make_oracle_dataset_windowed(1250, 1000);
  const std::vector<int> nas = {1, 2, 3, 4};
  const std::vector<int> nbs = {1, 2, 3, 4};
  const std::vector<int> nks = {0, 1, 2};
  const auto ranked = order_search(data, nas, nbs, nks, {0.8});
  REQUIRE(ranked.size() == nas.size() * nbs.size() * nks.size());
  CHECK(ranked.front().orders.na == 3);
  CHECK(ranked.front().orders.nb == 3);
  CHECK(ranked.front().orders.nk == 1);

  // ranking is a permutation: every candidate appears exactly once
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& s : ranked) seen.insert({s.orders.na, s.orders.nb, s.orders.nk});
  CHECK(seen.size() == ranked.size());

  const auto single = order_search(data, {3}, {3}, {1}, {0.8});
  CHECK(single.size() == 1);
}

TEST_CASE("model file round trip is bit exact") {
  const Dataset data = make_oracle_dataset(600, 1e-4, 42);
  const ArxModel m = arx_fit(data, 3, 3, 1);
  const std::string path = "sysid_model_roundtrip.txt";
  write_model_file(path, m);
  const ArxModel back = read_model_file(path);
  CHECK(back.na == m.na);
  CHECK(back.nb == m.nb);
  CHECK(back.nk == m.nk);
  CHECK(std::memcmp(&back.sample_time, &m.sample_time, sizeof(double)) == 0);
  CHECK(std::memcmp(back.a.data(), m.a.data(), 3 * sizeof(double)) == 0);
  CHECK(std::memcmp(back.b.data(), m.b.data(), 3 * sizeof(double)) == 0);
  CHECK(std::memcmp(&back.y_offset, &m.y_offset, sizeof(double)) == 0);
  std::remove(path.c_str());
}

TEST_CASE("dataset csv round trip") {
  const Dataset d = make_oracle_dataset(300, 1e-3, 3);
  const std::string path = "sysid_dataset_roundtrip.csv";
  write_csv(path, dataset_to_csv(d));
  const Dataset back = dataset_from_csv(read_csv(path));
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.u.samples[i] == d.u.samples[i]);
    CHECK(back.y.samples[i] == d.y.samples[i]);
  }
  std::remove(path.c_str());
}
