// Black-box identification: dataset preparation, ARX least-squares
// estimation, free-run simulation and model-order search.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ehsid/csv.hpp"
#include "ehsid/errors.hpp"
#include "ehsid/leastsq.hpp"
#include "ehsid/metrics.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

/// Discrete-time ARX(na, nb, nk) model
///   A(q) y(t) = B(q) u(t-nk),  A(q) = 1 + a1 q^-1 + ... + a_na q^-na
/// fitted on mean-removed data; the removed operating-point means are kept
/// for reconstruction.
struct ArxModel {
  int na = 0;
  int nb = 0;
  int nk = 0;
  std::vector<double> a;  // a1..a_na
  std::vector<double> b;  // b1..b_nb
  double sample_time = 0.0;  // s
  double u_offset = 0.0;
  double y_offset = 0.0;

  std::size_t parameter_count() const { return a.size() + b.size(); }
};

inline void validate(const ArxModel& m) {
  if (m.na < 0 || m.nb < 1 || m.nk < 0)
    throw ConfigError("arx model: require na >= 0, nb >= 1, nk >= 0");
  if (static_cast<int>(m.a.size()) != m.na || static_cast<int>(m.b.size()) != m.nb)
    throw ConfigError("arx model: coefficient count does not match orders");
  if (!(m.sample_time > 0.0)) throw ConfigError("arx model: sample time must be positive");
  for (double c : m.a)
    if (!std::isfinite(c)) throw ConfigError("arx model: non-finite a coefficient");
  for (double c : m.b)
    if (!std::isfinite(c)) throw ConfigError("arx model: non-finite b coefficient");
}

/// Aligned input/output record.
struct Dataset {
  TimeSeries u;
  TimeSeries y;

  std::size_t size() const { return u.size(); }
};

inline void validate(const Dataset& d, const std::string& name = "dataset") {
  validate(d.u, name + ".u");
  validate(d.y, name + ".y");
  if (!aligned(d.u, d.y))
    throw DataError(name + ": input and output are not aligned");
}

struct SplitSpec {
  double estimation_fraction = 0.8;
};

inline void validate(const SplitSpec& s) {
  if (!(s.estimation_fraction > 0.0 && s.estimation_fraction < 1.0))
    throw ConfigError("split: estimation fraction must be in (0, 1)");
}

/// Decimate by an integer factor after a moving-average anti-alias filter of
/// the same length. Output sample k averages the factor input samples ending
/// at index k*factor (the first output keeps sample 0 as-is).
inline TimeSeries resample(const TimeSeries& series, double target_dt) {
  validate(series, "resample input");
  if (!(target_dt > 0.0)) throw ConfigError("resample: target dt must be positive");
  const double ratio = target_dt / series.dt;
  const long factor = std::lround(ratio);
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio)
    throw ConfigError("resample: target dt must be an integer multiple of the sample period");
  if (factor == 1) return series;

  TimeSeries out;
  out.t0 = series.t0;
  out.dt = series.dt * static_cast<double>(factor);
  const std::size_t n_out = (series.size() - 1) / static_cast<std::size_t>(factor) + 1;
  out.samples.reserve(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const std::size_t end = k * static_cast<std::size_t>(factor);
    if (end == 0) {
      out.samples.push_back(series.samples[0]);
      continue;
    }
    const std::size_t begin = end + 1 - static_cast<std::size_t>(factor);
    double acc = 0.0;
    for (std::size_t i = begin; i <= end; ++i) acc += series.samples[i];
    out.samples.push_back(acc / static_cast<double>(factor));
  }
  return out;
}

inline Dataset resample(const Dataset& data, double target_dt) {
  return {resample(data.u, target_dt), resample(data.y, target_dt)};
}

/// Contiguous prefix/suffix split with no shuffling: round(fraction*N)
/// samples for estimation, the rest for validation.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& data, const SplitSpec& spec) {
  validate(data);
  validate(spec);
  const std::size_t n = data.size();
  const std::size_t n_est = static_cast<std::size_t>(
      std::lround(spec.estimation_fraction * static_cast<double>(n)));
  if (n_est < 2 || n - n_est < 2)
    throw DataError("split: a side of the split would have fewer than 2 samples");

  auto take = [&](std::size_t begin, std::size_t count) {
    Dataset part;
    part.u.t0 = data.u.time_at(begin);
    part.u.dt = data.u.dt;
    part.u.samples.assign(data.u.samples.begin() + begin, data.u.samples.begin() + begin + count);
    part.y.t0 = part.u.t0;
    part.y.dt = data.y.dt;
    part.y.samples.assign(data.y.samples.begin() + begin, data.y.samples.begin() + begin + count);
    return part;
  };
  return {take(0, n_est), take(n_est, n - n_est)};
}

namespace detail {

constexpr double kConditionLimit = 1e12;

inline std::size_t arx_first_row(int na, int nb, int nk) {
  return static_cast<std::size_t>(std::max(na, nk + nb - 1));
}

}  // namespace detail

/// Least-squares fit of the one-step ARX predictor
///   y(t) = -a1 y(t-1) - ... - a_na y(t-na) + b1 u(t-nk) + ... + b_nb u(t-nk-nb+1)
/// on mean-removed data, solved by Householder QR. A triangular-factor
/// condition estimate above 1e12 is treated as insufficient excitation.
inline ArxModel arx_fit(const Dataset& data, int na, int nb, int nk) {
  validate(data);
  if (na < 0 || nb < 1 || nk < 0)
    throw ConfigError("arx_fit: require na >= 0, nb >= 1, nk >= 0");
  const std::size_t n = data.size();
  const std::size_t min_len = 10 * static_cast<std::size_t>(na + nb);
  if (n < std::max<std::size_t>(min_len, detail::arx_first_row(na, nb, nk) + 1))
    throw DataError("arx_fit: dataset shorter than 10*(na+nb) samples");

  const double u_mean = mean(data.u);
  const double y_mean = mean(data.y);
  std::vector<double> ud(n), yd(n);
  for (std::size_t i = 0; i < n; ++i) {
    ud[i] = data.u.samples[i] - u_mean;
    yd[i] = data.y.samples[i] - y_mean;
  }

  const std::size_t first = detail::arx_first_row(na, nb, nk);
  const std::size_t rows = n - first;
  const std::size_t cols = static_cast<std::size_t>(na + nb);
  Matrix phi(rows, cols);
  std::vector<double> rhs(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = first + r;
    for (int i = 1; i <= na; ++i) phi(r, static_cast<std::size_t>(i - 1)) = -yd[t - i];
    for (int j = 1; j <= nb; ++j)
      phi(r, static_cast<std::size_t>(na + j - 1)) = ud[t - nk - (j - 1)];
    rhs[r] = yd[t];
  }

  LeastSquaresSolution sol = solve_least_squares(std::move(phi), std::move(rhs));
  if (!(sol.condition < detail::kConditionLimit))
    throw IdentifiabilityError(
        "arx_fit: regressor condition estimate " + format_double(sol.condition) +
        " exceeds 1e12; the input does not excite the requested structure");

  ArxModel model;
  model.na = na;
  model.nb = nb;
  model.nk = nk;
  model.a.assign(sol.x.begin(), sol.x.begin() + na);
  model.b.assign(sol.x.begin() + na, sol.x.end());
  model.sample_time = data.u.dt;
  model.u_offset = u_mean;
  model.y_offset = y_mean;
  validate(model);
  return model;
}

/// Free-run simulation: the recursion feeds back its own outputs. y_init
/// holds up to na past outputs in chronological order (y_init.back() is
/// y(-1)); missing history and pre-record inputs are taken as the model
/// offsets (zero deviation).
inline TimeSeries arx_simulate(const ArxModel& model, const TimeSeries& u,
                               const std::vector<double>& y_init = {}) {
  validate(model);
  validate(u, "arx input");
  if (std::abs(u.dt - model.sample_time) > 1e-9 * model.sample_time)
    throw ConfigError("arx_simulate: input sample period does not match the model");
  if (y_init.size() > static_cast<std::size_t>(model.na))
    throw ConfigError("arx_simulate: y_init longer than na");

  const std::size_t n = u.size();
  std::vector<double> past(static_cast<std::size_t>(model.na), 0.0);  // deviations, past[0] = y(t-1)
  for (std::size_t i = 0; i < y_init.size(); ++i)
    past[i] = y_init[y_init.size() - 1 - i] - model.y_offset;

  TimeSeries out;
  out.t0 = u.t0;
  out.dt = u.dt;
  out.samples.reserve(n);
  auto u_dev = [&](long idx) {
    return idx >= 0 ? u.samples[static_cast<std::size_t>(idx)] - model.u_offset : 0.0;
  };
  for (std::size_t t = 0; t < n; ++t) {
    double v = 0.0;
    for (int i = 1; i <= model.na; ++i) v -= model.a[static_cast<std::size_t>(i - 1)] * past[static_cast<std::size_t>(i - 1)];
    for (int j = 1; j <= model.nb; ++j)
      v += model.b[static_cast<std::size_t>(j - 1)] * u_dev(static_cast<long>(t) - model.nk - (j - 1));
    if (!std::isfinite(v) || std::abs(v) > 1e15)
      throw DivergenceError("arx_simulate: output diverged at sample " + std::to_string(t));
    out.samples.push_back(v + model.y_offset);
    if (model.na > 0) {
      for (std::size_t i = past.size() - 1; i > 0; --i) past[i] = past[i - 1];
      past[0] = v;
    }
  }
  return out;
}

/// Free-run validation against measured data. The first na simulated samples
/// are pinned to the measured outputs (measured initial conditions); metrics
/// cover the remaining free-run portion.
struct FreeRunValidation {
  TimeSeries simulated;  // full length, first na samples copied from measured
  FitReport report;      // over samples [na, N)
  bool diverged = false;  // set by pipelines that report unstable fits instead of aborting
  std::string note;
};

inline FreeRunValidation validate_free_run(const ArxModel& model, const Dataset& data) {
  validate(model);
  validate(data);
  const std::size_t n = data.size();
  const std::size_t na = static_cast<std::size_t>(model.na);
  if (n <= na + 2) throw DataError("validate_free_run: dataset too short");

  std::vector<double> past(na, 0.0);
  TimeSeries sim;
  sim.t0 = data.y.t0;
  sim.dt = data.y.dt;
  sim.samples.reserve(n);
  for (std::size_t i = 0; i < na; ++i) sim.samples.push_back(data.y.samples[i]);
  for (std::size_t i = 0; i < na; ++i)
    past[i] = data.y.samples[na - 1 - i] - model.y_offset;

  auto u_dev = [&](long idx) {
    return idx >= 0 ? data.u.samples[static_cast<std::size_t>(idx)] - model.u_offset : 0.0;
  };
  for (std::size_t t = na; t < n; ++t) {
    double v = 0.0;
    for (int i = 1; i <= model.na; ++i) v -= model.a[static_cast<std::size_t>(i - 1)] * past[static_cast<std::size_t>(i - 1)];
    for (int j = 1; j <= model.nb; ++j)
      v += model.b[static_cast<std::size_t>(j - 1)] * u_dev(static_cast<long>(t) - model.nk - (j - 1));
    if (!std::isfinite(v) || std::abs(v) > 1e15)
      throw DivergenceError("validate_free_run: output diverged at sample " + std::to_string(t));
    sim.samples.push_back(v + model.y_offset);
    if (model.na > 0) {
      for (std::size_t i = past.size() - 1; i > 0; --i) past[i] = past[i - 1];
      past[0] = v;
    }
  }

  TimeSeries meas_tail, sim_tail;
  meas_tail.t0 = sim_tail.t0 = data.y.time_at(na);
  meas_tail.dt = sim_tail.dt = data.y.dt;
  meas_tail.samples.assign(data.y.samples.begin() + static_cast<long>(na), data.y.samples.end());
  sim_tail.samples.assign(sim.samples.begin() + static_cast<long>(na), sim.samples.end());

  FreeRunValidation out;
  out.report = make_fit_report(meas_tail, sim_tail, model.parameter_count());
  out.simulated = std::move(sim);
  return out;
}

struct OrderSpec {
  int na = 0;
  int nb = 0;
  int nk = 0;
};

struct OrderScore {
  OrderSpec orders;
  FitReport report;
  bool identifiable = true;
  std::string note;
};

/// Fit every (na, nb, nk) combination on the estimation split and score
/// free-run best-fit on the validation split. Ranked by validation best-fit
/// descending with FPE ascending as the tie-break; unidentifiable candidates
/// sink to the bottom but are never dropped.
inline std::vector<OrderScore> order_search(const Dataset& data, const std::vector<int>& na_range,
                                            const std::vector<int>& nb_range,
                                            const std::vector<int>& nk_range,
                                            const SplitSpec& split) {
  if (na_range.empty() || nb_range.empty() || nk_range.empty())
    throw ConfigError("order_search: empty order range");
  auto [est, val] = split_dataset(data, split);

  std::vector<OrderScore> scores;
  std::size_t failures = 0;
  for (int na : na_range) {
    for (int nb : nb_range) {
      for (int nk : nk_range) {
        OrderScore s;
        s.orders = {na, nb, nk};
        try {
          ArxModel model = arx_fit(est, na, nb, nk);
          s.report = validate_free_run(model, val).report;
        } catch (const Error& e) {
          s.identifiable = false;
          s.note = e.what();
          ++failures;
        }
        scores.push_back(std::move(s));
      }
    }
  }
  if (failures == scores.size())
    throw IdentifiabilityError("order_search: every candidate failed to fit");

  // Best-fit decides; fits tied to within numerical precision fall through to
  // FPE, which for equal error is parameter-count ascending, so exact-fit
  // supersets rank below the smallest exact structure.
  std::stable_sort(scores.begin(), scores.end(), [](const OrderScore& l, const OrderScore& r) {
    if (l.identifiable != r.identifiable) return l.identifiable;
    if (!l.identifiable) return false;
    const double df = l.report.best_fit_percent - r.report.best_fit_percent;
    if (std::abs(df) > 1e-6) return df > 0.0;
    if (l.report.n_params != r.report.n_params) return l.report.n_params < r.report.n_params;
    return l.report.fpe < r.report.fpe;
  });
  return scores;
}

// --- model file serialization (flat text, 17 significant digits) ---

inline std::string to_model_text(const ArxModel& m) {
  std::ostringstream out;
  out << "na " << m.na << "\n";
  out << "nb " << m.nb << "\n";
  out << "nk " << m.nk << "\n";
  out << "ts " << format_double(m.sample_time) << "\n";
  out << "a";
  for (double c : m.a) out << ' ' << format_double(c);
  out << "\n";
  out << "b";
  for (double c : m.b) out << ' ' << format_double(c);
  out << "\n";
  out << "u_offset " << format_double(m.u_offset) << "\n";
  out << "y_offset " << format_double(m.y_offset) << "\n";
  return out.str();
}

inline ArxModel model_from_text(const std::string& text) {
  ArxModel m;
  std::istringstream in(text);
  std::string line;
  bool have_a = false, have_b = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "na") ls >> m.na;
    else if (key == "nb") ls >> m.nb;
    else if (key == "nk") ls >> m.nk;
    else if (key == "ts") ls >> m.sample_time;
    else if (key == "u_offset") ls >> m.u_offset;
    else if (key == "y_offset") ls >> m.y_offset;
    else if (key == "a") {
      double v;
      while (ls >> v) m.a.push_back(v);
      have_a = true;
    } else if (key == "b") {
      double v;
      while (ls >> v) m.b.push_back(v);
      have_b = true;
    } else {
      throw DataError("model file: unknown field '" + key + "'");
    }
  }
  if (!have_b) throw DataError("model file: missing b coefficients");
  if (!have_a && m.na != 0) throw DataError("model file: missing a coefficients");
  validate(m);
  return m;
}

inline void write_model_file(const std::string& path, const ArxModel& m) {
  write_text_file(path, to_model_text(m));
}

inline ArxModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_text(buf.str());
}

// --- dataset CSV (t,u,y) ---

inline CsvTable dataset_to_csv(const Dataset& d) {
  validate(d);
  CsvTable table;
  table.header = {"t", "u", "y"};
  std::vector<double> t(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) t[i] = d.u.time_at(i);
  table.columns = {std::move(t), d.u.samples, d.y.samples};
  return table;
}

inline Dataset dataset_from_csv(const CsvTable& table) {
  const int it = column_index(table, "t");
  const int iu = column_index(table, "u");
  const int iy = column_index(table, "y");
  if (table.rows() < 2) throw DataError("dataset csv: need at least 2 rows");
  Dataset d;
  const auto& t = table.columns[static_cast<std::size_t>(it)];
  d.u.t0 = d.y.t0 = t.front();
  d.u.dt = d.y.dt = t[1] - t[0];
  d.u.samples = table.columns[static_cast<std::size_t>(iu)];
  d.y.samples = table.columns[static_cast<std::size_t>(iy)];
  validate(d);
  return d;
}

}  // namespace ehsid
