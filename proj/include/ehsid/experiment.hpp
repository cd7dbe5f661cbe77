// Config-driven experiment pipelines: simulate -> identify -> validate ->
// control, with CSV artifacts. Each run_* computes everything first; the
// matching write_* emits files, so a failing run leaves no partial artifacts.
#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ehsid/config.hpp"
#include "ehsid/control.hpp"
#include "ehsid/csv.hpp"
#include "ehsid/errors.hpp"
#include "ehsid/linear_model.hpp"
#include "ehsid/metrics.hpp"
#include "ehsid/plant.hpp"
#include "ehsid/signals.hpp"
#include "ehsid/sysid.hpp"
#include "ehsid/timeseries.hpp"

namespace ehsid {

enum class ExcitationKind { chirp, multisine, zero };

struct ExcitationSpec {
  ExcitationKind kind = ExcitationKind::chirp;
  double amplitude = 9.0;      // V
  double bandwidth = 0.0;      // rad/s; 0 means "auto" (from the linearized model)
  bool bandwidth_auto = false;
  double duration = 50.0;      // s
  double dt = 1e-3;            // s
  double initial_phase = 0.0;  // rad, chirp only
};

struct IdentificationSpec {
  double sample_time = 0.05;      // s
  double split_fraction = 0.8;
  int na = 3;
  int nb = 3;
  int nk = 1;
  bool search = false;
  std::vector<int> na_range, nb_range, nk_range;
};

struct ValidationSpec {
  std::vector<TestSignalKind> signals = {TestSignalKind::triangular, TestSignalKind::square,
                                         TestSignalKind::sine, TestSignalKind::sawtooth};
  std::vector<double> amplitudes = {1.0, 3.0, 5.0};     // V
  std::vector<double> frequencies = {0.05, 0.1, 0.2};   // Hz
  double duration = 40.0;                               // s
  double dt = 1e-3;                                     // s
};

enum class ReferenceKind { step, staircase, sine };

struct ControllerSpec {
  bool auto_tune = true;
  double kp = 0.0, ki = 0.0, kd = 0.0;  // used when auto_tune is false
  double gain_scale = 1.0;              // post-tuning adjustment of all three gains
  double k0 = 1.0, k1 = 3.0, k2 = 0.05;
  double u_min = -10.0, u_max = 10.0;
  double derivative_filter_tau = 0.0;  // 0 -> 5*dt
  bool anti_windup = true;
  ReferenceKind reference = ReferenceKind::step;
  double step_amplitude = 1e-3;   // m
  double sine_amplitude = 1e-3;   // m
  double sine_frequency = 0.05;   // Hz
  std::vector<double> staircase_levels = {5e-4, 1e-3, 1.5e-3};  // m
  double staircase_hold = 30.0;   // s
  double duration = 120.0;        // s
  // critical-gain search window
  double zn_gain_lo = 1.0;
  double zn_gain_hi = 1e7;
  double zn_sim_time = 60.0;  // s
};

struct ExperimentConfig {
  PlantParams plant;
  ExcitationSpec excitation;
  IdentificationSpec identification;
  ValidationSpec validation;
  ControllerSpec controller;
  std::string output_dir = "out";
  unsigned seed = 0;  // reserved; all pipelines are deterministic in v1
};

// --- config loading ---

inline PlantParams load_plant_params(const ConfigFile& cfg) {
  cfg.require_section("plant");
  PlantParams d;  // defaults
  PlantParams p;
  p.supply_pressure = cfg.get_quantity_or("plant", "supply_pressure", Dimension::pressure, d.supply_pressure);
  p.return_pressure = cfg.get_quantity_or("plant", "return_pressure", Dimension::pressure, d.return_pressure);
  p.fluid_density = cfg.get_quantity_or("plant", "fluid_density", Dimension::density, d.fluid_density);
  p.servo_valve_gain = cfg.get_quantity_or("plant", "servo_valve_gain", Dimension::valve_gain, d.servo_valve_gain);
  p.max_opening = cfg.get_quantity_or("plant", "max_opening", Dimension::length, d.max_opening);
  p.discharge_coeff = cfg.get_number_or("plant", "discharge_coeff", d.discharge_coeff);
  p.leakage_area = cfg.get_quantity_or("plant", "leakage_area", Dimension::area, d.leakage_area);
  p.valve_area = cfg.get_quantity_or("plant", "valve_area", Dimension::area, d.valve_area);
  p.piston_area = cfg.get_quantity_or("plant", "piston_area", Dimension::area, d.piston_area);
  p.piston_stroke = cfg.get_quantity_or("plant", "piston_stroke", Dimension::length, d.piston_stroke);
  p.dead_volume = cfg.get_quantity_or("plant", "dead_volume", Dimension::volume, d.dead_volume);
  p.bulk_modulus = cfg.get_quantity_or("plant", "bulk_modulus", Dimension::pressure, d.bulk_modulus);
  p.load_mass = cfg.get_quantity_or("plant", "load_mass", Dimension::mass, d.load_mass);
  p.spring_stiffness = cfg.get_quantity_or("plant", "spring_stiffness", Dimension::stiffness, d.spring_stiffness);
  p.damping_coeff = cfg.get_quantity_or("plant", "damping_coeff", Dimension::damping, d.damping_coeff);
  p.coulomb_friction = cfg.get_quantity_or("plant", "coulomb_friction", Dimension::force, d.coulomb_friction);
  p.viscous_friction = cfg.get_quantity_or("plant", "viscous_friction", Dimension::damping, d.viscous_friction);
  p.contact_stiffness = cfg.get_quantity_or("plant", "contact_stiffness", Dimension::stiffness, d.contact_stiffness);
  p.contact_damping = cfg.get_quantity_or("plant", "contact_damping", Dimension::damping, d.contact_damping);
  p.flow_gain_coeff = cfg.get_quantity_or("plant", "flow_gain_coeff", Dimension::flow_gain, d.flow_gain_coeff);
  p.flow_pressure_coeff = cfg.get_quantity_or("plant", "flow_pressure_coeff", Dimension::flow_pressure, d.flow_pressure_coeff);
  p.total_leakage_coeff = cfg.get_quantity_or("plant", "total_leakage_coeff", Dimension::flow_pressure, d.total_leakage_coeff);
  p.specific_heat_ratio = cfg.get_number_or("plant", "specific_heat_ratio", d.specific_heat_ratio);
  p.input_limit = cfg.get_quantity_or("plant", "input_limit", Dimension::voltage, d.input_limit);
  p.friction_smoothing_velocity = cfg.get_quantity_or("plant", "friction_smoothing_velocity", Dimension::velocity, d.friction_smoothing_velocity);
  validate(p);
  return p;
}

inline std::vector<int> to_int_list(const std::vector<double>& v, const std::string& key) {
  std::vector<int> out;
  for (double x : v) {
    const int i = static_cast<int>(std::lround(x));
    if (std::abs(x - i) > 1e-9) throw ConfigError(key + ": expected integers");
    out.push_back(i);
  }
  return out;
}

inline ExperimentConfig load_experiment_config(const ConfigFile& cfg) {
  ExperimentConfig ec;
  ec.plant = load_plant_params(cfg);

  if (cfg.has_section("excitation")) {
    ExcitationSpec& e = ec.excitation;
    const std::string kind = cfg.get_string_or("excitation", "kind", "chirp");
    if (kind == "chirp") e.kind = ExcitationKind::chirp;
    else if (kind == "multisine") e.kind = ExcitationKind::multisine;
    else if (kind == "zero") e.kind = ExcitationKind::zero;
    else throw ConfigError("excitation.kind must be chirp, multisine or zero");
    e.amplitude = cfg.get_quantity_or("excitation", "amplitude", Dimension::voltage, e.amplitude);
    if (cfg.has_key("excitation", "bandwidth")) {
      const std::string bw = cfg.get_string("excitation", "bandwidth");
      if (bw == "auto") {
        e.bandwidth_auto = true;
      } else {
        std::istringstream in(bw);
        double value = 0.0;
        std::string unit;
        if (!(in >> value)) throw ConfigError("excitation.bandwidth: expected a value or 'auto'");
        in >> unit;
        e.bandwidth = convert_to_si(value, unit, Dimension::angular_frequency, "excitation.bandwidth");
      }
    }
    e.duration = cfg.get_quantity_or("excitation", "duration", Dimension::time, e.duration);
    e.dt = cfg.get_quantity_or("excitation", "dt", Dimension::time, e.dt);
    e.initial_phase = cfg.get_number_or("excitation", "initial_phase", e.initial_phase);
  }

  if (cfg.has_section("identification")) {
    IdentificationSpec& id = ec.identification;
    id.sample_time = cfg.get_quantity_or("identification", "sample_time", Dimension::time, id.sample_time);
    id.split_fraction = cfg.get_number_or("identification", "split_fraction", id.split_fraction);
    id.na = static_cast<int>(cfg.get_number_or("identification", "na", id.na));
    id.nb = static_cast<int>(cfg.get_number_or("identification", "nb", id.nb));
    id.nk = static_cast<int>(cfg.get_number_or("identification", "nk", id.nk));
    id.search = cfg.get_bool_or("identification", "search", false);
    if (id.search) {
      id.na_range = to_int_list(cfg.get_list("identification", "na_range", Dimension::dimensionless), "na_range");
      id.nb_range = to_int_list(cfg.get_list("identification", "nb_range", Dimension::dimensionless), "nb_range");
      id.nk_range = to_int_list(cfg.get_list("identification", "nk_range", Dimension::dimensionless), "nk_range");
    }
  }

  if (cfg.has_section("validation")) {
    ValidationSpec& v = ec.validation;
    if (cfg.has_key("validation", "signals")) {
      v.signals.clear();
      std::istringstream in(cfg.get_string("validation", "signals"));
      std::string item;
      while (std::getline(in, item, ',')) v.signals.push_back(test_signal_kind_from_string(trim(item)));
      if (v.signals.empty()) throw ConfigError("validation.signals: empty list");
    }
    if (cfg.has_key("validation", "amplitudes"))
      v.amplitudes = cfg.get_list("validation", "amplitudes", Dimension::voltage);
    if (cfg.has_key("validation", "frequencies"))
      v.frequencies = cfg.get_list("validation", "frequencies", Dimension::frequency_hz);
    v.duration = cfg.get_quantity_or("validation", "duration", Dimension::time, v.duration);
    v.dt = cfg.get_quantity_or("validation", "dt", Dimension::time, v.dt);
  }

  if (cfg.has_section("controller")) {
    ControllerSpec& c = ec.controller;
    const std::string tuning = cfg.get_string_or("controller", "tuning", "auto");
    if (tuning == "auto") c.auto_tune = true;
    else if (tuning == "manual") c.auto_tune = false;
    else throw ConfigError("controller.tuning must be auto or manual");
    c.kp = cfg.get_number_or("controller", "kp", c.kp);
    c.ki = cfg.get_number_or("controller", "ki", c.ki);
    c.kd = cfg.get_number_or("controller", "kd", c.kd);
    if (!c.auto_tune && !(c.kp > 0.0 || c.ki > 0.0 || c.kd > 0.0))
      throw ConfigError("controller: manual tuning requires kp/ki/kd");
    c.gain_scale = cfg.get_number_or("controller", "gain_scale", c.gain_scale);
    c.k0 = cfg.get_number_or("controller", "k0", c.k0);
    c.k1 = cfg.get_number_or("controller", "k1", c.k1);
    c.k2 = cfg.get_number_or("controller", "k2", c.k2);
    c.u_min = cfg.get_quantity_or("controller", "u_min", Dimension::voltage, c.u_min);
    c.u_max = cfg.get_quantity_or("controller", "u_max", Dimension::voltage, c.u_max);
    c.derivative_filter_tau = cfg.get_quantity_or("controller", "derivative_filter_tau", Dimension::time, c.derivative_filter_tau);
    c.anti_windup = cfg.get_bool_or("controller", "anti_windup", c.anti_windup);
    const std::string ref = cfg.get_string_or("controller", "reference", "step");
    if (ref == "step") c.reference = ReferenceKind::step;
    else if (ref == "staircase") c.reference = ReferenceKind::staircase;
    else if (ref == "sine") c.reference = ReferenceKind::sine;
    else throw ConfigError("controller.reference must be step, staircase or sine");
    c.step_amplitude = cfg.get_quantity_or("controller", "step_amplitude", Dimension::length, c.step_amplitude);
    c.sine_amplitude = cfg.get_quantity_or("controller", "sine_amplitude", Dimension::length, c.sine_amplitude);
    c.sine_frequency = cfg.get_quantity_or("controller", "sine_frequency", Dimension::frequency_hz, c.sine_frequency);
    if (cfg.has_key("controller", "staircase_levels"))
      c.staircase_levels = cfg.get_list("controller", "staircase_levels", Dimension::length);
    c.staircase_hold = cfg.get_quantity_or("controller", "staircase_hold", Dimension::time, c.staircase_hold);
    c.duration = cfg.get_quantity_or("controller", "duration", Dimension::time, c.duration);
    c.zn_gain_lo = cfg.get_number_or("controller", "zn_gain_lo", c.zn_gain_lo);
    c.zn_gain_hi = cfg.get_number_or("controller", "zn_gain_hi", c.zn_gain_hi);
    c.zn_sim_time = cfg.get_quantity_or("controller", "zn_sim_time", Dimension::time, c.zn_sim_time);
  }

  if (cfg.has_section("output")) {
    ec.output_dir = cfg.get_string_or("output", "directory", ec.output_dir);
    ec.seed = static_cast<unsigned>(cfg.get_number_or("output", "seed", 0.0));
  }

  cfg.reject_unknown_keys();
  return ec;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return load_experiment_config(ConfigFile::parse_file(path));
}

// --- pipeline steps ---

inline int substeps_for(double dt) {
  return std::max(1, static_cast<int>(std::ceil(dt / 1e-3 - 1e-12)));
}

/// Excitation-band anchor: the configured value, or the -3 dB closed-loop
/// bandwidth of the linearized plant model when set to auto.
inline double resolve_bandwidth(const ExperimentConfig& cfg) {
  if (cfg.excitation.bandwidth_auto) return bandwidth(linearized_tf(cfg.plant));
  if (!(cfg.excitation.bandwidth > 0.0))
    throw ConfigError("excitation.bandwidth must be positive (or 'auto')");
  return cfg.excitation.bandwidth;
}

inline TimeSeries make_excitation(const ExcitationSpec& e, double omega_bw) {
  switch (e.kind) {
    case ExcitationKind::chirp: {
      const auto [w_min, w_max] = excitation_band(omega_bw);
      ChirpSpec spec;
      spec.amplitude = e.amplitude;
      spec.f0 = w_min / (2.0 * std::numbers::pi);
      spec.f1 = w_max / (2.0 * std::numbers::pi);
      spec.duration = e.duration;
      spec.dt = e.dt;
      spec.initial_phase = e.initial_phase;
      return chirp(spec);
    }
    case ExcitationKind::multisine: {
      MultisineSpec spec;
      spec.amplitude = e.amplitude;
      spec.component_freqs = multisine_frequencies(omega_bw);
      spec.duration = e.duration;
      spec.dt = e.dt;
      return multisine(spec);
    }
    case ExcitationKind::zero: {
      TimeSeries ts;
      ts.t0 = 0.0;
      ts.dt = e.dt;
      const std::size_t n = static_cast<std::size_t>(std::floor(e.duration / e.dt * (1.0 + 1e-12))) + 1;
      ts.samples.assign(n, 0.0);
      return ts;
    }
  }
  throw ConfigError("unknown excitation kind");
}

struct SimulateResult {
  TimeSeries excitation;
  Trajectory trajectory;
  double omega_bw = 0.0;
};

inline SimulateResult run_simulate(const ExperimentConfig& cfg) {
  SimulateResult res;
  res.omega_bw = cfg.excitation.kind == ExcitationKind::zero ? 0.0 : resolve_bandwidth(cfg);
  res.excitation = make_excitation(cfg.excitation, res.omega_bw > 0.0 ? res.omega_bw : 1.0);
  res.trajectory = simulate_trajectory(res.excitation, PlantState::equilibrium(cfg.plant),
                                       cfg.plant, substeps_for(cfg.excitation.dt));
  return res;
}

struct IdentifyResult {
  Dataset dataset;          // at the identification sample time
  Dataset estimation;
  Dataset validation;
  ArxModel model;
  FreeRunValidation free_run;
  std::vector<OrderScore> search;  // empty unless an order search ran
  double omega_bw = 0.0;
};

inline IdentifyResult identify_from_dataset(const Dataset& raw, const IdentificationSpec& id) {
  IdentifyResult res;
  res.dataset = resample(raw, id.sample_time);
  SplitSpec split{id.split_fraction};
  auto [est, val] = split_dataset(res.dataset, split);
  res.estimation = est;
  res.validation = val;
  if (id.search)
    res.search = order_search(res.dataset, id.na_range, id.nb_range, id.nk_range, split);
  res.model = arx_fit(res.estimation, id.na, id.nb, id.nk);
  try {
    res.free_run = validate_free_run(res.model, res.validation);
  } catch (const DivergenceError& e) {
    // An unstable estimated model is a legitimate experimental outcome for a
    // marginally stable plant; report it as an unbounded-error fit rather
    // than aborting the pipeline.
    res.free_run.diverged = true;
    res.free_run.note = e.what();
    res.free_run.report.best_fit_percent = -std::numeric_limits<double>::infinity();
    res.free_run.report.mse = std::numeric_limits<double>::infinity();
    res.free_run.report.rmse = std::numeric_limits<double>::infinity();
    res.free_run.report.fpe = std::numeric_limits<double>::infinity();
    res.free_run.report.n_samples = res.validation.size();
    res.free_run.report.n_params = res.model.parameter_count();
    res.free_run.simulated.t0 = res.validation.y.t0;
    res.free_run.simulated.dt = res.validation.y.dt;
    res.free_run.simulated.samples.assign(res.validation.size(), 0.0);
  }
  return res;
}

inline IdentifyResult run_identify(const ExperimentConfig& cfg) {
  SimulateResult sim = run_simulate(cfg);
  Dataset raw;
  raw.u = sim.excitation;
  raw.y.t0 = sim.excitation.t0;
  raw.y.dt = sim.excitation.dt;
  raw.y.samples = sim.trajectory.xp;
  IdentifyResult res = identify_from_dataset(raw, cfg.identification);
  res.omega_bw = sim.omega_bw;
  return res;
}

struct ValidationRow {
  TestSignalKind signal;
  double amplitude = 0.0;  // V
  double frequency = 0.0;  // Hz
  double rmse = 0.0;       // m
};

/// RMSE grid of identified-model free-run vs nonlinear plant over the test
/// signal catalogue. Rows are emitted in deterministic nested order:
/// signal (as listed), then amplitude, then frequency.
inline std::vector<ValidationRow> run_validate(const ExperimentConfig& cfg, const ArxModel& model) {
  std::vector<ValidationRow> rows;
  const PlantState init = PlantState::equilibrium(cfg.plant);
  for (TestSignalKind kind : cfg.validation.signals) {
    for (double amp : cfg.validation.amplitudes) {
      for (double freq : cfg.validation.frequencies) {
        TestSignalSpec spec;
        spec.kind = kind;
        spec.amplitude = amp;
        spec.frequency = freq;
        spec.duration = cfg.validation.duration;
        spec.dt = cfg.validation.dt;
        const TimeSeries u = test_signal(spec);
        const TimeSeries y = simulate_open_loop(u, init, cfg.plant, substeps_for(spec.dt));
        Dataset d{u, y};
        const Dataset at_ts = resample(d, model.sample_time);
        const FreeRunValidation fr = validate_free_run(model, at_ts);
        rows.push_back({kind, amp, freq, fr.report.rmse});
      }
    }
  }
  return rows;
}

struct ControlOutcome {
  std::optional<ZnResult> tuning;  // present when auto-tuned
  NpidConfig controller;
  TimeSeries reference;
  ClosedLoopResult model_loop;
  ClosedLoopResult plant_loop;
  std::optional<TransientMetrics> model_metrics;  // step reference only
  std::optional<TransientMetrics> plant_metrics;
  double model_tracking_rmse = 0.0;
  double plant_tracking_rmse = 0.0;
};

inline TimeSeries make_reference(const ControllerSpec& c, double dt) {
  TestSignalSpec spec;
  spec.dt = dt;
  spec.duration = c.duration;
  switch (c.reference) {
    case ReferenceKind::step:
      spec.kind = TestSignalKind::step;
      spec.amplitude = c.step_amplitude;
      break;
    case ReferenceKind::sine:
      spec.kind = TestSignalKind::sine;
      spec.amplitude = c.sine_amplitude;
      spec.frequency = c.sine_frequency;
      break;
    case ReferenceKind::staircase: {
      spec.kind = TestSignalKind::staircase;
      spec.amplitude = 1.0;  // staircase levels carry the scale
      for (double level : c.staircase_levels)
        spec.staircase_levels.push_back({c.staircase_hold, level});
      break;
    }
  }
  return test_signal(spec);
}

inline ControlOutcome run_control(const ExperimentConfig& cfg, const ArxModel& model) {
  const ControllerSpec& c = cfg.controller;
  ControlOutcome out;

  NpidConfig npid;
  npid.k0 = c.k0;
  npid.k1 = c.k1;
  npid.k2 = c.k2;
  npid.u_min = c.u_min;
  npid.u_max = c.u_max;
  npid.derivative_filter_tau = c.derivative_filter_tau;
  npid.anti_windup = c.anti_windup;
  if (c.auto_tune) {
    ArxTarget tuning_target(model);
    CriticalGainOptions opt;
    opt.gain_lo = c.zn_gain_lo;
    opt.gain_hi = c.zn_gain_hi;
    opt.sim_time = c.zn_sim_time;
    opt.dt = model.sample_time;
    opt.step_reference = c.step_amplitude;
    auto [kcr, tcr] = find_critical_gain(tuning_target, opt);
    ZnResult zn = ziegler_nichols(kcr, tcr);
    zn.kp *= c.gain_scale;
    zn.ki *= c.gain_scale;
    zn.kd *= c.gain_scale;
    out.tuning = zn;
    npid.kp = zn.kp;
    npid.ki = zn.ki;
    npid.kd = zn.kd;
  } else {
    npid.kp = c.kp;
    npid.ki = c.ki;
    npid.kd = c.kd;
  }
  validate(npid);
  out.controller = npid;
  out.reference = make_reference(c, model.sample_time);

  ArxTarget model_target(model);
  out.model_loop = simulate_closed_loop(model_target, npid, out.reference);
  PlantTarget plant_target(cfg.plant, PlantState::equilibrium(cfg.plant));
  out.plant_loop = simulate_closed_loop(plant_target, npid, out.reference);

  if (c.reference == ReferenceKind::step) {
    out.model_metrics = transient_metrics(out.model_loop.position, c.step_amplitude);
    out.plant_metrics = transient_metrics(out.plant_loop.position, c.step_amplitude);
  }
  out.model_tracking_rmse = rms(out.model_loop.error.samples);
  out.plant_tracking_rmse = rms(out.plant_loop.error.samples);
  return out;
}

// --- artifact writing ---

namespace detail {

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace detail

inline void write_series_csv(const std::string& path, const TimeSeries& ts,
                             const std::string& value_name = "value") {
  CsvTable table;
  table.header = {"t", value_name};
  std::vector<double> t(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) t[i] = ts.time_at(i);
  table.columns = {std::move(t), ts.samples};
  write_csv(path, table);
}

inline void write_simulate_artifacts(const std::string& dir, const SimulateResult& res) {
  detail::ensure_dir(dir);
  write_series_csv(detail::join(dir, "excitation.csv"), res.excitation);
  CsvTable table;
  table.header = {"t", "u", "xp", "vp", "p1", "p2"};
  table.columns = {res.trajectory.t, res.trajectory.u, res.trajectory.xp,
                   res.trajectory.vp, res.trajectory.p1, res.trajectory.p2};
  write_csv(detail::join(dir, "trajectory.csv"), table);
}

inline std::string fit_report_csv(const FitReport& r) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "best_fit_percent," << format_double(r.best_fit_percent) << "\n";
  out << "mse," << format_double(r.mse) << "\n";
  out << "fpe," << format_double(r.fpe) << "\n";
  out << "rmse," << format_double(r.rmse) << "\n";
  out << "n_samples," << r.n_samples << "\n";
  out << "n_params," << r.n_params << "\n";
  return out.str();
}

inline std::string fit_report_text(const FitReport& r, const ArxModel& m) {
  std::ostringstream out;
  out << "ARX(" << m.na << "," << m.nb << "," << m.nk << ") @ Ts = "
      << format_double(m.sample_time) << " s\n";
  out << "free-run validation over " << r.n_samples << " samples:\n";
  out << "  best fit : " << format_double(r.best_fit_percent) << " %\n";
  out << "  MSE      : " << format_double(r.mse) << " m^2\n";
  out << "  FPE      : " << format_double(r.fpe) << " m^2\n";
  out << "  RMSE     : " << format_double(r.rmse) << " m\n";
  return out.str();
}

inline void write_identify_artifacts(const std::string& dir, const IdentifyResult& res) {
  detail::ensure_dir(dir);
  write_csv(detail::join(dir, "dataset.csv"), dataset_to_csv(res.dataset));
  write_model_file(detail::join(dir, "model.txt"), res.model);
  write_text_file(detail::join(dir, "fit_report.csv"), fit_report_csv(res.free_run.report));
  std::string report_text = fit_report_text(res.free_run.report, res.model);
  if (res.free_run.diverged)
    report_text += "free-run validation diverged (unstable estimated model): " +
                   res.free_run.note + "\n";
  write_text_file(detail::join(dir, "fit_report.txt"), report_text);
  {
    CsvTable table;
    table.header = {"t", "y_measured", "y_simulated"};
    std::vector<double> t(res.validation.size());
    for (std::size_t i = 0; i < res.validation.size(); ++i) t[i] = res.validation.y.time_at(i);
    table.columns = {std::move(t), res.validation.y.samples, res.free_run.simulated.samples};
    write_csv(detail::join(dir, "validation_fit.csv"), table);
  }
  if (!res.search.empty()) {
    std::ostringstream out;
    out << "na,nb,nk,best_fit_percent,mse,fpe,rmse,identifiable\n";
    for (const auto& s : res.search) {
      out << s.orders.na << ',' << s.orders.nb << ',' << s.orders.nk << ',';
      if (s.identifiable) {
        out << format_double(s.report.best_fit_percent) << ',' << format_double(s.report.mse)
            << ',' << format_double(s.report.fpe) << ',' << format_double(s.report.rmse) << ",1\n";
      } else {
        out << "nan,nan,nan,nan,0\n";
      }
    }
    write_text_file(detail::join(dir, "order_search.csv"), out.str());
  }
}

inline void write_validate_artifacts(const std::string& dir, const std::vector<ValidationRow>& rows) {
  detail::ensure_dir(dir);
  std::ostringstream out;
  out << "signal,amplitude_V,frequency_Hz,rmse_m\n";
  for (const auto& r : rows) {
    out << to_string(r.signal) << ',' << format_double(r.amplitude) << ','
        << format_double(r.frequency) << ',' << format_double(r.rmse) << "\n";
  }
  write_text_file(detail::join(dir, "rmse_grid.csv"), out.str());
}

inline void write_closed_loop_csv(const std::string& path, const TimeSeries& reference,
                                  const ClosedLoopResult& loop) {
  CsvTable table;
  table.header = {"t", "r", "y", "u", "e", "k"};
  std::vector<double> t(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) t[i] = reference.time_at(i);
  table.columns = {std::move(t), reference.samples, loop.position.samples,
                   loop.command.samples, loop.error.samples, loop.gain.samples};
  write_csv(path, table);
}

inline void write_control_artifacts(const std::string& dir, const ControlOutcome& out) {
  detail::ensure_dir(dir);
  write_closed_loop_csv(detail::join(dir, "closed_loop_model.csv"), out.reference, out.model_loop);
  write_closed_loop_csv(detail::join(dir, "closed_loop_plant.csv"), out.reference, out.plant_loop);

  std::ostringstream csv;
  csv << "target,rise_time_s,settling_time_s,overshoot_percent,steady_state_error,tracking_rmse\n";
  auto row = [&](const char* name, const std::optional<TransientMetrics>& m, double rmse_value) {
    csv << name << ',';
    if (m) {
      csv << format_double(m->rise_time) << ',' << format_double(m->settling_time) << ','
          << format_double(m->overshoot_percent) << ',' << format_double(m->steady_state_error);
    } else {
      csv << "nan,nan,nan,nan";
    }
    csv << ',' << format_double(rmse_value) << "\n";
  };
  row("identified_model", out.model_metrics, out.model_tracking_rmse);
  row("nonlinear_plant", out.plant_metrics, out.plant_tracking_rmse);
  write_text_file(detail::join(dir, "transient_report.csv"), csv.str());

  std::ostringstream txt;
  if (out.tuning) {
    txt << "auto tuning: Kcr = " << format_double(out.tuning->critical_gain)
        << ", Tcr = " << format_double(out.tuning->critical_period) << " s\n";
  }
  txt << "gains: kp = " << format_double(out.controller.kp)
      << ", ki = " << format_double(out.controller.ki)
      << ", kd = " << format_double(out.controller.kd) << "\n";
  auto block = [&](const char* name, const std::optional<TransientMetrics>& m, double rmse_value) {
    txt << name << ":\n";
    if (m) {
      txt << "  Tr = " << format_double(m->rise_time) << " s\n";
      txt << "  Ts = " << format_double(m->settling_time) << " s\n";
      txt << "  OS = " << format_double(m->overshoot_percent) << " %\n";
      txt << "  steady-state error = " << format_double(m->steady_state_error) << " m\n";
    }
    txt << "  tracking RMSE = " << format_double(rmse_value) << " m\n";
  };
  block("identified model", out.model_metrics, out.model_tracking_rmse);
  block("nonlinear plant", out.plant_metrics, out.plant_tracking_rmse);
  write_text_file(detail::join(dir, "transient_report.txt"), txt.str());
}

}  // namespace ehsid
