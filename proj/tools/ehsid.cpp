// Command-line front end: simulate | identify | validate | control, driven by
// one experiment config file with targeted overrides.
#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ehsid/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;  // overrides [output].directory when set
  std::string signal;   // overrides [excitation].kind
  std::string orders;   // "na,nb,nk"
  double split = -1.0;
  std::string gains;    // "kp,ki,kd"
  std::string model_path;
  std::string dataset_path;
};

std::vector<double> parse_number_list(const std::string& raw, const std::string& what,
                                      std::size_t expected) {
  std::vector<double> out;
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ehsid::ConfigError(what + ": cannot parse '" + item + "'");
    }
  }
  if (out.size() != expected)
    throw ehsid::ConfigError(what + ": expected " + std::to_string(expected) + " comma-separated values");
  return out;
}

ehsid::ExperimentConfig load_with_overrides(const CommonOptions& opt) {
  ehsid::ExperimentConfig cfg = ehsid::load_experiment_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  if (!opt.signal.empty()) {
    if (opt.signal == "chirp") cfg.excitation.kind = ehsid::ExcitationKind::chirp;
    else if (opt.signal == "multisine") cfg.excitation.kind = ehsid::ExcitationKind::multisine;
    else if (opt.signal == "zero") cfg.excitation.kind = ehsid::ExcitationKind::zero;
    else throw ehsid::ConfigError("--signal must be chirp, multisine or zero");
  }
  if (!opt.orders.empty()) {
    auto v = parse_number_list(opt.orders, "--orders", 3);
    cfg.identification.na = static_cast<int>(v[0]);
    cfg.identification.nb = static_cast<int>(v[1]);
    cfg.identification.nk = static_cast<int>(v[2]);
  }
  if (opt.split > 0.0) cfg.identification.split_fraction = opt.split;
  if (!opt.gains.empty()) {
    auto v = parse_number_list(opt.gains, "--gains", 3);
    cfg.controller.auto_tune = false;
    cfg.controller.kp = v[0];
    cfg.controller.ki = v[1];
    cfg.controller.kd = v[2];
  }
  return cfg;
}

ehsid::ArxModel resolve_model(const CommonOptions& opt, const ehsid::ExperimentConfig& cfg) {
  if (!opt.model_path.empty()) return ehsid::read_model_file(opt.model_path);
  // no model file given: identify one from the configured pipeline
  ehsid::IdentifyResult res =
      opt.dataset_path.empty()
          ? ehsid::run_identify(cfg)
          : ehsid::identify_from_dataset(
                ehsid::dataset_from_csv(ehsid::read_csv(opt.dataset_path)), cfg.identification);
  return res.model;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hydraulic servo actuator simulation, identification and NPID control"};
  app.require_subcommand(1);

  CommonOptions opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "experiment config file")->required();
    cmd->add_option("--out", opt.out_dir, "output directory (overrides config)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "open-loop plant simulation with the configured excitation");
  add_common(sim);
  sim->add_option("--signal", opt.signal, "excitation kind override: chirp|multisine|zero");

  CLI::App* ident = app.add_subcommand("identify", "excite the plant, fit an ARX model, free-run validate");
  add_common(ident);
  ident->add_option("--signal", opt.signal, "excitation kind override");
  ident->add_option("--orders", opt.orders, "model orders na,nb,nk");
  ident->add_option("--split", opt.split, "estimation fraction in (0,1)");
  ident->add_option("--dataset", opt.dataset_path, "identify from an existing t,u,y CSV instead of simulating");

  CLI::App* val = app.add_subcommand("validate", "RMSE grid of identified model vs plant over test signals");
  add_common(val);
  val->add_option("--model", opt.model_path, "model file (default: identify per config)");
  val->add_option("--orders", opt.orders, "model orders na,nb,nk");

  CLI::App* ctl = app.add_subcommand("control", "closed-loop NPID on identified model and plant");
  add_common(ctl);
  ctl->add_option("--model", opt.model_path, "model file (default: identify per config)");
  ctl->add_option("--gains", opt.gains, "manual gains kp,ki,kd (disables auto tuning)");

  CLI11_PARSE(app, argc, argv);

  try {
    ehsid::ExperimentConfig cfg = load_with_overrides(opt);
    if (sim->parsed()) {
      ehsid::SimulateResult res = ehsid::run_simulate(cfg);
      ehsid::write_simulate_artifacts(cfg.output_dir, res);
      std::printf("simulate: %zu samples -> %s\n", res.trajectory.size(), cfg.output_dir.c_str());
    } else if (ident->parsed()) {
      ehsid::IdentifyResult res =
          opt.dataset_path.empty()
              ? ehsid::run_identify(cfg)
              : ehsid::identify_from_dataset(
                    ehsid::dataset_from_csv(ehsid::read_csv(opt.dataset_path)), cfg.identification);
      ehsid::write_identify_artifacts(cfg.output_dir, res);
      std::printf("identify: ARX(%d,%d,%d) best fit %.2f %% -> %s\n", res.model.na, res.model.nb,
                  res.model.nk, res.free_run.report.best_fit_percent, cfg.output_dir.c_str());
    } else if (val->parsed()) {
      ehsid::ArxModel model = resolve_model(opt, cfg);
      auto rows = ehsid::run_validate(cfg, model);
      ehsid::write_validate_artifacts(cfg.output_dir, rows);
      std::printf("validate: %zu grid cells -> %s\n", rows.size(), cfg.output_dir.c_str());
    } else if (ctl->parsed()) {
      ehsid::ArxModel model = resolve_model(opt, cfg);
      ehsid::ControlOutcome out = ehsid::run_control(cfg, model);
      ehsid::write_control_artifacts(cfg.output_dir, out);
      std::printf("control: kp=%.6g ki=%.6g kd=%.6g -> %s\n", out.controller.kp,
                  out.controller.ki, out.controller.kd, cfg.output_dir.c_str());
    }
  } catch (const ehsid::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(ehsid::ExitCode::failure);
  }
  return 0;
}
