// Command-line entry point: run, verify, presets, version.

#include "magwell/analysis.hpp"
#include "magwell/config.hpp"
#include "magwell/experiment.hpp"
#include "magwell/verify.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

using namespace magwell;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

int cmd_run(const std::string& path) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::cerr << "magwell " << tool_version() << " run, config " << cfg.hash << ", output " << cfg.output_dir.string()
            << "\n";
  RunManifest man;
  try {
    man = run_experiments(cfg, &std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kExitFail;
  }
  for (const auto& e : man.experiments)
    std::cout << std::left << std::setw(12) << e.name << " " << std::setw(7) << e.status << " " << std::fixed
              << std::setprecision(2) << e.wall_time << " s  " << e.files.size() << " files"
              << (e.error.empty() ? "" : "  " + e.error) << "\n";
  return man.ok() ? 0 : kExitFail;
}

int cmd_verify(const std::string& path) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return verify_run(cfg, std::cout);
}

int cmd_presets() {
  for (const auto& id : MagneticField::preset_ids()) {
    auto params = MagneticField::default_params(id);
    MagneticField f = MagneticField::make(id, params);
    std::cout << id << "  params [";
    for (std::size_t i = 0; i < params.size(); ++i) std::cout << (i ? ", " : "") << params[i];
    std::cout << "]";
    if (f.validation_only()) {
      std::cout << "  validation only (no isolated well)\n";
      continue;
    }
    WellData w = field_hessian_minimum(f);
    std::cout << "  b0=" << w.b0 << " hessian eigenvalues " << w.alpha << ", " << w.gamma
              << "  lambda_l ~ b0 h + c_l h^2 with c_0=" << predicted_h2_coefficient(f, 0)
              << " c_1=" << predicted_h2_coefficient(f, 1) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the semiclassical magnetic Laplacian with a single magnetic well"};
  app.require_subcommand(1);
  std::string config;
  auto* run = app.add_subcommand("run", "Run the experiments selected in a config file");
  run->add_option("config", config, "YAML config file")->required();
  auto* verify = app.add_subcommand("verify", "Check acceptance criteria against a finished run");
  verify->add_option("config", config, "YAML config file")->required();
  app.add_subcommand("presets", "List magnetic field presets");
  app.add_subcommand("version", "Print the tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*run) return cmd_run(config);
  if (*verify) return cmd_verify(config);
  if (app.got_subcommand("presets")) return cmd_presets();
  if (app.got_subcommand("version")) {
    std::cout << "magwell " << tool_version() << "\n";
    return 0;
  }
  return kExitConfig;
}
