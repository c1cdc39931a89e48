// Runs the default experiment set and checks acceptance criteria 1-10.
// Usage: acceptance [output-dir] [config]

#include "magwell/config.hpp"
#include "magwell/experiment.hpp"
#include "magwell/verify.hpp"

#include <algorithm>
#include <iostream>

using namespace magwell;

int main(int argc, char** argv) {
  std::filesystem::path config = std::filesystem::path(MAGWELL_SOURCE_DIR) / "configs" / "default.yaml";
  if (argc > 2) config = argv[2];
  ExperimentConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (argc > 1) cfg.output_dir = argv[1];

  RunManifest man = run_experiments(cfg, &std::cerr);
  for (const auto& e : man.experiments)
    std::cout << "experiment " << e.name << ": " << e.status << " (" << e.wall_time << " s)"
              << (e.error.empty() ? "" : "  " + e.error) << "\n";

  std::vector<CriterionResult> rows;
  try {
    rows = evaluate_criteria(cfg.output_dir, Thresholds::scaled(cfg.verify.tolerance_scale), cfg.verify.gap_h);
  } catch (const MissingArtifact& e) {
    std::cout << "missing artifact: " << e.what() << "\n";
    return 3;
  }
  print_criteria(std::cout, rows);
  const auto passed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.status == "PASS"; });
  std::cout << passed << "/" << rows.size() << " criteria passed\n";
  return passed == static_cast<long>(rows.size()) ? 0 : 1;
}
