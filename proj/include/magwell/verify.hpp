#pragma once

#include "magwell/config.hpp"
#include "magwell/experiment.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace magwell {

class MissingArtifact : public Error {
 public:
  using Error::Error;
};

/// Acceptance thresholds. `scale` multiplies every error tolerance (scale < 1 tightens).
struct Thresholds {
  double landau_relative = 2e-2;
  double landau_seconds = 60.0;
  double c0_relative = 0.10;
  double gap_relative = 0.15;
  double spectrum_seconds = 600.0;
  double metric_relative = 5e-3;
  double isometry = 1e-3;
  double reconstruction = 1e-2;
  double holomorphy_ratio_lo = 3.5, holomorphy_ratio_hi = 4.5;
  double metaplectic_roundtrip = 1e-10;
  double egorov = 1e-8;
  double kernel = 1e-6;
  double slope_lo = 0.95, slope_hi = 1.05;
  double naive_exclusion_sigmas = 10.0;
  double intercept_relative = 0.20;
  double mass_ratio = 3.0;
  double decay_ratio = 2.0;
  double overlap_defect = 0.1;
  double symbol_constant = 1e-6;

  static Thresholds scaled(double scale);
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string status;  // PASS | FAIL | SKIP
  std::string detail;
};

/// Evaluates criteria 1-10 from the artifacts of a finished run. Criteria whose experiments were
/// not selected are reported as SKIP. Throws MissingArtifact when the manifest or a listed file is absent.
std::vector<CriterionResult> evaluate_criteria(const std::filesystem::path& run_dir, const Thresholds& t,
                                               double gap_h = 0.05);

void print_criteria(std::ostream& os, const std::vector<CriterionResult>& rows);

/// Exit status for `verify`: 0 all pass, 1 any failure, 3 missing artifact.
int verify_run(const ExperimentConfig& cfg, std::ostream& os);

}  // namespace magwell
