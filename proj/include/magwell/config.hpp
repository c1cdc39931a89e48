#pragma once

#include "magwell/eigensolve.hpp"
#include "magwell/field.hpp"
#include "magwell/grid.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace magwell {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Grids for the h-list: either a box and spacing that scale with sqrt(h), or a fixed (L, N).
/// Two levels enable Richardson extrapolation of eigenvalues in the squared spacing.
struct GridPlan {
  bool scaled = true;
  double L_over_sqrt_h = 11.0;
  std::vector<double> spacing_over_sqrt_h{0.12, 0.09};
  double L = 0.0;
  std::vector<int> N;
  double resolution_factor = 0.35;

  int levels() const { return static_cast<int>(scaled ? spacing_over_sqrt_h.size() : N.size()); }
  Grid2D grid(double h, int level) const;
};

struct FbiPlan {
  double h = 0.1;
  int pad = 2;
  double L_over_sqrt_h = 11.0;
  double spacing_over_sqrt_h = 0.3;
  double sample_spacing_over_sqrt_h = 0.5;
  double sample_extent_over_sqrt_h = 7.0;
  std::vector<int> holomorphy_pads{2, 4, 8};
  double holomorphy_extent_over_sqrt_h = 2.0;
  // decay measurement on the normal-form ground state
  double decay_L_over_sqrt_h = 11.0;
  double decay_spacing_over_sqrt_h = 0.3;
  double slice_extent_over_sqrt_h = 8.0;
};

struct WeightPlan {
  std::string kind = "paper_f";
  std::vector<double> eps{0.05};
};

struct AnalysisPlan {
  double wkb_cutoff = 1.0;
};

struct LandauPlan {
  double b = 1.0;
  double h = 0.1;
  double L = 8.0;
  int N = 146;
  int k = 2;
};

struct MetricPlan {
  double h = 0.1;
  double L_over_sqrt_h = 11.0;
  double spacing_over_sqrt_h = 0.12;
  int k = 2;
};

struct MetaplecticPlan {
  double h = 0.1;
  double L_over_sqrt_h = 15.0;
  int N = 128;
  std::vector<double> kernel_h{0.1, 0.05, 0.025};
};

struct SymbolPlan {
  double gamma = 1.0;
  SymbolScanSpec scan;
};

struct VerifyPlan {
  double tolerance_scale = 1.0;
  double gap_h = 0.05;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"spectrum", "analysis", "fbi", "landau", "metric", "metaplectic",
                                              "symbols"};
  return names;
}

struct ExperimentConfig {
  std::string field_id = "gaussian_well";
  std::vector<double> field_params;
  std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  GridPlan grid;
  SolverConfig solver;
  FbiPlan fbi;
  WeightPlan weights;
  AnalysisPlan analysis;
  LandauPlan landau;
  MetricPlan metric;
  MetaplecticPlan metaplectic;
  SymbolPlan symbols;
  VerifyPlan verify;
  std::set<std::string> experiments;
  std::filesystem::path output_dir = "magwell-run";
  bool export_matrix = false;
  int workers = 1;
  std::string hash;  // FNV-1a of the config text

  bool selected(const std::string& name) const { return experiments.count(name) > 0; }
  MagneticField field() const { return MagneticField::make(field_id, field_params); }
  void validate() const;
};

/// Reads YAML text; `base` resolves a relative output directory. MAGWELL_OUTPUT_DIR overrides it.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace magwell
