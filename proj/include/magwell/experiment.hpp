#pragma once

#include "magwell/config.hpp"
#include "magwell/io.hpp"

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace magwell {

std::string tool_version();

struct ExperimentRecord {
  std::string name;
  std::string status = "pending";  // ok | failed | skipped
  double wall_time = 0.0;  // seconds
  std::vector<std::string> files;  // relative to the run directory
  std::string error;
};

struct RunManifest {
  std::string tool = "magwell";
  std::string version;
  std::string config_hash;
  std::string field;
  std::vector<ExperimentRecord> experiments;

  bool ok() const;
  const ExperimentRecord* find(const std::string& name) const;
  Json to_json() const;
  static RunManifest from_json(const Json& j);
};

inline constexpr const char* kManifestName = "manifest.json";

/// Runs the selected experiments in dependency order and writes artifacts plus the manifest
/// into cfg.output_dir. Experiment failures are recorded, not thrown.
RunManifest run_experiments(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Runs fn(0..count-1) on up to `workers` threads; rethrows the first exception by index.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace magwell
