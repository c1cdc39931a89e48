#include "magwell/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace magwell {

namespace fs = std::filesystem;

Grid2D GridPlan::grid(double h, int level) const {
  if (level < 0 || level >= levels()) throw Error("grid level out of range");
  if (scaled) {
    const double L_h = L_over_sqrt_h * std::sqrt(h);
    return Grid2D(L_h, required_points(L_h, h, spacing_over_sqrt_h[level]));
  }
  return Grid2D(L, N[level]);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t x = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    x ^= c;
    x *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << x;
  return os.str();
}

namespace {

struct Reader {
  YAML::Node node;
  std::string path;
  bool present = true;

  std::string at(const std::string& key) const { return path.empty() ? key : path + "." + key; }

  void allow(std::initializer_list<const char*> keys) const {
    if (!present) return;
    if (!node.IsMap()) throw ConfigError(path + ": expected a mapping");
    for (const auto& kv : node) {
      auto k = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw ConfigError(at(k) + ": unknown key");
    }
  }

  Reader sub(const std::string& key) const {
    if (!has(key)) return {YAML::Node(), at(key), false};
    return {node[key], at(key), true};
  }

  bool has(const std::string& key) const { return present && node.IsMap() && node[key]; }

  template <class T>
  void get(const std::string& key, T& out) const {
    if (!has(key)) return;
    try {
      out = node[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(at(key) + ": wrong type");
    }
  }

  template <class T>
  void get_list(const std::string& key, std::vector<T>& out) const {
    if (!has(key)) return;
    const auto& n = node[key];
    try {
      if (n.IsSequence()) {
        out.clear();
        for (const auto& e : n) out.push_back(e.as<T>());
      } else {
        out = {n.as<T>()};
      }
    } catch (const YAML::Exception&) {
      throw ConfigError(at(key) + ": wrong type");
    }
  }
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    (void)field();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("field: ") + e.what());
  }
  require(!hs.empty(), "h: the h-list is empty");
  for (std::size_t i = 0; i < hs.size(); ++i) {
    require(hs[i] > 0 && std::isfinite(hs[i]), "h[" + std::to_string(i) + "]: must be positive");
    if (i) require(hs[i] < hs[i - 1], "h: the h-list must be strictly decreasing");
  }
  require(grid.levels() >= 1 && grid.levels() <= 2, "grid: one or two refinement levels are supported");
  if (grid.scaled) {
    require(grid.L_over_sqrt_h > 0, "grid.L_over_sqrt_h: must be positive");
    for (double s : grid.spacing_over_sqrt_h)
      require(s > 0 && s <= grid.resolution_factor,
              "grid.spacing_over_sqrt_h: must lie in (0, " + std::to_string(grid.resolution_factor) + "]");
  } else {
    require(grid.L > 0, "grid.L: must be positive");
    for (int n : grid.N) {
      require(n >= 16, "grid.N: must be at least 16");
      try {
        check_resolution(Grid2D(grid.L, n), hs.back(), grid.resolution_factor);
      } catch (const ResolutionError& e) {
        throw ConfigError("grid.N: " + std::string(e.what()));
      }
    }
  }
  if (grid.levels() == 2 && grid.scaled)
    require(grid.spacing_over_sqrt_h[1] < grid.spacing_over_sqrt_h[0], "grid.spacing_over_sqrt_h: second level must be finer");
  if (grid.levels() == 2 && !grid.scaled) require(grid.N[1] > grid.N[0], "grid.N: second level must be finer");
  try {
    solver.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  require(solver.k >= 2 || !selected("spectrum"), "solver.k: the spectrum experiment needs at least 2 eigenpairs");
  require(fbi.h > 0, "fbi.h: must be positive");
  require(fbi.pad >= 2, "fbi.pad: must be at least 2");
  require(fbi.holomorphy_pads.size() >= 2, "fbi.holomorphy_pads: need at least two pads");
  for (std::size_t i = 1; i < fbi.holomorphy_pads.size(); ++i)
    require(fbi.holomorphy_pads[i] == 2 * fbi.holomorphy_pads[i - 1], "fbi.holomorphy_pads: each pad must double the previous");
  require(weights.kind == "paper_f", "weights.kind: only 'paper_f' is available");
  require(!weights.eps.empty(), "weights.eps: empty");
  for (double e : weights.eps) require(e >= 0, "weights.eps: must be non-negative");
  require(analysis.wkb_cutoff > 0, "analysis.wkb_cutoff: must be positive");
  require(landau.h > 0 && landau.b > 0, "landau: h and b must be positive");
  try {
    check_resolution(Grid2D(landau.L, landau.N), landau.h / landau.b, grid.resolution_factor);
  } catch (const ResolutionError& e) {
    throw ConfigError("landau.N: " + std::string(e.what()));
  } catch (const Error& e) {
    throw ConfigError("landau: " + std::string(e.what()));
  }
  require(metric.h > 0 && metric.spacing_over_sqrt_h > 0 && metric.spacing_over_sqrt_h <= grid.resolution_factor,
          "metric: h must be positive and spacing_over_sqrt_h within the resolution bound");
  require(metaplectic.h > 0 && metaplectic.N >= 16, "metaplectic: h must be positive and N >= 16");
  require(symbols.gamma > 0, "symbols.gamma: must be positive");
  require(verify.tolerance_scale > 0, "verify.tolerance_scale: must be positive");
  require(workers >= 1, "workers: must be at least 1");
  require(!experiments.empty(), "experiments: nothing selected");
  if (selected("analysis")) require(hs.size() >= 3, "h: the analysis experiment needs at least 3 h values");
}

ExperimentConfig parse_config(const std::string& text, const fs::path& base) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML parse error: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError("config: top level must be a mapping");
  Reader r{root, ""};
  r.allow({"field", "h", "grid", "solver", "fbi", "weights", "analysis", "landau", "metric", "metaplectic", "symbols", "verify",
           "experiments", "output", "workers"});

  ExperimentConfig c;
  c.hash = fnv1a_hex(text);

  Reader f = r.sub("field");
  if (!f.has("preset")) throw ConfigError("field.preset: required");
  f.allow({"preset", "params"});
  f.get("preset", c.field_id);
  f.get_list("params", c.field_params);

  r.get_list("h", c.hs);

  Reader g = r.sub("grid");
  g.allow({"L_over_sqrt_h", "spacing_over_sqrt_h", "L", "N", "resolution_factor"});
  if (g.has("L") || g.has("N")) {
    if (!g.has("L") || !g.has("N")) throw ConfigError("grid: a fixed grid needs both L and N");
    if (g.has("L_over_sqrt_h") || g.has("spacing_over_sqrt_h"))
      throw ConfigError("grid: give either L/N or L_over_sqrt_h/spacing_over_sqrt_h, not both");
    c.grid.scaled = false;
    g.get("L", c.grid.L);
    g.get_list("N", c.grid.N);
  } else {
    g.get("L_over_sqrt_h", c.grid.L_over_sqrt_h);
    g.get_list("spacing_over_sqrt_h", c.grid.spacing_over_sqrt_h);
  }
  g.get("resolution_factor", c.grid.resolution_factor);

  c.solver.k = 2;
  c.solver.preconditioner = "cholesky";
  Reader s = r.sub("solver");
  s.allow({"k", "tol", "max_iterations", "block_size", "inner_tol", "inner_max_iterations", "preconditioner", "seed",
           "adaptive_shift"});
  s.get("k", c.solver.k);
  s.get("tol", c.solver.tol);
  s.get("max_iterations", c.solver.max_iterations);
  s.get("block_size", c.solver.block_size);
  s.get("inner_tol", c.solver.inner_tol);
  s.get("inner_max_iterations", c.solver.inner_max_iterations);
  s.get("preconditioner", c.solver.preconditioner);
  s.get("seed", c.solver.seed);
  s.get("adaptive_shift", c.solver.adaptive_shift);

  Reader b = r.sub("fbi");
  b.allow({"h", "pad", "L_over_sqrt_h", "spacing_over_sqrt_h", "sample_spacing_over_sqrt_h",
           "sample_extent_over_sqrt_h", "holomorphy_pads", "holomorphy_extent_over_sqrt_h", "decay_L_over_sqrt_h",
           "decay_spacing_over_sqrt_h", "slice_extent_over_sqrt_h"});
  b.get("h", c.fbi.h);
  b.get("pad", c.fbi.pad);
  b.get("L_over_sqrt_h", c.fbi.L_over_sqrt_h);
  b.get("spacing_over_sqrt_h", c.fbi.spacing_over_sqrt_h);
  b.get("sample_spacing_over_sqrt_h", c.fbi.sample_spacing_over_sqrt_h);
  b.get("sample_extent_over_sqrt_h", c.fbi.sample_extent_over_sqrt_h);
  b.get_list("holomorphy_pads", c.fbi.holomorphy_pads);
  b.get("holomorphy_extent_over_sqrt_h", c.fbi.holomorphy_extent_over_sqrt_h);
  b.get("decay_L_over_sqrt_h", c.fbi.decay_L_over_sqrt_h);
  b.get("decay_spacing_over_sqrt_h", c.fbi.decay_spacing_over_sqrt_h);
  b.get("slice_extent_over_sqrt_h", c.fbi.slice_extent_over_sqrt_h);

  Reader w = r.sub("weights");
  w.allow({"kind", "eps"});
  w.get("kind", c.weights.kind);
  w.get_list("eps", c.weights.eps);

  Reader an = r.sub("analysis");
  an.allow({"wkb_cutoff"});
  an.get("wkb_cutoff", c.analysis.wkb_cutoff);

  Reader l = r.sub("landau");
  l.allow({"b", "h", "L", "N", "k"});
  l.get("b", c.landau.b);
  l.get("h", c.landau.h);
  l.get("L", c.landau.L);
  l.get("N", c.landau.N);
  l.get("k", c.landau.k);

  Reader m = r.sub("metric");
  m.allow({"h", "L_over_sqrt_h", "spacing_over_sqrt_h", "k"});
  m.get("h", c.metric.h);
  m.get("L_over_sqrt_h", c.metric.L_over_sqrt_h);
  m.get("spacing_over_sqrt_h", c.metric.spacing_over_sqrt_h);
  m.get("k", c.metric.k);

  Reader mp = r.sub("metaplectic");
  mp.allow({"h", "L_over_sqrt_h", "N", "kernel_h"});
  mp.get("h", c.metaplectic.h);
  mp.get("L_over_sqrt_h", c.metaplectic.L_over_sqrt_h);
  mp.get("N", c.metaplectic.N);
  mp.get_list("kernel_h", c.metaplectic.kernel_h);

  Reader sy = r.sub("symbols");
  sy.allow({"gamma", "radii", "angles", "r_max", "x2_points", "x2_extent"});
  sy.get("gamma", c.symbols.gamma);
  sy.get("radii", c.symbols.scan.radii);
  sy.get("angles", c.symbols.scan.angles);
  sy.get("r_max", c.symbols.scan.r_max);
  sy.get("x2_points", c.symbols.scan.x2_points);
  sy.get("x2_extent", c.symbols.scan.x2_extent);

  Reader v = r.sub("verify");
  v.allow({"tolerance_scale", "gap_h"});
  v.get("tolerance_scale", c.verify.tolerance_scale);
  v.get("gap_h", c.verify.gap_h);

  std::vector<std::string> sel{"all"};
  r.get_list("experiments", sel);
  for (const auto& e : sel) {
    if (e == "all") {
      c.experiments.insert(experiment_names().begin(), experiment_names().end());
    } else if (std::find(experiment_names().begin(), experiment_names().end(), e) != experiment_names().end()) {
      c.experiments.insert(e);
    } else {
      throw ConfigError("experiments: unknown experiment '" + e + "'");
    }
  }
  if (c.selected("analysis")) c.experiments.insert("spectrum");

  Reader o = r.sub("output");
  o.allow({"dir", "export_matrix"});
  std::string dir = c.output_dir.string();
  o.get("dir", dir);
  o.get("export_matrix", c.export_matrix);
  if (const char* env = std::getenv("MAGWELL_OUTPUT_DIR"); env && *env) dir = env;
  c.output_dir = fs::path(dir).is_absolute() || base.empty() ? fs::path(dir) : base / dir;

  r.get("workers", c.workers);

  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str(), path.parent_path());
}

}  // namespace magwell
