#include "magwell/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace magwell {

namespace fs = std::filesystem;

Thresholds Thresholds::scaled(double s) {
  Thresholds t;
  t.landau_relative *= s;
  t.c0_relative *= s;
  t.gap_relative *= s;
  t.metric_relative *= s;
  t.isometry *= s;
  t.reconstruction *= s;
  t.holomorphy_ratio_lo = 4.0 - (4.0 - t.holomorphy_ratio_lo) * s;
  t.holomorphy_ratio_hi = 4.0 + (t.holomorphy_ratio_hi - 4.0) * s;
  t.metaplectic_roundtrip *= s;
  t.egorov *= s;
  t.kernel *= s;
  t.slope_lo = 1.0 - (1.0 - t.slope_lo) * s;
  t.slope_hi = 1.0 + (t.slope_hi - 1.0) * s;
  t.intercept_relative *= s;
  t.mass_ratio = 1.0 + (t.mass_ratio - 1.0) * s;
  t.decay_ratio = 1.0 + (t.decay_ratio - 1.0) * s;
  t.overlap_defect *= s;
  t.symbol_constant *= s;
  return t;
}

namespace {

std::string g(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

class RunDir {
 public:
  explicit RunDir(fs::path dir) : dir_(std::move(dir)) {
    fs::path m = dir_ / kManifestName;
    if (!fs::exists(m)) throw MissingArtifact("no manifest at " + m.string());
    manifest_ = RunManifest::from_json(read_json(m));
    for (const auto& e : manifest_.experiments)
      for (const auto& f : e.files)
        if (!fs::exists(dir_ / f)) throw MissingArtifact("artifact listed by experiment '" + e.name + "' is missing: " + f);
  }

  const RunManifest& manifest() const { return manifest_; }

  // nullptr when the experiment was not run; throws when it ran but failed
  const ExperimentRecord* experiment(const std::string& name) const { return manifest_.find(name); }

  fs::path file(const std::string& rel) const {
    fs::path p = dir_ / rel;
    if (!fs::exists(p)) throw MissingArtifact("missing artifact " + p.string());
    return p;
  }
  Json json(const std::string& rel) const { return read_json(file(rel)); }
  CsvTable csv(const std::string& rel) const { return read_csv(file(rel)); }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!detail.str().empty()) detail << "; ";
    detail << what;
    if (!cond) {
      ok = false;
      detail << " [x]";
    }
  }
};

double num(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return NAN;
  return j[key].get<double>();
}

}  // namespace

std::vector<CriterionResult> evaluate_criteria(const fs::path& run_dir, const Thresholds& t, double gap_h) {
  RunDir run(run_dir);
  std::vector<CriterionResult> out;

  auto criterion = [&](int id, const std::string& name, std::vector<std::string> needs, auto&& body) {
    CriterionResult r{id, name, "SKIP", ""};
    for (const auto& n : needs) {
      const ExperimentRecord* e = run.experiment(n);
      if (!e) {
        r.detail = "experiment '" + n + "' not selected";
        out.push_back(r);
        return;
      }
      if (e->status != "ok") {
        r.status = "FAIL";
        r.detail = e->error.empty() ? n + " did not complete" : e->error;
        out.push_back(r);
        return;
      }
    }
    Check c;
    try {
      body(c);
    } catch (const MissingArtifact&) {
      throw;
    } catch (const std::exception& e) {
      c.require(false, std::string("error: ") + e.what());
    }
    r.status = c.ok ? "PASS" : "FAIL";
    r.detail = c.detail.str();
    out.push_back(r);
  };

  criterion(1, "Landau level for constant field", {"landau"}, [&](Check& c) {
    Json j = run.json("landau.json");
    double rel = num(j, "relative_error"), wall = num(j, "wall_time_s");
    c.require(rel <= t.landau_relative, "relative error " + g(rel) + " <= " + g(t.landau_relative));
    c.require(wall <= t.landau_seconds, "wall time " + g(wall) + " s <= " + g(t.landau_seconds));
  });

  criterion(2, "Two-term eigenvalue asymptotics", {"spectrum"}, [&](Check& c) {
    Json j = run.json("asymptotics.json");
    double e0 = num(j, "final_c0_relative_error");
    c.require(e0 <= t.c0_relative, "Richardson c0 " + g(num(j, "final_c0")) + " vs " + g(num(j, "predicted_c0")) +
                                       ", error " + g(e0) + " <= " + g(t.c0_relative));
    double gh = num(j, "gap_h");
    c.require(std::abs(gh - gap_h) <= 1e-12 * gap_h, "gap evaluated at h=" + g(gh));
    double eg = num(j, "gap_relative_error");
    c.require(std::isfinite(eg) && eg <= t.gap_relative, "gap " + g(num(j, "gap_at_gap_h")) + " vs " +
                                                            g(num(j, "predicted_gap")) + ", error " + g(eg) +
                                                            " <= " + g(t.gap_relative));
    double wall = run.experiment("spectrum")->wall_time;
    c.require(wall <= t.spectrum_seconds, "wall time " + g(wall) + " s <= " + g(t.spectrum_seconds));
  });

  criterion(3, "Metric-form operator equivalence", {"metric"}, [&](Check& c) {
    Json j = run.json("metric.json");
    double d = num(j, "max_relative_difference");
    c.require(d <= t.metric_relative, "max relative difference " + g(d) + " <= " + g(t.metric_relative));
  });

  criterion(4, "Phase-space transform contract", {"fbi"}, [&](Check& c) {
    Json j = run.json("fbi.json");
    double iso = num(j, "isometry_defect"), rec = num(j, "reconstruction_error");
    c.require(iso <= t.isometry, "isometry defect " + g(iso) + " <= " + g(t.isometry));
    c.require(rec <= t.reconstruction, "reconstruction " + g(rec) + " <= " + g(t.reconstruction));
    auto ratios = j.at("holomorphy_ratios").get<std::vector<double>>();
    c.require(!ratios.empty(), "holomorphy ratios present");
    for (double r : ratios)
      c.require(r >= t.holomorphy_ratio_lo && r <= t.holomorphy_ratio_hi,
                "holomorphy ratio " + g(r) + " in [" + g(t.holomorphy_ratio_lo) + ", " + g(t.holomorphy_ratio_hi) + "]");
  });

  criterion(5, "Metaplectic round trip, Egorov, kernel identity", {"metaplectic"}, [&](Check& c) {
    Json j = run.json("metaplectic.json");
    double rt = num(j, "roundtrip_error"), eg = num(j, "egorov_x1"), k = num(j, "kernel_identity_max_deviation");
    c.require(rt <= t.metaplectic_roundtrip, "round trip " + g(rt) + " <= " + g(t.metaplectic_roundtrip));
    c.require(eg <= t.egorov, "Egorov x1 " + g(eg) + " <= " + g(t.egorov));
    c.require(k <= t.kernel, "kernel identity " + g(k) + " <= " + g(t.kernel));
  });

  criterion(6, "Localization scale of the ground state", {"analysis"}, [&](Check& c) {
    Json j = run.json("moment_fit.json");
    CsvTable tab = run.csv("fit_table.csv");
    c.require(tab.rows.size() >= 4, "h values " + std::to_string(tab.rows.size()) + " >= 4");
    double s = num(j, "slope"), se = num(j, "slope_stderr"), b = num(j, "intercept");
    double target = num(j, "wkb_intercept");
    c.require(s >= t.slope_lo && s <= t.slope_hi, "slope " + g(s) + " in [" + g(t.slope_lo) + ", " + g(t.slope_hi) + "]");
    double sig = (s - 0.5) / se;
    c.require(sig >= t.naive_exclusion_sigmas, "slope 1/2 excluded by " + g(sig) + " standard errors");
    double rel = std::abs(b - target) / target;
    c.require(rel <= t.intercept_relative, "intercept " + g(b) + " vs " + g(target) + ", error " + g(rel) + " <= " +
                                               g(t.intercept_relative));
  });

  criterion(7, "Weighted mass uniformity", {"analysis"}, [&](Check& c) {
    CsvTable tab = run.csv("fit_table.csv");
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
      double m = tab.number(i, "weighted_mass");
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    c.require(lo > 0 && hi / lo <= t.mass_ratio, "max/min " + g(hi / lo) + " <= " + g(t.mass_ratio));
  });

  criterion(8, "Phase-space decay rates", {"analysis"}, [&](Check& c) {
    CsvTable tab = run.csv("fit_table.csv");
    for (const char* col : {"eps1_eff", "eps2_eff"}) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i = 0; i < tab.rows.size(); ++i) {
        double e = tab.number(i, col);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
      c.require(lo > 0, std::string(col) + " min " + g(lo) + " > 0");
      c.require(lo > 0 && hi / lo <= t.decay_ratio, std::string(col) + " max/min " + g(hi / lo) + " <= " + g(t.decay_ratio));
    }
  });

  criterion(9, "Leading-order WKB overlap", {"analysis"}, [&](Check& c) {
    CsvTable tab = run.csv("fit_table.csv");
    bool mono = true;
    for (std::size_t i = 1; i < tab.rows.size(); ++i) {
      if (tab.number(i, "h") >= tab.number(i - 1, "h")) throw Error("fit table is not ordered by decreasing h");
      mono = mono && (1 - tab.number(i, "overlap")) < (1 - tab.number(i - 1, "overlap"));
    }
    c.require(mono, "1 - overlap decreases with h");
    std::size_t last = tab.rows.size() - 1;
    double d = 1 - tab.number(last, "overlap");
    c.require(d <= t.overlap_defect, "1 - overlap at h=" + g(tab.number(last, "h")) + " is " + g(d) + " <= " +
                                         g(t.overlap_defect));
  });

  criterion(10, "Normal-form symbol lower bounds", {"symbols"}, [&](Check& c) {
    CsvTable tab = run.csv("symbols.csv");
    bool constant_seen = false;
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
      const std::string& id = tab.rows[i][tab.column("preset")];
      double c1 = tab.number(i, "c1"), c2 = tab.number(i, "c2");
      c.require(c1 > 0 && c2 > 0, id + " c1=" + g(c1) + " c2=" + g(c2));
      if (id == "constant") {
        constant_seen = true;
        double dev = std::max(std::abs(c1 - 0.5), std::abs(c2 - 0.5));
        c.require(dev <= t.symbol_constant, "constant deviation from 1/2 " + g(dev) + " <= " + g(t.symbol_constant));
      }
    }
    c.require(constant_seen, "constant preset scanned");
  });

  return out;
}

void print_criteria(std::ostream& os, const std::vector<CriterionResult>& rows) {
  for (const auto& r : rows)
    os << "criterion " << std::setw(2) << r.id << ": " << r.status << "  " << r.name << "  (" << r.detail << ")\n";
}

int verify_run(const ExperimentConfig& cfg, std::ostream& os) {
  std::vector<CriterionResult> rows;
  try {
    rows = evaluate_criteria(cfg.output_dir, Thresholds::scaled(cfg.verify.tolerance_scale), cfg.verify.gap_h);
  } catch (const MissingArtifact& e) {
    os << "missing artifact: " << e.what() << "\n";
    return 3;
  }
  print_criteria(os, rows);
  bool ok = std::none_of(rows.begin(), rows.end(), [](const auto& r) { return r.status == "FAIL"; });
  return ok ? 0 : 1;
}

}  // namespace magwell
