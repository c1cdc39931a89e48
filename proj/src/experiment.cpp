#include "magwell/experiment.hpp"

#include "magwell/analysis.hpp"
#include "magwell/eigensolve.hpp"
#include "magwell/fbi.hpp"
#include "magwell/operator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace magwell {

namespace fs = std::filesystem;

std::string tool_version() { return "0.3.0"; }

bool RunManifest::ok() const {
  return std::all_of(experiments.begin(), experiments.end(), [](const auto& e) { return e.status == "ok"; });
}

const ExperimentRecord* RunManifest::find(const std::string& name) const {
  for (const auto& e : experiments)
    if (e.name == name) return &e;
  return nullptr;
}

Json RunManifest::to_json() const {
  Json j;
  j["tool"] = tool;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["field"] = field;
  j["experiments"] = Json::array();
  for (const auto& e : experiments) {
    Json r;
    r["name"] = e.name;
    r["status"] = e.status;
    r["wall_time_s"] = e.wall_time;
    r["files"] = e.files;
    if (!e.error.empty()) r["error"] = e.error;
    j["experiments"].push_back(r);
  }
  return j;
}

RunManifest RunManifest::from_json(const Json& j) {
  RunManifest m;
  try {
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.field = j.value("field", "");
    for (const auto& r : j.at("experiments")) {
      ExperimentRecord e;
      e.name = r.at("name").get<std::string>();
      e.status = r.at("status").get<std::string>();
      e.wall_time = r.at("wall_time_s").get<double>();
      e.files = r.at("files").get<std::vector<std::string>>();
      e.error = r.value("error", "");
      m.experiments.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    throw Error(std::string("manifest: ") + e.what());
  }
  return m;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto body = [&] {
    for (int i; (i = next++) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min(workers, count));
  if (nt == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string htag(double h) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "h" << h;
  return os.str();
}

// Artifacts written by one experiment, relative to the run directory.
class Sink {
 public:
  explicit Sink(fs::path dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& rel) { return dir_ / rel; }

  void add(const fs::path& p) {
    std::lock_guard lock(mu_);
    files_.push_back(fs::relative(p, dir_).generic_string());
  }
  void add(const std::vector<fs::path>& ps) {
    for (const auto& p : ps) add(p);
  }
  void csv(const std::string& rel, const CsvWriter& w) {
    w.write(path(rel));
    add(path(rel));
  }
  void json(const std::string& rel, const Json& j) {
    write_json(path(rel), j);
    add(path(rel));
  }
  template <class Plot>
  void plot(const std::string& rel, const Plot& p) {
    p.write(path(rel));
    add(path(rel));
  }
  std::vector<std::string> files() const { return files_; }

 private:
  fs::path dir_;
  std::mutex mu_;
  std::vector<std::string> files_;
};

Json null_or(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

GridVector l2_normalized(GridVector u, const Grid2D& g) {
  double n = std::sqrt(u.squaredNorm() * g.cell_area());
  if (n == 0.0) throw Error("zero vector");
  return u / n;
}

// ---------------------------------------------------------------- spectrum

struct LevelResult {
  Grid2D grid;
  std::vector<EigenPair> pairs;
  double boundary = 0.0;
};

struct HResult {
  double h = 0.0;
  std::vector<LevelResult> levels;
  std::vector<double> lambda;  // extrapolated to zero spacing when two levels exist
};

struct SpectrumState {
  std::vector<HResult> per_h;
};

std::vector<double> extrapolate(const HResult& r, int k) {
  std::vector<double> out(k);
  if (r.levels.size() == 1) {
    for (int e = 0; e < k; ++e) out[e] = r.levels[0].pairs[e].value;
    return out;
  }
  const double d0 = std::pow(r.levels[0].grid.delta(), 2), d1 = std::pow(r.levels[1].grid.delta(), 2);
  for (int e = 0; e < k; ++e)
    out[e] = (r.levels[1].pairs[e].value * d0 - r.levels[0].pairs[e].value * d1) / (d0 - d1);
  return out;
}

void run_spectrum(const ExperimentConfig& cfg, Sink& sink, SpectrumState& st, std::ostream* log) {
  const MagneticField field = cfg.field();
  const int nh = static_cast<int>(cfg.hs.size());
  st.per_h.assign(nh, {});
  std::mutex log_mu;
  parallel_for(nh, cfg.workers, [&](int i) {
    HResult& r = st.per_h[i];
    r.h = cfg.hs[i];
    for (int lv = 0; lv < cfg.grid.levels(); ++lv) {
      auto t0 = Clock::now();
      Grid2D g = cfg.grid.grid(r.h, lv);
      MagneticOperator op = assemble_magnetic_laplacian(field, g, r.h, cfg.grid.resolution_factor);
      LevelResult lr{g, smallest_eigenpairs(op, cfg.solver), 0.0};
      lr.boundary = boundary_mass(g, lr.pairs[0].vector);
      r.levels.push_back(std::move(lr));
      if (log) {
        std::lock_guard lock(log_mu);
        *log << "  spectrum h=" << r.h << " N=" << g.N << " lambda0=" << std::setprecision(10)
             << r.levels.back().pairs[0].value << " (" << std::setprecision(3) << seconds_since(t0) << " s)\n";
      }
    }
    r.lambda = extrapolate(r, cfg.solver.k);
  });

  const WellData well = field_hessian_minimum(field);
  const double b0 = well.b0;
  const int k = cfg.solver.k;
  std::vector<double> pc(k);
  for (int e = 0; e < k; ++e) pc[e] = predicted_h2_coefficient(field, e);

  CsvWriter raw({"h", "level", "N", "L", "spacing", "ell", "lambda", "residual", "boundary_mass"});
  CsvWriter ext({"h", "ell", "lambda", "c", "predicted_c", "predicted_lambda"});
  for (const auto& r : st.per_h) {
    for (std::size_t lv = 0; lv < r.levels.size(); ++lv) {
      const auto& l = r.levels[lv];
      for (int e = 0; e < k; ++e)
        raw.add_row({r.h, static_cast<long>(lv), static_cast<long>(l.grid.N), l.grid.L, l.grid.delta(),
                     static_cast<long>(e), l.pairs[e].value, l.pairs[e].residual, e == 0 ? l.boundary : NAN});
    }
    for (int e = 0; e < k; ++e)
      ext.add_row({r.h, static_cast<long>(e), r.lambda[e], (r.lambda[e] - b0 * r.h) / (r.h * r.h), pc[e],
                   b0 * r.h + pc[e] * r.h * r.h});
  }
  sink.csv("spectrum.csv", raw);
  sink.csv("spectrum_extrapolated.csv", ext);

  std::vector<double> hs, c0, c1, gap;
  for (const auto& r : st.per_h) {
    hs.push_back(r.h);
    c0.push_back((r.lambda[0] - b0 * r.h) / (r.h * r.h));
    c1.push_back((r.lambda[1] - b0 * r.h) / (r.h * r.h));
    gap.push_back((r.lambda[1] - r.lambda[0]) / (r.h * r.h));
  }
  auto rc0 = richardson_halving(hs, c0), rgap = richardson_halving(hs, gap);
  const double pgap = pc[1] - pc[0];
  Json a;
  a["field"] = cfg.field_id;
  a["b0"] = b0;
  a["predicted_c0"] = pc[0];
  a["predicted_gap"] = pgap;
  a["grid_levels"] = cfg.grid.levels();
  a["h"] = hs;
  a["c0"] = c0;
  a["c1"] = c1;
  a["gap"] = gap;
  Json jr0 = Json::array(), jrg = Json::array();
  for (std::size_t i = 0; i < hs.size(); ++i) {
    jr0.push_back(null_or(rc0[i]));
    jrg.push_back(null_or(rgap[i]));
  }
  a["richardson_c0"] = jr0;
  a["richardson_gap"] = jrg;
  const double final_c0 = hs.size() > 1 ? rc0.back() : c0.back();
  a["final_c0"] = final_c0;
  a["final_c0_relative_error"] = std::abs(final_c0 - pc[0]) / pc[0];
  double gap_at = NAN;
  for (std::size_t i = 0; i < hs.size(); ++i)
    if (std::abs(hs[i] - cfg.verify.gap_h) < 1e-12 * cfg.verify.gap_h) gap_at = i > 0 ? rgap[i] : gap[i];
  a["gap_h"] = cfg.verify.gap_h;
  a["gap_at_gap_h"] = null_or(gap_at);
  a["gap_relative_error"] = null_or(std::abs(gap_at - pgap) / pgap);
  sink.json("asymptotics.json", a);

  std::vector<double> l0, l1, p0, p1;
  for (const auto& r : st.per_h) {
    l0.push_back(r.lambda[0]);
    l1.push_back(r.lambda[1]);
    p0.push_back(b0 * r.h + pc[0] * r.h * r.h);
    p1.push_back(b0 * r.h + pc[1] * r.h * r.h);
  }
  LinePlot lp{"Lowest eigenvalues against h", "h", "lambda", true, true, {}};
  lp.series.push_back({"lambda0 computed", hs, l0, true, false, ""});
  lp.series.push_back({"lambda1 computed", hs, l1, true, false, ""});
  lp.series.push_back({"two-term prediction, l=0", hs, p0, false, true, ""});
  lp.series.push_back({"two-term prediction, l=1", hs, p1, false, true, ""});
  sink.plot("lambda_vs_h.svg", lp);

  LinePlot cp{"Second-order coefficient (lambda - b0 h)/h^2", "h", "c", true, false, {}};
  cp.series.push_back({"c0", hs, c0, true, true, ""});
  cp.series.push_back({"c1", hs, c1, true, true, ""});
  cp.series.push_back({"predicted c0", hs, std::vector<double>(hs.size(), pc[0]), false, true, ""});
  cp.series.push_back({"predicted c1", hs, std::vector<double>(hs.size(), pc[1]), false, true, ""});
  sink.plot("coefficient_vs_h.svg", cp);

  for (const auto& r : st.per_h) {
    const auto& l = r.levels.back();
    for (int e = 0; e < std::min(k, 2); ++e) {
      EigenvectorRecord rec{l.grid, r.h, e, l.pairs[e].value, l.pairs[e].residual, cfg.field_id};
      sink.add(write_eigenvector(sink.path("eigenvectors/" + htag(r.h) + "_l" + std::to_string(e)), l.pairs[e].vector,
                                 rec));
    }
  }
  if (cfg.export_matrix) {
    Grid2D g = cfg.grid.grid(cfg.hs.front(), 0);
    MagneticOperator op = assemble_magnetic_laplacian(field, g, cfg.hs.front(), cfg.grid.resolution_factor);
    fs::path p = sink.path("operator_" + htag(cfg.hs.front()) + ".mtx");
    write_matrix_market(p, op.matrix);
    sink.add(p);
  }
}

// ---------------------------------------------------------------- analysis

struct DecayResult {
  double eps1 = 0.0, eps2 = 0.0;
  double global1 = 0.0, global2 = 0.0;
  PhaseSpaceSlice s1, s2;
};

double slice_weighted_ratio(const PhaseSpaceSlice& s, const AgmonWeight& psi, double eps, double h) {
  double num = 0.0, den = 0.0;
  for (std::size_t i2 = 0; i2 < s.grid2.size(); ++i2)
    for (std::size_t i1 = 0; i1 < s.grid1.size(); ++i1) {
      double m = std::norm(s.at(i1, i2));
      num += std::exp(2 * eps * psi({s.grid1[i1], s.grid2[i2]}) / h) * m;
      den += m;
    }
  return num / den;
}

DecayResult measure_decay(const ExperimentConfig& cfg, const MagneticField& field, double h) {
  const double L = cfg.fbi.decay_L_over_sqrt_h * std::sqrt(h);
  Grid2D g(L, required_points(L, h, cfg.fbi.decay_spacing_over_sqrt_h));
  MagneticOperator op = assemble_metric_laplacian(field, g, h, cfg.grid.resolution_factor);
  SolverConfig sc = cfg.solver;
  sc.k = 1;
  auto ev = smallest_eigenpairs(op, sc);
  GridVector unf = l2_normalized(metaplectic_apply(ev[0].vector, g, h, MetaplecticDirection::Inverse), g);
  FbiEngine engine(g, h, cfg.fbi.pad);
  const double extent = cfg.fbi.slice_extent_over_sqrt_h * std::sqrt(h);
  DecayResult d;
  d.s1 = fbi_slice(engine, unf, decay_slice_spec(engine, 1, extent));
  d.s2 = fbi_slice(engine, unf, decay_slice_spec(engine, 2, extent));
  const AgmonWeight psi = AgmonWeight::paper_f();
  auto rates = phase_space_decay_rate(d.s1, d.s2, psi, psi, h);
  d.eps1 = rates.eps1;
  d.eps2 = rates.eps2;
  d.global1 = slice_weighted_ratio(d.s1, psi, cfg.weights.eps.front(), h);
  d.global2 = slice_weighted_ratio(d.s2, psi, cfg.weights.eps.front(), h);
  return d;
}

void run_analysis(const ExperimentConfig& cfg, Sink& sink, const SpectrumState& st, std::ostream* log) {
  const MagneticField field = cfg.field();
  const int nh = static_cast<int>(st.per_h.size());
  struct Row {
    double moment2 = 0, overlap = 0;
    std::vector<double> masses;
    DecayResult decay;
  };
  std::vector<Row> rows(nh);
  const AgmonWeight weight = AgmonWeight::paper_f();
  std::mutex log_mu;
  parallel_for(nh, cfg.workers, [&](int i) {
    auto t0 = Clock::now();
    const HResult& r = st.per_h[i];
    const LevelResult& l = r.levels.back();
    const GridVector& u = l.pairs[0].vector;
    Row& row = rows[i];
    row.moment2 = second_moment(l.grid, u);
    row.overlap = quasimode_overlap(l.grid, u, wkb_ansatz(field, l.grid, r.h, cfg.analysis.wkb_cutoff));
    for (double eps : cfg.weights.eps) row.masses.push_back(agmon_weighted_mass(l.grid, u, weight, eps, r.h));
    row.decay = measure_decay(cfg, field, r.h);
    if (log) {
      std::lock_guard lock(log_mu);
      *log << "  analysis h=" << r.h << " (" << std::setprecision(3) << seconds_since(t0) << " s)\n";
    }
  });

  std::vector<double> hs, m2, e1, e2, ov;
  CsvWriter table({"h", "lambda0", "lambda1", "moment2", "eps1_eff", "eps2_eff", "overlap", "weighted_mass"});
  CsvWriter masses({"h", "eps", "weighted_mass"});
  for (int i = 0; i < nh; ++i) {
    const auto& r = st.per_h[i];
    const auto& row = rows[i];
    table.add_row({r.h, r.lambda[0], r.lambda[1], row.moment2, row.decay.eps1, row.decay.eps2, row.overlap,
                   row.masses.front()});
    for (std::size_t e = 0; e < cfg.weights.eps.size(); ++e) masses.add_row({r.h, cfg.weights.eps[e], row.masses[e]});
    hs.push_back(r.h);
    m2.push_back(row.moment2);
    e1.push_back(row.decay.eps1);
    e2.push_back(row.decay.eps2);
    ov.push_back(1.0 - row.overlap);
  }
  sink.csv("fit_table.csv", table);
  sink.csv("weighted_mass.csv", masses);

  const WellData well = field_hessian_minimum(field);
  const double sa = std::sqrt(well.alpha), sg = std::sqrt(well.gamma);
  // second moment of |e^{-Re S/h}|^2 divided by h
  const double wkb_m = (1.0 / (sa / (sa + sg)) + 1.0 / (sg / (sa + sg))) / (2.0 * well.b0);
  ScalingFit fit = moment_scaling(hs, m2);
  Json mf;
  mf["slope"] = fit.slope;
  mf["intercept"] = fit.intercept;
  mf["residual"] = fit.residual;
  mf["slope_stderr"] = fit.slope_stderr;
  mf["naive_slope"] = 0.5;
  mf["standard_errors_from_naive"] = (fit.slope - 0.5) / fit.slope_stderr;
  mf["wkb_intercept"] = std::log(wkb_m);
  sink.json("moment_fit.json", mf);

  CsvWriter mfit({"h", "moment2", "fitted_moment2", "wkb_moment2"});
  std::vector<double> fitted, wkb;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    fitted.push_back(std::exp(fit.intercept) * std::pow(hs[i], fit.slope));
    wkb.push_back(wkb_m * hs[i]);
    mfit.add_row({hs[i], m2[i], fitted.back(), wkb.back()});
  }
  sink.csv("moment_fit.csv", mfit);
  LinePlot mp{"Second moment of the ground state", "h", "int |x|^2 |u|^2", true, true, {}};
  mp.series.push_back({"computed", hs, m2, true, false, ""});
  mp.series.push_back({"least-squares fit", hs, fitted, false, true, ""});
  mp.series.push_back({"WKB Gaussian", hs, wkb, false, true, ""});
  sink.plot("moment_vs_h.svg", mp);

  Json report;
  report["weight"] = weight.kind;
  report["eps_weighted_integral"] = cfg.weights.eps.front();
  report["slice_extent_over_sqrt_h"] = cfg.fbi.slice_extent_over_sqrt_h;
  report["entries"] = Json::array();
  CsvWriter prof({"h", "block", "direction", "distance", "decay"});
  std::vector<PlotSeries> ps1, ps2;
  for (int i = 0; i < nh; ++i) {
    const double h = hs[i];
    const auto& d = rows[i].decay;
    std::vector<std::string> files;
    for (int j = 1; j <= 2; ++j) {
      const PhaseSpaceSlice& s = j == 1 ? d.s1 : d.s2;
      std::string stem = "slices/decay_" + htag(h) + "_block" + std::to_string(j);
      write_slice_csv(sink.path(stem + ".csv"), s);
      sink.add(sink.path(stem + ".csv"));
      sink.add(write_slice_binary(sink.path(stem), s));
      files.push_back(stem + ".csv");
      HeatMap hm;
      hm.title = "|Tu|^2 on the (x" + std::to_string(j) + ", xi" + std::to_string(j) + ") plane, h=" + htag(h).substr(1);
      hm.xlabel = axis_name(s.axis1);
      hm.ylabel = axis_name(s.axis2);
      hm.xs = s.grid1;
      hm.ys = s.grid2;
      for (const auto& v : s.values) hm.values.push_back(std::norm(v));
      sink.plot(stem + ".svg", hm);
      for (int dir = 0; dir < 2; ++dir) {
        auto rp = ray_profile(s, h, dir == 0 ? 1 : 0, dir == 0 ? 0 : 1);
        PlotSeries ser{htag(h) + (dir == 0 ? " x" : " xi"), {}, {}, false, true, ""};
        for (const auto& p : rp) {
          double dist = std::sqrt(norm2(p.offset));
          prof.add_row({h, static_cast<long>(j), std::string(dir == 0 ? "x" : "xi"), dist, p.decay});
          ser.x.push_back(dist);
          ser.y.push_back(p.decay);
        }
        if (dir == 0) (j == 1 ? ps1 : ps2).push_back(std::move(ser));
      }
    }
    Json e;
    e["h"] = h;
    e["eps1_eff"] = d.eps1;
    e["eps2_eff"] = d.eps2;
    e["weighted_integral_block1"] = d.global1;
    e["weighted_integral_block2"] = d.global2;
    e["slice_points"] = {d.s1.grid1.size(), d.s1.grid2.size()};
    e["slices"] = files;
    report["entries"].push_back(e);
  }
  sink.json("decay_report.json", report);
  sink.csv("decay_profiles.csv", prof);
  LinePlot d1{"Decay along x1 in the (x1, xi1) plane", "distance from peak", "-(h/2) log(|Tu|^2/peak)", false, false,
              ps1};
  LinePlot d2{"Decay along x2 in the (x2, xi2) plane", "distance from peak", "-(h/2) log(|Tu|^2/peak)", false, false,
              ps2};
  sink.plot("decay_profiles_block1.svg", d1);
  sink.plot("decay_profiles_block2.svg", d2);
}

// ---------------------------------------------------------------- fbi

void run_fbi(const ExperimentConfig& cfg, Sink& sink, std::ostream* log) {
  const MagneticField field = cfg.field();
  const double h = cfg.fbi.h, sh = std::sqrt(h);
  const double L = cfg.fbi.L_over_sqrt_h * sh;
  Grid2D g(L, required_points(L, h, cfg.fbi.spacing_over_sqrt_h));
  SolverConfig sc = cfg.solver;
  sc.k = 1;
  auto ev = smallest_eigenpairs(assemble_magnetic_laplacian(field, g, h, cfg.grid.resolution_factor), sc);
  GridVector u = l2_normalized(ev[0].vector, g);

  XSampling xs;
  xs.extent = cfg.fbi.sample_extent_over_sqrt_h * sh;
  xs.count = static_cast<int>(std::ceil(2 * xs.extent / (cfg.fbi.sample_spacing_over_sqrt_h * sh))) + 1;
  FbiEngine engine(g, h, cfg.fbi.pad);
  const double iso = fbi_isometry_defect(engine, u, xs);
  GridVector back = fbi_roundtrip(engine, u, xs);
  const double recon = (back - u).norm() / u.norm();
  if (log) *log << "  fbi isometry " << iso << " reconstruction " << recon << "\n";

  std::vector<double> residuals;
  Json holo = Json::array();
  const double ext = cfg.fbi.holomorphy_extent_over_sqrt_h * sh;
  for (int pad : cfg.fbi.holomorphy_pads) {
    FbiEngine e(g, h, pad);
    const double d = e.dxi();
    const int m = static_cast<int>(std::floor(ext / d));
    SliceSpec s;
    s.a1 = {PhaseAxis::X1, -m * d, m * d, 2 * m + 1};
    s.a2 = {PhaseAxis::Xi1, -ext, ext, 0};
    auto sl = fbi_slice(e, u, s);
    residuals.push_back(holomorphy_residual(sl));
    holo.push_back({{"pad", pad}, {"dxi", d}, {"residual", residuals.back()}});
  }
  std::vector<double> ratios;
  for (std::size_t i = 1; i < residuals.size(); ++i) ratios.push_back(residuals[i - 1] / residuals[i]);

  HusimiCheck hc = husimi_oscillator_identity(h, g, xs, cfg.fbi.pad);
  HusimiCheck hc2 = husimi_oscillator_identity(2 * h, Grid2D(L * std::sqrt(2.0), g.N), [&] {
    XSampling x2 = xs;
    x2.extent *= std::sqrt(2.0);
    return x2;
  }(), cfg.fbi.pad);

  Json j;
  j["h"] = h;
  j["grid"] = {{"L", g.L}, {"N", g.N}};
  j["pad"] = cfg.fbi.pad;
  j["x_samples_per_axis"] = xs.count;
  j["x_extent"] = xs.extent;
  j["ground_state_eigenvalue"] = ev[0].value;
  j["isometry_defect"] = iso;
  j["reconstruction_error"] = recon;
  j["holomorphy"] = holo;
  j["holomorphy_ratios"] = ratios;
  j["husimi"] = {{"energy", hc.energy},
                 {"energy_over_h", hc.energy / h},
                 {"quantum", hc.quantum},
                 {"defect", hc.defect},
                 {"energy_at_2h", hc2.energy},
                 {"quantum_at_2h", hc2.quantum}};
  sink.json("fbi.json", j);

  const double d = engine.dxi();
  const int m = static_cast<int>(std::floor(6 * sh / d));
  SliceSpec s;
  s.a1 = {PhaseAxis::X1, -m * d, m * d, 2 * m + 1};
  s.a2 = {PhaseAxis::Xi1, -m * d, m * d, 0};
  auto sl = fbi_slice(engine, u, s);
  write_slice_csv(sink.path("slices/ground_state_x1_xi1.csv"), sl);
  sink.add(sink.path("slices/ground_state_x1_xi1.csv"));
  sink.add(write_slice_binary(sink.path("slices/ground_state_x1_xi1"), sl));
  HeatMap hm;
  hm.title = "|Tu|^2 of the ground state, x2 = xi2 = 0";
  hm.xlabel = "x1";
  hm.ylabel = "xi1";
  hm.xs = sl.grid1;
  hm.ys = sl.grid2;
  for (const auto& v : sl.values) hm.values.push_back(std::norm(v));
  sink.plot("slices/ground_state_x1_xi1.svg", hm);
}

// ---------------------------------------------------------------- landau

void run_landau(const ExperimentConfig& cfg, Sink& sink) {
  auto t0 = Clock::now();
  const auto& p = cfg.landau;
  MagneticField field = MagneticField::make("constant", {p.b});
  Grid2D g(p.L, p.N);
  SolverConfig sc = cfg.solver;
  sc.k = p.k;
  auto ev = smallest_eigenpairs(assemble_magnetic_laplacian(field, g, p.h, cfg.grid.resolution_factor), sc);
  const double wall = seconds_since(t0);
  const double exact = p.b * p.h;
  Json j;
  j["b"] = p.b;
  j["h"] = p.h;
  j["grid"] = {{"L", g.L}, {"N", g.N}};
  j["exact_lowest"] = exact;
  Json vals = Json::array();
  for (const auto& e : ev) vals.push_back({{"lambda", e.value}, {"residual", e.residual}});
  j["eigenvalues"] = vals;
  j["lambda0"] = ev[0].value;
  j["relative_error"] = std::abs(ev[0].value - exact) / exact;
  j["wall_time_s"] = wall;
  sink.json("landau.json", j);
}

// ---------------------------------------------------------------- metric

void run_metric(const ExperimentConfig& cfg, Sink& sink) {
  const MagneticField field = cfg.field();
  const auto& p = cfg.metric;
  const double L = p.L_over_sqrt_h * std::sqrt(p.h);
  Grid2D g(L, required_points(L, p.h, p.spacing_over_sqrt_h));
  SolverConfig sc = cfg.solver;
  sc.k = p.k;
  auto mag = smallest_eigenpairs(assemble_magnetic_laplacian(field, g, p.h, cfg.grid.resolution_factor), sc);
  auto met = smallest_eigenpairs(assemble_metric_laplacian(field, g, p.h, cfg.grid.resolution_factor), sc);
  CsvWriter w({"ell", "landau_gauge", "metric_form", "relative_difference"});
  double worst = 0.0;
  Json rows = Json::array();
  for (int e = 0; e < p.k; ++e) {
    double rel = std::abs(met[e].value - mag[e].value) / std::abs(mag[e].value);
    worst = std::max(worst, rel);
    w.add_row({static_cast<long>(e), mag[e].value, met[e].value, rel});
  }
  sink.csv("metric_equivalence.csv", w);
  Json j;
  j["h"] = p.h;
  j["grid"] = {{"L", g.L}, {"N", g.N}};
  j["max_relative_difference"] = worst;
  j["boundary_mass_landau_gauge"] = boundary_mass(g, mag[0].vector);
  j["boundary_mass_metric_form"] = boundary_mass(g, met[0].vector);
  sink.json("metric.json", j);
}

// ---------------------------------------------------------------- metaplectic

void run_metaplectic(const ExperimentConfig& cfg, Sink& sink) {
  const auto& p = cfg.metaplectic;
  const double h = p.h;
  Grid2D g(p.L_over_sqrt_h * std::sqrt(h), p.N);
  GridVector v(g.size());
  for (long k = 0; k < v.size(); ++k) {
    Point2 x = g.node(k);
    Point2 c{0.3 * std::sqrt(h), -0.2 * std::sqrt(h)};
    v[k] = std::exp(-norm2(x - c) / (2 * h)) * std::exp(cd(0.0, 0.4 * x.x1 - 0.1 * x.x2));
  }
  GridVector mv = metaplectic_apply(v, g, h, MetaplecticDirection::Forward);
  GridVector back = metaplectic_apply(mv, g, h, MetaplecticDirection::Inverse);
  Json j;
  j["h"] = h;
  j["grid"] = {{"L", g.L}, {"N", g.N}};
  j["roundtrip_error"] = (back - v).norm() / v.norm();
  j["norm_defect"] = std::abs(mv.norm() / v.norm() - 1.0);
  j["egorov_x1"] = egorov_residual(h, g, EgorovSymbol::X1);
  j["egorov_xi1"] = egorov_residual(h, g, EgorovSymbol::Xi1);
  j["egorov_one"] = egorov_residual(h, g, EgorovSymbol::One);
  Json kern = Json::array();
  double worst = 0.0;
  for (double kh : p.kernel_h) {
    double dev = gaussian_kernel_identity_check(kh);
    worst = std::max(worst, dev);
    kern.push_back({{"h", kh}, {"deviation", dev}});
  }
  j["kernel_identity"] = kern;
  j["kernel_identity_max_deviation"] = worst;
  sink.json("metaplectic.json", j);
}

// ---------------------------------------------------------------- symbols

void run_symbols(const ExperimentConfig& cfg, Sink& sink) {
  CsvWriter w({"preset", "gamma", "c1", "c2"});
  for (const auto& id : MagneticField::preset_ids()) {
    MagneticField f = MagneticField::make(id);
    SymbolBounds b = symbol_lower_bound_scan(f, cfg.symbols.gamma, cfg.symbols.scan);
    w.add_row({id, cfg.symbols.gamma, b.c1, b.c2});
  }
  sink.csv("symbols.csv", w);
}

}  // namespace

RunManifest run_experiments(const ExperimentConfig& cfg, std::ostream* log) {
  fs::create_directories(cfg.output_dir);
  RunManifest man;
  man.version = tool_version();
  man.config_hash = cfg.hash;
  man.field = cfg.field_id;
  SpectrumState spectrum;
  bool spectrum_ok = false;

  for (const auto& name : experiment_names()) {
    if (!cfg.selected(name)) continue;
    ExperimentRecord rec;
    rec.name = name;
    Sink sink(cfg.output_dir);
    auto t0 = Clock::now();
    if (log) *log << "[" << name << "]\n";
    try {
      if (name == "spectrum") {
        run_spectrum(cfg, sink, spectrum, log);
        spectrum_ok = true;
      } else if (name == "analysis") {
        if (!spectrum_ok) throw Error("spectrum experiment did not complete");
        run_analysis(cfg, sink, spectrum, log);
      } else if (name == "fbi") {
        run_fbi(cfg, sink, log);
      } else if (name == "landau") {
        run_landau(cfg, sink);
      } else if (name == "metric") {
        run_metric(cfg, sink);
      } else if (name == "metaplectic") {
        run_metaplectic(cfg, sink);
      } else if (name == "symbols") {
        run_symbols(cfg, sink);
      }
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.error = name + ": " + e.what();
      if (log) *log << "  FAILED: " << e.what() << "\n";
    }
    rec.wall_time = seconds_since(t0);
    rec.files = sink.files();
    if (log) *log << "  " << rec.status << " in " << std::setprecision(3) << rec.wall_time << " s\n";
    man.experiments.push_back(std::move(rec));
  }
  write_json(cfg.output_dir / kManifestName, man.to_json());
  return man;
}

}  // namespace magwell
