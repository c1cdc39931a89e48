#include "magwell/analysis.hpp"

#include "magwell/operator.hpp"
#include "magwell/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magwell {

namespace {
const cd I(0.0, 1.0);
}

double predicted_h2_coefficient(const MagneticField& field, int ell) {
  WellData w = field_hessian_minimum(field);
  double sqrt_det = std::sqrt(w.H.det());
  double tr_sqrt = std::sqrt(w.alpha) + std::sqrt(w.gamma);
  return 2.0 * ell * sqrt_det / w.b0 + tr_sqrt * tr_sqrt / (2.0 * w.b0);
}

double predicted_eigenvalue(const MagneticField& field, int ell, double h) {
  WellData w = field_hessian_minimum(field);
  return w.b0 * h + predicted_h2_coefficient(field, ell) * h * h;
}

double paper_f(double rho) { return rho <= 1.0 ? rho * rho : 2.0 * rho - 1.0; }

AgmonWeight AgmonWeight::paper_f() {
  AgmonWeight w;
  w.kind = "paper-f-radial";
  w.d = [](Point2 x) { return magwell::paper_f(std::sqrt(norm2(x))); };
  w.lipschitz = 2.0;
  w.growth_slope = 2.0;
  return w;
}

AgmonWeight AgmonWeight::custom(std::function<double(Point2)> d, double lipschitz, double growth_slope) {
  AgmonWeight w;
  w.kind = "custom-lipschitz";
  w.d = std::move(d);
  w.lipschitz = lipschitz;
  w.growth_slope = growth_slope;
  return w;
}

double smooth_cutoff(double r, double R) {
  if (r <= R) return 1.0;
  if (r >= 2 * R) return 0.0;
  auto g = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  double t = (r - R) / R;
  return g(1 - t) / (g(1 - t) + g(t));
}

double poincare_gauge_phase(const MagneticField& field, Point2 x) {
  if (x.x2 == 0.0) return 0.0;
  double s = integrate_adaptive([&](double t) { return gauge_potential(field, {t * x.x1, t * x.x2}); }, 0.0, 1.0,
                                1e-10 * std::max(1.0, norm2(x)));
  return x.x2 * s;
}

double WKBAnsatz::re_phase(Point2 x) const {
  const double sa = std::sqrt(alpha), sg = std::sqrt(gamma);
  const double pa = dot(x, e_alpha);
  const double pg = dot(x, Point2{-e_alpha.x2, e_alpha.x1});
  return 0.5 * b0 * (sa / (sa + sg) * pa * pa + sg / (sa + sg) * pg * pg);
}

WKBAnsatz wkb_ansatz(const MagneticField& field, const Grid2D& grid, double h, double cutoff_radius, int ell) {
  WellData w = field_hessian_minimum(field);
  WKBAnsatz a;
  a.h = h;
  a.b0 = w.b0;
  a.alpha = w.alpha;
  a.gamma = w.gamma;
  a.e_alpha = w.e_alpha;
  a.cutoff_radius = cutoff_radius;
  a.ell = ell;
  a.mu0 = w.b0;
  const double s = std::sqrt(w.alpha) + std::sqrt(w.gamma);
  a.mu1 = 2.0 * ell * std::sqrt(w.alpha * w.gamma) / w.b0 + s * s / (2.0 * w.b0);
  a.grid = grid;
  a.u.resize(grid.size());
  for (long k = 0; k < grid.size(); ++k) {
    Point2 x = grid.node(k);
    double mod = smooth_cutoff(std::sqrt(norm2(x)), cutoff_radius) * std::exp(-a.re_phase(x) / h);
    a.u[k] = mod == 0.0 ? cd(0.0) : mod * std::exp(I * poincare_gauge_phase(field, x) / h);
  }
  a.u.normalize();
  return a;
}

double quasimode_overlap(const Grid2D& grid, const GridVector& u, const WKBAnsatz& ansatz) {
  if (!(grid == ansatz.grid) || u.size() != ansatz.u.size()) throw Error("quasimode_overlap: grid mismatch");
  double nu = u.norm(), nw = ansatz.u.norm();
  if (nu == 0.0 || nw == 0.0) return 0.0;
  return std::abs(u.dot(ansatz.u)) / (nu * nw);
}

double agmon_weighted_mass(const Grid2D& grid, const GridVector& u, const AgmonWeight& weight, double eps,
                           double h) {
  const double edge = 0.9 * grid.L;
  double total = 0.0, outer = 0.0, plain = 0.0;
  for (long k = 0; k < u.size(); ++k) {
    Point2 x = grid.node(k);
    double m = std::norm(u[k]);
    double v = std::exp(eps * weight(x) / h) * m;
    plain += m;
    total += v;
    if (std::abs(x.x1) > edge || std::abs(x.x2) > edge) outer += v;
  }
  if (plain == 0.0) throw Error("agmon_weighted_mass: zero vector");
  if (outer > 1e-8 * total) {
    std::ostringstream os;
    os << "agmon_weighted_mass: outer frame carries " << outer / total
       << " of the weighted integral; the bound is truncation-dominated, enlarge L";
    throw Error(os.str());
  }
  return total / plain;
}

double second_moment(const Grid2D& grid, const GridVector& u) {
  double num = 0.0, den = 0.0;
  for (long k = 0; k < u.size(); ++k) {
    double m = std::norm(u[k]);
    num += norm2(grid.node(k)) * m;
    den += m;
  }
  if (den == 0.0) throw Error("second_moment: zero vector");
  return num / den;
}

ScalingFit moment_scaling(const std::vector<double>& hs, const std::vector<double>& moments) {
  if (hs.size() != moments.size()) throw Error("moment_scaling: size mismatch");
  const std::size_t n = hs.size();
  if (n < 3) throw Error("moment_scaling: need at least 3 h values");
  double sx = 0, sy = 0;
  std::vector<double> X(n), Y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(hs[i] > 0) || !(moments[i] > 0)) throw Error("moment_scaling: values must be positive");
    X[i] = std::log(hs[i]);
    Y[i] = std::log(moments[i]);
    sx += X[i];
    sy += Y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  if (sxx == 0.0) throw Error("moment_scaling: h values must differ");
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = Y[i] - (f.slope * X[i] + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  f.slope_stderr = std::sqrt(ss / (n - 2) / sxx);
  return f;
}

namespace {

std::pair<std::size_t, std::size_t> slice_peak(const PhaseSpaceSlice& s, double& peak) {
  std::size_t p1 = 0, p2 = 0;
  peak = -1.0;
  for (std::size_t i2 = 0; i2 < s.grid2.size(); ++i2)
    for (std::size_t i1 = 0; i1 < s.grid1.size(); ++i1)
      if (std::norm(s.at(i1, i2)) > peak) {
        peak = std::norm(s.at(i1, i2));
        p1 = i1;
        p2 = i2;
      }
  if (!(peak > 0)) throw Error("decay rate: slice vanishes");
  return {p1, p2};
}

}  // namespace

std::vector<RayPoint> ray_profile(const PhaseSpaceSlice& s, double h, int d1, int d2) {
  const long n1 = static_cast<long>(s.grid1.size()), n2 = static_cast<long>(s.grid2.size());
  if (n1 < 3 || n2 < 3) throw Error("decay rate: slice too small");
  if (d1 == 0 && d2 == 0) throw Error("ray_profile: zero direction");
  double peak = 0.0;
  auto [p1, p2] = slice_peak(s, peak);
  std::vector<RayPoint> out;
  for (long k = 1;; ++k) {
    long i1 = static_cast<long>(p1) + k * d1, i2 = static_cast<long>(p2) + k * d2;
    if (i1 < 0 || i2 < 0 || i1 >= n1 || i2 >= n2) break;
    double r = std::norm(s.at(i1, i2)) / peak;
    if (r <= 1e-12) break;
    out.push_back({{s.grid1[i1] - s.grid1[p1], s.grid2[i2] - s.grid2[p2]}, -0.5 * h * std::log(r)});
  }
  return out;
}

double slice_decay_rate(const PhaseSpaceSlice& s, const AgmonWeight& psi, double h) {
  if (s.grid1.size() < 3 || s.grid2.size() < 3) throw Error("decay rate: slice too small");
  const double d1 = s.grid1[1] - s.grid1[0], d2 = s.grid2[1] - s.grid2[0];
  if (std::abs(d1 - d2) > 1e-9 * std::max(d1, d2)) throw Error("decay rate: slice must be square-spaced");
  const int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  double best = INFINITY;
  for (const auto& d : dirs) {
    double syp = 0, spp = 0, deepest = 0;
    for (const RayPoint& p : ray_profile(s, h, d[0], d[1])) {
      double ps = psi(p.offset);
      syp += p.decay * ps;
      spp += ps * ps;
      deepest = std::max(deepest, p.decay);
    }
    if (spp == 0.0) throw Error("decay rate: weight vanishes along a ray; the fit is degenerate");
    // 4 decades of |Tu|^2 correspond to a decay value of 2 h ln 10
    const double decades = 2.0 * deepest / (h * std::log(10.0));
    if (decades < 4.0) {
      std::ostringstream os;
      os << "decay rate: ray dynamic range " << decades << " decades is below 4; extend the slice";
      throw Error(os.str());
    }
    best = std::min(best, syp / spp);
  }
  return best;
}

DecayRates phase_space_decay_rate(const PhaseSpaceSlice& x1_slice, const PhaseSpaceSlice& x2_slice,
                                  const AgmonWeight& psi1, const AgmonWeight& psi2, double h) {
  return {slice_decay_rate(x1_slice, psi1, h), slice_decay_rate(x2_slice, psi2, h)};
}

SliceSpec decay_slice_spec(const FbiEngine& engine, int j, double extent) {
  if (j != 1 && j != 2) throw Error("decay_slice_spec: j must be 1 or 2");
  const double d = engine.dxi();
  const int m = static_cast<int>(std::floor(extent / d));
  SliceSpec s;
  s.a1 = {j == 1 ? PhaseAxis::X1 : PhaseAxis::X2, -m * d, m * d, 2 * m + 1};
  s.a2 = {j == 1 ? PhaseAxis::Xi1 : PhaseAxis::Xi2, -m * d, m * d, 0};
  s.fixed = {0.0, 0.0, 0.0, 0.0};
  return s;
}

HusimiCheck husimi_oscillator_identity(double h, const Grid2D& grid, const XSampling& xs, int pad, bool zero_state) {
  GridVector u(grid.size());
  for (long k = 0; k < u.size(); ++k) u[k] = zero_state ? 0.0 : std::exp(-norm2(grid.node(k)) / (2 * h));
  HusimiCheck c;
  const double area = grid.cell_area();
  const double nrm = std::sqrt(u.squaredNorm() * area);
  if (nrm == 0.0) return c;
  u /= nrm;
  FbiEngine engine(grid, h, pad);
  PhaseMoments m = fbi_moments(engine, u, xs);
  c.energy = m.second;
  double pot = 0.0;
  for (long k = 0; k < u.size(); ++k) pot += norm2(grid.node(k)) * std::norm(u[k]);
  GridVector d1 = semiclassical_derivative(u, grid, h, 1), d2 = semiclassical_derivative(u, grid, h, 2);
  c.quantum = area * (pot + d1.squaredNorm() + d2.squaredNorm());
  c.defect = std::abs((c.energy - 2 * h) - c.quantum);
  return c;
}

std::vector<double> richardson_halving(const std::vector<double>& hs, const std::vector<double>& c) {
  if (hs.size() != c.size()) throw Error("richardson: size mismatch");
  std::vector<double> out(c.size(), NAN);
  for (std::size_t i = 1; i < c.size(); ++i) {
    double r = hs[i - 1] / hs[i];
    out[i] = (r * c[i] - c[i - 1]) / (r - 1.0);
  }
  return out;
}

}  // namespace magwell
