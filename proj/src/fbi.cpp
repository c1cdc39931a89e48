#include "magwell/fbi.hpp"

#include "magwell/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace magwell {

namespace {

constexpr double kPi = std::numbers::pi;
const cd I(0.0, 1.0);

// Window cut-off: e^{-r^2/2h} < 1e-31 beyond 12 sqrt(h).
constexpr double kWindowRadius = 12.0;

struct IndexRange {
  int lo, hi;  // inclusive
};

IndexRange window(const Grid2D& g, double c, double r) {
  const double y0 = g.coord(0), d = g.delta();
  int lo = std::max(0, static_cast<int>(std::ceil((c - r - y0) / d)));
  int hi = std::min(g.n() - 1, static_cast<int>(std::floor((c + r - y0) / d)));
  return {lo, hi};
}

bool is_xi(PhaseAxis a) { return a == PhaseAxis::Xi1 || a == PhaseAxis::Xi2; }

}  // namespace

double fbi_alpha(double h) { return 0.5 * std::pow(kPi * h, -1.5); }
double fbi_alpha_1d(double h) { return std::pow(2.0, -0.5) * std::pow(kPi, -0.75) * std::pow(h, -0.75); }

std::string axis_name(PhaseAxis a) {
  switch (a) {
    case PhaseAxis::X1: return "x1";
    case PhaseAxis::X2: return "x2";
    case PhaseAxis::Xi1: return "xi1";
    case PhaseAxis::Xi2: return "xi2";
  }
  return "?";
}

PhaseAxis parse_axis(const std::string& s) {
  if (s == "x1") return PhaseAxis::X1;
  if (s == "x2") return PhaseAxis::X2;
  if (s == "xi1") return PhaseAxis::Xi1;
  if (s == "xi2") return PhaseAxis::Xi2;
  throw Error("unknown phase-space axis '" + s + "'");
}

FbiEngine::FbiEngine(const Grid2D& grid, double h, int pad) : grid_(grid), h_(h), alpha_(fbi_alpha(h)), pad_(pad) {
  if (!(h > 0)) throw Error("FBI: h must be positive");
  if (pad < 2) throw Error("FBI: zero-padding factor must be at least 2");
  M_ = pad * grid.n();
  if (M_ % 2) ++M_;
  dxi_ = 2.0 * kPi * h / (M_ * grid.delta());
  const double xi_max = kPi * h / grid.delta();
  if (xi_max < 6.0 * std::sqrt(h)) {
    std::ostringstream os;
    os << "FBI: dual grid extent " << xi_max << " is below 6 sqrt(h); refine the source grid to N >= "
       << required_points(grid.L, h, kPi / 6.0);
    throw Error(os.str());
  }
  plan_ = std::make_unique<FftPlan>(M_, M_);
}

int FbiEngine::xi_index(double xi) const {
  int q = static_cast<int>(std::lround(xi / dxi_)) + M_ / 2;
  return std::clamp(q, 0, M_ - 1);
}

void FbiEngine::row(const GridVector& u, Point2 x, std::vector<cd>& out) const {
  const int n = grid_.n(), M = M_;
  if (u.size() != grid_.size()) throw Error("FBI: vector does not match the grid");
  auto& buf = plan_->data();
  std::fill(buf.begin(), buf.end(), cd(0.0));
  const double r = kWindowRadius * std::sqrt(h_);
  IndexRange w1 = window(grid_, x.x1, r), w2 = window(grid_, x.x2, r);
  std::vector<double> g1(n), g2(n);
  for (int j = w1.lo; j <= w1.hi; ++j) g1[j] = std::exp(-std::pow(x.x1 - grid_.coord(j), 2) / (2 * h_));
  for (int j = w2.lo; j <= w2.hi; ++j) g2[j] = std::exp(-std::pow(x.x2 - grid_.coord(j), 2) / (2 * h_));
  for (int j2 = w2.lo; j2 <= w2.hi; ++j2)
    for (int j1 = w1.lo; j1 <= w1.hi; ++j1)
      buf[static_cast<std::size_t>(j2) * M + j1] = g1[j1] * g2[j2] * u[grid_.index(j1, j2)];
  plan_->forward();
  const double y0 = grid_.coord(0);
  const double scale = alpha_ * grid_.cell_area();
  std::vector<cd> p1(M), p2(M);
  for (int q = 0; q < M; ++q) {
    p1[q] = std::exp(I * (x.x1 - y0) * xi(q) / h_);
    p2[q] = std::exp(I * (x.x2 - y0) * xi(q) / h_);
  }
  out.resize(static_cast<std::size_t>(M) * M);
  for (int q2 = 0; q2 < M; ++q2) {
    int b2 = (q2 - M / 2 + M) % M;
    for (int q1 = 0; q1 < M; ++q1) {
      int b1 = (q1 - M / 2 + M) % M;
      out[static_cast<std::size_t>(q2) * M + q1] = scale * p1[q1] * p2[q2] * buf[static_cast<std::size_t>(b2) * M + b1];
    }
  }
}

void FbiEngine::accumulate_adjoint(Point2 x, const std::vector<cd>& row, double weight, GridVector& acc) const {
  const int M = M_;
  auto& buf = plan_->data();
  const double y0 = grid_.coord(0);
  std::vector<cd> p1(M), p2(M);
  for (int q = 0; q < M; ++q) {
    p1[q] = std::exp(-I * (x.x1 - y0) * xi(q) / h_);
    p2[q] = std::exp(-I * (x.x2 - y0) * xi(q) / h_);
  }
  for (int q2 = 0; q2 < M; ++q2) {
    int b2 = (q2 - M / 2 + M) % M;
    for (int q1 = 0; q1 < M; ++q1) {
      int b1 = (q1 - M / 2 + M) % M;
      buf[static_cast<std::size_t>(b2) * M + b1] = row[static_cast<std::size_t>(q2) * M + q1] * p1[q1] * p2[q2];
    }
  }
  plan_->backward();
  const double r = kWindowRadius * std::sqrt(h_);
  IndexRange w1 = window(grid_, x.x1, r), w2 = window(grid_, x.x2, r);
  const double scale = weight * alpha_ * dxi_ * dxi_;
  for (int j2 = w2.lo; j2 <= w2.hi; ++j2) {
    double g2 = std::exp(-std::pow(x.x2 - grid_.coord(j2), 2) / (2 * h_));
    for (int j1 = w1.lo; j1 <= w1.hi; ++j1) {
      double g1 = std::exp(-std::pow(x.x1 - grid_.coord(j1), 2) / (2 * h_));
      acc[grid_.index(j1, j2)] += scale * g1 * g2 * buf[static_cast<std::size_t>(j2) * M + j1];
    }
  }
}

PhaseSpaceSlice fbi_slice(const FbiEngine& engine, const GridVector& u, const SliceSpec& spec) {
  if (spec.a1.axis == spec.a2.axis) throw Error("FBI slice: axes must differ");
  PhaseSpaceSlice s;
  s.axis1 = spec.a1.axis;
  s.axis2 = spec.a2.axis;
  s.h = engine.h();
  s.fixed = spec.fixed;
  std::vector<int> q1, q2;  // dual-grid indices for xi axes
  auto build = [&](const SliceAxisSpec& a, std::vector<double>& g, std::vector<int>& qs) {
    if (is_xi(a.axis)) {
      for (int q = 0; q < engine.M(); ++q) {
        double v = engine.xi(q);
        if (v >= a.lo - 1e-12 && v <= a.hi + 1e-12) {
          g.push_back(v);
          qs.push_back(q);
        }
      }
    } else {
      if (a.count < 1) throw Error("FBI slice: x-axis needs a positive count");
      for (int i = 0; i < a.count; ++i) g.push_back(a.count == 1 ? a.lo : a.lo + (a.hi - a.lo) * i / (a.count - 1.0));
    }
    if (g.empty()) throw Error("FBI slice: axis " + axis_name(a.axis) + " has no nodes in range");
  };
  build(spec.a1, s.grid1, q1);
  build(spec.a2, s.grid2, q2);
  // Frozen xi values snap to the dual grid.
  for (int a : {2, 3})
    if (static_cast<int>(s.axis1) != a && static_cast<int>(s.axis2) != a)
      s.fixed[a] = engine.xi(engine.xi_index(s.fixed[a]));

  const std::size_t n1 = s.grid1.size(), n2 = s.grid2.size();
  s.values.assign(n1 * n2, cd(0.0));
  std::vector<cd> row;
  const int M = engine.M();
  auto value_at = [&](const std::array<double, 4>& c, int qa, int qb) -> cd {
    int r1 = qa >= 0 ? qa : engine.xi_index(c[2]);
    int r2 = qb >= 0 ? qb : engine.xi_index(c[3]);
    return row[static_cast<std::size_t>(r2) * M + r1];
  };
  const bool x1 = !is_xi(s.axis1), x2 = !is_xi(s.axis2);
  for (std::size_t i2 = 0; i2 < (x2 ? n2 : 1); ++i2) {
    for (std::size_t i1 = 0; i1 < (x1 ? n1 : 1); ++i1) {
      std::array<double, 4> c = s.fixed;
      if (x1) c[static_cast<int>(s.axis1)] = s.grid1[i1];
      if (x2) c[static_cast<int>(s.axis2)] = s.grid2[i2];
      engine.row(u, {c[0], c[1]}, row);
      for (std::size_t k2 = (x2 ? i2 : 0); k2 < (x2 ? i2 + 1 : n2); ++k2) {
        for (std::size_t k1 = (x1 ? i1 : 0); k1 < (x1 ? i1 + 1 : n1); ++k1) {
          int qa = -1, qb = -1;  // xi1 and xi2 dual indices
          if (s.axis1 == PhaseAxis::Xi1) qa = q1[k1];
          if (s.axis1 == PhaseAxis::Xi2) qb = q1[k1];
          if (s.axis2 == PhaseAxis::Xi1) qa = q2[k2];
          if (s.axis2 == PhaseAxis::Xi2) qb = q2[k2];
          s.values[k2 * n1 + k1] = value_at(c, qa, qb);
        }
      }
    }
  }
  return s;
}

std::vector<PhaseSpaceSlice> fbi_transform(const GridVector& u, const FbiSpec& spec) {
  FbiEngine engine(spec.grid, spec.h, spec.pad);
  std::vector<PhaseSpaceSlice> out;
  for (const auto& s : spec.slices) out.push_back(fbi_slice(engine, u, s));
  return out;
}

namespace {

double trapezoid_weight(int i, int count) { return (i == 0 || i == count - 1) ? 0.5 : 1.0; }

}  // namespace

PhaseMoments fbi_moments(const FbiEngine& engine, const GridVector& u, const XSampling& xs) {
  if (xs.count < 2) throw Error("FBI: x-sampling needs at least 2 points per axis");
  PhaseMoments m;
  const int M = engine.M();
  const double dx = xs.spacing();
  const double cut = 0.9 * (M / 2) * engine.dxi();
  std::vector<cd> row;
  double outer = 0.0;
  for (int i2 = 0; i2 < xs.count; ++i2) {
    for (int i1 = 0; i1 < xs.count; ++i1) {
      Point2 x{xs.coord(i1, xs.center.x1), xs.coord(i2, xs.center.x2)};
      engine.row(u, x, row);
      const double w = trapezoid_weight(i1, xs.count) * trapezoid_weight(i2, xs.count) * dx * dx *
                       engine.dxi() * engine.dxi();
      double ms = 0.0, sec = 0.0, out = 0.0;
      for (int q2 = 0; q2 < M; ++q2) {
        const double xi2 = engine.xi(q2);
        for (int q1 = 0; q1 < M; ++q1) {
          const double xi1 = engine.xi(q1);
          double a = std::norm(row[static_cast<std::size_t>(q2) * M + q1]);
          ms += a;
          sec += a * (xi1 * xi1 + xi2 * xi2);
          if (std::abs(xi1) > cut || std::abs(xi2) > cut) out += a;
        }
      }
      m.mass += w * ms;
      m.second += w * (sec + norm2(x) * ms);
      outer += w * out;
    }
  }
  m.outer_xi_fraction = m.mass > 0 ? outer / m.mass : 0.0;
  return m;
}

double fbi_isometry_defect(const FbiEngine& engine, const GridVector& u, const XSampling& xs) {
  const double un = u.squaredNorm() * engine.grid().cell_area();
  if (un == 0.0) return 0.0;
  PhaseMoments m = fbi_moments(engine, u, xs);
  if (m.outer_xi_fraction > 1e-6) {
    std::ostringstream os;
    os << "FBI isometry: xi-frame mass fraction " << m.outer_xi_fraction
       << " exceeds 1e-6; the result is truncation-dominated (refine the source grid)";
    throw Error(os.str());
  }
  return std::abs(m.mass / un - 1.0);
}

GridVector fbi_invert(const FbiEngine& engine, const XSampling& xs, const PhaseRowSource& rows) {
  if (xs.count < 2) throw Error("FBI: x-sampling needs at least 2 points per axis");
  GridVector acc = GridVector::Zero(engine.grid().size());
  const double dx = xs.spacing();
  std::vector<cd> row;
  for (int i2 = 0; i2 < xs.count; ++i2) {
    for (int i1 = 0; i1 < xs.count; ++i1) {
      Point2 x{xs.coord(i1, xs.center.x1), xs.coord(i2, xs.center.x2)};
      rows(x, row);
      const double w = trapezoid_weight(i1, xs.count) * trapezoid_weight(i2, xs.count) * dx * dx;
      engine.accumulate_adjoint(x, row, w, acc);
    }
  }
  return acc;
}

GridVector fbi_roundtrip(const FbiEngine& engine, const GridVector& u, const XSampling& xs) {
  return fbi_invert(engine, xs, [&](Point2 x, std::vector<cd>& row) { engine.row(u, x, row); });
}

double holomorphy_residual(const PhaseSpaceSlice& s) {
  const bool xfirst = !is_xi(s.axis1);
  PhaseAxis xa = xfirst ? s.axis1 : s.axis2;
  PhaseAxis pa = xfirst ? s.axis2 : s.axis1;
  if (is_xi(xa) || !is_xi(pa) || static_cast<int>(pa) - static_cast<int>(xa) != 2)
    throw Error("holomorphy_residual: slice must span an (x_j, xi_j) plane");
  const auto& gx = xfirst ? s.grid1 : s.grid2;
  const auto& gp = xfirst ? s.grid2 : s.grid1;
  if (gx.size() < 5 || gp.size() < 5) throw Error("holomorphy_residual: slice needs at least 5 nodes per axis");
  const double dx = gx[1] - gx[0], dp = gp[1] - gp[0];
  auto T = [&](std::size_t ix, std::size_t ip) { return xfirst ? s.at(ix, ip) : s.at(ip, ix); };
  double num = 0.0, den = 0.0;
  for (std::size_t ip = 1; ip + 1 < gp.size(); ++ip) {
    for (std::size_t ix = 1; ix + 1 < gx.size(); ++ix) {
      cd dTx = (T(ix + 1, ip) - T(ix - 1, ip)) / (2 * dx);
      cd dTp = (T(ix, ip + 1) - T(ix, ip - 1)) / (2 * dp);
      cd r = s.h * (dTx - I * dTp) - I * gp[ip] * T(ix, ip);
      num += std::norm(r);
      den += std::norm(gp[ip] * T(ix, ip));
    }
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

cd fbi_transform_1d(const std::vector<cd>& u, double y0, double dy, double h, double x, double xi) {
  cd acc = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    double y = y0 + j * dy;
    acc += std::exp(I * (x - y) * xi / h - (x - y) * (x - y) / (2 * h)) * u[j];
  }
  return fbi_alpha_1d(h) * dy * acc;
}

namespace {

// Apply a Fourier multiplier m(xi1, xi2) on the unpadded interior grid.
template <class F>
GridVector fourier_multiply(const GridVector& u, const Grid2D& g, double h, F&& mult) {
  const int n = g.n();
  FftPlan plan(n, n);
  auto& b = plan.data();
  for (long k = 0; k < u.size(); ++k) b[k] = u[k];
  plan.forward();
  const double dxi = 2 * kPi * h / (n * g.delta());
  for (int k2 = 0; k2 < n; ++k2)
    for (int k1 = 0; k1 < n; ++k1)
      b[static_cast<std::size_t>(k2) * n + k1] *= mult(fft_freq(k1, n) * dxi, fft_freq(k2, n) * dxi);
  plan.backward();
  GridVector out(u.size());
  const double s = 1.0 / (static_cast<double>(n) * n);
  for (long k = 0; k < u.size(); ++k) out[k] = b[k] * s;
  return out;
}

void check_tail(const Grid2D& g, const GridVector& v, const char* what) {
  double f = boundary_mass(g, v);
  if (f > 1e-10) {
    std::ostringstream os;
    os << "metaplectic: " << what << " has tail mass fraction " << f << " > 1e-10 in the outer frame; enlarge L";
    throw Error(os.str());
  }
}

}  // namespace

GridVector metaplectic_apply(const GridVector& u, const Grid2D& grid, double h, MetaplecticDirection dir) {
  if (u.size() != grid.size()) throw Error("metaplectic: vector does not match the grid");
  check_tail(grid, u, "input");
  const double sgn = dir == MetaplecticDirection::Forward ? -1.0 : 1.0;
  GridVector out = fourier_multiply(u, grid, h, [&](double a, double b) { return std::exp(I * sgn * a * b / h); });
  check_tail(grid, out, "output");
  return out;
}

GridVector semiclassical_derivative(const GridVector& u, const Grid2D& grid, double h, int j) {
  if (j != 1 && j != 2) throw Error("semiclassical_derivative: j must be 1 or 2");
  return fourier_multiply(u, grid, h, [&](double a, double b) { return cd(j == 1 ? a : b); });
}

double egorov_residual(double h, const Grid2D& grid, EgorovSymbol symbol) {
  GridVector v(grid.size());
  for (long k = 0; k < v.size(); ++k) v[k] = std::exp(-norm2(grid.node(k)) / (2 * h));
  GridVector Mv = metaplectic_apply(v, grid, h, MetaplecticDirection::Forward);
  GridVector lhs, rhs;
  switch (symbol) {
    case EgorovSymbol::One:
      lhs = metaplectic_apply(Mv, grid, h, MetaplecticDirection::Inverse);
      rhs = v;
      break;
    case EgorovSymbol::X1: {
      GridVector w = Mv;
      for (long k = 0; k < w.size(); ++k) w[k] *= grid.node(k).x1;
      lhs = metaplectic_apply(w, grid, h, MetaplecticDirection::Inverse);
      rhs = semiclassical_derivative(v, grid, h, 2);
      for (long k = 0; k < v.size(); ++k) rhs[k] += grid.node(k).x1 * v[k];
      break;
    }
    case EgorovSymbol::Xi1:
      lhs = metaplectic_apply(semiclassical_derivative(Mv, grid, h, 1), grid, h, MetaplecticDirection::Inverse);
      rhs = semiclassical_derivative(v, grid, h, 1);
      break;
  }
  return (lhs - rhs).norm() / v.norm();
}

cd gaussian_kernel_convolution(double h, Point2 y, double dt_factor) {
  const double sh = std::sqrt(h);
  const double dt = dt_factor * sh;
  const int m = static_cast<int>(std::ceil(10.0 / dt_factor));
  std::vector<double> t(2 * m + 1), g(2 * m + 1);
  for (int i = -m; i <= m; ++i) {
    t[i + m] = i * dt;
    g[i + m] = std::exp(-t[i + m] * t[i + m] / (2 * h));
  }
  cd acc = 0.0;
  for (int i = 0; i <= 2 * m; ++i) {
    const double a = y.x1 - t[i];
    cd inner = 0.0;
    for (int j = 0; j <= 2 * m; ++j) inner += g[j] * std::exp(-I * a * (y.x2 - t[j]) / h);
    acc += g[i] * inner;
  }
  return acc * dt * dt;
}

cd gaussian_kernel_closed_form(double h, Point2 y) {
  // <(I + iA) y, y> = |y|^2 + 2 i y1 y2 with A the coordinate swap.
  cd q(norm2(y), 2 * y.x1 * y.x2);
  return std::sqrt(2.0) * kPi * h * std::exp(-q / (4 * h));
}

double gaussian_kernel_identity_check(double h) {
  if (!(h > 0)) throw Error("kernel identity: h must be positive");
  const double s = std::sqrt(h);
  const std::vector<Point2> panel{{0, 0}, {s, 0}, {0, 2 * s}, {1.5 * s, -s}, {-s, 0.7 * s}, {2 * s, 2 * s}};
  double worst = 0.0;
  for (Point2 y : panel) {
    cd q = gaussian_kernel_convolution(h, y);
    cd q2 = gaussian_kernel_convolution(h, y, 1.0 / 64.0);
    cd c = gaussian_kernel_closed_form(h, y);
    if (std::abs(q - q2) > 1e-10 * std::abs(c)) throw QuadratureError("kernel identity: quadrature did not converge");
    worst = std::max(worst, std::abs(q - c) / std::abs(c));
  }
  return worst;
}

}  // namespace magwell
