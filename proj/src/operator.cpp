#include "magwell/operator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace magwell {

namespace {

using Triplet = Eigen::Triplet<cd>;

const cd I(0.0, 1.0);

double d4(const std::function<double(Point2)>& f, Point2 y, Point2 e, double s) {
  auto at = [&](double t) { return f({y.x1 + t * e.x1, y.x2 + t * e.x2}); };
  return (-at(2 * s) + 8 * at(s) - 8 * at(-s) + at(-2 * s)) / (12 * s);
}

}  // namespace

MagneticOperator assemble_peierls_laplacian(const Grid2D& grid, double h, const LinkIntegral& link,
                                            const ScalarPotential& potential) {
  if (!(h > 0)) throw Error("h must be positive");
  const int n = grid.n();
  const double d = grid.delta();
  const double c = h * h / (d * d);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(grid.size()) * 5);
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      long k = grid.index(i1, i2);
      Point2 x = grid.node(i1, i2);
      double diag = 4 * c + (potential ? potential(x) : 0.0);
      t.emplace_back(k, k, diag);
      if (i1 + 1 < n) {
        cd hop = -c * std::exp(-I * link(x, {x.x1 + d, x.x2}) / h);
        long j = grid.index(i1 + 1, i2);
        t.emplace_back(k, j, hop);
        t.emplace_back(j, k, std::conj(hop));
      }
      if (i2 + 1 < n) {
        cd hop = -c * std::exp(-I * link(x, {x.x1, x.x2 + d}) / h);
        long j = grid.index(i1, i2 + 1);
        t.emplace_back(k, j, hop);
        t.emplace_back(j, k, std::conj(hop));
      }
    }
  }
  MagneticOperator op;
  op.grid = grid;
  op.h = h;
  op.matrix.resize(grid.size(), grid.size());
  op.matrix.setFromTriplets(t.begin(), t.end());
  op.matrix.makeCompressed();
  op.gauge = "peierls";
  return op;
}

MagneticOperator assemble_magnetic_laplacian(const MagneticField& field, const Grid2D& grid, double h,
                                             double resolution_factor) {
  check_resolution(grid, h, resolution_factor);
  auto link = [&](Point2 a, Point2 b) {
    // A = (0, A2): only the x2 component contributes; midpoint rule.
    Point2 m{0.5 * (a.x1 + b.x1), 0.5 * (a.x2 + b.x2)};
    return gauge_potential(field, m) * (b.x2 - a.x2);
  };
  MagneticOperator op = assemble_peierls_laplacian(grid, h, link);
  op.gauge = "A=(0,A2), A2(x)=int_0^x1 B(u,x2)du; Peierls midpoint links";
  op.field_id = field.id();
  return op;
}

Sym2 metric_gstar(const MagneticField& field, Point2 y) {
  Point2 z = darboux_inverse(field, y);
  double b = field.eval(z);
  double a = field.alpha_closed(z);
  return {b * b + a * a, a, 1.0};
}

double metric_potential(const MagneticField& field, Point2 y, double step) {
  if (field.preset() == Preset::Constant) return 0.0;
  auto bt = [&](Point2 p) { return field.eval(darboux_inverse(field, p)); };
  auto w = [&](Point2 p) { return 1.0 / std::sqrt(bt(p)); };
  const Point2 e1{1.0, 0.0}, e2{0.0, 1.0};
  auto flux1 = [&](Point2 p) {
    Sym2 g = metric_gstar(field, p);
    return g.a11 * d4(w, p, e1, step) + g.a12 * d4(w, p, e2, step);
  };
  auto flux2 = [&](Point2 p) {
    Sym2 g = metric_gstar(field, p);
    return g.a12 * d4(w, p, e1, step) + g.a22 * d4(w, p, e2, step);
  };
  double div = d4(flux1, y, e1, step) + d4(flux2, y, e2, step);
  return -std::sqrt(bt(y)) * div;
}

MagneticOperator assemble_metric_laplacian(const MagneticField& field, const Grid2D& grid, double h,
                                           double resolution_factor) {
  check_resolution(grid, h, resolution_factor);
  const int n = grid.n();
  const double d = grid.delta();
  const double c = h * h / (d * d);
  auto coord = [&](int i) { return grid.coord(i); };  // valid for i in [-1, n]

  // g11 on x1-faces: face f between nodes f-1 and f (f in [0, n]).
  std::vector<double> g11((n + 1) * static_cast<std::size_t>(n));
  for (int i2 = 0; i2 < n; ++i2)
    for (int f = 0; f <= n; ++f)
      g11[static_cast<std::size_t>(i2) * (n + 1) + f] = metric_gstar(field, {coord(f - 1) + 0.5 * d, coord(i2)}).a11;

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(grid.size()) * 13);
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      long k = grid.index(i1, i2);
      Point2 y = grid.node(i1, i2);
      double gl = g11[static_cast<std::size_t>(i2) * (n + 1) + i1];
      double gr = g11[static_cast<std::size_t>(i2) * (n + 1) + i1 + 1];
      double V = metric_potential(field, y);
      t.emplace_back(k, k, c * (gl + gr + 2.0) - h * h * V);
      if (i1 + 1 < n) {
        long j = grid.index(i1 + 1, i2);
        t.emplace_back(k, j, -c * gr);
        t.emplace_back(j, k, -c * gr);
      }
      if (i2 + 1 < n) {
        cd hop = -c * std::exp(-I * y.x1 * d / h);
        long j = grid.index(i1, i2 + 1);
        t.emplace_back(k, j, hop);
        t.emplace_back(j, k, std::conj(hop));
      }
    }
  }

  // Mixed term, one 4-corner stencil per cell in the local gauge chi = y1 (y2 - c2).
  for (int j2 = -1; j2 < n; ++j2) {
    for (int j1 = -1; j1 < n; ++j1) {
      Point2 cc{coord(j1) + 0.5 * d, coord(j2) + 0.5 * d};
      double g12 = metric_gstar(field, cc).a12;
      if (g12 == 0.0) continue;
      int ci1[4], ci2[4];
      cd a[4], b[4];
      for (int q = 0; q < 4; ++q) {
        int s1 = (q & 1) ? 1 : -1;
        int s2 = (q & 2) ? 1 : -1;
        ci1[q] = j1 + ((q & 1) ? 1 : 0);
        ci2[q] = j2 + ((q & 2) ? 1 : 0);
        double y1 = coord(ci1[q]);
        double chi = y1 * (coord(ci2[q]) - cc.x2);
        cd ph = std::exp(-I * chi / h);
        a[q] = (s1 / (2 * d)) * ph;
        b[q] = (s2 / (2 * d)) * ph;
      }
      for (int p = 0; p < 4; ++p) {
        if (ci1[p] < 0 || ci1[p] >= n || ci2[p] < 0 || ci2[p] >= n) continue;
        for (int q = 0; q < 4; ++q) {
          if (ci1[q] < 0 || ci1[q] >= n || ci2[q] < 0 || ci2[q] >= n) continue;
          cd v = h * h * g12 * (std::conj(a[p]) * b[q] + std::conj(b[p]) * a[q]);
          t.emplace_back(grid.index(ci1[p], ci2[p]), grid.index(ci1[q], ci2[q]), v);
        }
      }
    }
  }

  MagneticOperator op;
  op.grid = grid;
  op.h = h;
  op.matrix.resize(grid.size(), grid.size());
  op.matrix.setFromTriplets(t.begin(), t.end());
  op.matrix.makeCompressed();
  op.gauge = "Darboux coordinates, At=(0,y1); flux form with g* and -h^2 V";
  op.field_id = field.id();
  return op;
}

double hermiticity_residual(const SparseMatrix& M) {
  SparseMatrix D = M - SparseMatrix(M.adjoint());
  double r = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

double norm_estimate(const SparseMatrix& M) {
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(M.cols());
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) colsum[it.col()] += std::abs(it.value());
  return colsum.size() ? colsum.maxCoeff() : 0.0;
}

double boundary_mass(const Grid2D& grid, const GridVector& u, double frame) {
  const double edge = (1.0 - frame) * grid.L;
  double outer = 0.0, total = 0.0;
  for (long k = 0; k < u.size(); ++k) {
    Point2 x = grid.node(k);
    double m = std::norm(u[k]);
    total += m;
    if (std::abs(x.x1) > edge || std::abs(x.x2) > edge) outer += m;
  }
  return total > 0 ? outer / total : 0.0;
}

NormalFormCoefficients normal_form_coefficients(const MagneticField& field, Point2 X1, Point2 X2) {
  // kappa_M(x, xi) = (x1 + xi2, x2 + xi1, xi); X1 = (x1, xi1), X2 = (x2, xi2).
  Point2 y{X1.x1 + X2.x2, X2.x1 + X1.x2};
  Sym2 g = metric_gstar(field, y);
  return {g.a11, g.a12, g.a22};
}

double normal_form_symbol_eval(const MagneticField& field, Point2 X1, Point2 X2) {
  NormalFormCoefficients g = normal_form_coefficients(field, X1, X2);
  double x1 = X1.x1, xi1 = X1.x2;
  return g.g11 * xi1 * xi1 - 2.0 * g.g12 * x1 * xi1 + g.g22 * x1 * x1;
}

double characteristic_symbol_B(const MagneticField& field, Point2 x, Point2 xi) {
  NormalFormCoefficients g = normal_form_coefficients(field, {x.x1, xi.x1}, {x.x2, xi.x2});
  double disc = g.g11 * g.g22 - g.g12 * g.g12;
  if (!(disc > 0)) {
    std::ostringstream os;
    os << "characteristic_symbol_B: non-positive discriminant " << disc << " at x=(" << x.x1 << "," << x.x2
       << "), xi=(" << xi.x1 << "," << xi.x2 << ")";
    throw Error(os.str());
  }
  return std::sqrt(disc);
}

SymbolBounds symbol_lower_bound_scan(const MagneticField& field, double gamma, const SymbolScanSpec& spec) {
  if (!(gamma > 0)) throw Error("symbol_lower_bound_scan: gamma must be positive");
  if (spec.radii < 2 || spec.angles < 1 || spec.x2_points < 1) throw Error("symbol_lower_bound_scan: empty scan");
  const double pi = std::numbers::pi;
  SymbolBounds out{INFINITY, INFINITY};
  std::vector<Point2> x2s;
  for (int a = 0; a < spec.x2_points; ++a)
    for (int b = 0; b < spec.x2_points; ++b) {
      auto s = [&](int i) {
        return spec.x2_points == 1 ? 0.0 : -spec.x2_extent + 2 * spec.x2_extent * i / (spec.x2_points - 1.0);
      };
      x2s.push_back({s(a), s(b)});
    }
  const double rmax = std::max(spec.r_max, gamma);
  for (int j = 0; j < spec.angles; ++j) {
    double th = 2 * pi * j / spec.angles;
    for (int k = 0; k < spec.radii; ++k) {
      // Outer radii: gamma .. rmax. Inner radii: gamma/radii .. gamma.
      double ro = gamma + (rmax - gamma) * k / (spec.radii - 1.0);
      double ri = gamma * (k + 1.0) / spec.radii;
      for (const Point2& X2 : x2s) {
        double po = normal_form_symbol_eval(field, {ro * std::cos(th), ro * std::sin(th)}, X2);
        out.c1 = std::min(out.c1, po / (1 + po));
        double pi_ = normal_form_symbol_eval(field, {ri * std::cos(th), ri * std::sin(th)}, X2);
        out.c2 = std::min(out.c2, pi_ / ((1 + pi_) * ri * ri));
      }
    }
  }
  if (!(out.c1 > 0) || !(out.c2 > 0)) {
    std::ostringstream os;
    os << "symbol_lower_bound_scan: non-positive infimum (c1=" << out.c1 << ", c2=" << out.c2 << ")";
    throw Error(os.str());
  }
  return out;
}

}  // namespace magwell
