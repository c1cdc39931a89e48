#include "magwell/eigensolve.hpp"
#include "magwell/operator.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace magwell;
using magwell::testing::dense_eigenvalues;
using magwell::testing::random_point;

namespace {

const double kPi = std::numbers::pi;

SolverConfig solver(int k) {
  SolverConfig s;
  s.k = k;
  s.preconditioner = "cholesky";
  return s;
}

double zero_link(Point2, Point2) { return 0.0; }

}  // namespace

TEST(Operator, FreeLaplacianGroundState) {
  const double h = 0.5, L = 1.0;
  auto op = assemble_peierls_laplacian(Grid2D(L, 128), h, zero_link);
  auto ev = smallest_eigenpairs(op, solver(1));
  double exact = 2 * h * h * std::pow(kPi / (2 * L), 2);
  EXPECT_NEAR(ev[0].value, exact, 1e-2 * exact);
}

TEST(Operator, LandauLevel) {
  auto f = MagneticField::make("constant", {1.0});
  auto op = assemble_magnetic_laplacian(f, Grid2D(8.0, 146), 0.1);
  auto ev = smallest_eigenpairs(op, solver(3));
  for (const auto& p : ev) EXPECT_NEAR(p.value, 0.1, 2e-3);
}

TEST(Operator, Hermitian) {
  for (const auto& id : MagneticField::preset_ids()) {
    auto op = assemble_magnetic_laplacian(MagneticField::make(id), Grid2D(3.0, 40), 0.2);
    EXPECT_EQ(hermiticity_residual(op.matrix), 0.0) << id;
    EXPECT_EQ(op.matrix.rows(), 38 * 38);
  }
}

TEST(Operator, PositiveSemidefinite) {
  auto op = assemble_magnetic_laplacian(MagneticField::make("gaussian_well"), Grid2D(2.5, 24), 0.2, 1.0);
  EXPECT_GT(dense_eigenvalues(op.matrix).minCoeff(), 0.0);
}

TEST(Operator, ResolutionGuardNamesN) {
  auto f = MagneticField::make("gaussian_well");
  int req = required_points(8.0, 0.1);
  try {
    assemble_magnetic_laplacian(f, Grid2D(8.0, 64), 0.1);
    FAIL() << "expected ResolutionError";
  } catch (const ResolutionError& e) {
    EXPECT_EQ(e.required_N, req);
    EXPECT_NE(std::string(e.what()).find("N >= " + std::to_string(req)), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(check_resolution(Grid2D(8.0, req), 0.1));
  EXPECT_LE(Grid2D(8.0, req).delta(), 0.35 * std::sqrt(0.1));
  EXPECT_GT(Grid2D(8.0, req - 1).delta(), 0.35 * std::sqrt(0.1));
}

// (A + grad phi) gives U M U* with U = e^{i phi / h}
TEST(Operator, GaugeCovariance) {
  auto f = MagneticField::make("gaussian_well");
  const double h = 0.2;
  Grid2D g(2.5, 33);
  auto phi = [](Point2 x) { return std::sin(x.x1) * x.x2 + 0.3 * x.x1 * x.x1; };
  auto link = [&](Point2 a, Point2 b) {
    Point2 m{0.5 * (a.x1 + b.x1), 0.5 * (a.x2 + b.x2)};
    return gauge_potential(f, m) * (b.x2 - a.x2);
  };
  auto shifted = [&](Point2 a, Point2 b) { return link(a, b) + phi(b) - phi(a); };
  auto M = assemble_peierls_laplacian(g, h, link).matrix;
  auto Mp = assemble_peierls_laplacian(g, h, shifted).matrix;
  GridVector u(g.size());
  for (long j = 0; j < g.size(); ++j) u[j] = std::polar(1.0, phi(g.node(j)) / h);
  SparseMatrix conj = u.asDiagonal() * M * u.conjugate().asDiagonal();
  EXPECT_LT(SparseMatrix(conj - Mp).norm(), 1e-12 * M.norm());
  Eigen::VectorXd a = dense_eigenvalues(M), b = dense_eigenvalues(Mp);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Operator, MetricEqualsMagneticForUnitField) {
  auto f = MagneticField::make("constant", {1.0});
  Grid2D g(3.0, 40);
  auto a = assemble_magnetic_laplacian(f, g, 0.2).matrix;
  auto b = assemble_metric_laplacian(f, g, 0.2).matrix;
  EXPECT_LT(SparseMatrix(a - b).norm(), 1e-12 * a.norm());
  EXPECT_NEAR(metric_potential(f, {0.3, -1.1}), 0.0, 1e-12);
}

TEST(Operator, MetricSpectrumMatches) {
  auto f = MagneticField::make("gaussian_well");
  const double h = 0.2;
  double L = 11 * std::sqrt(h);
  Grid2D g(L, required_points(L, h, 0.15));
  auto a = smallest_eigenpairs(assemble_magnetic_laplacian(f, g, h), solver(2));
  auto b = smallest_eigenpairs(assemble_metric_laplacian(f, g, h), solver(2));
  for (int l = 0; l < 2; ++l) EXPECT_NEAR(a[l].value, b[l].value, 5e-3 * a[l].value) << l;
}

TEST(Operator, MetricInverse) {
  auto f = MagneticField::make("gaussian_well");
  Sym2 g0 = metric_gstar(f, {0, 0});
  EXPECT_NEAR(g0.a11, 1.0, 1e-12);
  EXPECT_NEAR(g0.a12, 0.0, 1e-12);
  EXPECT_EQ(g0.a22, 1.0);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    Point2 y = random_point(rng, 3.0);
    double b = f.eval(darboux_inverse(f, y));
    EXPECT_NEAR(metric_gstar(f, y).det(), b * b, 1e-10 * b * b);
  }
}

// Eigenvalues converge at rate spacing^2
TEST(Operator, SecondOrderConvergence) {
  auto f = MagneticField::make("gaussian_well");
  const double h = 0.2, L = 11 * std::sqrt(h);
  std::vector<double> lam;
  for (int N : {65, 129, 257}) lam.push_back(smallest_eigenpairs(assemble_magnetic_laplacian(f, Grid2D(L, N), h), solver(1))[0].value);
  double ratio = (lam[0] - lam[1]) / (lam[1] - lam[2]);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Symbol, Examples) {
  auto gw = MagneticField::make("gaussian_well");
  EXPECT_NEAR(normal_form_symbol_eval(gw, {0, 0}, {0.7, -0.4}), 0.0, 1e-15);
  EXPECT_NEAR(normal_form_symbol_eval(gw, {0.1, 0}, {0, 0}), 0.01, 1e-12);
  auto c = MagneticField::make("constant", {1.0});
  std::mt19937_64 rng(19);
  for (int i = 0; i < 20; ++i) {
    Point2 X1 = random_point(rng, 3.0), X2 = random_point(rng, 3.0);
    EXPECT_NEAR(normal_form_symbol_eval(c, X1, X2), X1.x1 * X1.x1 + X1.x2 * X1.x2, 1e-12);
  }
}

TEST(Symbol, NonNegative) {
  std::mt19937_64 rng(23);
  for (const auto& id : MagneticField::preset_ids()) {
    auto f = MagneticField::make(id);
    for (int i = 0; i < 200; ++i) EXPECT_GE(normal_form_symbol_eval(f, random_point(rng, 4.0), random_point(rng, 4.0)), 0.0);
  }
}

TEST(Symbol, CharacteristicField) {
  EXPECT_NEAR(characteristic_symbol_B(MagneticField::make("constant", {1.0}), {1, 2}, {3, 4}), 1.0, 1e-12);
  EXPECT_NEAR(characteristic_symbol_B(MagneticField::make("gaussian_well"), {0, 0}, {0, 0}), 1.0, 1e-14);
}

// sqrt(g11 g22 - g12^2) equals B at kappa^{-1}(x + A xi)
TEST(Symbol, CharacteristicFieldIdentity) {
  std::mt19937_64 rng(29);
  for (const auto& id : MagneticField::preset_ids()) {
    auto f = MagneticField::make(id);
    for (int i = 0; i < 1000; ++i) {
      Point2 x = random_point(rng, 3.0), xi = random_point(rng, 3.0);
      double b = f.eval(darboux_inverse(f, {x.x1 + xi.x2, x.x2 + xi.x1}));
      ASSERT_NEAR(characteristic_symbol_B(f, x, xi), b, 1e-8 * b) << id;
    }
  }
}

TEST(Symbol, LowerBoundScan) {
  SymbolBounds c = symbol_lower_bound_scan(MagneticField::make("constant", {1.0}), 1.0);
  EXPECT_NEAR(c.c1, 0.5, 1e-6);
  EXPECT_NEAR(c.c2, 0.5, 1e-6);
  for (const auto& id : {"gaussian_well", "aniso_poly"}) {
    SymbolBounds b = symbol_lower_bound_scan(MagneticField::make(id), 1.0);
    EXPECT_GT(b.c1, 0.0) << id;
    EXPECT_GT(b.c2, 0.0) << id;
  }
  EXPECT_THROW(symbol_lower_bound_scan(MagneticField::make("constant"), 0.0), Error);
}

TEST(Operator, BoundaryMass) {
  Grid2D g(4.0, 41);
  GridVector u = magwell::testing::gaussian(g, 0.1);
  EXPECT_LT(boundary_mass(g, u), 1e-20);
  GridVector flat = GridVector::Ones(g.size());
  double m = boundary_mass(g, flat);
  EXPECT_GT(m, 1 - std::pow(37.0 / 39.0, 2) - 1e-12);
  EXPECT_LT(m, 1 - std::pow(35.0 / 39.0, 2));
}
