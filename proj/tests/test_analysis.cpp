#include "magwell/analysis.hpp"
#include "magwell/eigensolve.hpp"
#include "magwell/fbi.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace magwell;
using magwell::testing::gaussian;
using magwell::testing::random_point;

namespace {

Grid2D scaled_grid(double h, double spacing = 0.3, double L_over = 11.0) {
  const double L = L_over * std::sqrt(h);
  return Grid2D(L, required_points(L, h, spacing));
}

// Square slice of |T|^2 = e^{-2 eps psi / h} with a phase, spacing d in both axes.
PhaseSpaceSlice synthetic_slice(double h, double eps, double extent, double d) {
  PhaseSpaceSlice s;
  s.h = h;
  s.axis1 = PhaseAxis::X1;
  s.axis2 = PhaseAxis::Xi1;
  const int m = static_cast<int>(std::floor(extent / d));
  for (int i = -m; i <= m; ++i) {
    s.grid1.push_back(i * d);
    s.grid2.push_back(i * d);
  }
  for (double b : s.grid2)
    for (double a : s.grid1) s.values.push_back(std::polar(std::exp(-eps * paper_f(std::hypot(a, b)) / h), a * b / h));
  return s;
}

}  // namespace

TEST(Analysis, PredictedEigenvalues) {
  auto gw = MagneticField::make("gaussian_well");
  EXPECT_NEAR(predicted_h2_coefficient(gw, 0), 2.0, 1e-12);
  EXPECT_NEAR(predicted_h2_coefficient(gw, 1), 4.0, 1e-12);
  for (double h : {0.1, 0.05}) {
    EXPECT_NEAR(predicted_eigenvalue(gw, 0, h), h + 2 * h * h, 1e-14);
    EXPECT_NEAR(predicted_eigenvalue(gw, 1, h), h + 4 * h * h, 1e-14);
  }
  auto an = MagneticField::make("aniso_poly");
  for (int l : {0, 1, 2}) EXPECT_NEAR(predicted_h2_coefficient(an, l), 4 * l + 4.5, 1e-12);
  EXPECT_THROW(predicted_h2_coefficient(MagneticField::make("constant"), 0), Error);
}

TEST(Weight, PaperF) {
  EXPECT_EQ(paper_f(0.0), 0.0);
  EXPECT_DOUBLE_EQ(paper_f(0.5), 0.25);
  EXPECT_DOUBLE_EQ(paper_f(1.0), 1.0);
  EXPECT_DOUBLE_EQ(paper_f(3.0), 5.0);
  for (double r = 0.01; r < 10; r *= 1.3) {
    EXPECT_LE(paper_f(2 * r), 4 * paper_f(r) + 1e-14) << r;
    EXPECT_GE(paper_f(r), 0.0);
  }
}

TEST(Weight, Admissible) {
  AgmonWeight w = AgmonWeight::paper_f();
  EXPECT_EQ(w({0, 0}), 0.0);
  std::mt19937_64 rng(41);
  for (int i = 0; i < 1000; ++i) {
    Point2 x = random_point(rng, 4.0), y = random_point(rng, 4.0);
    EXPECT_LE(std::abs(w(x) - w(y)), w.lipschitz * std::sqrt(norm2(x - y)) + 1e-12);
    EXPECT_GT(w(x), 0.0);
  }
  // linear growth at infinity
  EXPECT_NEAR(w({1000, 0}) / 1000, w.growth_slope, 1e-2);
  AgmonWeight c = AgmonWeight::custom([](Point2 x) { return std::abs(x.x1); }, 1.0, 1.0);
  EXPECT_EQ(c({-2, 5}), 2.0);
}

TEST(Weight, SmoothCutoff) {
  EXPECT_EQ(smooth_cutoff(0.5, 1.0), 1.0);
  EXPECT_EQ(smooth_cutoff(1.0, 1.0), 1.0);
  EXPECT_EQ(smooth_cutoff(2.0, 1.0), 0.0);
  EXPECT_EQ(smooth_cutoff(7.0, 1.0), 0.0);
  double prev = 1.0;
  for (double r = 1.0; r <= 2.0; r += 0.01) {
    double c = smooth_cutoff(r, 1.0);
    EXPECT_LE(c, prev + 1e-15);
    EXPECT_GE(c, 0.0);
    prev = c;
  }
  EXPECT_GT(smooth_cutoff(1.5, 1.0), 0.0);
  EXPECT_LT(smooth_cutoff(1.5, 1.0), 1.0);
}

TEST(Wkb, PhaseAndNormalization) {
  auto gw = MagneticField::make("gaussian_well");
  const double h = 0.05;
  WKBAnsatz a = wkb_ansatz(gw, scaled_grid(h), h);
  EXPECT_NEAR(a.u.norm(), 1.0, 1e-12);
  EXPECT_NEAR(a.mu0, 1.0, 1e-14);
  EXPECT_NEAR(a.mu1, 2.0, 1e-12);
  std::mt19937_64 rng(43);
  for (int i = 0; i < 100; ++i) {
    Point2 x = random_point(rng, 1.0);
    EXPECT_NEAR(a.re_phase(x), norm2(x) / 4, 1e-12);
    // radial field: the phase is rotation invariant
    Point2 r{-x.x2, x.x1};
    EXPECT_NEAR(a.re_phase(r), a.re_phase(x), 1e-12);
  }
}

TEST(Wkb, AnisotropicPhase) {
  auto f = MagneticField::make("aniso_poly");
  WKBAnsatz a = wkb_ansatz(f, scaled_grid(0.1), 0.1);
  // alpha = 1, gamma = 4: Re S = (1/2)(x1^2/3 + 2 x2^2/3)
  EXPECT_NEAR(a.re_phase({1, 0}), 1.0 / 6, 1e-12);
  EXPECT_NEAR(a.re_phase({0, 1}), 1.0 / 3, 1e-12);
  EXPECT_NEAR(a.mu1, 4.5, 1e-12);
}

TEST(Wkb, PoincareGauge) {
  auto c = MagneticField::make("constant", {1.0});
  EXPECT_NEAR(poincare_gauge_phase(c, {0.6, -1.5}), 0.6 * -1.5 / 2, 1e-10);
  // grad f = A - A_P with A = (0, A2), A_P = int_0^1 t B(tx) dt (-x2, x1)
  auto gw = MagneticField::make("gaussian_well");
  const double s = 1e-5;
  for (Point2 x : {Point2{0.3, 0.4}, Point2{-0.7, 0.2}}) {
    double g1 = (poincare_gauge_phase(gw, {x.x1 + s, x.x2}) - poincare_gauge_phase(gw, {x.x1 - s, x.x2})) / (2 * s);
    double g2 = (poincare_gauge_phase(gw, {x.x1, x.x2 + s}) - poincare_gauge_phase(gw, {x.x1, x.x2 - s})) / (2 * s);
    double k = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
      double t = (i + 0.5) / n;
      k += t * gw.eval(t * x) / n;
    }
    EXPECT_NEAR(g1, 0.0 - k * -x.x2, 1e-6);
    EXPECT_NEAR(g2, gauge_potential(gw, x) - k * x.x1, 1e-6);
  }
}

TEST(Overlap, Basics) {
  auto gw = MagneticField::make("gaussian_well");
  const double h = 0.1;
  Grid2D g = scaled_grid(h);
  WKBAnsatz a = wkb_ansatz(gw, g, h);
  EXPECT_NEAR(quasimode_overlap(g, a.u, a), 1.0, 1e-12);
  EXPECT_NEAR(quasimode_overlap(g, std::polar(3.0, 0.4) * a.u, a), 1.0, 1e-12);
  GridVector v = GridVector::Random(g.size());
  v -= a.u.dot(v) * a.u;
  EXPECT_NEAR(quasimode_overlap(g, v, a), 0.0, 1e-12);
  EXPECT_THROW(quasimode_overlap(scaled_grid(h, 0.25), v, a), Error);
}

TEST(WeightedMass, ZeroEpsilonIsOne) {
  const double h = 0.05;
  Grid2D g = scaled_grid(h);
  GridVector u = gaussian(g, 2 * h);
  EXPECT_NEAR(agmon_weighted_mass(g, u, AgmonWeight::paper_f(), 0.0, h), 1.0, 1e-14);
}

// |u|^2 = e^{-|x|^2/2h}: the weighted ratio is 1/(1 - 2 eps) up to e^{-(1-2eps)/2h}
TEST(WeightedMass, GaussianOracle) {
  const double h = 0.025;
  Grid2D g(2.0, required_points(2.0, h, 0.3));
  GridVector u = gaussian(g, 2 * h);
  for (double eps : {0.05, 0.1, 0.2}) EXPECT_NEAR(agmon_weighted_mass(g, u, AgmonWeight::paper_f(), eps, h), 1 / (1 - 2 * eps), 1e-6) << eps;
}

TEST(WeightedMass, BoundaryDominatedThrows) {
  const double h = 0.05;
  Grid2D g = scaled_grid(h);
  GridVector flat = GridVector::Ones(g.size());
  EXPECT_THROW(agmon_weighted_mass(g, flat, AgmonWeight::paper_f(), 0.1, h), Error);
}

TEST(Moments, SecondMomentOfGaussian) {
  for (double h : {0.1, 0.05}) {
    Grid2D g = scaled_grid(h);
    EXPECT_NEAR(second_moment(g, gaussian(g, 2 * h)) / h, 2.0, 1e-10);
  }
}

TEST(Moments, ScalingFitOnSyntheticGaussians) {
  std::vector<double> hs{0.2, 0.1, 0.05, 0.025}, m;
  for (double h : hs) {
    Grid2D g = scaled_grid(h);
    m.push_back(second_moment(g, gaussian(g, 2 * h)));
  }
  ScalingFit f = moment_scaling(hs, m);
  EXPECT_NEAR(f.slope, 1.0, 1e-3);
  EXPECT_NEAR(f.intercept, std::log(2.0), 1e-3);
  EXPECT_LT(f.residual, 1e-6);
}

TEST(Moments, ScalingFitExactPowerLaw) {
  std::vector<double> hs{0.2, 0.1, 0.05}, m;
  for (double h : hs) m.push_back(3 * std::sqrt(h));
  ScalingFit f = moment_scaling(hs, m);
  EXPECT_NEAR(f.slope, 0.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-10);
  m[1] *= 1.1;
  EXPECT_GT(moment_scaling(hs, m).slope_stderr, 0.0);
  EXPECT_THROW(moment_scaling({0.1}, {0.2}), Error);
  EXPECT_THROW(moment_scaling({0.1, 0.05}, {0.2, 0.1}), Error);
}

TEST(Decay, ExactWeightRecovered) {
  const double h = 0.1, eps = 0.3;
  PhaseSpaceSlice s = synthetic_slice(h, eps, 8 * std::sqrt(h), std::sqrt(h) / 6);
  EXPECT_NEAR(slice_decay_rate(s, AgmonWeight::paper_f(), h), eps, 1e-12);
  DecayRates r = phase_space_decay_rate(s, synthetic_slice(h, 0.2, 8 * std::sqrt(h), std::sqrt(h) / 6),
                                        AgmonWeight::paper_f(), AgmonWeight::paper_f(), h);
  EXPECT_NEAR(r.eps1, 0.3, 1e-12);
  EXPECT_NEAR(r.eps2, 0.2, 1e-12);
}

TEST(Decay, RayProfile) {
  const double h = 0.1, d = std::sqrt(h) / 6;
  PhaseSpaceSlice s = synthetic_slice(h, 0.3, 8 * std::sqrt(h), d);
  auto ray = ray_profile(s, h, 1, 1);
  ASSERT_GT(ray.size(), 10u);
  for (const auto& p : ray) {
    EXPECT_NEAR(p.offset.x1, p.offset.x2, 1e-15);
    EXPECT_NEAR(p.decay, 0.3 * paper_f(std::sqrt(norm2(p.offset))), 1e-12);
  }
}

// |Tu|^2 = e^{-|X|^2/2h}: the ray fit against psi = |X|^2 gives 1/4 exactly
TEST(Decay, GaussianWithQuadraticWeight) {
  const double h = 0.05, d = std::sqrt(h) / 5;
  PhaseSpaceSlice s;
  s.h = h;
  const int m = 40;
  for (int i = -m; i <= m; ++i) {
    s.grid1.push_back(i * d);
    s.grid2.push_back(i * d);
  }
  for (double b : s.grid2)
    for (double a : s.grid1) s.values.push_back(std::exp(-(a * a + b * b) / (4 * h)));
  auto quad = AgmonWeight::custom([](Point2 x) { return norm2(x); }, 2.0, 2.0);
  EXPECT_NEAR(slice_decay_rate(s, quad, h), 0.25, 1e-12);
}

TEST(Decay, Errors) {
  const double h = 0.1;
  PhaseSpaceSlice s = synthetic_slice(h, 0.3, 8 * std::sqrt(h), std::sqrt(h) / 6);
  auto zero = AgmonWeight::custom([](Point2) { return 0.0; }, 0.0, 0.0);
  EXPECT_THROW(slice_decay_rate(s, zero, h), Error);
  PhaseSpaceSlice shallow = synthetic_slice(h, 0.3, 1.5 * std::sqrt(h), std::sqrt(h) / 6);
  EXPECT_THROW(slice_decay_rate(shallow, AgmonWeight::paper_f(), h), Error);
  PhaseSpaceSlice skew = s;
  for (auto& v : skew.grid2) v *= 1.5;
  EXPECT_THROW(slice_decay_rate(skew, AgmonWeight::paper_f(), h), Error);
}

TEST(Decay, SliceSpecIsSquare) {
  const double h = 0.1;
  FbiEngine e(scaled_grid(h), h, 2);
  SliceSpec s = decay_slice_spec(e, 1, 8 * std::sqrt(h));
  EXPECT_EQ(s.a1.axis, PhaseAxis::X1);
  EXPECT_EQ(s.a2.axis, PhaseAxis::Xi1);
  EXPECT_NEAR((s.a1.hi - s.a1.lo) / (s.a1.count - 1), e.dxi(), 1e-14);
  SliceSpec t = decay_slice_spec(e, 2, 8 * std::sqrt(h));
  EXPECT_EQ(t.a1.axis, PhaseAxis::X2);
  EXPECT_EQ(t.a2.axis, PhaseAxis::Xi2);
}

TEST(Husimi, OscillatorIdentity) {
  const double h = 0.1;
  Grid2D g = scaled_grid(h);
  XSampling xs;
  xs.extent = 7 * std::sqrt(h);
  xs.count = 29;
  HusimiCheck c = husimi_oscillator_identity(h, g, xs);
  EXPECT_LE(c.defect, 1e-4);
  EXPECT_NEAR(c.energy / h, 4.0, 1e-4);
  EXPECT_NEAR(c.quantum / h, 2.0, 1e-4);

  // doubling h with the geometry scaled by sqrt(2) doubles both sides
  Grid2D g2(g.L * std::sqrt(2.0), g.N);
  XSampling x2 = xs;
  x2.extent *= std::sqrt(2.0);
  HusimiCheck d = husimi_oscillator_identity(2 * h, g2, x2);
  EXPECT_NEAR(d.energy / c.energy, 2.0, 1e-6);
  EXPECT_NEAR(d.quantum / c.quantum, 2.0, 1e-6);

  HusimiCheck z = husimi_oscillator_identity(h, g, xs, 2, true);
  EXPECT_EQ(z.energy, 0.0);
  EXPECT_EQ(z.quantum, 0.0);
  EXPECT_EQ(z.defect, 0.0);
}

TEST(Richardson, RemovesLinearTerm) {
  std::vector<double> hs{0.2, 0.1, 0.05}, c;
  for (double h : hs) c.push_back(2.0 + 3.0 * h);
  auto r = richardson_halving(hs, c);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_TRUE(std::isnan(r[0]));
  EXPECT_NEAR(r[1], 2.0, 1e-14);
  EXPECT_NEAR(r[2], 2.0, 1e-14);
  auto q = richardson_halving({0.3, 0.1}, {2.9, 2.3});
  EXPECT_NEAR(q[1], 2.0, 1e-14);
}

// Ground states of the gaussian well approach the leading WKB ansatz as h shrinks
TEST(GroundState, OverlapAndMassTrends) {
  auto gw = MagneticField::make("gaussian_well");
  SolverConfig sc;
  sc.k = 1;
  sc.preconditioner = "cholesky";
  double prev_defect = 1.0;
  for (double h : {0.1, 0.05, 0.025}) {
    Grid2D g = scaled_grid(h, 0.2);
    auto ev = smallest_eigenpairs(assemble_magnetic_laplacian(gw, g, h), sc);
    double defect = 1 - quasimode_overlap(g, ev[0].vector, wkb_ansatz(gw, g, h));
    EXPECT_LT(defect, prev_defect) << h;
    EXPECT_GE(defect, 0.0);
    prev_defect = defect;
    double mass = agmon_weighted_mass(g, ev[0].vector, AgmonWeight::paper_f(), 0.05, h);
    EXPECT_GT(mass, 1.0);
    EXPECT_LT(mass, 3.0);
    EXPECT_LT(second_moment(g, ev[0].vector) / h, 2.5);
  }
  EXPECT_LT(prev_defect, 0.1);
}
