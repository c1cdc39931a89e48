#include "magwell/field.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace magwell;
using magwell::testing::random_point;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

MagneticField gw() { return MagneticField::make("gaussian_well"); }

}  // namespace

TEST(Field, PresetValues) {
  EXPECT_DOUBLE_EQ(MagneticField::make("constant", {2.0}).eval({3, -1}), 2.0);
  EXPECT_DOUBLE_EQ(gw().eval({0, 0}), 1.0);
  EXPECT_NEAR(gw().eval({1, 0}), 2.0 - std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(MagneticField::make("aniso_poly").eval({1, 1}), 6.0);
  EXPECT_THROW(MagneticField::make("dipole"), Error);
  EXPECT_THROW(MagneticField::make("gaussian_well", {1.0, 1.0, 1.0}), Error);
  EXPECT_THROW(MagneticField::make("constant", {1.0, 2.0}), Error);
}

TEST(Field, GaugePotentialConstant) {
  auto f = MagneticField::make("constant", {1.0});
  EXPECT_NEAR(gauge_potential(f, {2, 5}), 2.0, 1e-14);
  EXPECT_NEAR(gauge_potential(f, {2, 5}, IntegralMethod::Quadrature), 2.0, 1e-12);
}

TEST(Field, GaugePotentialGaussianClosedForm) {
  auto f = gw();
  for (double x1 : {-2.5, -0.3, 0.0, 0.7, 1.0, 3.0}) {
    double exact = 2 * x1 - kSqrtPi / 2 * std::erf(x1);
    EXPECT_NEAR(gauge_potential(f, {x1, 0}), exact, 1e-13) << x1;
    EXPECT_NEAR(gauge_potential(f, {x1, 0}, IntegralMethod::Quadrature), exact, 1e-11) << x1;
  }
  EXPECT_DOUBLE_EQ(gauge_potential(f, {0, 4}), 0.0);
}

TEST(Field, GaugeMethodsAgree) {
  std::mt19937_64 rng(7);
  for (const auto& id : {"gaussian_well", "aniso_poly"}) {
    auto f = MagneticField::make(id);
    for (int i = 0; i < 50; ++i) {
      Point2 x = random_point(rng, 3.0);
      double a = gauge_potential(f, x), q = gauge_potential(f, x, IntegralMethod::Quadrature);
      EXPECT_NEAR(a, q, 1e-10 * std::max(1.0, std::abs(a))) << id;
      double s = alpha_integral(f, x), t = alpha_integral(f, x, IntegralMethod::Quadrature);
      EXPECT_NEAR(s, t, 1e-10 * std::max(1.0, std::abs(s))) << id;
    }
  }
}

// d1 A2 = B by centred differences
TEST(Field, GaugePotentialDerivativeIsField) {
  std::mt19937_64 rng(11);
  const double s = 1e-4;
  for (const auto& id : MagneticField::preset_ids()) {
    auto f = MagneticField::make(id);
    for (int i = 0; i < 1000; ++i) {
      Point2 x = random_point(rng, 5.0);
      double d = (gauge_potential(f, {x.x1 + s, x.x2}) - gauge_potential(f, {x.x1 - s, x.x2})) / (2 * s);
      double b = f.eval(x);
      ASSERT_NEAR(d, b, 1e-8 * b) << id << " at " << x.x1 << "," << x.x2;
    }
  }
}

TEST(Field, AlphaIntegral) {
  EXPECT_DOUBLE_EQ(alpha_integral(MagneticField::make("constant"), {1.5, -2}), 0.0);
  EXPECT_NEAR(alpha_integral(gw(), {2.0, 0.0}), 0.0, 1e-15);
  EXPECT_NEAR(alpha_integral(MagneticField::make("aniso_poly"), {2, 1}), 16.0, 1e-12);
  EXPECT_NEAR(alpha_integral(MagneticField::make("aniso_poly"), {2, 1}, IntegralMethod::Quadrature), 16.0, 1e-10);
}

TEST(Field, DarbouxForwardExamples) {
  auto f = gw();
  Point2 y = darboux_forward(f, {1, 0});
  EXPECT_NEAR(y.x1, 1.253175867187573, 1e-12);
  EXPECT_NEAR(y.x2, 0.0, 1e-15);
  Point2 c = darboux_forward(MagneticField::make("constant"), {0.5, -0.25});
  EXPECT_NEAR(c.x1, 0.5, 1e-15);
  EXPECT_NEAR(c.x2, -0.25, 1e-15);
}

TEST(Field, DarbouxInverseExamples) {
  Point2 x = darboux_inverse(gw(), {1.253175867187573, 0});
  EXPECT_NEAR(x.x1, 1.0, 1e-10);
  EXPECT_NEAR(x.x2, 0.0, 1e-15);
  Point2 z = darboux_inverse(gw(), {0, 0});
  EXPECT_NEAR(z.x1, 0.0, 1e-14);
}

TEST(Field, DarbouxRoundTrip) {
  std::mt19937_64 rng(3);
  for (const auto& id : MagneticField::preset_ids()) {
    auto f = MagneticField::make(id);
    for (int i = 0; i < 100; ++i) {
      Point2 x = random_point(rng, 4.0);
      Point2 back = darboux_inverse(f, darboux_forward(f, x));
      EXPECT_NEAR(back.x1, x.x1, 1e-10) << id;
      EXPECT_NEAR(back.x2, x.x2, 1e-10) << id;
    }
  }
}

// Jacobian determinant of kappa equals B
TEST(Field, DarbouxJacobian) {
  std::mt19937_64 rng(5);
  const double s = 1e-5;
  for (const auto& id : MagneticField::preset_ids()) {
    auto f = MagneticField::make(id);
    for (int i = 0; i < 20; ++i) {
      Point2 x = random_point(rng, 2.0);
      Point2 a = darboux_forward(f, {x.x1 + s, x.x2}), b = darboux_forward(f, {x.x1 - s, x.x2});
      Point2 c = darboux_forward(f, {x.x1, x.x2 + s}), d = darboux_forward(f, {x.x1, x.x2 - s});
      double j11 = (a.x1 - b.x1) / (2 * s), j21 = (a.x2 - b.x2) / (2 * s);
      double j12 = (c.x1 - d.x1) / (2 * s), j22 = (c.x2 - d.x2) / (2 * s);
      EXPECT_NEAR(j11 * j22 - j12 * j21, darboux_jacobian(f, x), 1e-7 * f.eval(x)) << id;
    }
  }
}

TEST(Field, WellData) {
  WellData g = field_hessian_minimum(gw());
  EXPECT_NEAR(g.b0, 1.0, 1e-15);
  EXPECT_NEAR(g.H.a11, 1.0, 1e-12);
  EXPECT_NEAR(g.H.a12, 0.0, 1e-12);
  EXPECT_NEAR(g.H.a22, 1.0, 1e-12);

  WellData a = field_hessian_minimum(MagneticField::make("aniso_poly"));
  EXPECT_NEAR(a.b0, 1.0, 1e-15);
  EXPECT_NEAR(a.H.a11, 1.0, 1e-12);
  EXPECT_NEAR(a.H.a22, 4.0, 1e-12);
  EXPECT_NEAR(a.alpha, 1.0, 1e-12);
  EXPECT_NEAR(a.gamma, 4.0, 1e-12);
  EXPECT_NEAR(std::abs(a.e_alpha.x1), 1.0, 1e-12);

  EXPECT_THROW(field_hessian_minimum(MagneticField::make("constant")), Error);
}

// H is half the Hessian of B at the well; 4th-order differences of B
TEST(Field, HessianMatchesFiniteDifferences) {
  const double s = 1e-3;
  for (const auto& id : {"gaussian_well", "aniso_poly"}) {
    auto f = MagneticField::make(id);
    WellData w = field_hessian_minimum(f);
    auto B = [&](double a, double b) { return f.eval({a, b}); };
    auto d2 = [&](int axis) {
      auto at = [&](double t) { return axis == 0 ? B(t, 0) : B(0, t); };
      return (-at(2 * s) + 16 * at(s) - 30 * at(0) + 16 * at(-s) - at(-2 * s)) / (12 * s * s);
    };
    double mixed = (B(s, s) - B(s, -s) - B(-s, s) + B(-s, -s)) / (4 * s * s);
    EXPECT_NEAR(w.H.a11, d2(0) / 2, 1e-6 * w.H.a11) << id;
    EXPECT_NEAR(w.H.a22, d2(1) / 2, 1e-6 * w.H.a22) << id;
    EXPECT_NEAR(w.H.a12, mixed / 2, 1e-6) << id;
  }
}

TEST(Field, WellIsGlobalMinimum) {
  std::mt19937_64 rng(9);
  for (const auto& id : {"gaussian_well", "aniso_poly"}) {
    auto f = MagneticField::make(id);
    Point2 g = f.grad(f.well());
    EXPECT_NEAR(g.x1, 0.0, 1e-15);
    EXPECT_NEAR(g.x2, 0.0, 1e-15);
    for (int i = 0; i < 500; ++i) EXPECT_GE(f.eval(random_point(rng, 6.0)), f.b0());
  }
}

TEST(Field, AnalyticDerivatives) {
  std::mt19937_64 rng(13);
  const double s = 1e-5;
  for (const auto& id : MagneticField::preset_ids()) {
    auto f = MagneticField::make(id);
    for (int i = 0; i < 50; ++i) {
      Point2 x = random_point(rng, 2.0);
      Point2 g = f.grad(x);
      EXPECT_NEAR(g.x1, (f.eval({x.x1 + s, x.x2}) - f.eval({x.x1 - s, x.x2})) / (2 * s), 1e-8) << id;
      EXPECT_NEAR(g.x2, (f.eval({x.x1, x.x2 + s}) - f.eval({x.x1, x.x2 - s})) / (2 * s), 1e-8) << id;
      Sym2 H = f.hess(x);
      EXPECT_NEAR(H.a12, (f.grad({x.x1 + s, x.x2}).x2 - f.grad({x.x1 - s, x.x2}).x2) / (2 * s), 1e-7) << id;
    }
  }
}
