#include "magwell/field.hpp"

#include "magwell/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace magwell {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

void require_params(const std::string& id, const std::vector<double>& p, std::size_t n) {
  if (p.size() != n) {
    std::ostringstream os;
    os << "preset '" << id << "' expects " << n << " parameters, got " << p.size();
    throw Error(os.str());
  }
}

}  // namespace

std::vector<std::string> MagneticField::preset_ids() { return {"constant", "gaussian_well", "aniso_poly"}; }

std::vector<double> MagneticField::default_params(const std::string& id) {
  if (id == "constant") return {1.0};
  if (id == "gaussian_well") return {2.0, 1.0, 1.0};
  if (id == "aniso_poly") return {1.0, 1.0, 4.0};
  throw Error("unknown field preset '" + id + "'");
}

MagneticField MagneticField::make(const std::string& id, std::vector<double> params) {
  if (params.empty()) params = default_params(id);
  if (id == "constant") {
    require_params(id, params, 1);
    if (!(params[0] > 0)) throw Error("constant preset: b must be positive");
    return MagneticField(Preset::Constant, id, params);
  }
  if (id == "gaussian_well") {
    require_params(id, params, 3);
    if (!(params[1] > 0 && params[2] > 0 && params[0] - params[1] > 0))
      throw Error("gaussian_well preset: need depth > 0, width > 0, b_inf > depth");
    return MagneticField(Preset::GaussianWell, id, params);
  }
  if (id == "aniso_poly") {
    require_params(id, params, 3);
    if (!(params[0] > 0 && params[1] > 0 && params[2] > 0))
      throw Error("aniso_poly preset: need b0, a, c > 0");
    return MagneticField(Preset::AnisoPoly, id, params);
  }
  throw Error("unknown field preset '" + id + "'");
}

MagneticField::MagneticField(Preset p, std::string id, std::vector<double> params)
    : preset_(p), id_(std::move(id)), params_(std::move(params)) {
  switch (preset_) {
    case Preset::Constant: b0_ = params_[0]; break;
    case Preset::GaussianWell: b0_ = params_[0] - params_[1]; break;
    case Preset::AnisoPoly: b0_ = params_[0]; break;
  }
}

double MagneticField::eval(Point2 x) const {
  const auto& p = params_;
  switch (preset_) {
    case Preset::Constant: return p[0];
    case Preset::GaussianWell: return p[0] - p[1] * std::exp(-norm2(x) / (p[2] * p[2]));
    case Preset::AnisoPoly: return p[0] + p[1] * x.x1 * x.x1 + p[2] * x.x2 * x.x2;
  }
  return 0.0;
}

Point2 MagneticField::grad(Point2 x) const {
  const auto& p = params_;
  switch (preset_) {
    case Preset::Constant: return {0.0, 0.0};
    case Preset::GaussianWell: {
      double w2 = p[2] * p[2];
      double g = p[1] * std::exp(-norm2(x) / w2) * 2.0 / w2;
      return {g * x.x1, g * x.x2};
    }
    case Preset::AnisoPoly: return {2.0 * p[1] * x.x1, 2.0 * p[2] * x.x2};
  }
  return {};
}

Sym2 MagneticField::hess(Point2 x) const {
  const auto& p = params_;
  switch (preset_) {
    case Preset::Constant: return {};
    case Preset::GaussianWell: {
      double w2 = p[2] * p[2];
      double e = p[1] * std::exp(-norm2(x) / w2);
      return {e * (2.0 / w2 - 4.0 * x.x1 * x.x1 / (w2 * w2)), e * (-4.0 * x.x1 * x.x2 / (w2 * w2)),
              e * (2.0 / w2 - 4.0 * x.x2 * x.x2 / (w2 * w2))};
    }
    case Preset::AnisoPoly: return {2.0 * p[1], 0.0, 2.0 * p[2]};
  }
  return {};
}

double MagneticField::A2_closed(Point2 x) const {
  const auto& p = params_;
  switch (preset_) {
    case Preset::Constant: return p[0] * x.x1;
    case Preset::GaussianWell: {
      double w = p[2];
      return p[0] * x.x1 - p[1] * std::exp(-x.x2 * x.x2 / (w * w)) * (w * kSqrtPi / 2.0) * std::erf(x.x1 / w);
    }
    case Preset::AnisoPoly:
      return p[0] * x.x1 + p[1] * x.x1 * x.x1 * x.x1 / 3.0 + p[2] * x.x2 * x.x2 * x.x1;
  }
  return 0.0;
}

double MagneticField::alpha_closed(Point2 x) const {
  const auto& p = params_;
  switch (preset_) {
    case Preset::Constant: return 0.0;
    case Preset::GaussianWell: {
      double w = p[2];
      return p[1] * (2.0 * x.x2 / (w * w)) * std::exp(-x.x2 * x.x2 / (w * w)) * (w * kSqrtPi / 2.0) *
             std::erf(x.x1 / w);
    }
    case Preset::AnisoPoly: return 2.0 * p[2] * x.x2 * x.x1;
  }
  return 0.0;
}

double gauge_potential(const MagneticField& field, Point2 x, IntegralMethod m) {
  if (m == IntegralMethod::Auto) return field.A2_closed(x);
  return integrate_adaptive([&](double u) { return field.eval({u, x.x2}); }, 0.0, x.x1);
}

double alpha_integral(const MagneticField& field, Point2 x, IntegralMethod m) {
  if (m == IntegralMethod::Auto) return field.alpha_closed(x);
  return integrate_adaptive([&](double u) { return field.d2B({u, x.x2}); }, 0.0, x.x1);
}

Point2 darboux_forward(const MagneticField& field, Point2 x) { return {gauge_potential(field, x), x.x2}; }

Point2 darboux_inverse(const MagneticField& field, Point2 xt, double search_radius) {
  if (!std::isfinite(xt.x1) || !std::isfinite(xt.x2)) throw Error("darboux_inverse: non-finite input");
  const double x2 = xt.x2;
  if (xt.x1 == 0.0) return {0.0, x2};
  // A2(., x2) is increasing with slope >= b0, so the root lies between 0 and xt1 / b0.
  double lo = 0.0, hi = xt.x1 / field.b0();
  if (std::abs(hi) > search_radius) {
    std::ostringstream os;
    os << "darboux_inverse: bracket [0, " << hi << "] exceeds search radius " << search_radius;
    throw Error(os.str());
  }
  if (lo > hi) std::swap(lo, hi);
  auto F = [&](double s) { return field.A2_closed({s, x2}) - xt.x1; };
  double flo = F(lo);
  double s = xt.x1 / field.eval({0.0, x2});
  if (s < lo || s > hi) s = 0.5 * (lo + hi);
  const double tol = 1e-14 * std::max(1.0, std::abs(xt.x1));
  for (int it = 0; it < 200; ++it) {
    double f = F(s);
    if (std::abs(f) <= tol) return {s, x2};
    if ((f < 0) == (flo < 0)) {
      lo = s;
      flo = f;
    } else {
      hi = s;
    }
    double next = s - f / field.eval({s, x2});
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-16 * std::max(1.0, std::abs(s))) return {next, x2};
    s = next;
  }
  if (std::abs(F(s)) <= 1e-10) return {s, x2};
  throw Error("darboux_inverse: Newton iteration failed to converge");
}

WellData field_hessian_minimum(const MagneticField& field) {
  if (field.validation_only())
    throw Error("field '" + field.id() + "' has a degenerate well (constant field is validation-only)");
  WellData w;
  w.b0 = field.eval(field.well());
  Sym2 hs = field.hess(field.well());
  w.H = {0.5 * hs.a11, 0.5 * hs.a12, 0.5 * hs.a22};
  double tr = w.H.trace(), det = w.H.det();
  double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  w.alpha = 0.5 * tr - disc;
  w.gamma = 0.5 * tr + disc;
  if (!(w.alpha > 0)) throw Error("field '" + field.id() + "': Hessian at the well is not positive definite");
  // Eigenvector for alpha: (H - alpha I) e = 0.
  if (std::abs(w.H.a12) > 0) {
    Point2 e{w.H.a12, w.alpha - w.H.a11};
    double n = std::sqrt(norm2(e));
    w.e_alpha = {e.x1 / n, e.x2 / n};
  } else {
    w.e_alpha = w.H.a11 <= w.H.a22 ? Point2{1.0, 0.0} : Point2{0.0, 1.0};
  }
  return w;
}

}  // namespace magwell
