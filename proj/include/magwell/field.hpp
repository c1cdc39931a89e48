#pragma once

#include "magwell/types.hpp"

#include <string>
#include <vector>

namespace magwell {

enum class Preset { Constant, GaussianWell, AnisoPoly };

/// Closed-form magnetic field with hand-coded derivatives.
///
///   constant       params {b}                 B = b
///   gaussian_well  params {b_inf, depth, w}   B = b_inf - depth * exp(-|x|^2 / w^2)
///   aniso_poly     params {b0, a, c}          B = b0 + a x1^2 + c x2^2
class MagneticField {
 public:
  static MagneticField make(const std::string& id, std::vector<double> params = {});
  static std::vector<std::string> preset_ids();
  static std::vector<double> default_params(const std::string& id);

  Preset preset() const { return preset_; }
  const std::string& id() const { return id_; }
  const std::vector<double>& params() const { return params_; }

  double eval(Point2 x) const;
  Point2 grad(Point2 x) const;
  Sym2 hess(Point2 x) const;
  double d2B(Point2 x) const { return grad(x).x2; }

  // Closed-form line integrals from (0, x2) to (x1, x2) of B and of d2B.
  double A2_closed(Point2 x) const;
  double alpha_closed(Point2 x) const;

  /// Lower bound of B over the plane (the well value for proper wells).
  double b0() const { return b0_; }
  Point2 well() const { return {0.0, 0.0}; }
  /// The constant preset has no non-degenerate minimum.
  bool validation_only() const { return preset_ == Preset::Constant; }

 private:
  MagneticField(Preset p, std::string id, std::vector<double> params);

  Preset preset_;
  std::string id_;
  std::vector<double> params_;
  double b0_;
};

struct WellData {
  double b0 = 0.0;
  Sym2 H;
  // Eigenvalues of H in increasing order and the unit eigenvector of alpha.
  double alpha = 0.0;
  double gamma = 0.0;
  Point2 e_alpha{1.0, 0.0};
};

enum class IntegralMethod { Auto, Quadrature };

double gauge_potential(const MagneticField& field, Point2 x, IntegralMethod m = IntegralMethod::Auto);
double alpha_integral(const MagneticField& field, Point2 x, IntegralMethod m = IntegralMethod::Auto);

Point2 darboux_forward(const MagneticField& field, Point2 x);
Point2 darboux_inverse(const MagneticField& field, Point2 xt, double search_radius = 1e3);
/// Determinant of d(kappa) at x; equals B(x).
inline double darboux_jacobian(const MagneticField& field, Point2 x) { return field.eval(x); }

WellData field_hessian_minimum(const MagneticField& field);

}  // namespace magwell
