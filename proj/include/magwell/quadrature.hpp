#pragma once

#include "magwell/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magwell {

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b]. Throws QuadratureError
/// when the error estimate stays above abs_tol after max_depth bisections.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-12, unsigned max_depth = 20) {
  if (a == b) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0, l1 = 0.0;
  double val = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
  if (std::isfinite(val) && err <= abs_tol) return val;
  // Bisecting past the requested accuracy only accumulates roundoff in the error estimate,
  // so the relative tolerance handed to the recursion is derived from abs_tol.
  const double rel = l1 > 0.0 ? std::max(0.5 * abs_tol / l1, 1e-15) : 1e-15;
  val = GK::integrate(f, a, b, max_depth, rel, &err, &l1);
  if (!std::isfinite(val) || err > abs_tol) {
    std::ostringstream os;
    os << "adaptive quadrature on [" << a << ", " << b << "] did not converge: error estimate " << err
       << " exceeds " << abs_tol;
    throw QuadratureError(os.str());
  }
  return val;
}

}  // namespace magwell
