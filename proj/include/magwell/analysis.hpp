#pragma once

#include "magwell/fbi.hpp"
#include "magwell/field.hpp"
#include "magwell/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace magwell {

/// lambda_l(h) ~ b0 h + (2 l sqrt(det H)/b0 + (Tr H^{1/2})^2/(2 b0)) h^2
double predicted_eigenvalue(const MagneticField& field, int ell, double h);
/// The h^2 coefficient of the above.
double predicted_h2_coefficient(const MagneticField& field, int ell);

/// Admissible weight d: Lipschitz, unique non-degenerate minimum 0 at the origin, linear growth.
struct AgmonWeight {
  std::string kind = "paper-f-radial";
  std::function<double(Point2)> d;
  double lipschitz = 2.0;
  double growth_slope = 2.0;

  double operator()(Point2 x) const { return d(x); }

  /// d(x) = f(|x|), f(r) = r^2 on [0, 1], 2r - 1 beyond.
  static AgmonWeight paper_f();
  static AgmonWeight custom(std::function<double(Point2)> d, double lipschitz, double growth_slope);
};

double paper_f(double rho);

struct WKBAnsatz {
  double h = 0.0;
  double b0 = 0.0;
  double alpha = 0.0, gamma = 0.0;
  Point2 e_alpha{1.0, 0.0};
  double cutoff_radius = 1.0;
  int ell = 0;
  double mu0 = 0.0, mu1 = 0.0;
  Grid2D grid;
  GridVector u;  // unit Euclidean norm

  /// Re S(x) in the principal frame of H.
  double re_phase(Point2 x) const;
};

/// Smooth cutoff: 1 on |x| <= R, 0 on |x| >= 2R.
double smooth_cutoff(double r, double R);

/// Gauge function f with A = A_Poincare + grad f, f(x) = x2 int_0^1 A2(t x) dt.
double poincare_gauge_phase(const MagneticField& field, Point2 x);

/// Leading-order ansatz chi e^{-Re S/h} a0 with the gauge factor e^{i f/h} of the operator's gauge.
WKBAnsatz wkb_ansatz(const MagneticField& field, const Grid2D& grid, double h, double cutoff_radius = 1.0,
                     int ell = 0);

double quasimode_overlap(const Grid2D& grid, const GridVector& u, const WKBAnsatz& ansatz);

/// int e^{eps d(x)/h} |u|^2 / int |u|^2 (trapezoid). Throws if the outer frame carries more
/// than 1e-8 of the weighted integral.
double agmon_weighted_mass(const Grid2D& grid, const GridVector& u, const AgmonWeight& weight, double eps, double h);

/// int |x|^2 |u|^2 / int |u|^2
double second_moment(const Grid2D& grid, const GridVector& u);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square of the log residuals
  double slope_stderr = 0.0;
};

/// Least squares log m = slope log h + intercept.
ScalingFit moment_scaling(const std::vector<double>& hs, const std::vector<double>& moments);

struct DecayRates {
  double eps1 = 0.0;
  double eps2 = 0.0;
};

struct RayPoint {
  Point2 offset;  // from the slice peak, in (axis1, axis2) units
  double decay = 0.0;  // -(h/2) log(|Tu|^2 / peak)
};

/// Walks from the peak of |Tu|^2 in index steps (d1, d2) while |Tu|^2 > 1e-12 peak.
std::vector<RayPoint> ray_profile(const PhaseSpaceSlice& slice, double h, int d1, int d2);

/// Ray-wise fit of -(h/2) log(|Tu|^2 / peak) against psi on one square-spaced slice; min over 8 rays.
double slice_decay_rate(const PhaseSpaceSlice& slice, const AgmonWeight& psi, double h);
DecayRates phase_space_decay_rate(const PhaseSpaceSlice& x1_slice, const PhaseSpaceSlice& x2_slice,
                                  const AgmonWeight& psi1, const AgmonWeight& psi2, double h);

/// Square-spaced slice of the (x_j, xi_j) plane around the origin: x spacing equal to the dual-grid step.
SliceSpec decay_slice_spec(const FbiEngine& engine, int j, double extent);

struct HusimiCheck {
  double energy = 0.0;  // int (|x|^2 + |xi|^2) |Tu|^2
  double quantum = 0.0;  // <(|y|^2 + (hD)^2) u, u>
  double defect = 0.0;  // |(E - 2h) - quantum|
};

HusimiCheck husimi_oscillator_identity(double h, const Grid2D& grid, const XSampling& xs, int pad = 2,
                                       bool zero_state = false);

/// Richardson combination 2 c(h) - c(2h) on a halving h-list (first entry has none).
std::vector<double> richardson_halving(const std::vector<double>& hs, const std::vector<double>& c);

}  // namespace magwell
