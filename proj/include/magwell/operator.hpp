#pragma once

#include "magwell/field.hpp"
#include "magwell/grid.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <string>

namespace magwell {

using SparseMatrix = Eigen::SparseMatrix<cd>;

struct MagneticOperator {
  Grid2D grid;
  double h = 0.0;
  SparseMatrix matrix;
  std::string gauge;
  std::string field_id;
};

/// Line integral of the vector potential along the straight link from -> to.
using LinkIntegral = std::function<double(Point2 from, Point2 to)>;
/// Real multiplication potential added on the diagonal.
using ScalarPotential = std::function<double(Point2)>;

/// 5-point Peierls discretization of (-i h grad - A)^2 + W with Dirichlet boundary.
MagneticOperator assemble_peierls_laplacian(const Grid2D& grid, double h, const LinkIntegral& link,
                                            const ScalarPotential& potential = nullptr);

/// Landau-type gauge A = (0, A2) with A2 from gauge_potential; midpoint rule on links.
MagneticOperator assemble_magnetic_laplacian(const MagneticField& field, const Grid2D& grid, double h,
                                             double resolution_factor = 0.35);

/// Divergence-form operator in Darboux coordinates y = kappa(x):
/// (-i h grad - At) g* (-i h grad - At) - h^2 V with At = (0, y1).
MagneticOperator assemble_metric_laplacian(const MagneticField& field, const Grid2D& grid, double h,
                                           double resolution_factor = 0.35);

/// Inverse metric g* at y in Darboux coordinates: [[Bt^2 + at^2, at], [at, 1]].
Sym2 metric_gstar(const MagneticField& field, Point2 y);
/// Potential V(y) = -Bt^{1/2} div(g* grad Bt^{-1/2}), by nested 4th-order differences.
double metric_potential(const MagneticField& field, Point2 y, double step = 1e-2);

double hermiticity_residual(const SparseMatrix& M);
/// Gershgorin bound on the spectral radius.
double norm_estimate(const SparseMatrix& M);

/// Fraction of the squared norm of u on nodes within the outer `frame` fraction of [-L, L]^2.
double boundary_mass(const Grid2D& grid, const GridVector& u, double frame = 0.1);

// Normal-form symbol on real phase space, X1 = (x1, xi1), X2 = (x2, xi2).
struct NormalFormCoefficients {
  double g11 = 0.0;
  double g12 = 0.0;
  double g22 = 1.0;
};

NormalFormCoefficients normal_form_coefficients(const MagneticField& field, Point2 X1, Point2 X2);
double normal_form_symbol_eval(const MagneticField& field, Point2 X1, Point2 X2);
double characteristic_symbol_B(const MagneticField& field, Point2 x, Point2 xi);

struct SymbolScanSpec {
  int radii = 40;
  int angles = 16;
  double r_max = 10.0;
  int x2_points = 21;
  double x2_extent = 10.0;
};

struct SymbolBounds {
  double c1 = 0.0;
  double c2 = 0.0;
};

SymbolBounds symbol_lower_bound_scan(const MagneticField& field, double gamma, const SymbolScanSpec& spec = {});

}  // namespace magwell
