#pragma once

#include "magwell/fft.hpp"
#include "magwell/grid.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace magwell {

/// alpha_h = 2^{-1} (pi h)^{-3/2}
double fbi_alpha(double h);
/// 1D analogue fixed by isometry on Gaussians: 2^{-1/2} pi^{-3/4} h^{-3/4}.
double fbi_alpha_1d(double h);

enum class PhaseAxis { X1 = 0, X2 = 1, Xi1 = 2, Xi2 = 3 };
std::string axis_name(PhaseAxis a);
PhaseAxis parse_axis(const std::string& s);

/// Uniform grid of x-nodes: count points per axis on [center - extent, center + extent].
struct XSampling {
  Point2 center{0.0, 0.0};
  double extent = 1.0;
  int count = 21;

  double spacing() const { return count > 1 ? 2.0 * extent / (count - 1) : 0.0; }
  double coord(int i, double c) const { return c - extent + i * spacing(); }
};

/// Tu(x, xi) for every xi on the FFT dual grid, streamed one x-node at a time:
/// Tu(x, xi_k) = alpha_h D^2 e^{i (x - y0) xi_k / h} DFT[e^{-|x-y|^2/2h} u(y)](k), zero-padded to pad*n.
/// Rows are laid out with xi_q = (q - M/2) dxi, index q2 * M + q1.
class FbiEngine {
 public:
  FbiEngine(const Grid2D& grid, double h, int pad = 2);

  const Grid2D& grid() const { return grid_; }
  double h() const { return h_; }
  double alpha() const { return alpha_; }
  int M() const { return M_; }
  double dxi() const { return dxi_; }
  double xi(int q) const { return (q - M_ / 2) * dxi_; }
  /// Nearest xi-node index to a value.
  int xi_index(double xi) const;

  void row(const GridVector& u, Point2 x, std::vector<cd>& out) const;
  /// acc += weight * alpha_h * int e^{-i(x-y)xi/h - |x-y|^2/2h} Tu(x, xi) dxi, for the given row.
  void accumulate_adjoint(Point2 x, const std::vector<cd>& row, double weight, GridVector& acc) const;

 private:
  Grid2D grid_;
  double h_, alpha_;
  int pad_, M_;
  double dxi_;
  mutable std::unique_ptr<FftPlan> plan_;
};

using PhaseRowSource = std::function<void(Point2 x, std::vector<cd>& row)>;

struct SliceAxisSpec {
  PhaseAxis axis = PhaseAxis::X1;
  double lo = -1.0;
  double hi = 1.0;
  int count = 21;  // ignored for xi axes, which use the dual-grid nodes inside [lo, hi]
};

struct SliceSpec {
  SliceAxisSpec a1, a2;
  std::array<double, 4> fixed{0.0, 0.0, 0.0, 0.0};  // values of (x1, x2, xi1, xi2) for frozen axes
};

struct PhaseSpaceSlice {
  PhaseAxis axis1 = PhaseAxis::X1, axis2 = PhaseAxis::Xi1;
  std::vector<double> grid1, grid2;
  std::array<double, 4> fixed{0.0, 0.0, 0.0, 0.0};
  std::vector<cd> values;  // index i2 * grid1.size() + i1
  double h = 0.0;

  cd at(std::size_t i1, std::size_t i2) const { return values[i2 * grid1.size() + i1]; }
};

PhaseSpaceSlice fbi_slice(const FbiEngine& engine, const GridVector& u, const SliceSpec& spec);

struct FbiSpec {
  double h = 0.1;
  Grid2D grid;
  int pad = 2;
  std::vector<SliceSpec> slices;
};

std::vector<PhaseSpaceSlice> fbi_transform(const GridVector& u, const FbiSpec& spec);

/// Mass of |Tu|^2 and its second moment int (|x|^2 + |xi|^2) |Tu|^2 over an x-sampling.
struct PhaseMoments {
  double mass = 0.0;
  double second = 0.0;
  double outer_xi_fraction = 0.0;
};
PhaseMoments fbi_moments(const FbiEngine& engine, const GridVector& u, const XSampling& xs);

/// | ||Tu||^2 / ||u||^2 - 1 |, accumulated over x-nodes (trapezoid) and xi (Parseval).
double fbi_isometry_defect(const FbiEngine& engine, const GridVector& u, const XSampling& xs);
/// T* applied to rows streamed from `rows` over the x-sampling.
GridVector fbi_invert(const FbiEngine& engine, const XSampling& xs, const PhaseRowSource& rows);
/// T*T u with rows computed on the fly.
GridVector fbi_roundtrip(const FbiEngine& engine, const GridVector& u, const XSampling& xs);

/// ||(h(d_x - i d_xi) - i xi) Tu|| / ||xi Tu|| on the interior of an (x_j, xi_j) slice.
double holomorphy_residual(const PhaseSpaceSlice& slice);

/// 1D transform Tu(x, xi) = alpha ∫ e^{i(x-y)xi/h - (x-y)^2/2h} u(y) dy by trapezoid on y = y0 + j*dy.
cd fbi_transform_1d(const std::vector<cd>& u, double y0, double dy, double h, double x, double xi);

enum class MetaplecticDirection { Forward, Inverse };

/// Fourier multiplier e^{-i xi1 xi2 / h} (forward) or its conjugate, on the unpadded interior grid.
GridVector metaplectic_apply(const GridVector& u, const Grid2D& grid, double h, MetaplecticDirection dir);
/// Spectral hD_j (j = 1, 2).
GridVector semiclassical_derivative(const GridVector& u, const Grid2D& grid, double h, int j);

enum class EgorovSymbol { One, X1, Xi1 };
/// ||M^{-1} Op(s) M v - Op(s o kappa_M) v|| / ||v|| for a Gaussian bump v.
double egorov_residual(double h, const Grid2D& grid, EgorovSymbol symbol = EgorovSymbol::X1);

/// L * conj(K)(y) with L(t) = e^{-|t|^2/2h}, conj(K)(t) = e^{-i t1 t2 / h}, by trapezoid quadrature.
cd gaussian_kernel_convolution(double h, Point2 y, double dt_factor = 1.0 / 32.0);
/// Closed form sqrt(2) pi h e^{-<(I + iA) y, y>/4h}.
cd gaussian_kernel_closed_form(double h, Point2 y);
/// Max relative deviation between quadrature and closed form over a fixed panel of points.
double gaussian_kernel_identity_check(double h);

}  // namespace magwell
