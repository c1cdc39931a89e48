#pragma once

#include "magwell/types.hpp"

#include <cmath>
#include <sstream>

namespace magwell {

/// Raised when a grid does not resolve the magnetic length sqrt(h).
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& msg, int required_N) : Error(msg), required_N(required_N) {}
  int required_N;
};

/// Uniform square grid on [-L, L]^2 with N points per side. The outer ring of nodes
/// carries the Dirichlet condition; unknowns live on the (N-2)^2 interior nodes.
struct Grid2D {
  double L = 8.0;
  int N = 128;

  Grid2D() = default;
  Grid2D(double L_, int N_) : L(L_), N(N_) {
    if (N < 16) throw Error("Grid2D: N must be at least 16");
    if (!(L > 0)) throw Error("Grid2D: L must be positive");
  }

  double delta() const { return 2.0 * L / (N - 1); }
  int n() const { return N - 2; }
  long size() const { return static_cast<long>(n()) * n(); }
  /// Coordinate of interior index i in [0, n).
  double coord(int i) const { return -L + (i + 1) * delta(); }
  long index(int i1, int i2) const { return static_cast<long>(i2) * n() + i1; }
  Point2 node(int i1, int i2) const { return {coord(i1), coord(i2)}; }
  Point2 node(long idx) const { return node(static_cast<int>(idx % n()), static_cast<int>(idx / n())); }
  double cell_area() const { return delta() * delta(); }

  bool operator==(const Grid2D& o) const { return L == o.L && N == o.N; }
};

/// Smallest N with 2L/(N-1) <= factor * sqrt(h).
inline int required_points(double L, double h, double factor = 0.35) {
  return static_cast<int>(std::ceil(2.0 * L / (factor * std::sqrt(h)))) + 1;
}

inline void check_resolution(const Grid2D& g, double h, double factor = 0.35) {
  if (g.delta() > factor * std::sqrt(h) * (1.0 + 1e-12)) {
    int req = required_points(g.L, h, factor);
    std::ostringstream os;
    os << "grid spacing " << g.delta() << " does not resolve the magnetic length for h=" << h << " (need spacing <= "
       << factor << "*sqrt(h)); use N >= " << req;
    throw ResolutionError(os.str(), req);
  }
}

}  // namespace magwell
