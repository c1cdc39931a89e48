#pragma once

#include <Eigen/Core>

#include <complex>
#include <stdexcept>
#include <string>

namespace magwell {

using cd = std::complex<double>;

/// Complex samples on the interior nodes of a Grid2D (x1 fastest).
using GridVector = Eigen::VectorXcd;

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x1, s * a.x2}; }
inline double dot(Point2 a, Point2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm2(Point2 a) { return dot(a, a); }

/// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double det() const { return a11 * a22 - a12 * a12; }
  double trace() const { return a11 + a22; }
};

/// Point of phase space T*R^2 = R^4, split as X1 = (x1, xi1), X2 = (x2, xi2).
struct PhasePoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace magwell
