#pragma once

#include "magwell/operator.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace magwell {

struct EigenPair {
  double value = 0.0;
  GridVector vector;  // unit Euclidean norm
  double residual = 0.0;
};

struct SolverConfig {
  int k = 4;
  double tol = 1e-9;  // relative to the Gershgorin estimate of |M|
  int max_iterations = 400;  // block Krylov steps
  int block_size = 0;  // 0: k + 2
  double inner_tol = 1e-12;
  int inner_max_iterations = 20000;
  std::string preconditioner = "jacobi";  // jacobi | cholesky | none
  double shift = 0.0;
  std::uint64_t seed = 20240611;
  int max_basis = 0;  // 0: automatic
  // With the cholesky preconditioner, move the shift up towards the lowest Ritz value once the
  // factorization certifies (by its inertia) that no eigenvalue lies below the new shift.
  bool adaptive_shift = true;

  void validate() const;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> best) : Error(msg), best_residuals(std::move(best)) {}
  std::vector<double> best_residuals;
};

/// w = (M - shift)^{-1} v by preconditioned conjugate gradients.
class ShiftInvert {
 public:
  ShiftInvert(const SparseMatrix& M, double shift, const std::string& preconditioner, double tol, int max_iterations);
  ~ShiftInvert();
  GridVector apply(const GridVector& v);
  int last_iterations() const { return last_iterations_; }
  /// Number of eigenvalues of M below the shift (cholesky only, otherwise -1).
  int negative_pivots() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int last_iterations_ = 0;
};

GridVector apply_shift_invert(const SparseMatrix& M, double shift, const GridVector& v, double tol,
                              const std::string& preconditioner = "jacobi", int max_iterations = 20000);

/// k smallest eigenpairs, ascending, by block shift-invert Lanczos with full reorthogonalization.
std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& M, const SolverConfig& cfg);
inline std::vector<EigenPair> smallest_eigenpairs(const MagneticOperator& op, const SolverConfig& cfg) {
  return smallest_eigenpairs(op.matrix, cfg);
}

}  // namespace magwell
