#include "magwell/eigensolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <random>
#include <sstream>

namespace magwell {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

void SolverConfig::validate() const {
  if (k < 1 || k > 32) throw Error("solver: k must be in [1, 32]");
  if (!(tol > 0)) throw Error("solver: tol must be positive");
  if (!(inner_tol > 0)) throw Error("solver: inner_tol must be positive");
  if (max_iterations < 1) throw Error("solver: max_iterations must be positive");
  if (block_size < 0) throw Error("solver: block_size must be non-negative");
  if (preconditioner != "jacobi" && preconditioner != "cholesky" && preconditioner != "none")
    throw Error("solver: preconditioner must be jacobi, cholesky or none");
}

struct ShiftInvert::Impl {
  SparseMatrix A;
  std::string kind;
  double tol;
  int max_it;
  VectorXd inv_diag;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;

  GridVector precondition(const GridVector& r) const {
    if (kind == "jacobi") return inv_diag.cast<cd>().cwiseProduct(r);
    if (kind == "cholesky") return ldlt.solve(r);
    return r;
  }
};

ShiftInvert::ShiftInvert(const SparseMatrix& M, double shift, const std::string& preconditioner, double tol,
                         int max_iterations)
    : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  m.kind = preconditioner;
  m.tol = tol;
  m.max_it = max_iterations;
  m.A = M;
  if (shift != 0.0) {
    for (int k = 0; k < m.A.rows(); ++k) m.A.coeffRef(k, k) -= shift;
  }
  m.A.makeCompressed();
  if (preconditioner == "jacobi") {
    m.inv_diag.resize(m.A.rows());
    for (int k = 0; k < m.A.rows(); ++k) {
      double d = m.A.coeff(k, k).real();
      if (!(d > 0)) throw Error("shift-invert: non-positive diagonal entry; operator minus shift is not positive definite");
      m.inv_diag[k] = 1.0 / d;
    }
  } else if (preconditioner == "cholesky") {
    m.ldlt.compute(m.A);
    if (m.ldlt.info() != Eigen::Success) throw Error("shift-invert: Cholesky factorization failed");
  } else if (preconditioner != "none") {
    throw Error("shift-invert: unknown preconditioner '" + preconditioner + "'");
  }
}

ShiftInvert::~ShiftInvert() = default;

int ShiftInvert::negative_pivots() const {
  if (impl_->kind != "cholesky") return -1;
  const auto d = impl_->ldlt.vectorD();
  int neg = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(std::real(d[i]) > 0)) ++neg;
  return neg;
}

GridVector ShiftInvert::apply(const GridVector& v) {
  const auto& m = *impl_;
  const double vn = v.norm();
  GridVector x = GridVector::Zero(v.size());
  last_iterations_ = 0;
  if (vn == 0.0) return x;
  GridVector r = v;
  GridVector z = m.precondition(r);
  GridVector p = z;
  cd rz = r.dot(z);
  for (int it = 1; it <= m.max_it; ++it) {
    GridVector Ap = m.A * p;
    double pAp = p.dot(Ap).real();
    if (!(pAp > 0)) {
      std::ostringstream os;
      os << "shift-invert CG breakdown at iteration " << it << ": operator minus shift is not positive definite";
      throw Error(os.str());
    }
    cd alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    last_iterations_ = it;
    if (r.norm() <= m.tol * vn) return x;
    z = m.precondition(r);
    cd rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream os;
  os << "shift-invert CG did not converge in " << m.max_it << " iterations (relative residual " << r.norm() / vn
     << ")";
  throw Error(os.str());
}

GridVector apply_shift_invert(const SparseMatrix& M, double shift, const GridVector& v, double tol,
                              const std::string& preconditioner, int max_iterations) {
  ShiftInvert s(M, shift, preconditioner, tol, max_iterations);
  return s.apply(v);
}

namespace {

// Orthonormalize the columns of W against Q and among themselves (classical Gram-Schmidt,
// repeated while a pass removes most of the column). Columns that collapse to rounding level
// are replaced with fresh random directions.
void orthonormalize(const MatrixXcd& Q, MatrixXcd& W, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  for (int j = 0; j < W.cols(); ++j) {
    for (int attempt = 0; attempt < 5; ++attempt) {
      const double before = W.col(j).norm();
      double prev = before, after = before;
      for (int pass = 0; pass < 4; ++pass) {
        if (Q.cols()) W.col(j) -= Q * (Q.adjoint() * W.col(j));
        if (j) W.col(j) -= W.leftCols(j) * (W.leftCols(j).adjoint() * W.col(j));
        after = W.col(j).norm();
        if (pass >= 1 && after > 0.5 * prev) break;
        prev = after;
      }
      if (after > 1e-14 * before && after > 0) {
        W.col(j) /= after;
        break;
      }
      for (long i = 0; i < W.rows(); ++i) W(i, j) = cd(nd(rng), nd(rng));
    }
  }
}

// Fix the global phase so that the largest-modulus entry is real and positive.
void normalize_phase(GridVector& u) {
  Eigen::Index imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  cd z = u[imax];
  if (std::abs(z) > 0) u *= std::conj(z) / std::abs(z);
  u.normalize();
}

}  // namespace

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& M, const SolverConfig& cfg) {
  cfg.validate();
  const long n = M.rows();
  if (M.cols() != n) throw Error("eigensolver: matrix is not square");
  if (cfg.k > n) throw Error("eigensolver: k exceeds the problem dimension");
  const double normM = norm_estimate(M);
  if (hermiticity_residual(M) > 1e-12 * std::max(normM, 1e-300))
    throw Error("eigensolver: operator is not Hermitian");

  const int p = std::min<long>(cfg.k + 2, n);
  const int b = std::min<long>(cfg.block_size > 0 ? cfg.block_size : p, n);
  int max_basis = cfg.max_basis > 0 ? cfg.max_basis : std::max(6 * b, 3 * p + 2 * b);
  max_basis = std::min<long>(std::max(max_basis, p + 2 * b), n);
  const bool adaptive = cfg.adaptive_shift && cfg.preconditioner == "cholesky";

  double sigma = cfg.shift;
  auto S = std::make_unique<ShiftInvert>(M, sigma, cfg.preconditioner, cfg.inner_tol, cfg.inner_max_iterations);
  auto try_shift = [&](double c) -> std::unique_ptr<ShiftInvert> {
    auto t = std::make_unique<ShiftInvert>(M, c, cfg.preconditioner, cfg.inner_tol, cfg.inner_max_iterations);
    if (t->negative_pivots() == 0) return t;
    return nullptr;
  };
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd;

  // Basis V, its image MV and the projection G = V^H M V. New directions come from the
  // shift-invert operator applied to the newest block (block Krylov); after a restart, to the
  // leading Ritz block.
  MatrixXcd V(n, 0), MV(n, 0), G(0, 0);
  MatrixXcd X(n, b);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < b; ++j) X(i, j) = cd(nd(rng), nd(rng));

  std::vector<double> best(cfg.k, INFINITY);
  const double target = cfg.tol * normM;
  int phase_steps = 0;

  for (int it = 0; it < cfg.max_iterations; ++it, ++phase_steps) {
    MatrixXcd W(n, X.cols());
    if (it == 0) {
      W = X;
    } else {
      for (int j = 0; j < X.cols(); ++j) W.col(j) = S->apply(X.col(j));
    }
    orthonormalize(V, W, rng);
    const int bn = std::min<long>(W.cols(), n - V.cols());
    if (bn <= 0) break;
    W.conservativeResize(n, bn);
    MatrixXcd MW = M * W;

    const int m0 = static_cast<int>(V.cols());
    const int m = m0 + bn;
    V.conservativeResize(n, m);
    V.rightCols(bn) = W;
    MV.conservativeResize(n, m);
    MV.rightCols(bn) = MW;
    MatrixXcd Gn(m, m);
    Gn.topLeftCorner(m0, m0) = G;
    MatrixXcd col = V.adjoint() * MW;
    Gn.rightCols(bn) = col;
    Gn.bottomLeftCorner(bn, m0) = col.topRows(m0).adjoint();
    G = 0.5 * (Gn + MatrixXcd(Gn.adjoint()));

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G);
    const VectorXd& lam = es.eigenvalues();
    const MatrixXcd& Z = es.eigenvectors();

    bool ok = m >= p;
    std::vector<double> res(std::min(m, p), INFINITY);
    if (m >= p) {
      MatrixXcd U = V * Z.leftCols(p);
      MatrixXcd R = MV * Z.leftCols(p) - U * lam.head(p).asDiagonal();
      for (int i = 0; i < p; ++i) {
        res[i] = R.col(i).norm();
        if (i < cfg.k) {
          best[i] = std::min(best[i], res[i]);
          ok = ok && res[i] <= target;
        }
      }
      if (ok) {
        std::vector<EigenPair> out(cfg.k);
        for (int i = 0; i < cfg.k; ++i) {
          out[i].value = lam[i];
          out[i].vector = U.col(i);
          normalize_phase(out[i].vector);
          out[i].residual = res[i];
        }
        return out;
      }
      if (adaptive && phase_steps >= 3) {
        // The smallest Ritz value bounds the spectrum from above. Move the shift just below it
        // once a factorization certifies (no negative pivots) that nothing lies underneath.
        const double gap = lam[0] - sigma;
        double cand = lam[0] - std::max(2.0 * res[0], 1e-12 * normM);
        std::unique_ptr<ShiftInvert> next;
        for (int tries = 0; tries < 6 && cand > sigma + 0.1 * gap; ++tries) {
          if ((next = try_shift(cand))) break;
          cand = sigma + 0.5 * (cand - sigma);
        }
        if (!next && phase_steps >= 6) {
          // Residuals stall inside a dense cluster: bracket the lowest eigenvalue by inertia
          // bisection and shift to just below it.
          double lo = sigma, hi = lam[0];
          while (hi - lo > target) {
            double mid = 0.5 * (lo + hi);
            if (auto t = try_shift(mid)) {
              lo = mid;
              next = std::move(t);
            } else {
              hi = mid;
            }
          }
          cand = lo;
        }
        if (next) {
          sigma = cand;
          S = std::move(next);
          phase_steps = 0;
        }
      }
    }

    if (m + b > max_basis) {
      // Explicit restart on the lowest Ritz vectors.
      const int q = std::min(m, std::max(p, max_basis - 2 * b));
      V = V * Z.leftCols(q);
      MV = MV * Z.leftCols(q);
      G = lam.head(q).cast<cd>().asDiagonal();
      X = V.leftCols(std::min(b, q));
    } else if (phase_steps == 0 && m >= p) {
      X = V * Z.leftCols(b);
    } else {
      X = W;
    }
  }
  std::ostringstream os;
  os << "eigensolver did not converge in " << cfg.max_iterations << " block steps; best residuals:";
  for (double r : best) os << ' ' << r;
  os << " (target " << target << ")";
  throw ConvergenceError(os.str(), best);
}

}  // namespace magwell
