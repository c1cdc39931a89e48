#pragma once

#include "magwell/grid.hpp"
#include "magwell/operator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace magwell::testing {

// e^{-|x - c|^2 / 2s} e^{i k.x / h} sampled on the interior nodes.
inline GridVector gaussian(const Grid2D& g, double s, Point2 c = {}, Point2 k = {}, double h = 1.0) {
  GridVector u(g.size());
  for (long j = 0; j < g.size(); ++j) {
    Point2 x = g.node(j);
    u[j] = std::exp(-norm2(x - c) / (2 * s)) * std::polar(1.0, dot(k, x) / h);
  }
  return u;
}

inline Eigen::VectorXd dense_eigenvalues(const SparseMatrix& M) {
  Eigen::MatrixXcd D = Eigen::MatrixXcd(M);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(D, Eigen::EigenvaluesOnly).eigenvalues();
}

inline Point2 random_point(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> d(-r, r);
  double a = d(rng);
  return {a, d(rng)};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("magwell_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace magwell::testing
