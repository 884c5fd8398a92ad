#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace qflqg::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrized(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

inline double max_asymmetry(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric,
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// Ratio of extreme eigenvalue magnitudes; +inf for a singular matrix.
inline double condition_number(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric,
                                               Eigen::EigenvaluesOnly);
  const Vector ev = solver.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

// Returns F with F * F^T == cov for a symmetric PSD cov. Negative
// eigenvalues from roundoff are treated as zero.
inline Matrix psd_factor(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(cov));
  const Vector root =
      solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal();
}

inline double relative_frobenius(const Matrix& estimate,
                                 const Matrix& reference) {
  const double denom = reference.norm();
  if (denom == 0.0) return estimate.norm();
  return (estimate - reference).norm() / denom;
}

}  // namespace qflqg::linalg
