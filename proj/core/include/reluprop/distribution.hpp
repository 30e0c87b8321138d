#pragma once

#include <Eigen/Dense>

namespace reluprop {

/// Result of a positive-semidefiniteness check.
struct PsdReport {
  bool ok = false;
  /// True when a plain Cholesky factorization succeeded; min_eigenvalue is
  /// then not computed and left at 0.
  bool cholesky_succeeded = false;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
};

/// Accepts cov when its smallest eigenvalue is >= -1e-8 * trace. Tries LLT
/// first and falls back to a symmetric eigen-solve for diagnostics.
PsdReport check_psd(const Eigen::MatrixXd& cov);

/// Multivariate normal N(mean, cov). Construction validates shapes,
/// finiteness, symmetry (1e-12 relative to the largest entry) and the PSD
/// condition. Zero-variance coordinates are allowed.
class GaussianDist {
 public:
  GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

  /// Point mass at mean.
  static GaussianDist deterministic(Eigen::VectorXd mean);

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

}  // namespace reluprop
