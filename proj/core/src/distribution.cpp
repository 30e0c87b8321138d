#include "reluprop/distribution.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "reluprop/error.hpp"

namespace reluprop {

PsdReport check_psd(const Eigen::MatrixXd& cov) {
  PsdReport report;
  report.trace = cov.trace();
  if (cov.rows() == 0) {
    report.ok = true;
    return report;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    report.ok = true;
    report.cholesky_succeeded = true;
    return report;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return report;
  report.min_eigenvalue = eig.eigenvalues().minCoeff();
  report.ok = report.min_eigenvalue >= -1e-8 * std::fabs(report.trace);
  return report;
}

GaussianDist::GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const Eigen::Index m = mean_.size();
  if (m < 1) fail(ErrorKind::kShape, "distribution must have dimension >= 1", "mean");
  if (cov_.rows() != m || cov_.cols() != m) {
    fail(ErrorKind::kShape,
         "covariance must be " + std::to_string(m) + "x" + std::to_string(m), "cov");
  }
  if (!mean_.allFinite()) fail(ErrorKind::kDomain, "mean has non-finite entries", "mean");
  if (!cov_.allFinite()) fail(ErrorKind::kDomain, "covariance has non-finite entries", "cov");

  const double scale = cov_.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (cov_(i, i) < 0.0) {
      fail(ErrorKind::kDomain, "negative variance at index " + std::to_string(i), "cov");
    }
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (std::fabs(cov_(i, j) - cov_(j, i)) > 1e-12 * scale) {
        fail(ErrorKind::kDomain,
             "covariance not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")",
             "cov");
      }
    }
  }
  const PsdReport psd = check_psd(cov_);
  if (!psd.ok) {
    fail(ErrorKind::kDomain,
         "covariance not positive semidefinite (min eigenvalue " +
             std::to_string(psd.min_eigenvalue) + ")",
         "cov");
  }
}

GaussianDist GaussianDist::deterministic(Eigen::VectorXd mean) {
  const Eigen::Index m = mean.size();
  return GaussianDist(std::move(mean), Eigen::MatrixXd::Zero(m, m));
}

}  // namespace reluprop
