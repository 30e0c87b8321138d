#pragma once

// Moments of the rectified Gaussian X = max(W, 0) for W ~ N(mu, Sigma).
//
// The scalar operations cover every branch of the closed form: the general
// case, zero-variance (deterministic) coordinates and perfectly correlated
// pairs. rectify() assembles the mean vector and covariance matrix of X.

#include <Eigen/Dense>

#include "reluprop/distribution.hpp"
#include "reluprop/gaussian.hpp"

namespace reluprop {

/// Mean and standard deviation of one coordinate of W.
struct MarginalParams {
  double mu = 0.0;
  double sigma = 0.0;

  /// Throws ErrorKind::kDomain on non-finite values or sigma < 0.
  void validate() const;

  /// sigma <= sigma_tolerance(mu): the coordinate is treated as a point mass.
  bool deterministic() const noexcept;

  /// mu / sigma. Only meaningful when !deterministic().
  double standardized() const noexcept { return mu / sigma; }
};

/// 1e-12 * max(1, |mu|).
double sigma_tolerance(double mu) noexcept;

/// Two coordinates of W and their correlation.
struct PairParams {
  MarginalParams i;
  MarginalParams j;
  Correlation rho{0.0};

  /// (mu_i sigma_j - rho mu_j sigma_i) / (sigma_i sigma_j sqrt(1 - rho^2)).
  /// Requires both marginals non-deterministic and |rho| < 1.
  double omega_ij() const;
  /// omega_ij with the roles of i and j exchanged.
  double omega_ji() const;
};

/// H(x) = 1 for x > 0, 1/2 at x = 0, 0 for x < 0.
double heaviside(double x) noexcept;

double relu_mean(const MarginalParams& m);
double relu_second_moment(const MarginalParams& m);

/// P(X_i > 0, X_j > 0) = Phi2(mu_i/sigma_i, mu_j/sigma_j; rho).
/// Deterministic marginals raise ErrorKind::kDomain; relu_cross_moment
/// handles those directly.
double orthant_prob(const PairParams& p);

/// E(X_i X_j | X_i > 0, X_j > 0). Requires non-deterministic marginals and
/// a non-degenerate correlation. Raises ErrorKind::kNullEvent when the
/// orthant probability is below 1e-300.
double truncated_cross_moment(const PairParams& p);

/// E(X_i X_j) for i != j, dispatching on the deterministic and |rho| = 1
/// corner cases.
double relu_cross_moment(const PairParams& p);

/// Mean (gamma) and covariance (Gamma) of X = max(W, 0).
struct RectifiedMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Each unordered pair is evaluated once and mirrored, so cov is exactly
/// symmetric. Tiny negative diagonal entries from cancellation (within
/// 1e-14 * (mu^2 + sigma^2)) are clamped to zero; larger ones raise
/// ErrorKind::kNumerical.
RectifiedMoments rectify(const GaussianDist& w);

}  // namespace reluprop
