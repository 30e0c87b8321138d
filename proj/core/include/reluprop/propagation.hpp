#pragma once

// Moment propagation through a one-hidden-layer ReLU network
//
//   W = A^T V + c,   X = max(W, 0),   Y = beta^T X + d
//
// for Gaussian input V ~ N(lambda, Lambda).

#include <Eigen/Dense>

#include "reluprop/distribution.hpp"
#include "reluprop/rectified.hpp"

namespace reluprop {

struct MlpModel {
  Eigen::MatrixXd input_weights;   // A, m x p
  Eigen::VectorXd hidden_bias;     // c, length p
  Eigen::VectorXd output_weights;  // beta, length p
  double output_bias = 0.0;        // d

  Eigen::Index inputs() const noexcept { return input_weights.rows(); }
  Eigen::Index hidden() const noexcept { return input_weights.cols(); }

  /// Throws ErrorKind::kShape on inconsistent dimensions and
  /// ErrorKind::kDomain on non-finite entries.
  void validate() const;
};

struct OutputMoments {
  double mean = 0.0;
  double variance = 0.0;
  /// Set when a slightly negative variance from rounding was clamped to 0.
  bool variance_clamped = false;
};

/// Law of W = A^T V + c: N(A^T lambda + c, A^T Lambda A), with the
/// covariance symmetrized as (S + S^T) / 2.
GaussianDist hidden_preactivation(const GaussianDist& input, const MlpModel& model);

/// E Y = beta^T gamma + d and Var Y = beta^T Gamma beta, where (gamma, Gamma)
/// are the rectified moments of W. Both sums are compensated and taken in
/// fixed index order. A variance in [-1e-12 |beta|^2 tr(Gamma), 0) is
/// clamped to 0; anything more negative raises ErrorKind::kNumerical.
OutputMoments output_moments(const GaussianDist& input, const MlpModel& model);

/// Same as above when the rectified moments are already available.
OutputMoments output_moments(const RectifiedMoments& hidden, const MlpModel& model);

/// Point evaluation beta^T max(A^T v + c, 0) + d. Uses the same summation
/// order as output_moments, so a deterministic input reproduces its mean
/// bit for bit.
double forward(const Eigen::Ref<const Eigen::VectorXd>& v, const MlpModel& model);

}  // namespace reluprop
