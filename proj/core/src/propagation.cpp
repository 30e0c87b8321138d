#include "reluprop/propagation.hpp"

#include <cmath>
#include <string>

#include "reluprop/error.hpp"
#include "summation.hpp"

namespace reluprop {

namespace {

// (A^T v)_j + c_j, summed over inputs in ascending order.
double hidden_unit(const MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& v,
                   Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < model.inputs(); ++k) {
    acc += model.input_weights(k, j) * v(k);
  }
  return acc + model.hidden_bias(j);
}

void require_input_dim(Eigen::Index got, const MlpModel& model) {
  if (got != model.inputs()) {
    fail(ErrorKind::kShape,
         "input has dimension " + std::to_string(got) + ", model expects " +
             std::to_string(model.inputs()),
         "m");
  }
}

}  // namespace

void MlpModel::validate() const {
  if (inputs() < 1 || hidden() < 1) {
    fail(ErrorKind::kShape, "model needs m >= 1 and p >= 1", "A");
  }
  if (hidden_bias.size() != hidden()) {
    fail(ErrorKind::kShape, "c must have length p = " + std::to_string(hidden()), "c");
  }
  if (output_weights.size() != hidden()) {
    fail(ErrorKind::kShape, "beta must have length p = " + std::to_string(hidden()), "beta");
  }
  if (!input_weights.allFinite()) fail(ErrorKind::kDomain, "A has non-finite entries", "A");
  if (!hidden_bias.allFinite()) fail(ErrorKind::kDomain, "c has non-finite entries", "c");
  if (!output_weights.allFinite()) {
    fail(ErrorKind::kDomain, "beta has non-finite entries", "beta");
  }
  if (!std::isfinite(output_bias)) fail(ErrorKind::kDomain, "d is not finite", "d");
}

GaussianDist hidden_preactivation(const GaussianDist& input, const MlpModel& model) {
  model.validate();
  require_input_dim(input.dim(), model);

  Eigen::VectorXd mean(model.hidden());
  for (Eigen::Index j = 0; j < model.hidden(); ++j) {
    mean(j) = hidden_unit(model, input.mean(), j);
  }
  const Eigen::MatrixXd& a = model.input_weights;
  const Eigen::MatrixXd s = a.transpose() * input.cov() * a;
  Eigen::MatrixXd cov = 0.5 * (s + s.transpose());
  return GaussianDist(std::move(mean), std::move(cov));
}

OutputMoments output_moments(const RectifiedMoments& hidden, const MlpModel& model) {
  const Eigen::Index p = model.hidden();
  if (hidden.mean.size() != p || hidden.cov.rows() != p || hidden.cov.cols() != p) {
    fail(ErrorKind::kShape, "rectified moments do not match the hidden layer size", "p");
  }
  const Eigen::VectorXd& beta = model.output_weights;

  detail::NeumaierSum mean;
  for (Eigen::Index j = 0; j < p; ++j) mean.add(beta(j) * hidden.mean(j));

  detail::NeumaierSum variance;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      variance.add(beta(i) * hidden.cov(i, j) * beta(j));
    }
  }

  OutputMoments out;
  out.mean = mean.value() + model.output_bias;
  out.variance = variance.value();
  if (out.variance < 0.0) {
    const double slack = 1e-12 * beta.squaredNorm() * std::fabs(hidden.cov.trace());
    if (out.variance < -slack) {
      fail(ErrorKind::kNumerical,
           "output variance is negative beyond rounding: " + std::to_string(out.variance));
    }
    out.variance = 0.0;
    out.variance_clamped = true;
  }
  return out;
}

OutputMoments output_moments(const GaussianDist& input, const MlpModel& model) {
  return output_moments(rectify(hidden_preactivation(input, model)), model);
}

double forward(const Eigen::Ref<const Eigen::VectorXd>& v, const MlpModel& model) {
  require_input_dim(v.size(), model);
  detail::NeumaierSum y;
  for (Eigen::Index j = 0; j < model.hidden(); ++j) {
    const double w = hidden_unit(model, v, j);
    y.add(model.output_weights(j) * (w > 0.0 ? w : 0.0));
  }
  return y.value() + model.output_bias;
}

}  // namespace reluprop
