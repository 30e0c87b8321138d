#pragma once

// Seeded Monte Carlo estimation of the output moments, used to validate the
// closed-form propagation.
//
// Samples are produced in chunks of McConfig::chunk_size. Chunk c draws its
// normals from NormalStream(seed, c), and per-chunk statistics are merged in
// chunk order, so results are bitwise independent of the thread count.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "reluprop/distribution.hpp"
#include "reluprop/propagation.hpp"

namespace reluprop {

struct McConfig {
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 65536;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 1;

  /// Throws ErrorKind::kConfig unless n_samples >= 2 and chunk_size >= 1.
  void validate() const;
};

struct McReport {
  double emp_mean = 0.0;
  double emp_variance = 0.0;  // unbiased (n - 1 denominator)
  double se_mean = 0.0;       // sqrt(emp_variance / n)
  double se_variance = 0.0;   // from the sample fourth central moment
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

/// Draws from N(mean, cov) as mean + F z with F F^T = cov, F taken from a
/// pivoted LDL^T factorization. Directions with non-positive pivots are
/// dropped, so rank-deficient covariances are handled.
class GaussianSampler {
 public:
  explicit GaussianSampler(const GaussianDist& dist);

  Eigen::Index dim() const noexcept { return mean_.size(); }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }

  /// Fills out.cols() samples of chunk `chunk` (one sample per column).
  void sample_chunk(std::uint64_t seed, std::uint64_t chunk, Eigen::Ref<Eigen::MatrixXd> out) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd factor_;
};

/// All cfg.n_samples draws as a dim x n matrix.
Eigen::MatrixXd sample_gaussian(const GaussianDist& dist, const McConfig& cfg);

/// Pushes cfg.n_samples draws through forward() and reports the empirical
/// moments of Y.
McReport mc_output_moments(const GaussianDist& dist, const MlpModel& model, const McConfig& cfg);

/// Monte Carlo minus analytic, and the same difference in units of the
/// Monte Carlo standard error. A zero difference has z = 0 even when the
/// standard error is 0 (deterministic input).
struct McComparison {
  double diff_mean = 0.0;
  double diff_variance = 0.0;
  double z_mean = 0.0;
  double z_variance = 0.0;
  bool pass = false;  // both |z| <= threshold
};

McComparison compare(const OutputMoments& analytic, const McReport& mc, double z_threshold = 4.0);

struct ConvergenceRow {
  std::uint64_t n = 0;
  double rmse_mean = 0.0;
  double rmse_variance = 0.0;
};

/// log10(rmse) = slope * log10(n) + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;  // ascending in n
  /// Empty when any RMSE is zero (the fit is undefined).
  std::optional<LineFit> fit_mean;
  std::optional<LineFit> fit_variance;
};

struct StudyCase {
  GaussianDist dist;
  MlpModel model;
};

/// Ordinary least squares of log10(y) on log10(x). Empty when fewer than two
/// points, when any y <= 0, or when all x coincide.
std::optional<LineFit> fit_loglog(std::span<const double> x, std::span<const double> y);

/// For each n in the grid: RMSE over cases between the Monte Carlo and
/// analytic mean and variance. Every (case, n) pair draws from its own seed
/// derive_seed(cfg.seed, case index, n); cfg.n_samples is ignored.
ConvergenceStudy convergence_study(std::span<const StudyCase> cases,
                                   std::span<const std::uint64_t> n_grid, const McConfig& cfg);

}  // namespace reluprop
