#include "reluprop/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "reluprop/error.hpp"
#include "reluprop/philox.hpp"
#include "summation.hpp"

namespace reluprop {

namespace {

// Count, mean and central moment sums M2..M4 of one block of values.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments block_moments(std::span<const double> y) {
  Moments out;
  out.n = static_cast<double>(y.size());
  if (y.empty()) return out;

  detail::NeumaierSum sum;
  for (double v : y) sum.add(v);
  double mean = sum.value() / out.n;
  detail::NeumaierSum residual;
  for (double v : y) residual.add(v - mean);
  mean += residual.value() / out.n;

  detail::NeumaierSum s2, s3, s4;
  for (double v : y) {
    const double d = v - mean;
    const double d2 = d * d;
    s2.add(d2);
    s3.add(d2 * d);
    s4.add(d2 * d2);
  }
  out.mean = mean;
  out.m2 = s2.value();
  out.m3 = s3.value();
  out.m4 = s4.value();
  return out;
}

// Pebay (2008) pairwise update of central moment sums.
Moments merge(const Moments& a, const Moments& b) {
  if (a.n == 0.0) return b;
  if (b.n == 0.0) return a;
  Moments out;
  const double n = a.n + b.n;
  const double delta = b.mean - a.mean;
  const double d_n = delta / n;
  const double d_n2 = d_n * d_n;
  const double term = delta * d_n * a.n * b.n;
  out.n = n;
  out.mean = a.mean + d_n * b.n;
  out.m2 = a.m2 + b.m2 + term;
  out.m3 = a.m3 + b.m3 + term * d_n * (a.n - b.n) + 3.0 * d_n * (a.n * b.m2 - b.n * a.m2);
  out.m4 = a.m4 + b.m4 + term * d_n2 * (a.n * a.n - a.n * b.n + b.n * b.n) +
           6.0 * d_n2 * (a.n * a.n * b.m2 + b.n * b.n * a.m2) +
           4.0 * d_n * (a.n * b.m3 - b.n * a.m3);
  return out;
}

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs body(chunk) for every chunk index on a small pool. The first
// exception thrown by any worker is rethrown on the caller's thread.
void for_each_chunk(std::uint64_t chunks, unsigned threads,
                    const std::function<void(std::uint64_t)>& body) {
  const auto workers = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(chunks, 1)));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t c = next++; c < chunks; c = next++) {
        try {
          body(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = chunks;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t chunk_count(const McConfig& cfg) {
  return (cfg.n_samples + cfg.chunk_size - 1) / cfg.chunk_size;
}

std::uint64_t chunk_length(const McConfig& cfg, std::uint64_t chunk) {
  const std::uint64_t begin = chunk * cfg.chunk_size;
  return std::min<std::uint64_t>(cfg.chunk_size, cfg.n_samples - begin);
}

}  // namespace

void McConfig::validate() const {
  if (n_samples < 2) {
    fail(ErrorKind::kConfig, "n_samples must be >= 2, got " + std::to_string(n_samples), "n");
  }
  if (chunk_size < 1) fail(ErrorKind::kConfig, "chunk_size must be >= 1", "chunk_size");
}

GaussianSampler::GaussianSampler(const GaussianDist& dist) : mean_(dist.mean()) {
  const Eigen::Index m = dist.dim();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(dist.cov());
  if (ldlt.info() != Eigen::Success) {
    fail(ErrorKind::kNumerical, "LDL^T factorization of the covariance failed", "cov");
  }
  const Eigen::VectorXd pivots = ldlt.vectorD();
  const double largest = std::max(pivots.maxCoeff(), 0.0);
  Eigen::VectorXd scale(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    // Pivots at rounding level relative to the largest are null directions.
    scale(i) = pivots(i) > 1e-14 * largest ? std::sqrt(pivots(i)) : 0.0;
  }
  const Eigen::MatrixXd lower = ldlt.matrixL();
  factor_ = ldlt.transpositionsP().transpose() * (lower * scale.asDiagonal());
}

void GaussianSampler::sample_chunk(std::uint64_t seed, std::uint64_t chunk,
                                   Eigen::Ref<Eigen::MatrixXd> out) const {
  const Eigen::Index m = dim();
  if (out.rows() != m) fail(ErrorKind::kShape, "sample buffer has the wrong number of rows");
  NormalStream stream(seed, chunk);
  Eigen::VectorXd z(m);
  for (Eigen::Index s = 0; s < out.cols(); ++s) {
    for (Eigen::Index k = 0; k < m; ++k) z(k) = stream.normal();
    for (Eigen::Index i = 0; i < m; ++i) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) acc += factor_(i, k) * z(k);
      out(i, s) = mean_(i) + acc;
    }
  }
}

Eigen::MatrixXd sample_gaussian(const GaussianDist& dist, const McConfig& cfg) {
  cfg.validate();
  const GaussianSampler sampler(dist);
  Eigen::MatrixXd out(dist.dim(), static_cast<Eigen::Index>(cfg.n_samples));
  for_each_chunk(chunk_count(cfg), cfg.threads, [&](std::uint64_t c) {
    const auto begin = static_cast<Eigen::Index>(c * cfg.chunk_size);
    const auto len = static_cast<Eigen::Index>(chunk_length(cfg, c));
    sampler.sample_chunk(cfg.seed, c, out.middleCols(begin, len));
  });
  return out;
}

McReport mc_output_moments(const GaussianDist& dist, const MlpModel& model, const McConfig& cfg) {
  cfg.validate();
  model.validate();
  if (dist.dim() != model.inputs()) {
    fail(ErrorKind::kShape, "distribution dimension does not match the model input size", "m");
  }
  const GaussianSampler sampler(dist);
  const std::uint64_t chunks = chunk_count(cfg);
  std::vector<Moments> per_chunk(chunks);

  for_each_chunk(chunks, cfg.threads, [&](std::uint64_t c) {
    const auto len = static_cast<Eigen::Index>(chunk_length(cfg, c));
    Eigen::MatrixXd v(dist.dim(), len);
    sampler.sample_chunk(cfg.seed, c, v);
    std::vector<double> y(static_cast<std::size_t>(len));
    for (Eigen::Index s = 0; s < len; ++s) y[static_cast<std::size_t>(s)] = forward(v.col(s), model);
    per_chunk[c] = block_moments(y);
  });

  Moments total;
  for (const Moments& m : per_chunk) total = merge(total, m);

  const double n = total.n;
  McReport report;
  report.n = cfg.n_samples;
  report.seed = cfg.seed;
  report.emp_mean = total.mean;
  report.emp_variance = std::max(total.m2 / (n - 1.0), 0.0);
  report.se_mean = std::sqrt(report.emp_variance / n);
  const double fourth = total.m4 / n;
  const double s2 = report.emp_variance;
  report.se_variance = std::sqrt(std::max((fourth - s2 * s2 * (n - 3.0) / (n - 1.0)) / n, 0.0));
  return report;
}

McComparison compare(const OutputMoments& analytic, const McReport& mc, double z_threshold) {
  const auto z_score = [](double diff, double se) {
    if (diff == 0.0) return 0.0;
    if (se > 0.0) return diff / se;
    return diff > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  };
  McComparison out;
  out.diff_mean = mc.emp_mean - analytic.mean;
  out.diff_variance = mc.emp_variance - analytic.variance;
  out.z_mean = z_score(out.diff_mean, mc.se_mean);
  out.z_variance = z_score(out.diff_variance, mc.se_variance);
  out.pass = std::fabs(out.z_mean) <= z_threshold && std::fabs(out.z_variance) <= z_threshold;
  return out;
}

std::optional<LineFit> fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto count = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
    mx += std::log10(x[i]);
    my += std::log10(y[i]);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log10(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log10(y[i]) - my);
  }
  if (sxx == 0.0) return std::nullopt;
  const double slope = sxy / sxx;
  return LineFit{slope, my - slope * mx};
}

ConvergenceStudy convergence_study(std::span<const StudyCase> cases,
                                   std::span<const std::uint64_t> n_grid, const McConfig& cfg) {
  if (cases.empty()) fail(ErrorKind::kConfig, "convergence study needs at least one case", "cases");
  std::vector<std::uint64_t> grid(n_grid.begin(), n_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 2) {
    fail(ErrorKind::kConfig, "convergence study needs at least two distinct grid points", "grid");
  }

  std::vector<OutputMoments> analytic;
  analytic.reserve(cases.size());
  for (const StudyCase& c : cases) analytic.push_back(output_moments(c.dist, c.model));

  ConvergenceStudy study;
  std::vector<double> ns, rm, rv;
  for (std::uint64_t n : grid) {
    double sq_mean = 0.0, sq_var = 0.0;
    for (std::size_t k = 0; k < cases.size(); ++k) {
      McConfig run = cfg;
      run.n_samples = n;
      run.seed = derive_seed(cfg.seed, k, n);
      const McReport mc = mc_output_moments(cases[k].dist, cases[k].model, run);
      const double dm = mc.emp_mean - analytic[k].mean;
      const double dv = mc.emp_variance - analytic[k].variance;
      sq_mean += dm * dm;
      sq_var += dv * dv;
    }
    const auto count = static_cast<double>(cases.size());
    study.rows.push_back({n, std::sqrt(sq_mean / count), std::sqrt(sq_var / count)});
    ns.push_back(static_cast<double>(n));
    rm.push_back(study.rows.back().rmse_mean);
    rv.push_back(study.rows.back().rmse_variance);
  }
  study.fit_mean = fit_loglog(ns, rm);
  study.fit_variance = fit_loglog(ns, rv);
  return study;
}

}  // namespace reluprop
