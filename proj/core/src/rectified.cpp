#include "reluprop/rectified.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "double_double.hpp"
#include "gaussian_detail.hpp"
#include "reluprop/error.hpp"

namespace reluprop {

namespace {

using detail::DoubleDouble;
using detail::product;
using detail::two_prod;

constexpr double kNullEventProbability = 1e-300;

// The closed forms are sums of products that cancel by several orders of
// magnitude when the standardized means are negative. They are accumulated
// in double-double so only the rounding of the Gaussian kernel values
// themselves remains.

DoubleDouble mean_dd(const MarginalParams& m) {
  m.validate();
  if (m.deterministic()) return {m.mu > 0.0 ? m.mu : 0.0, 0.0};
  const double t = m.standardized();
  return product(m.sigma, std_pdf(t)) + product(m.mu, std_cdf(t));
}

DoubleDouble second_moment_dd(const MarginalParams& m) {
  m.validate();
  if (m.deterministic()) return m.mu > 0.0 ? two_prod(m.mu, m.mu) : DoubleDouble{};
  const double t = m.standardized();
  return product(m.mu, m.sigma, std_pdf(t)) +
         (two_prod(m.mu, m.mu) + two_prod(m.sigma, m.sigma)) * std_cdf(t);
}

// Both marginals non-deterministic, |rho| < 1.
DoubleDouble cross_general_dd(const PairParams& p) {
  const double ti = p.i.standardized();
  const double tj = p.j.standardized();
  const double rho = p.rho.value();
  const DoubleDouble cdf2 = detail::bvn_cdf_dd(ti, tj, p.rho);
  const DoubleDouble pdf2 = detail::bvn_pdf_dd(ti, tj, p.rho);
  const DoubleDouble one_minus_rho2 = DoubleDouble{1.0, 0.0} - two_prod(rho, rho);
  return product(p.j.mu, p.i.sigma, std_pdf(ti), std_cdf(p.omega_ji())) +
         product(p.i.mu, p.j.sigma, std_pdf(tj), std_cdf(p.omega_ij())) +
         two_prod(p.i.sigma, p.j.sigma) * one_minus_rho2 * pdf2 +
         (two_prod(p.i.mu, p.j.mu) + product(rho, p.i.sigma, p.j.sigma)) * cdf2;
}

// Both marginals non-deterministic, |rho| treated as 1.
DoubleDouble cross_degenerate_dd(const PairParams& p) {
  const double mi = p.i.mu;
  const double mj = p.j.mu;
  const double si = p.i.sigma;
  const double sj = p.j.sigma;
  const double ti = p.i.standardized();
  const double tj = p.j.standardized();
  const DoubleDouble a = product(mi, sj, std_pdf(tj));
  const DoubleDouble b = product(mj, si, std_pdf(ti));

  if (p.rho.value() > 0.0) {
    const double h = heaviside(mi * sj - mj * si);
    return a * h + b * (1.0 - h) +
           (two_prod(mi, mj) + two_prod(si, sj)) * std_cdf(std::min(ti, tj));
  }
  const double h = heaviside(mi * sj + mj * si);
  const DoubleDouble lower = detail::bvn_cdf_dd(ti, tj, Correlation(-1.0));
  return (a + b) * h + (two_prod(mi, mj) - two_prod(si, sj)) * lower;
}

DoubleDouble cross_moment_dd(const PairParams& p) {
  p.i.validate();
  p.j.validate();
  const bool det_i = p.i.deterministic();
  const bool det_j = p.j.deterministic();

  if (det_i && det_j) {
    return (p.i.mu > 0.0 && p.j.mu > 0.0) ? two_prod(p.i.mu, p.j.mu) : DoubleDouble{};
  }
  if (det_i) return p.i.mu > 0.0 ? mean_dd(p.j) * p.i.mu : DoubleDouble{};
  if (det_j) return p.j.mu > 0.0 ? mean_dd(p.i) * p.j.mu : DoubleDouble{};
  if (p.rho.degenerate()) return cross_degenerate_dd(p);
  return cross_general_dd(p);
}

void require_regular(const PairParams& p, const char* what) {
  p.i.validate();
  p.j.validate();
  if (p.i.deterministic() || p.j.deterministic()) {
    fail(ErrorKind::kDomain,
         std::string(what) + ": requires sigma above tolerance for both coordinates");
  }
}

}  // namespace

void MarginalParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(sigma)) {
    fail(ErrorKind::kDomain, "marginal parameters must be finite");
  }
  if (sigma < 0.0) fail(ErrorKind::kDomain, "sigma must be non-negative");
}

bool MarginalParams::deterministic() const noexcept {
  return sigma <= sigma_tolerance(mu);
}

double sigma_tolerance(double mu) noexcept {
  return 1e-12 * std::max(1.0, std::fabs(mu));
}

double PairParams::omega_ij() const {
  require_regular(*this, "omega_ij");
  if (std::fabs(rho.value()) >= 1.0) {
    fail(ErrorKind::kDegenerateCorrelation, "omega_ij: undefined for |rho| = 1");
  }
  const double r = rho.value();
  return (i.standardized() - r * j.standardized()) / std::sqrt((1.0 - r) * (1.0 + r));
}

double PairParams::omega_ji() const {
  return PairParams{j, i, rho}.omega_ij();
}

double heaviside(double x) noexcept {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return 0.0;
  return 0.5;
}

double relu_mean(const MarginalParams& m) { return mean_dd(m).value(); }

double relu_second_moment(const MarginalParams& m) { return second_moment_dd(m).value(); }

double orthant_prob(const PairParams& p) {
  require_regular(p, "orthant_prob");
  return bvn_cdf(p.i.standardized(), p.j.standardized(), p.rho);
}

double truncated_cross_moment(const PairParams& p) {
  require_regular(p, "truncated_cross_moment");
  if (p.rho.degenerate()) {
    fail(ErrorKind::kDegenerateCorrelation, "truncated_cross_moment: requires |rho| < 1");
  }
  const double ti = p.i.standardized();
  const double tj = p.j.standardized();
  const double rho = p.rho.value();
  // Kept in double-double: the ratio below cancels against mu_i mu_j + rho
  // sigma_i sigma_j, so it must use the same orthant probability as the
  // untruncated cross moment.
  const DoubleDouble prob = detail::bvn_cdf_dd(ti, tj, p.rho);
  if (!(prob.value() >= kNullEventProbability)) {
    fail(ErrorKind::kNullEvent, "truncated_cross_moment: orthant probability vanishes (" +
                                    std::to_string(prob.value()) + ")");
  }
  const DoubleDouble one_minus_rho2 = DoubleDouble{1.0, 0.0} - two_prod(rho, rho);
  const DoubleDouble ratio =
      (product(p.j.mu, p.i.sigma, std_pdf(ti), std_cdf(p.omega_ji())) +
       product(p.i.mu, p.j.sigma, std_pdf(tj), std_cdf(p.omega_ij())) +
       two_prod(p.i.sigma, p.j.sigma) * one_minus_rho2 * detail::bvn_pdf_dd(ti, tj, p.rho)) /
      prob;
  return (two_prod(p.i.mu, p.j.mu) + product(rho, p.i.sigma, p.j.sigma) + ratio).value();
}

double relu_cross_moment(const PairParams& p) { return cross_moment_dd(p).value(); }

RectifiedMoments rectify(const GaussianDist& w) {
  const Eigen::Index p = w.dim();
  const Eigen::VectorXd& mu = w.mean();
  const Eigen::MatrixXd& sigma2 = w.cov();

  std::vector<MarginalParams> marginals(static_cast<std::size_t>(p));
  std::vector<DoubleDouble> means(static_cast<std::size_t>(p));
  RectifiedMoments out{Eigen::VectorXd(p), Eigen::MatrixXd(p, p)};

  for (Eigen::Index i = 0; i < p; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    marginals[ui] = {mu(i), std::sqrt(std::max(sigma2(i, i), 0.0))};
    means[ui] = mean_dd(marginals[ui]);
    out.mean(i) = means[ui].value();

    double var = (second_moment_dd(marginals[ui]) - means[ui] * means[ui]).value();
    if (var < 0.0) {
      const double slack = 1e-14 * (mu(i) * mu(i) + sigma2(i, i));
      if (var < -slack) {
        fail(ErrorKind::kNumerical,
             "negative rectified variance at hidden unit " + std::to_string(i));
      }
      var = 0.0;
    }
    out.cov(i, i) = var;
  }

  for (Eigen::Index i = 0; i < p; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const MarginalParams& mi = marginals[ui];
      const MarginalParams& mj = marginals[uj];
      double rho = 0.0;
      if (!mi.deterministic() && !mj.deterministic()) {
        rho = sigma2(i, j) / (mi.sigma * mj.sigma);
      }
      const PairParams pair{mi, mj, Correlation::clamped(rho)};
      const double cov = (cross_moment_dd(pair) - means[ui] * means[uj]).value();
      out.cov(i, j) = cov;
      out.cov(j, i) = cov;
    }
  }
  return out;
}

}  // namespace reluprop
