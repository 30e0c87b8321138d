#include "selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "reluprop/oracle/quadrature.hpp"
#include "reluprop/philox.hpp"
#include "reluprop/rectified.hpp"

namespace reluprop::cli {

namespace {

// NaN-propagating max, so a NaN error can never look like a pass.
double worse(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::infinity();
  return std::max(a, b);
}

double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

SelftestRow kernel_grid(const SelftestKernels& k) {
  SelftestRow row{"bvn_cdf vs 2-D quadrature (abs)", false, 0.0, 1e-10, 0};
  const double pts[] = {-3.0, -1.0, 0.0, 1.0, 3.0};
  const double rhos[] = {-0.99, -0.5, 0.0, 0.5, 0.99};
  for (double x : pts) {
    for (double y : pts) {
      if (y < x) continue;  // Phi_2 is symmetric; half the grid suffices
      for (double r : rhos) {
        const double err = std::fabs(k.bvn_cdf(x, y, Correlation(r)) - oracle::bvn_cdf(x, y, r));
        row.worst = worse(row.worst, err);
        ++row.cases;
      }
    }
  }
  const double third = std::fabs(k.bvn_cdf(0.0, 0.0, Correlation(0.5)) - 1.0 / 3.0);
  row.worst = worse(row.worst, third);
  ++row.cases;
  return row;
}

SelftestRow relu_moments() {
  SelftestRow row{"relu mean/second moment vs quadrature (rel)", false, 0.0, 1e-10, 0};
  for (double sigma : {0.1, 1.0, 10.0}) {
    for (double t = -6.0; t <= 6.0; t += 1.5) {
      const MarginalParams m{t * sigma, sigma};
      row.worst = worse(row.worst, rel_err(relu_mean(m), oracle::relu_moment(m.mu, sigma, 1)));
      row.worst =
          worse(row.worst, rel_err(relu_second_moment(m), oracle::relu_moment(m.mu, sigma, 2)));
      row.cases += 2;
    }
  }
  return row;
}

SelftestRow factorization() {
  SelftestRow row{"cross moment at rho = 0 vs product of means (rel)", false, 0.0, 1e-13, 0};
  for (double sigma : {0.1, 1.0, 10.0}) {
    for (double ti = -6.0; ti <= 6.0; ti += 1.0) {
      for (double tj = -6.0; tj <= 6.0; tj += 1.0) {
        const MarginalParams a{ti * sigma, sigma};
        const MarginalParams b{tj * sigma, sigma};
        const double want = relu_mean(a) * relu_mean(b);
        row.worst = worse(row.worst, rel_err(relu_cross_moment({a, b, Correlation(0.0)}), want));
        ++row.cases;
      }
    }
  }
  return row;
}

SelftestRow corner_continuity() {
  SelftestRow row{"rho = +-1 and sigma = 0 limits (abs)", false, 0.0, 1e-5, 0};
  NormalStream rng(20240601, 0);
  for (int n = 0; n < 200; ++n) {
    const double si = std::exp(rng.normal());
    const double sj = std::exp(rng.normal());
    const MarginalParams a{2.0 * si * rng.normal(), si};
    const MarginalParams b{2.0 * sj * rng.normal(), sj};
    for (double r : {1.0, -1.0}) {
      const double edge = relu_cross_moment({a, b, Correlation(r)});
      const double near = relu_cross_moment({a, b, Correlation(r * (1.0 - 1e-9))});
      row.worst = worse(row.worst, std::fabs(edge - near));
      ++row.cases;
    }
    // A deterministic coordinate against a nearly deterministic one.
    const MarginalParams point{a.mu, 0.0};
    const MarginalParams narrow{a.mu, 1e-9};
    row.worst = worse(row.worst, std::fabs(relu_cross_moment({point, b, Correlation(0.3)}) -
                                              relu_cross_moment({narrow, b, Correlation(0.3)})));
    ++row.cases;
  }
  // The tie mu_i sigma_j = mu_j sigma_i at rho = 1, where H(0) = 1/2 applies.
  const MarginalParams a{1.0, 2.0};
  const MarginalParams b{0.5, 1.0};
  row.worst = worse(row.worst, std::fabs(relu_cross_moment({a, b, Correlation(1.0)}) -
                                            relu_cross_moment({a, b, Correlation(1.0 - 1e-9)})));
  ++row.cases;
  return row;
}

SelftestRow total_expectation(const SelftestKernels& k) {
  SelftestRow row{"truncated moment x orthant probability (rel)", false, 0.0, 1e-12, 0};
  NormalStream rng(20240602, 0);
  for (int n = 0; n < 100; ++n) {
    const double si = std::exp(std::log(10.0) * (2.0 * rng.uniform() - 1.0));
    const double sj = std::exp(std::log(10.0) * (2.0 * rng.uniform() - 1.0));
    const double ti = 6.0 * rng.uniform() - 3.0;
    const double tj = 6.0 * rng.uniform() - 3.0;
    const double r = 0.999 * (2.0 * rng.uniform() - 1.0);
    const PairParams p{{ti * si, si}, {tj * sj, sj}, Correlation(r)};
    const double lhs = truncated_cross_moment(p) * k.bvn_cdf(p.i.standardized(), p.j.standardized(), p.rho);
    row.worst = worse(row.worst, rel_err(lhs, relu_cross_moment(p)));
    ++row.cases;
  }
  return row;
}

}  // namespace

std::vector<SelftestRow> run_selftest(const SelftestKernels& kernels) {
  std::vector<SelftestRow> rows;
  rows.push_back(kernel_grid(kernels));
  rows.push_back(relu_moments());
  rows.push_back(factorization());
  rows.push_back(corner_continuity());
  rows.push_back(total_expectation(kernels));
  for (auto& row : rows) row.pass = row.worst <= row.tolerance;
  return rows;
}

}  // namespace reluprop::cli
