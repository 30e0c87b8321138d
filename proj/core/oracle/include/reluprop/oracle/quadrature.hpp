#pragma once

// Reference values by adaptive Gauss-Kronrod quadrature (Boost.Math). These
// integrate densities directly and share no code with the closed forms, so
// they serve as independent oracles in tests and in `reluprop selftest`.
//
// Infinite ranges are cut where the Gaussian tail falls below ~1e-37 of the
// peak, far under every tolerance they are used with.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace reluprop::oracle {

inline constexpr double kTailCut = 13.0;

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Adaptive 31-point Gauss-Kronrod on [a, b].
template <class F>
double integrate(F f, double a, double b, double rel_tol = 1e-14) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol);
}

/// Phi_2(x, y; rho) = int_{u < x} phi(u) int_{v < (y - rho u)/s} phi(v) dv du,
/// s = sqrt(1 - rho^2), both levels by quadrature. Requires |rho| < 1.
inline double bvn_cdf(double x, double y, double rho) {
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  const double lo = -kTailCut;
  if (x <= lo) return 0.0;
  auto inner = [&](double u) {
    const double ub = (y - rho * u) / s;
    if (ub <= lo) return 0.0;
    return integrate(normal_pdf, lo, std::min(ub, kTailCut));
  };
  return integrate([&](double u) { return normal_pdf(u) * inner(u); }, lo, std::min(x, kTailCut));
}

/// E[max(W, 0)^power] for W ~ N(mu, sigma^2), sigma > 0, power in {1, 2}.
inline double relu_moment(double mu, double sigma, int power) {
  const double a = -mu / sigma;  // W > 0 iff z > a
  auto f = [&](double z) {
    const double w = mu + sigma * z;
    return (power == 1 ? w : w * w) * normal_pdf(z);
  };
  return integrate(f, std::max(a, -kTailCut), std::max(a, 0.0) + kTailCut);
}

/// E[max(Wi, 0) max(Wj, 0)] for a bivariate normal with |rho| < 1. Writes
/// Zj = rho Zi + s U with U independent of Zi and integrates over (Zi, U).
inline double relu_cross_moment(double mu_i, double sigma_i, double mu_j, double sigma_j,
                                double rho) {
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  const double a = -mu_i / sigma_i;
  auto inner = [&](double z) {
    // Wj = mu_j + sigma_j (rho z + s u) > 0 iff u > lower.
    const double base = mu_j + sigma_j * rho * z;
    const double slope = sigma_j * s;
    const double lower = -base / slope;
    if (lower >= kTailCut) return 0.0;
    auto g = [&](double u) { return (base + slope * u) * normal_pdf(u); };
    return integrate(g, std::max(lower, -kTailCut), std::max(lower, 0.0) + kTailCut);
  };
  auto outer = [&](double z) { return (mu_i + sigma_i * z) * normal_pdf(z) * inner(z); };
  return integrate(outer, std::max(a, -kTailCut), std::max(a, 0.0) + kTailCut);
}

}  // namespace reluprop::oracle
