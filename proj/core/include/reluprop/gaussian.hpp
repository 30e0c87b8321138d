#pragma once

// Scalar Gaussian kernels: univariate pdf/cdf/quantile and the standard
// bivariate normal pdf/cdf.
//
// All functions are pure and reentrant. CDFs accept +/-infinity and saturate
// exactly to 0 or 1; NaN arguments raise ErrorKind::kDomain.

#include <span>

namespace reluprop {

/// |rho| above 1 - kDegenerateRhoTol is treated as perfectly (anti)correlated.
inline constexpr double kDegenerateRhoTol = 1e-12;

/// Correlation coefficient in [-1, 1].
///
/// Values up to 1e-12 outside [-1, 1] are clamped; anything further out is
/// rejected with ErrorKind::kDomain.
class Correlation {
 public:
  explicit Correlation(double rho);

  /// Clamps any finite value into [-1, 1]. Used where rho is computed from a
  /// covariance that already passed a PSD check with a looser tolerance.
  static Correlation clamped(double rho);

  double value() const noexcept { return rho_; }

  /// True when |rho| > 1 - kDegenerateRhoTol.
  bool degenerate() const noexcept;

 private:
  struct Unchecked {};
  Correlation(double rho, Unchecked) noexcept : rho_(rho) {}

  double rho_;
};

/// erf(x) from Cody's rational Chebyshev approximations.
double erf(double x);
/// erfc(x) from Cody's rational Chebyshev approximations; accurate in the tail.
double erfc(double x);

/// Standard normal density.
double std_pdf(double x);
/// Standard normal distribution function.
double std_cdf(double x);
/// Inverse of std_cdf (Wichura AS241). p must lie in (0, 1).
double std_quantile(double p);

/// Standard bivariate normal density with correlation rho; |rho| < 1.
double bvn_pdf(double x, double y, Correlation rho);

/// P(U <= x, V <= y) for standard bivariate normal (U, V) with correlation
/// rho. Genz's variant of the Drezner-Wesolowsky reduction to a single
/// integral, evaluated with 6/12/20-point Gauss-Legendre rules. For rho < 0
/// in the joint lower tail, where that sum cancels, the density is instead
/// integrated over the correlation from -1 (64 points), which keeps relative
/// accuracy down to ~1e-30. Degenerate correlations return the exact
/// |rho| = 1 limits.
double bvn_cdf(double x, double y, Correlation rho);

/// Gauss-Legendre nodes and weights on [-1, 1] for the orders used by
/// bvn_cdf (6, 12 and 20). Other orders raise ErrorKind::kDomain.
struct GaussLegendreRule {
  std::span<const double> nodes;
  std::span<const double> weights;
};
GaussLegendreRule gauss_legendre(int order);

}  // namespace reluprop
