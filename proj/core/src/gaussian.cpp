#include "reluprop/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "gaussian_detail.hpp"
#include "reluprop/error.hpp"

namespace reluprop {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;
constexpr double kInvSqrt2 = 0.707106781186547524400844362104849039;
constexpr double kSqrt2Pi = 2.50662827463100050241576528481104525;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_not_nan(double x, const char* what) {
  if (std::isnan(x)) fail(ErrorKind::kDomain, std::string(what) + ": NaN argument");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    fail(ErrorKind::kDomain, std::string(what) + ": non-finite argument");
  }
}

// W. J. Cody, "Rational Chebyshev approximations for the error function",
// Math. Comp. 1969; coefficients from the netlib specfun CALERF routine.
// Returns erf(x) when complement is false, erfc(x) otherwise. A caller that
// knows exp(-x^2) more accurately than x itself can pass it as gauss.
double calerf(double x, bool complement, const double* gauss = nullptr) {
  static constexpr std::array<double, 5> a = {
      3.16112374387056560e00, 1.13864154151050156e02, 3.77485237685302021e02,
      3.20937758913846947e03, 1.85777706184603153e-1};
  static constexpr std::array<double, 4> b = {
      2.36012909523441209e01, 2.44024637934444173e02, 1.28261652607737228e03,
      2.84423683343917062e03};
  static constexpr std::array<double, 9> c = {
      5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
      2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
      2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8};
  static constexpr std::array<double, 8> d = {
      1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
      1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
      3.43936767414372164e03, 1.23033935480374942e03};
  static constexpr std::array<double, 6> p = {
      3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
      1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2};
  static constexpr std::array<double, 5> q = {
      2.56852019228982242e00, 1.87295284992346047e00, 5.27905102951428412e-1,
      6.05183413124413191e-2, 2.33520497626869185e-3};
  constexpr double sqrpi = 5.6418958354775628695e-1;
  constexpr double thresh = 0.46875;
  constexpr double xsmall = 1.11e-16;
  constexpr double xbig = 26.543;

  const double y = std::fabs(x);
  double result = 0.0;

  if (y <= thresh) {
    const double ysq = y > xsmall ? y * y : 0.0;
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    result = x * (xnum + a[3]) / (xden + b[3]);
    return complement ? 1.0 - result : result;
  }

  // exp(-y^2) split as exp(-ysq^2) * exp(-del) with ysq = trunc(16y)/16 so
  // that the large part of the exponent is exact.
  auto scaled_exp = [y] {
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    return std::exp(-ysq * ysq) * std::exp(-del);
  };

  if (y <= 4.0) {
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
    result *= gauss ? *gauss : scaled_exp();
  } else if (y < xbig || gauss) {
    const double ysq = 1.0 / (y * y);
    double xnum = p[5] * ysq;
    double xden = ysq;
    for (int i = 0; i < 4; ++i) {
      xnum = (xnum + p[i]) * ysq;
      xden = (xden + q[i]) * ysq;
    }
    result = ysq * (xnum + p[4]) / (xden + q[4]);
    result = (sqrpi - result) / y;
    result *= gauss ? *gauss : scaled_exp();
  }
  // result now holds erfc(|x|) for |x| > thresh.

  if (!complement) {
    result = (0.5 - result) + 0.5;
    return x < 0.0 ? -result : result;
  }
  return x < 0.0 ? 2.0 - result : result;
}

// Newton iteration on the Legendre recurrence, in long double so the
// rounded nodes and weights are correct to the last double bit.
template <int N>
struct LegendreTable {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  LegendreTable() {
    const long double pi = std::numbers::pi_v<long double>;
    for (int i = 0; i < N; ++i) {
      long double z = std::cos(pi * (i + 0.75L) / (N + 0.5L));
      long double dp = 0.0L;
      for (int iter = 0; iter < 100; ++iter) {
        long double p0 = 1.0L;
        long double p1 = z;
        for (int k = 2; k <= N; ++k) {
          const long double pk = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = N * (z * p1 - p0) / (z * z - 1.0L);
        const long double step = p1 / dp;
        z -= step;
        if (std::fabs(step) < 1e-19L) break;
      }
      nodes[i] = static_cast<double>(-z);
      weights[i] = static_cast<double>(2.0L / ((1.0L - z * z) * dp * dp));
    }
  }
};

template <int N>
const LegendreTable<N>& legendre_table() {
  static const LegendreTable<N> table;
  return table;
}

// P(U > h, V > k) for r < 0 and h + k > 0, where the probability vanishes
// at r = -1. Integrates the density over the correlation from -1 to r in the
// angle theta = asin(r'), a positive integrand, so deep tails keep their
// relative accuracy instead of being lost to cancellation.
double bvn_upper_negative_tail(double h, double k, double r) {
  const auto& rule = legendre_table<64>();
  const double lo = -std::numbers::pi / 2.0;
  const double hi = std::asin(r);
  const double half = (hi - lo) / 2.0;
  const double mid = (hi + lo) / 2.0;
  const double hs = h * h + k * k;
  const double hk = h * k;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double theta = mid + half * rule.nodes[i];
    const double c = std::cos(theta);
    sum += rule.weights[i] * std::exp(-(hs - 2.0 * hk * std::sin(theta)) / (2.0 * c * c));
  }
  return sum * half / kTwoPi;
}

// Genz (2004), BVND: P(U > h, V > k) for standard bivariate normal.
detail::DoubleDouble bvn_upper(double h, double k, double r) {
  using detail::two_prod;
  using detail::two_sum;
  const double abs_r = std::fabs(r);
  const GaussLegendreRule rule =
      gauss_legendre(abs_r < 0.3 ? 6 : (abs_r < 0.75 ? 12 : 20));
  const auto& xs = rule.nodes;
  const auto& ws = rule.weights;

  double hk = h * k;
  double bvn = 0.0;

  if (abs_r < 0.925) {
    if (r != 0.0) {
      const double hs = (h * h + k * k) / 2.0;
      const double asr = std::asin(r);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double sn = std::sin(asr * (xs[i] + 1.0) / 2.0);
        bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
      bvn *= asr / (2.0 * kTwoPi);
    }
    const detail::DoubleDouble independent = two_prod(std_cdf(-h), std_cdf(-k));
    const detail::DoubleDouble result = independent + detail::DoubleDouble{bvn, 0.0};
    // Below 1% of the independent value the sum has cancelled by two or more
    // digits; switch to the cancellation-free form.
    if (r < 0.0 && h + k > 0.0 && result.value() < 0.01 * independent.value()) {
      return {bvn_upper_negative_tail(h, k, r), 0.0};
    }
    return result;
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (abs_r < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * kSqrt2Pi * std_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double t = a * (xs[i] + 1.0);
      const double xsq = t * t;
      const double rs = std::sqrt(1.0 - xsq);
      const double asr = -(bs / xsq + hk) / 2.0;
      if (asr > -100.0) {
        bvn += a * ws[i] * std::exp(asr) *
               (std::exp(-hk * xsq / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs -
                (1.0 + c * xsq * (1.0 + d * xsq)));
      }
    }
    bvn = -bvn / kTwoPi;
  }

  if (r > 0.0) return two_sum(std_cdf(-std::max(h, k)), bvn);

  detail::DoubleDouble result{-bvn, 0.0};
  if (k > h) {
    // Difference taken in whichever tail the two CDF values are smaller.
    if (h < 0.0) {
      result = result + two_sum(std_cdf(k), -std_cdf(h));
    } else {
      result = result + two_sum(std_cdf(-h), -std_cdf(-k));
    }
  }
  return result;
}

}  // namespace

Correlation::Correlation(double rho) {
  if (!std::isfinite(rho) || std::fabs(rho) > 1.0 + 1e-12) {
    fail(ErrorKind::kDomain, "correlation outside [-1, 1]: " + std::to_string(rho));
  }
  rho_ = std::clamp(rho, -1.0, 1.0);
}

Correlation Correlation::clamped(double rho) {
  if (!std::isfinite(rho)) fail(ErrorKind::kDomain, "correlation is not finite");
  return Correlation(std::clamp(rho, -1.0, 1.0), Unchecked{});
}

bool Correlation::degenerate() const noexcept {
  return std::fabs(rho_) > 1.0 - kDegenerateRhoTol;
}

double erf(double x) {
  require_not_nan(x, "erf");
  return calerf(x, false);
}

double erfc(double x) {
  require_not_nan(x, "erfc");
  return calerf(x, true);
}

double std_pdf(double x) {
  require_finite(x, "std_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_cdf(double x) {
  require_not_nan(x, "std_cdf");
  if (x == -INFINITY) return 0.0;
  if (x == INFINITY) return 1.0;
  const double y = -x * kInvSqrt2;
  if (y > 0.46875) {
    // Rounding y costs about y^2 ulp once squared, so exp(-x^2 / 2) is split
    // on x itself: xs has few bits and (x - xs) is exact.
    const double xs = std::trunc(x * 16.0) / 16.0;
    const double gauss = std::exp(-0.5 * xs * xs) * std::exp(-0.5 * (x - xs) * (x + xs));
    return 0.5 * calerf(y, true, &gauss);
  }
  return 0.5 * calerf(y, true);
}

double std_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::kDomain, "std_quantile: probability must lie in (0, 1)");
  }
  // Wichura, Algorithm AS241, Appl. Statist. 37(3), 1988.
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

namespace detail {

DoubleDouble bvn_pdf_dd(double x, double y, Correlation rho) {
  require_finite(x, "bvn_pdf");
  require_finite(y, "bvn_pdf");
  const double r = rho.value();
  if (std::fabs(r) >= 1.0) {
    fail(ErrorKind::kDegenerateCorrelation, "bvn_pdf: density undefined for |rho| = 1");
  }
  // phi(x) * phi((y - rho x) / s) / s, which is phi(x) phi(y) when rho = 0.
  const double s = std::sqrt((1.0 - r) * (1.0 + r));
  const double z = (y - r * x) / s;
  return two_prod(std_pdf(x), std_pdf(z)) / s;
}

DoubleDouble bvn_cdf_dd(double x, double y, Correlation rho) {
  require_not_nan(x, "bvn_cdf");
  require_not_nan(y, "bvn_cdf");
  // Evaluate with x <= y so the result is exactly symmetric in (x, y).
  if (y < x) std::swap(x, y);

  if (x == -INFINITY) return {};
  if (y == INFINITY) return {std_cdf(x), 0.0};

  const double r = rho.value();
  if (rho.degenerate()) {
    if (r > 0.0) return {std_cdf(x), 0.0};
    // P(-y < U <= x)
    const DoubleDouble diff = two_sum(std_cdf(x), -std_cdf(-y));
    return diff.hi > 0.0 ? diff : DoubleDouble{};
  }
  // Rounding can push the quadrature slightly outside the Frechet bounds.
  const DoubleDouble p = bvn_upper(-x, -y, r);
  if (p.hi < 0.0) return {};
  const double cap = std_cdf(x);
  return p.value() > cap ? DoubleDouble{cap, 0.0} : p;
}

}  // namespace detail

double bvn_pdf(double x, double y, Correlation rho) {
  return detail::bvn_pdf_dd(x, y, rho).value();
}

double bvn_cdf(double x, double y, Correlation rho) {
  return detail::bvn_cdf_dd(x, y, rho).value();
}

GaussLegendreRule gauss_legendre(int order) {
  switch (order) {
    case 6: {
      const auto& t = legendre_table<6>();
      return {t.nodes, t.weights};
    }
    case 12: {
      const auto& t = legendre_table<12>();
      return {t.nodes, t.weights};
    }
    case 20: {
      const auto& t = legendre_table<20>();
      return {t.nodes, t.weights};
    }
    default:
      fail(ErrorKind::kDomain, "gauss_legendre: unsupported order " + std::to_string(order));
  }
}

}  // namespace reluprop
