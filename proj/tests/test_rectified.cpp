#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "reluprop/error.hpp"
#include "reluprop/oracle/quadrature.hpp"
#include "reluprop/philox.hpp"
#include "reluprop/rectified.hpp"

using namespace reluprop;

namespace {

double rel(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::kConfig;
}

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

}  // namespace

TEST(ReluMoments, StandardNormal) {
  // E max(Z, 0) = 1/sqrt(2 pi), E max(Z, 0)^2 = 1/2.
  EXPECT_DOUBLE_EQ(relu_mean({0.0, 1.0}), kInvSqrt2Pi);
  EXPECT_DOUBLE_EQ(relu_second_moment({0.0, 1.0}), 0.5);
}

TEST(ReluMoments, MatchQuadrature) {
  for (double sigma : {0.1, 1.0, 10.0}) {
    for (double t = -6.0; t <= 6.0; t += 0.5) {
      const MarginalParams m{t * sigma, sigma};
      EXPECT_LE(rel(relu_mean(m), oracle::relu_moment(m.mu, sigma, 1)), 1e-11) << t;
      EXPECT_LE(rel(relu_second_moment(m), oracle::relu_moment(m.mu, sigma, 2)), 1e-11) << t;
    }
  }
}

TEST(ReluMoments, DeterministicBranch) {
  EXPECT_EQ(relu_mean({2.5, 0.0}), 2.5);
  EXPECT_EQ(relu_mean({-2.5, 0.0}), 0.0);
  EXPECT_EQ(relu_second_moment({2.5, 0.0}), 6.25);
  EXPECT_EQ(relu_second_moment({-2.5, 0.0}), 0.0);
  // Below the sigma tolerance the coordinate is a point mass.
  EXPECT_EQ(relu_mean({3.0, 1e-13}), 3.0);
  EXPECT_THROW(relu_mean({1.0, -0.1}), Error);
  EXPECT_THROW(relu_mean({NAN, 1.0}), Error);
}

TEST(ReluMoments, ContinuousAsSigmaVanishes) {
  for (double mu : {-1.0, 0.5, 2.0}) {
    EXPECT_NEAR(relu_mean({mu, 1e-8}), relu_mean({mu, 0.0}), 1e-8);
    EXPECT_NEAR(relu_second_moment({mu, 1e-8}), relu_second_moment({mu, 0.0}), 1e-8);
  }
}

TEST(Heaviside, HalfAtZero) {
  EXPECT_EQ(heaviside(0.0), 0.5);
  EXPECT_EQ(heaviside(-0.0), 0.5);
  EXPECT_EQ(heaviside(1e-300), 1.0);
  EXPECT_EQ(heaviside(-1e-300), 0.0);
}

TEST(CrossMoment, MatchesQuadrature) {
  struct Case {
    double mi, si, mj, sj, r;
  };
  const Case cases[] = {
      {0.3, 1.2, -0.5, 0.7, 0.6},  {0.0, 1.0, 0.0, 1.0, -0.8},  {-2.0, 0.5, 1.0, 2.0, 0.95},
      {4.0, 1.0, 3.0, 0.2, -0.3},  {-1.5, 1.0, -2.0, 1.0, 0.99}, {1.0, 10.0, -5.0, 3.0, -0.999},
      {0.2, 0.1, 0.1, 0.1, 0.999},
  };
  for (const Case& c : cases) {
    const double want = oracle::relu_cross_moment(c.mi, c.si, c.mj, c.sj, c.r);
    const double got = relu_cross_moment({{c.mi, c.si}, {c.mj, c.sj}, Correlation(c.r)});
    EXPECT_LE(std::fabs(got - want), std::max(1e-10 * std::fabs(want), 1e-13)) << c.r;
  }
}

TEST(CrossMoment, StandardNormalsClosedForm) {
  // For standard normals, E[max(Z1,0) max(Z2,0)] = (rho (pi - acos rho) + sqrt(1 - rho^2)) / (2 pi).
  for (double r = -0.99; r <= 0.99; r += 0.09) {
    // The two terms cancel near rho = -1, so the reference is taken in long
    // double and the error is judged against the size of the terms.
    const long double lr = r;
    const long double pi = std::numbers::pi_v<long double>;
    const long double first = lr * (pi - std::acos(lr)) / (2.0L * pi);
    const long double second = std::sqrt(1.0L - lr * lr) / (2.0L * pi);
    const double want = static_cast<double>(first + second);
    const double scale = static_cast<double>(std::fabs(first) + second);
    EXPECT_LE(std::fabs(relu_cross_moment({{0.0, 1.0}, {0.0, 1.0}, Correlation(r)}) - want),
              1e-15 * scale)
        << r;
  }
}

TEST(CrossMoment, SymmetricInPair) {
  const MarginalParams a{0.7, 1.3};
  const MarginalParams b{-0.4, 0.6};
  for (double r : {-1.0, -0.6, 0.0, 0.45, 1.0}) {
    EXPECT_NEAR(relu_cross_moment({a, b, Correlation(r)}), relu_cross_moment({b, a, Correlation(r)}),
                1e-16);
  }
}

TEST(CrossMoment, FactorizesAtZeroCorrelation) {
  for (double sigma : {0.1, 1.0, 10.0}) {
    for (double ti = -6.0; ti <= 6.0; ti += 0.5) {
      for (double tj = -6.0; tj <= 6.0; tj += 1.5) {
        const MarginalParams a{ti * sigma, sigma};
        const MarginalParams b{tj * sigma, 0.5 * sigma};
        const double want = relu_mean(a) * relu_mean(b);
        EXPECT_LE(rel(relu_cross_moment({a, b, Correlation(0.0)}), want), 1e-13);
      }
    }
  }
}

TEST(CrossMoment, DeterministicCoordinates) {
  const MarginalParams pos{1.5, 0.0};
  const MarginalParams neg{-1.5, 0.0};
  const MarginalParams noisy{0.2, 0.9};
  EXPECT_EQ(relu_cross_moment({pos, noisy, Correlation(0.7)}), 1.5 * relu_mean(noisy));
  EXPECT_EQ(relu_cross_moment({noisy, pos, Correlation(-0.7)}), 1.5 * relu_mean(noisy));
  EXPECT_EQ(relu_cross_moment({neg, noisy, Correlation(0.7)}), 0.0);
  EXPECT_EQ(relu_cross_moment({pos, {2.0, 0.0}, Correlation(0.0)}), 3.0);
  EXPECT_EQ(relu_cross_moment({pos, neg, Correlation(0.0)}), 0.0);
}

TEST(CrossMoment, PerfectPositiveCorrelationWithEqualMarginalsIsSecondMoment) {
  for (double mu : {-2.0, -0.3, 0.0, 0.4, 3.0}) {
    const MarginalParams a{mu, 1.3};
    EXPECT_EQ(relu_cross_moment({a, a, Correlation(1.0)}), relu_second_moment(a)) << mu;
  }
}

TEST(CrossMoment, DegenerateBranchesAreContinuous) {
  NormalStream rng(7, 0);
  for (int n = 0; n < 500; ++n) {
    const double si = std::exp(rng.normal());
    const double sj = std::exp(rng.normal());
    const MarginalParams a{3.0 * si * rng.normal(), si};
    const MarginalParams b{3.0 * sj * rng.normal(), sj};
    for (double r : {1.0, -1.0}) {
      EXPECT_NEAR(relu_cross_moment({a, b, Correlation(r)}),
                  relu_cross_moment({a, b, Correlation(r * (1.0 - 1e-9))}), 1e-5);
    }
  }
}

TEST(CrossMoment, TieCasesUseHalfStep) {
  // mu_i sigma_j = mu_j sigma_i at rho = +1: both orderings agree, so H(0)
  // averages equal terms.
  const MarginalParams a{1.0, 2.0};
  const MarginalParams b{0.5, 1.0};
  EXPECT_NEAR(relu_cross_moment({a, b, Correlation(1.0)}),
              relu_cross_moment({a, b, Correlation(1.0 - 1e-9)}), 1e-5);
  // mu_i sigma_j = -mu_j sigma_i at rho = -1: X_i X_j = 0 almost surely.
  const MarginalParams c{-0.5, 1.0};
  EXPECT_EQ(relu_cross_moment({a, c, Correlation(-1.0)}), 0.0);
  EXPECT_NEAR(relu_cross_moment({a, c, Correlation(-1.0 + 1e-9)}), 0.0, 1e-5);
}

TEST(Omega, DefinitionAndErrors) {
  const PairParams p{{0.8, 1.5}, {-0.2, 0.5}, Correlation(0.3)};
  const double want =
      (0.8 * 0.5 - 0.3 * -0.2 * 1.5) / (1.5 * 0.5 * std::sqrt(1.0 - 0.09));
  EXPECT_NEAR(p.omega_ij(), want, 1e-15);
  const double want_ji = (-0.2 * 1.5 - 0.3 * 0.8 * 0.5) / (1.5 * 0.5 * std::sqrt(1.0 - 0.09));
  EXPECT_NEAR(p.omega_ji(), want_ji, 1e-15);
  EXPECT_EQ(kind_of([] { PairParams{{1.0, 1.0}, {1.0, 1.0}, Correlation(1.0)}.omega_ij(); }),
            ErrorKind::kDegenerateCorrelation);
  EXPECT_EQ(kind_of([] { PairParams{{1.0, 0.0}, {1.0, 1.0}, Correlation(0.0)}.omega_ij(); }),
            ErrorKind::kDomain);
}

TEST(TruncatedMoment, LawOfTotalExpectation) {
  NormalStream rng(11, 0);
  for (int n = 0; n < 300;) {
    const double si = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
    const double sj = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
    const PairParams p{{(6.0 * rng.uniform() - 3.0) * si, si},
                       {(6.0 * rng.uniform() - 3.0) * sj, sj},
                       Correlation(0.999 * (2.0 * rng.uniform() - 1.0))};
    // Draws whose orthant is a null event have no conditional moment.
    if (orthant_prob(p) < 1e-300) continue;
    EXPECT_LE(rel(truncated_cross_moment(p) * orthant_prob(p), relu_cross_moment(p)), 1e-12);
    ++n;
  }
}

TEST(TruncatedMoment, IndependentCaseFactorizes) {
  // With rho = 0 the conditional moment is the product of one-dimensional
  // truncated means E(W | W > 0) = mu + sigma phi(t) / Phi(t).
  const MarginalParams a{0.4, 1.1};
  const MarginalParams b{-0.7, 0.8};
  const auto cond = [](const MarginalParams& m) {
    const double t = m.mu / m.sigma;
    return m.mu + m.sigma * std_pdf(t) / std_cdf(t);
  };
  EXPECT_LE(rel(truncated_cross_moment({a, b, Correlation(0.0)}), cond(a) * cond(b)), 1e-14);
}

TEST(TruncatedMoment, Errors) {
  EXPECT_EQ(kind_of([] { truncated_cross_moment({{1.0, 1.0}, {1.0, 1.0}, Correlation(1.0)}); }),
            ErrorKind::kDegenerateCorrelation);
  EXPECT_EQ(kind_of([] { truncated_cross_moment({{1.0, 0.0}, {1.0, 1.0}, Correlation(0.2)}); }),
            ErrorKind::kDomain);
  EXPECT_EQ(kind_of([] { truncated_cross_moment({{-40.0, 1.0}, {-40.0, 1.0}, Correlation(0.0)}); }),
            ErrorKind::kNullEvent);
  EXPECT_EQ(kind_of([] { orthant_prob({{1.0, 0.0}, {1.0, 1.0}, Correlation(0.2)}); }),
            ErrorKind::kDomain);
}

TEST(Rectify, MatchesPairwiseFunctions) {
  Eigen::MatrixXd cov(3, 3);
  cov << 1.0, 0.4, -0.2, 0.4, 2.0, 0.5, -0.2, 0.5, 0.7;
  const GaussianDist w(Eigen::Vector3d(0.3, -0.8, 1.2), cov);
  const RectifiedMoments x = rectify(w);
  ASSERT_EQ(x.cov, x.cov.transpose());
  for (int i = 0; i < 3; ++i) {
    const MarginalParams mi{w.mean()(i), std::sqrt(cov(i, i))};
    EXPECT_NEAR(x.mean(i), relu_mean(mi), 1e-16);
    EXPECT_NEAR(x.cov(i, i), relu_second_moment(mi) - relu_mean(mi) * relu_mean(mi), 1e-15);
    for (int j = i + 1; j < 3; ++j) {
      const MarginalParams mj{w.mean()(j), std::sqrt(cov(j, j))};
      const double r = cov(i, j) / (mi.sigma * mj.sigma);
      const double want = relu_cross_moment({mi, mj, Correlation(r)}) - x.mean(i) * x.mean(j);
      EXPECT_NEAR(x.cov(i, j), want, 1e-15);
    }
  }
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(x.cov).eigenvalues().minCoeff(), 0.0);
}

TEST(Rectify, HandlesDeterministicAndPerfectlyCorrelatedUnits) {
  Eigen::MatrixXd cov(3, 3);
  cov << 1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 0.0;  // W2 = 2 W1, W3 fixed
  const GaussianDist w(Eigen::Vector3d(0.5, 1.0, 2.0), cov);
  const RectifiedMoments x = rectify(w);
  EXPECT_TRUE(x.mean.allFinite());
  EXPECT_TRUE(x.cov.allFinite());
  EXPECT_EQ(x.cov(2, 2), 0.0);
  EXPECT_NEAR(x.cov(0, 2), 0.0, 1e-15);
  // max(2 W1, 0) = 2 max(W1, 0).
  EXPECT_NEAR(x.mean(1), 2.0 * x.mean(0), 1e-15);
  EXPECT_NEAR(x.cov(1, 1), 4.0 * x.cov(0, 0), 1e-14);
  EXPECT_NEAR(x.cov(0, 1), 2.0 * x.cov(0, 0), 1e-14);
}
