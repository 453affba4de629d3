#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "truncsearch/special_functions.hpp"

namespace ts = truncsearch;

TEST(Erf, KnownValues) {
  EXPECT_EQ(ts::erf(0.0), 0.0);
  EXPECT_NEAR(ts::erf(1.0), 0.8427007929497149, 1e-14);
  EXPECT_NEAR(ts::erf(-2.0), -0.9953222650189527, 1e-14);
}

TEST(Erf, MatchesMaclaurinOracle) {
  for (double x = -3.0; x <= 3.0; x += 0.0137) {
    EXPECT_NEAR(ts::erf(x), oracle::erf(x), 1e-14) << "x = " << x;
  }
}

TEST(Erf, TailMatchesStd) {
  for (double x = 2.0; x <= 6.0; x += 0.05) {
    EXPECT_NEAR(ts::erf(x), std::erf(x), 1e-15) << "x = " << x;
    EXPECT_NEAR(ts::erfc(x), std::erfc(x), 1e-14 * std::erfc(x) + 1e-300) << "x = " << x;
  }
}

TEST(Erf, OddAndBounded) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(ts::erf(-x), -ts::erf(x), 1e-15);
    EXPECT_LE(std::fabs(ts::erf(x)), 1.0);
  }
}

TEST(Erf, RejectsNonFinite) {
  EXPECT_THROW(ts::erf(std::nan("")), std::domain_error);
  EXPECT_THROW(ts::erf(INFINITY), std::domain_error);
  EXPECT_THROW(ts::std_normal_cdf(-INFINITY), std::domain_error);
}

TEST(StdNormalCdf, KnownValuesAndComplement) {
  EXPECT_EQ(ts::std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(ts::std_normal_cdf(1.545), oracle::phi(1.545), 1e-15);
  EXPECT_NEAR(ts::std_normal_cdf(1.545), 0.938827, 1e-6);
  EXPECT_NEAR(ts::std_normal_cdf(-4.415), 5.05e-6, 1e-8);
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    EXPECT_NEAR(ts::std_normal_cdf(x) + ts::std_normal_cdf(-x), 1.0, 1e-14);
  }
}

TEST(OwenT, KnownValues) {
  EXPECT_EQ(ts::owen_t(1.3, 0.0), 0.0);
  EXPECT_NEAR(ts::owen_t(0.0, 1.0), 0.125, 1e-12);
  for (double a : {0.5, 1.0, 2.0, 5.0}) {
    EXPECT_NEAR(ts::owen_t(0.0, a), std::atan(a) / (2 * std::numbers::pi), 1e-12) << "a = " << a;
  }
  // T(h, 1) = Phi(h) (1 - Phi(h)) / 2
  for (double h : {-2.0, -0.3, 0.7, 1.5, 3.0}) {
    const double p = oracle::phi(h);
    EXPECT_NEAR(ts::owen_t(h, 1.0), 0.5 * p * (1 - p), 1e-12) << "h = " << h;
  }
}

TEST(OwenT, MatchesQuadratureOracle) {
  for (double h : {-4.0, -1.0, 0.0, 0.5, 1.0, 2.5, 6.0}) {
    for (double a : {-5.48, -3.37, -1.0, 0.2, 1.0, 2.0, 3.37, 5.48}) {
      EXPECT_NEAR(ts::owen_t(h, a), oracle::owen_t(h, a), 1e-12) << "h = " << h << " a = " << a;
    }
  }
}

TEST(OwenT, Symmetries) {
  for (double h : {0.1, 0.9, 2.2}) {
    for (double a : {0.4, 1.7, 4.0}) {
      EXPECT_DOUBLE_EQ(ts::owen_t(h, a), ts::owen_t(-h, a));
      EXPECT_DOUBLE_EQ(ts::owen_t(h, -a), -ts::owen_t(h, a));
    }
  }
}

TEST(LogGamma, MatchesStd) {
  for (double x : {0.1, 0.5, 1.0, 1.5, 3.15, 10.0, 57.3}) {
    EXPECT_NEAR(ts::log_gamma(x), std::lgamma(x), 1e-12 * std::max(1.0, std::fabs(std::lgamma(x)))) << x;
  }
  EXPECT_THROW(ts::log_gamma(0.0), std::domain_error);
}

TEST(RegularizedLowerGamma, KnownValues) {
  EXPECT_EQ(ts::regularized_lower_gamma(2.5, 0.0), 0.0);
  EXPECT_NEAR(ts::regularized_lower_gamma(1.0, 1.0), 1.0 - std::exp(-1.0), 1e-14);
  const double v = ts::regularized_lower_gamma(3.15, 10.0 / 1.27);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
}

TEST(RegularizedLowerGamma, MatchesQuadratureOracle) {
  for (double kappa : {0.5, 1.0, 3.15, 7.5}) {
    for (double x : {0.2, 1.0, 2.0, 4.17, 7.87, 15.0}) {
      EXPECT_NEAR(ts::regularized_lower_gamma(kappa, x), oracle::lower_gamma(kappa, x), 1e-10)
          << "kappa = " << kappa << " x = " << x;
    }
  }
}

TEST(RegularizedLowerGamma, MonotoneAndSaturates) {
  for (double kappa : {0.7, 3.15, 20.0}) {
    double prev = 0.0;
    for (double x = 0.0; x < kappa + 30.0; x += 0.05) {
      const double v = ts::regularized_lower_gamma(kappa, x);
      EXPECT_GE(v, prev - 1e-15);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
    EXPECT_GE(ts::regularized_lower_gamma(kappa, kappa + 40.0 * std::sqrt(kappa)), 1.0 - 1e-10);
  }
}

TEST(RegularizedLowerGamma, DomainErrors) {
  EXPECT_THROW(ts::regularized_lower_gamma(0.0, 1.0), std::domain_error);
  EXPECT_THROW(ts::regularized_lower_gamma(-1.0, 1.0), std::domain_error);
  EXPECT_THROW(ts::regularized_lower_gamma(2.0, -0.1), std::domain_error);
  EXPECT_THROW(ts::regularized_lower_gamma(2.0, 1.0, {1e-12, 0}), std::invalid_argument);
}
