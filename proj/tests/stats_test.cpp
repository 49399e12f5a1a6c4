#include "tailbound/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace stats = tailbound::stats;

namespace {

// Binomial CDF by direct summation in log space.
double binom_cdf(std::uint64_t k, std::uint64_t n, double p) {
  double s = 0.0;
  for (std::uint64_t i = 0; i <= k; ++i) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    s += std::exp(lc + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return s;
}

}  // namespace

TEST(ClopperPearson, ZeroSuccessesHasClosedForm) {
  const auto ci = stats::clopper_pearson(0, 50, 0.95);
  EXPECT_EQ(ci.lo, 0.0);
  EXPECT_NEAR(ci.hi, 1.0 - std::pow(0.025, 1.0 / 50.0), 1e-12);
  const auto full = stats::clopper_pearson(50, 50, 0.95);
  EXPECT_EQ(full.hi, 1.0);
  EXPECT_NEAR(full.lo, std::pow(0.025, 1.0 / 50.0), 1e-12);
}

TEST(ClopperPearson, EndpointsSolveBinomialTailEquations) {
  for (std::uint64_t k : {1u, 7u, 20u, 39u}) {
    const std::uint64_t n = 40;
    const auto ci = stats::clopper_pearson(k, n, 0.99);
    EXPECT_NEAR(binom_cdf(k, n, ci.hi), 0.005, 1e-9);
    EXPECT_NEAR(1.0 - binom_cdf(k - 1, n, ci.lo), 0.005, 1e-9);
    EXPECT_LE(ci.lo, static_cast<double>(k) / n);
    EXPECT_GE(ci.hi, static_cast<double>(k) / n);
  }
}

TEST(LogMeanExp, MatchesNaiveSumAndVanishesAtZero) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  std::vector<double> x(500);
  for (double& v : x) v = normal(gen);
  EXPECT_EQ(stats::log_mean_exp(x, 0.0).value, 0.0);
  for (double lambda : {0.1, 1.0, 3.0}) {
    double s = 0.0;
    for (double v : x) s += std::exp(lambda * v);
    EXPECT_NEAR(stats::log_mean_exp(x, lambda).value, std::log(s / x.size()), 1e-12);
  }
}

TEST(LogMeanExp, NoOverflowAndDominanceShare) {
  const std::vector<double> x = {1000.0, 0.0, 0.0};
  const auto r = stats::log_mean_exp(x, 1.0);
  EXPECT_NEAR(r.value, 1000.0 - std::log(3.0), 1e-9);
  EXPECT_NEAR(r.max_share, 1.0, 1e-12);
}

TEST(Moments, SmallSample) {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const auto m = stats::moments(x);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.variance, 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 12.0), 1e-15);
}

TEST(NormalTail, AgreesWithErfc) {
  for (double x : {-1.0, 0.0, 1.0, 2.0, 5.0})
    EXPECT_NEAR(stats::normal_upper_tail(x), 0.5 * std::erfc(x / std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(stats::normal_upper_tail(2.0), 0.0227501319481792, 1e-15);
}
