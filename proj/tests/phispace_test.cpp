#include "tailbound/phispace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tailbound/error.hpp"
#include "tailbound/rng.hpp"

using namespace tailbound;

namespace {

SampleMatrix gaussian_samples(std::size_t n, std::size_t d, double sigma, std::uint64_t seed) {
  PhiloxEngine eng(seed, 0);
  std::normal_distribution<double> normal(0.0, sigma);
  SampleMatrix s(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) s(r, c) = normal(eng);
  return s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::io;
}

}  // namespace

TEST(SignVector, LexicographicOrder) {
  EXPECT_EQ(sign_vector(0, 2), (std::vector<int>{-1, -1}));
  EXPECT_EQ(sign_vector(1, 2), (std::vector<int>{-1, 1}));
  EXPECT_EQ(sign_vector(2, 2), (std::vector<int>{1, -1}));
  EXPECT_EQ(sign_vector(3, 2), (std::vector<int>{1, 1}));
  EXPECT_EQ(sign_vector(7, 3), (std::vector<int>{1, 1, 1}));
}

TEST(NaturalFunction, GaussianLogMgfIsHalfSquare) {
  const auto s = gaussian_samples(200000, 1, 1.0, 5);
  const std::vector<std::vector<double>> axes = {{0.0, 0.5, 1.0, 1.5}};
  const auto est = natural_function(s, axes);
  EXPECT_EQ(est.values[0], 0.0);
  for (std::size_t i = 1; i < 4; ++i) {
    const double l = axes[0][i];
    EXPECT_NEAR(est.values[i], 0.5 * l * l, 4.0 * est.std_errors[i] + 1e-3) << "lambda=" << l;
    EXPECT_EQ(est.kramer_flag[i], 0);
  }
}

TEST(NaturalFunction, TwoSidedTakesLargerSign) {
  // Skewed draws: exp(1) - 1 has a heavier right tail, so eps = +1 wins.
  PhiloxEngine eng(3, 0);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(50000);
  for (double& x : v) x = ex(eng) - 1.0;
  const auto s = SampleMatrix::column(v);
  const auto est = natural_function(s, {{0.0, 0.5}});
  EXPECT_EQ(est.sign_index[1], 1u);
  // Exact value -l - log(1 - l) at l = 0.5 with SE tolerance.
  EXPECT_NEAR(est.values[1], -0.5 - std::log(0.5), 5.0 * est.std_errors[1]);
}

TEST(NaturalFunction, RejectsUncenteredAndSmallSamples) {
  auto s = gaussian_samples(1000, 1, 1.0, 9);
  for (std::size_t r = 0; r < s.rows(); ++r) s(r, 0) += 1.0;
  EXPECT_EQ(code_of([&] { natural_function(s, {{0.0, 1.0}}); }), ErrorCode::centering);
  NaturalFunctionOptions off;
  off.check_centering = false;
  EXPECT_NO_THROW(natural_function(s, {{0.0, 1.0}}, off));
  const auto small = gaussian_samples(50, 1, 1.0, 9);
  EXPECT_EQ(code_of([&] { natural_function(small, {{0.0, 1.0}}); }), ErrorCode::contract);
}

TEST(NaturalFunction, KramerFlagOnDominatedSum) {
  std::vector<double> v(1000, -0.01);
  v[0] = 9.99;
  const auto est = natural_function(SampleMatrix::column(v), {{0.0, 0.1, 5.0}});
  EXPECT_EQ(est.kramer_flag[2], 1);
  EXPECT_EQ(est.kramer_flag[1], 0);
  const auto phi = est.to_young();
  EXPECT_NEAR(phi.radius(), 0.1, 1e-15);
}

TEST(BplusNorm, GaussianEqualsSigma) {
  const auto q = YoungFunction::quadratic();
  for (double sigma : {0.3, 1.0, 2.5}) {
    const double n = bplus_norm([=](double l) { return 0.5 * sigma * sigma * l * l; }, q);
    EXPECT_NEAR(n, sigma, 1e-6 * sigma);
  }
}

TEST(BplusNorm, CenteredPoissonUnderPoissonianIsOne) {
  const auto p = YoungFunction::poissonian();
  EXPECT_NEAR(bplus_norm([](double l) { return std::expm1(l) - l; }, p), 1.0, 1e-6);
  EXPECT_EQ(bplus_norm([](double) { return 0.0; }, p), 0.0);
}

TEST(BplusNorm, PositiveHomogeneity) {
  const auto p = YoungFunction::poissonian();
  auto base = [](double l) { return 2.0 * (std::expm1(l) - l); };
  const double n1 = bplus_norm(base, p);
  for (double c : {0.5, 3.0}) {
    const double nc = bplus_norm([&](double l) { return base(c * l); }, p);
    EXPECT_NEAR(nc, c * n1, 1e-5 * c * n1);
  }
}

TEST(BplusNorm, TriangleInequalityForIndependentSum) {
  const auto p = YoungFunction::poissonian();
  auto pois = [](double l) { return 0.7 * (std::expm1(l) - l); };
  auto gauss = [](double l) { return 0.5 * 1.3 * 1.3 * l * l; };
  const double a = bplus_norm(pois, p);
  const double b = bplus_norm(gauss, p);
  const double ab = bplus_norm([&](double l) { return pois(l) + gauss(l); }, p);
  EXPECT_LE(ab, a + b + 1e-9);
  EXPECT_GT(ab, std::max(a, b) - 1e-9);
}

TEST(BplusNorm, MgfDominatedByPhiAtNorm) {
  // Young inequality form: logmgf(l) <= phi(l * norm) for every grid l.
  const auto p = YoungFunction::poissonian();
  auto f = [](double l) { return 0.4 * l * l + 0.1 * (std::expm1(l) - l); };
  NormOptions opt;
  const double n = bplus_norm(f, p, opt);
  for (double l : norm_lambda_grid(p, opt)) EXPECT_LE(f(l), p(l * n) * (1.0 + 1e-9) + 1e-12);
}

TEST(BplusNorm, RejectsLogMgfNonzeroAtOrigin) {
  EXPECT_EQ(code_of([] { bplus_norm([](double l) { return 1.0 + l; }, YoungFunction::quadratic()); }),
            ErrorCode::contract);
}

TEST(BphiNorm, IsotropicGaussianInTwoDimensions) {
  const auto q = YoungFunction::quadratic(2);
  const double sigma = 1.7;
  auto f = [=](std::span<const double> l) { return 0.5 * sigma * sigma * (l[0] * l[0] + l[1] * l[1]); };
  EXPECT_NEAR(bphi_norm(f, q), sigma, 1e-5);
}

TEST(BphiNorm, AsymmetricSignPatternControls) {
  // Only eps = (+1, -1) directions carry extra mass; the norm must see it.
  const auto q = YoungFunction::quadratic(2);
  auto f = [](std::span<const double> l) {
    const double base = 0.5 * (l[0] * l[0] + l[1] * l[1]);
    return (l[0] > 0 && l[1] < 0) ? 4.0 * base : base;
  };
  EXPECT_NEAR(bphi_norm(f, q), 2.0, 1e-5);
}

TEST(Chernov, QuadraticExamples) {
  const auto conj = conjugate_1d(YoungFunction::quadratic(), linspace(0.0, 5.0, 501));
  EXPECT_NEAR(chernov_bound(conj, 2.0, 1.0), std::exp(-2.0), 1e-6);
  EXPECT_NEAR(chernov_bound(conj, 2.0, 2.0), std::exp(-0.5), 1e-6);
  EXPECT_EQ(chernov_bound(conj, 0.0, 1.0), 1.0);
}

TEST(Chernov, MinCoordinateBound) {
  LambdaGridSpec spec;
  spec.max_lambda = 6.0;
  spec.count = 601;
  const auto conj = conjugate_nd(YoungFunction::quadratic(2),
                                 {linspace(0.0, 4.0, 41), linspace(0.0, 4.0, 41)}, spec);
  EXPECT_EQ(min_coordinate_bound(conj, 1.0, 1.0), 1.0);
  EXPECT_NEAR(min_coordinate_bound(conj, 2.0, 1.0), 4.0 * std::exp(-4.0), 1e-6);
}

TEST(EmpiricalTail, CountsJointOrthantExceedances) {
  SampleMatrix s(4, 2, {2.0, 2.0, -3.0, -3.0, -3.0, -3.5, 0.5, 2.0});
  const double x[2] = {1.0, 1.0};
  const auto obs = empirical_tail(s, std::span<const double>(x, 2));
  EXPECT_EQ(obs.exceedances, 2u);
  EXPECT_EQ(obs.sign_index, 0u);
  EXPECT_DOUBLE_EQ(obs.value, 0.5);
  EXPECT_LE(obs.ci_lo, 0.5);
  EXPECT_GE(obs.ci_hi, 0.5);
}

TEST(EmpiricalTail, GaussianOneDimensionalTail) {
  const auto s = gaussian_samples(100000, 1, 1.0, 21);
  const double x[1] = {2.0};
  const auto obs = empirical_tail(s, std::span<const double>(x, 1));
  // Two-sided sign maximum is at least the one-sided tail 0.02275.
  EXPECT_LE(obs.ci_lo, 0.0227501319481792 * 1.15);
  EXPECT_GE(obs.ci_hi, 0.0227501319481792 * 0.9);
}
