#include "tailbound/young.hpp"

#include <gtest/gtest.h>

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "tailbound/error.hpp"

using tailbound::conjugate_1d;
using tailbound::conjugate_nd;
using tailbound::Error;
using tailbound::ErrorCode;
using tailbound::LambdaGridSpec;
using tailbound::linspace;
using tailbound::MultiDomain;
using tailbound::validate_young;
using tailbound::YoungFunction;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::io;
}

// sup over lambda of lambda*x - phi(lambda) by Brent minimization on [0, hi].
double brent_conjugate(const YoungFunction& f, double x, double hi) {
  auto neg = [&](double l) { return -(l * x - f(l)); };
  const auto r = boost::math::tools::brent_find_minima(neg, 0.0, hi, 52);
  return -r.second;
}

}  // namespace

TEST(Catalog, Values) {
  const auto q = YoungFunction::quadratic();
  EXPECT_DOUBLE_EQ(q(3.0), 4.5);
  EXPECT_DOUBLE_EQ(q(-3.0), 4.5);
  const auto p = YoungFunction::poissonian();
  EXPECT_NEAR(p(1.0), std::exp(1.0) - 2.0, 1e-15);
  EXPECT_NEAR(p(-2.0), std::exp(2.0) - 3.0, 1e-14);
  EXPECT_NEAR(p(1e-5), 0.5e-10 + 1e-15 / 6.0, 1e-20);
  Eigen::MatrixXd b(2, 2);
  b << 2, 0.5, 0.5, 1;
  const auto qf = YoungFunction::quadratic_form(b);
  const double l[2] = {1.0, -2.0};
  EXPECT_NEAR(qf(std::span<const double>(l, 2)), 0.5 * (2.0 - 2.0 + 4.0), 1e-15);
}

TEST(Catalog, SumScaledQuadraticIsIdentity) {
  const auto q = YoungFunction::quadratic();
  const auto q16 = YoungFunction::sum_scaled(q, 16);
  EXPECT_EQ(q16.kind(), tailbound::YoungKind::quadratic);
  for (double l : {0.3, 1.0, 7.0}) EXPECT_EQ(q16(l), q(l));
  const auto p = YoungFunction::poissonian();
  const auto p4 = YoungFunction::sum_scaled(p, 4);
  EXPECT_NEAR(p4(2.0), 4.0 * p(1.0), 1e-14);
}

TEST(Catalog, TabulatedInterpolatesAndMirrors) {
  const auto t = YoungFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 0.5, 2.0});
  EXPECT_DOUBLE_EQ(t(0.5), 0.25);
  EXPECT_DOUBLE_EQ(t(-1.5), 1.25);
  EXPECT_TRUE(std::isinf(t(2.5)));
  EXPECT_EQ(t.radius(), 2.0);
  std::istringstream csv("lambda,phi\n0,0\n1,0.5\n2,2\n");
  EXPECT_DOUBLE_EQ(tailbound::read_tabulated_csv(csv)(1.5), 1.25);
  std::istringstream bad("x,y\n0,0\n");
  EXPECT_EQ(code_of([&] { tailbound::read_tabulated_csv(bad); }), ErrorCode::config);
}

TEST(Validate, CatalogPasses) {
  EXPECT_TRUE(validate_young(YoungFunction::quadratic(), 64).passed());
  EXPECT_TRUE(validate_young(YoungFunction::poissonian(), 64).passed());
  EXPECT_TRUE(validate_young(YoungFunction::quadratic(3), 64).passed());
}

TEST(Validate, ReportsFirstFailingAxiom) {
  const auto shifted = YoungFunction::tabulated({0.0, 1.0, 2.0}, {0.1, 0.6, 2.1});
  EXPECT_EQ(validate_young(shifted, 16).first_failure().value_or(""), "zero at origin");
  const auto bent = YoungFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 1.5, 2.0});
  const auto report = validate_young(bent, 16);
  EXPECT_FALSE(report.passed());
  EXPECT_EQ(report.first_failure().value_or(""), "convexity");
  const auto odd = YoungFunction::tabulated({-1.0, 0.0, 1.0}, {2.0, 0.0, 0.5});
  EXPECT_EQ(validate_young(odd, 16).first_failure().value_or(""), "evenness");
}

TEST(Validate, RejectsBadDomainsAndSampleCounts) {
  const auto q = YoungFunction::quadratic();
  EXPECT_EQ(code_of([&] { validate_young(q.with_domain(MultiDomain::box({-1.0}, {2.0})), 16); }),
            ErrorCode::invalid_domain);
  EXPECT_EQ(code_of([&] { validate_young(q, 4); }), ErrorCode::contract);
}

TEST(Conjugate1d, QuadraticIsSelfDual) {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const auto t = conjugate_1d(YoungFunction::quadratic(), x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(t.values()[i], 0.5 * x[i] * x[i], 1e-6);
  EXPECT_NEAR(t.value_at(1.5), 1.125, 0.13);
  const auto fine = conjugate_1d(YoungFunction::quadratic(), linspace(0.0, 3.0, 301));
  EXPECT_NEAR(fine.derivative_at(1.0), 1.0, 1e-4);
}

TEST(Conjugate1d, PoissonianMatchesBrentOracle) {
  const auto p = YoungFunction::poissonian();
  const auto x = linspace(0.0, 4.0, 81);
  const auto t = conjugate_1d(p, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(t.values()[i], brent_conjugate(p, x[i], 10.0), 1e-6) << "x=" << x[i];
  }
  EXPECT_NEAR(t.value_at(1.0), 2.0 * std::log(2.0) - 1.0, 1e-6);
}

TEST(Conjugate1d, FenchelYoungInequality) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> lam(0.0, 3.0), xs(0.0, 4.0);
  for (const auto& f : {YoungFunction::quadratic(), YoungFunction::poissonian()}) {
    const auto t = conjugate_1d(f, linspace(0.0, 4.0, 401));
    for (int k = 0; k < 200; ++k) {
      const double l = lam(gen), x = xs(gen);
      EXPECT_LE(l * x, f(l) + t.value_at(x) + 1e-9);
    }
  }
}

TEST(Conjugate1d, DoubleConjugationRecoversQuadratic) {
  const auto x = linspace(0.0, 8.0, 8001);
  const auto t = conjugate_1d(YoungFunction::quadratic(), x);
  const auto star = YoungFunction::tabulated(x, t.values());
  const auto lam = linspace(0.0, 5.0, 51);
  LambdaGridSpec spec;
  spec.max_lambda = 8.0;
  spec.count = 8001;
  const auto back = conjugate_1d(star, lam, spec);
  for (std::size_t i = 0; i < lam.size(); ++i) EXPECT_NEAR(back.values()[i], 0.5 * lam[i] * lam[i], 1e-4);
}

TEST(Conjugate1d, HalvingSpacingQuartersError) {
  const auto x = linspace(0.0, 3.0, 3001);
  auto max_err = [&](std::size_t count) {
    LambdaGridSpec spec;
    spec.max_lambda = 4.0;
    spec.count = count;
    const auto t = conjugate_1d(YoungFunction::quadratic(), x, spec);
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, 0.5 * x[i] * x[i] - t.values()[i]);
    return e;
  };
  const double ratio = max_err(41) / max_err(81);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Conjugate1d, GridDoublingAndPinnedMaximizer) {
  LambdaGridSpec spec;
  spec.max_lambda = 1.0;
  spec.count = 101;
  const auto t = conjugate_1d(YoungFunction::quadratic(), std::vector<double>{0.0, 5.0}, spec);
  EXPECT_NEAR(t.values()[1], 12.5, 1e-9);
  EXPECT_GE(t.provenance().doublings, 3);
  spec.max_doublings = 0;
  try {
    conjugate_1d(YoungFunction::quadratic(), std::vector<double>{0.0, 5.0}, spec);
    ADD_FAILURE() << "expected unbounded conjugate";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unbounded_conjugate);
    EXPECT_EQ(e.value().value_or(-1.0), 5.0);
  }
}

TEST(Conjugate1d, FiniteRadiusClipsGrid) {
  const auto p = YoungFunction::quadratic().with_radius(1.0);
  const auto t = conjugate_1d(p, std::vector<double>{0.0, 0.5, 3.0});
  EXPECT_NEAR(t.values()[1], 0.125, 1e-6);
  // Beyond the radius the supremum grows linearly: x - 1/2.
  EXPECT_NEAR(t.values()[2], 2.5, 1e-5);
  EXPECT_GT(t.provenance().boundary_hits, 0u);
}

TEST(Conjugate1d, ExtrapolationIsAnError) {
  const auto t = conjugate_1d(YoungFunction::quadratic(), linspace(0.0, 2.0, 21));
  EXPECT_EQ(code_of([&] { t.value_at(2.5); }), ErrorCode::extrapolation);
}

TEST(ConjugateNd, DiagonalForm) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
  b(0, 0) = 2.0;
  b(1, 1) = 1.0;
  LambdaGridSpec spec;
  spec.max_lambda = 3.0;
  spec.count = 601;
  const std::vector<std::vector<double>> axes = {linspace(0.0, 2.0, 5), linspace(0.0, 2.0, 5)};
  const auto t = conjugate_nd(YoungFunction::quadratic_form(b), axes, spec);
  const double x[2] = {2.0, 1.0};
  EXPECT_NEAR(t.value_at(std::span<const double>(x, 2)), 0.5 * (4.0 / 2.0 + 1.0), 1e-6);
  const auto id = conjugate_nd(YoungFunction::quadratic(2), axes, spec);
  const double y[2] = {1.0, 1.0};
  EXPECT_NEAR(id.value_at(std::span<const double>(y, 2)), 1.0, 1e-6);
}

TEST(ConjugateNd, MatchesBruteForceOnSmallGrid) {
  Eigen::MatrixXd b(2, 2);
  b << 1.5, 0.4, 0.4, 0.8;
  const auto f = YoungFunction::quadratic_form(b);
  LambdaGridSpec spec;
  spec.max_lambda = 4.0;
  spec.count = 81;
  const std::vector<std::vector<double>> axes = {linspace(0.0, 1.5, 4), linspace(0.0, 1.5, 4)};
  const auto t = conjugate_nd(f, axes, spec);
  const auto lam = linspace(-4.0, 4.0, 81);
  for (double x1 : axes[0])
    for (double x2 : axes[1]) {
      double best = -1e300;
      for (double a : lam)
        for (double c : lam) {
          const double l[2] = {a, c};
          best = std::max(best, a * x1 + c * x2 - f(std::span<const double>(l, 2)));
        }
      const double x[2] = {x1, x2};
      EXPECT_NEAR(t.value_at(std::span<const double>(x, 2)), best, 1e-12);
    }
}

TEST(ConjugateNd, MemoryBudgetIsEnforced) {
  LambdaGridSpec spec;
  spec.max_lambda = 3.0;
  spec.count = 601;
  spec.memory_budget_bytes = 1000;
  const std::vector<std::vector<double>> axes = {linspace(0.0, 1.0, 3), linspace(0.0, 1.0, 3)};
  EXPECT_EQ(code_of([&] { conjugate_nd(YoungFunction::quadratic(2), axes, spec); }), ErrorCode::resource);
}
