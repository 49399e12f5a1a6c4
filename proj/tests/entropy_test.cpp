#include "tailbound/entropy.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tailbound/error.hpp"
#include "tailbound/young.hpp"

using namespace tailbound;

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

// Plain partial sum of (1 - p) sum p^{n-1} m(p^n) with an explicit term count.
double naive_series(const std::function<double(double)>& m, double p, int terms) {
  double s = 0.0;
  for (int n = 1; n <= terms; ++n) {
    if (std::pow(p, n) < 1e-300) break;
    s += std::pow(p, n - 1) * m(std::pow(p, n));
  }
  return (1.0 - p) * s;
}

}  // namespace

TEST(Net, UniformKnotsAreCellCentred) {
  const auto net = Net::uniform(1, 4);
  EXPECT_EQ(net.axis(0), (std::vector<double>{0.125, 0.375, 0.625, 0.875}));
  EXPECT_EQ(Net::uniform(3, 10).cardinality(), 1000u);
  EXPECT_EQ(Net::uniform(4, 1u << 16).cardinality(), UINT64_MAX);
}

TEST(Project, OneSidedNeighboursAndClamping) {
  const Net net({{0.2, 0.5, 0.8}});
  const double t[1] = {0.5};
  const int up[1] = {1}, down[1] = {-1};
  EXPECT_EQ(project(net, t, up).point[0], 0.5);
  EXPECT_EQ(project(net, t, down).point[0], 0.2);
  const double low[1] = {0.1};
  const auto p = project(net, low, down);
  EXPECT_EQ(p.point[0], 0.2);
  EXPECT_TRUE(p.clamped);
  const double high[1] = {0.9};
  EXPECT_TRUE(project(net, high, up).clamped);
}

TEST(Project, OptimalProjectionPicksNearerSide) {
  const Net net({{0.2, 0.5, 0.8}, {0.2, 0.5, 0.8}});
  const HolderModel model(1.0, 1.0, 2);
  const double t[2] = {0.45, 0.25};
  const auto best = optimal_projection(net, t, model);
  EXPECT_EQ(best.point, (std::vector<double>{0.5, 0.2}));
  EXPECT_NEAR(best.norm, 0.05, 1e-15);
  // Equidistant: both signs give 0.15, lexicographic tie-break keeps -1.
  const double mid[2] = {0.35, 0.35};
  const auto tie = optimal_projection(net, mid, model);
  EXPECT_EQ(tie.eps, (std::vector<int>{-1, -1}));
}

TEST(NetDelta, HolderClosedFormAgreesWithProbe) {
  const HolderModel model(2.0, 0.5, 1);
  for (std::size_t n : {1u, 3u, 10u}) {
    const auto d = net_delta(Net::uniform(1, n), model, 65);
    ASSERT_TRUE(d.exact.has_value());
    EXPECT_NEAR(*d.exact, 2.0 * std::sqrt(0.5 / n), 1e-12);
    EXPECT_TRUE(d.cross_check_ok);
    EXPECT_NEAR(d.probe_value, *d.exact, 1e-9);
  }
}

TEST(NetDelta, ProbeOverWholeGrid) {
  const HolderModel model(1.0, 1.0, 1);
  const Net net({{0.25, 0.75}});
  std::vector<double> arg;
  const double v = probe_delta(net, model, {{0.0, 0.5, 1.0}}, &arg);
  EXPECT_DOUBLE_EQ(v, 0.25);
  EXPECT_EQ(arg, (std::vector<double>{0.0}));
}

TEST(NetDelta, RefiningANetNeverIncreasesDelta) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const HolderModel model(1.0, 0.7, 2);
  std::vector<std::vector<double>> probes(2, linspace(0.0, 1.0, 41));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> coarse(2), fine(2);
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 3; ++k) coarse[j].push_back(u(gen));
      fine[j] = coarse[j];
      for (int k = 0; k < 3; ++k) fine[j].push_back(u(gen));
      std::sort(coarse[j].begin(), coarse[j].end());
      std::sort(fine[j].begin(), fine[j].end());
    }
    const double dc = probe_delta(Net(coarse), model, probes);
    const double df = probe_delta(Net(fine), model, probes);
    EXPECT_LE(df, dc + 1e-15);
  }
}

TEST(EntropyProfile, HolderCountsMatchClosedForm) {
  const HolderModel model(1.0, 1.0, 2);
  const std::vector<double> delta = {0.25, 0.1, 0.01};
  const auto prof = entropy_profile(model, delta);
  // Smallest N with 1/(2N) < delta.
  EXPECT_EQ(prof.per_axis, (std::vector<std::size_t>{3, 6, 51}));
  EXPECT_EQ(prof.count, (std::vector<std::uint64_t>{9, 36, 2601}));
  for (std::size_t i = 0; i < delta.size(); ++i) {
    EXPECT_LT(prof.achieved_delta[i], delta[i]);
    EXPECT_NEAR(prof.log_count[i], std::log(static_cast<double>(prof.count[i])), 1e-12);
  }
  const auto m = EntropyFunction::holder(1.0, 1.0, 2);
  for (std::size_t i = 0; i < delta.size(); ++i) EXPECT_NEAR(m(delta[i]), prof.log_count[i], 1e-12);
}

TEST(EntropyProfile, CountsAreMonotoneInDelta) {
  const HolderModel model(1.5, 0.5, 1);
  const auto delta = linspace(1.0, 0.05, 30);
  const auto prof = entropy_profile(model, delta);
  for (std::size_t i = 1; i < prof.count.size(); ++i) EXPECT_GE(prof.count[i], prof.count[i - 1]);
}

TEST(EntropyFunction, FromProfileIsConservativeStep) {
  const HolderModel model(1.0, 1.0, 1);
  const std::vector<double> delta = {0.5, 0.25, 0.1};
  const auto prof = entropy_profile(model, delta);
  const auto m = EntropyFunction::from_profile(prof);
  EXPECT_NEAR(m(0.3), prof.log_count[1], 1e-12);
  EXPECT_NEAR(m(0.1), prof.log_count[2], 1e-12);
  EXPECT_GE(m(0.05), m(0.1));
}

TEST(GSeries, LogLawOracle) {
  const auto m = EntropyFunction::log_law(0.0, 1.0);
  EXPECT_NEAR(g_series(m, 0.5).value, 1.3862943611198906, 1e-10);
  const auto m2 = EntropyFunction::log_law(1.5, 0.7);
  for (double p : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(g_series(m2, p).value, g_closed_form(ClosedFormKind::log_law, {1.5, 0.7, 0.0}, p), 1e-9);
    EXPECT_NEAR(g_series(m2, p).value, naive_series([](double d) { return 1.5 + 0.7 * std::abs(std::log(d)); }, p, 4000),
                1e-9);
  }
}

TEST(GSeries, PowerLawOracle) {
  const auto m = EntropyFunction::power_law(0.5);
  const double p = 0.5;
  const double expected = naive_series([](double d) { return std::pow(d, -0.5); }, p, 400);
  EXPECT_NEAR(g_series(m, p).value, expected, 1e-9);
  EXPECT_NEAR(g_closed_form(ClosedFormKind::power_law, {0.0, 0.0, 0.5}, p), expected, 1e-9);
  EXPECT_GE(g_power_small_p_bound(0.5, 0.25), g_series(m, 0.25).value);
}

TEST(GSeries, HolderMatchesNaiveSum) {
  const auto m = EntropyFunction::holder(1.0, 0.5, 1);
  auto direct = [](double d) {
    // Smallest N with sqrt(1/(2N)) < d, i.e. N > 1/(2 d^2).
    const double x = 0.5 / (d * d);
    return std::log(x < 1e15 ? std::floor(x) + 1.0 : x);
  };
  EXPECT_NEAR(g_series(m, 0.5).value, naive_series(direct, 0.5, 200), 1e-9);
}

TEST(GSeries, ZeroEntropyGivesZero) { EXPECT_EQ(g_series(EntropyFunction::zero(), 0.3).value, 0.0); }

TEST(GSeries, MonotoneInEntropy) {
  const auto small = EntropyFunction::log_law(1.0, 0.5);
  const auto large = EntropyFunction::log_law(2.0, 0.5);
  for (double p : {0.05, 0.3, 0.7, 0.95}) EXPECT_LE(g_series(small, p).value, g_series(large, p).value);
}

TEST(GSeries, DivergenceAndDomainErrors) {
  EXPECT_EQ(code_of([] { g_series(EntropyFunction::power_law(1.2), 0.5); }), ErrorCode::divergence);
  const auto growing = EntropyFunction::custom([](double ld) { return std::exp(-2.0 * ld); });
  EXPECT_EQ(code_of([&] { g_series(growing, 0.5); }), ErrorCode::divergence);
  EXPECT_EQ(code_of([] { g_series(EntropyFunction::zero(), 1.0); }), ErrorCode::domain);
}
