#include "tailbound/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/beta.hpp>

#include "tailbound/error.hpp"

namespace tailbound::stats {

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0 || successes > trials)
    throw Error(ErrorCode::contract, "binomial interval needs 0 <= successes <= trials, trials > 0");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw Error(ErrorCode::contract, "confidence level must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  Interval out{0.0, 1.0};
  if (successes > 0) {
    boost::math::beta_distribution<double> lower(k, n - k + 1.0);
    out.lo = boost::math::quantile(lower, alpha / 2.0);
  }
  if (successes < trials) {
    boost::math::beta_distribution<double> upper(k + 1.0, n - k);
    out.hi = boost::math::quantile(upper, 1.0 - alpha / 2.0);
  }
  return out;
}

LogMeanExp log_mean_exp(std::span<const double> x, double lambda) {
  if (x.empty()) throw Error(ErrorCode::contract, "log-mean-exp of an empty sample");
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : x) peak = std::max(peak, lambda * v);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : x) {
    const double w = std::exp(lambda * v - peak);
    sum += w;
    sum_sq += w * w;
  }
  const auto n = static_cast<double>(x.size());
  const double mean = sum / n;
  LogMeanExp out{};
  out.value = lambda == 0.0 ? 0.0 : peak + std::log(mean);
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  out.std_error = std::sqrt(var / n) / mean;
  out.max_share = 1.0 / sum;
  return out;
}

Moments moments(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::contract, "moments of an empty sample");
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, var, std::sqrt(var / n)};
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace tailbound::stats
