#pragma once

#include <cstdint>
#include <span>

namespace tailbound::stats {

struct Interval {
  double lo;
  double hi;
};

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence);

struct LogMeanExp {
  double value;       ///< log((1/n) sum exp(a_i))
  double std_error;   ///< delta-method standard error of value
  double max_share;   ///< largest summand's share of the sum
};

/// Numerically stable log-mean-exp of lambda * x_i.
LogMeanExp log_mean_exp(std::span<const double> x, double lambda);

struct Moments {
  double mean;
  double variance;  ///< unbiased
  double std_error; ///< of the mean
};

Moments moments(std::span<const double> x);

/// Standard normal upper tail P(Z > x).
double normal_upper_tail(double x);

}  // namespace tailbound::stats
