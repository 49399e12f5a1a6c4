#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tailbound/young.hpp"

namespace tailbound {

/// n draws of a d-dimensional vector, row-major.
class SampleMatrix {
 public:
  SampleMatrix(std::size_t rows, std::size_t cols);
  SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static SampleMatrix column(std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column_values(std::size_t c) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Sign vector number `index` of Theta(d), in lexicographic order with
/// -1 < +1: index 0 is (-1, ..., -1), index 2^d - 1 is (+1, ..., +1).
std::vector<int> sign_vector(std::size_t index, std::size_t dim);

/// Empirical log-MGF on a tensor lambda grid (nonnegative axes), maximized
/// over sign vectors (two-sided) or with eps = (+1, ..., +1) only.
struct MgfEstimate {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;       ///< row-major over axes
  std::vector<double> std_errors;
  std::vector<std::size_t> sign_index;    ///< maximizing eps per grid point
  std::vector<std::size_t> member_index;  ///< maximizing family member (0 for a single vector)
  std::vector<std::uint8_t> kramer_flag;  ///< 1 when one draw dominates the mean
  std::size_t sample_count = 0;
  bool one_sided = false;

  std::size_t dimension() const { return axes.size(); }
  std::size_t unreliable_points() const;

  /// 1-d estimate as a tabulated generating function on lambda >= 0.
  /// Negative values (possible when the sample mean is below zero) are
  /// clamped to 0, and the domain ends at the last grid point before the
  /// first Kramer-flagged one.
  YoungFunction to_young() const;
};

struct NaturalFunctionOptions {
  bool one_sided = false;
  bool check_centering = true;
  /// A grid point is flagged when the largest summand exceeds this share
  /// of the exponential sum.
  double kramer_share = 0.5;
  unsigned threads = 1;
};

/// log E exp((eps (x) lambda, xi)) maximized over eps, estimated by
/// log-mean-exp. Needs n >= 100 centered draws.
MgfEstimate natural_function(const SampleMatrix& samples,
                             const std::vector<std::vector<double>>& lambda_axes,
                             const NaturalFunctionOptions& options = {});

/// Same estimate for each member of an indexed family (e.g. the field at
/// several t), reduced by the supremum over members.
MgfEstimate natural_function_family(std::span<const SampleMatrix> family,
                                    const std::vector<std::vector<double>>& lambda_axes,
                                    const NaturalFunctionOptions& options = {});

struct NormOptions {
  double tau_lo = 1e-8;
  double tau_hi = 1e8;
  int iterations = 60;
  std::size_t lambda_points = 512;
  /// Geometric grid range used when the generating function has infinite
  /// radius; with a finite radius r the grid spans [lambda_lo * r, (1 - 1e-6) r].
  double lambda_lo = 1e-4;
  double lambda_hi = 50.0;
};

using LogMgf = std::function<double(double)>;
using VectorLogMgf = std::function<double(std::span<const double>)>;

/// Geometric lambda grid over (0, radius) used by the norm computations.
std::vector<double> norm_lambda_grid(const YoungFunction& phi, const NormOptions& options);

/// inf{tau > 0 : logmgf(l) <= phi(l tau) for all grid l}; grid points with
/// a nonzero entry in `skip` are left out. +inf when even tau_hi fails.
double bplus_norm_on_grid(std::span<const double> lambda, std::span<const double> logmgf,
                          const YoungFunction& phi, const NormOptions& options = {},
                          std::span<const std::uint8_t> skip = {});

/// One-sided quasi-norm ||xi||+ in B+(phi).
double bplus_norm(const LogMgf& logmgf, const YoungFunction& phi, const NormOptions& options = {});

/// Two-sided norm ||xi|| in B(phi): feasibility over every sign pattern.
/// `logmgf` receives the signed argument eps (x) lambda.
double bphi_norm(const VectorLogMgf& logmgf, const YoungFunction& phi,
                 const NormOptions& options = {});

/// min(1, exp(-phi*(x / norm))).
double chernov_bound_nd(const ConjugateTable& conj, std::span<const double> x, double norm);
double chernov_bound(const ConjugateTable& conj, double x, double norm);

/// min(1, 2^d exp(-phi*(y/norm, ..., y/norm))), bounding P(min_j |xi(j)| > y).
double min_coordinate_bound(const ConjugateTable& conj, double y, double norm);

struct TailObservation {
  std::vector<double> x;
  double value = 0.0;  ///< max over eps of the joint orthant exceedance fraction
  std::uint64_t exceedances = 0;
  std::size_t sample_count = 0;
  std::size_t sign_index = 0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  double confidence = 0.99;
};

TailObservation empirical_tail(const SampleMatrix& samples, std::span<const double> x,
                               double confidence = 0.99);

}  // namespace tailbound
