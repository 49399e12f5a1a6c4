#include "tailbound/phispace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailbound/error.hpp"
#include "tailbound/parallel.hpp"
#include "tailbound/stats.hpp"

namespace tailbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinNaturalSamples = 100;

std::size_t grid_size(const std::vector<std::vector<double>>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

std::vector<double> grid_point(const std::vector<std::vector<double>>& axes, std::size_t flat) {
  std::vector<double> p(axes.size());
  for (std::size_t j = axes.size(); j-- > 0;) {
    p[j] = axes[j][flat % axes[j].size()];
    flat /= axes[j].size();
  }
  return p;
}

void check_lambda_axes(const std::vector<std::vector<double>>& axes, std::size_t dim) {
  if (axes.size() != dim) throw Error(ErrorCode::contract, "lambda grid dimension mismatch");
  for (const auto& a : axes) {
    if (a.empty()) throw Error(ErrorCode::contract, "lambda grid axis is empty");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < 0.0) throw Error(ErrorCode::contract, "lambda grid axes must be nonnegative");
      if (i > 0 && !(a[i] > a[i - 1]))
        throw Error(ErrorCode::contract, "lambda grid axes must be strictly increasing");
    }
  }
}

void check_centering(const SampleMatrix& s) {
  for (std::size_t c = 0; c < s.cols(); ++c) {
    const auto col = s.column_values(c);
    const auto m = stats::moments(col);
    if (std::abs(m.mean) > 3.0 * m.std_error)
      throw Error(ErrorCode::centering,
                  "column " + std::to_string(c) + " is not centered: mean " + std::to_string(m.mean) +
                      " exceeds 3 standard errors (" + std::to_string(m.std_error) + ")");
  }
}

struct PointEstimate {
  double value = -kInf;
  double std_error = 0.0;
  std::size_t sign = 0;
  bool flagged = false;
};

PointEstimate estimate_point(const SampleMatrix& s, std::span<const double> lambda,
                             const NaturalFunctionOptions& opt, std::vector<double>& scratch) {
  const std::size_t d = s.cols();
  const std::size_t signs = std::size_t{1} << d;
  const std::size_t first = opt.one_sided ? signs - 1 : 0;
  PointEstimate best;
  scratch.resize(s.rows());
  for (std::size_t e = first; e < signs; ++e) {
    const auto eps = sign_vector(e, d);
    stats::LogMeanExp lme{};
    if (d == 1) {
      for (std::size_t r = 0; r < s.rows(); ++r) scratch[r] = s(r, 0);
      lme = stats::log_mean_exp(scratch, eps[0] * lambda[0]);
    } else {
      for (std::size_t r = 0; r < s.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += eps[j] * lambda[j] * s(r, j);
        scratch[r] = acc;
      }
      lme = stats::log_mean_exp(scratch, 1.0);
    }
    if (lme.value > best.value) {
      best.value = lme.value;
      best.std_error = lme.std_error;
      best.sign = e;
      best.flagged = lme.max_share > opt.kramer_share;
    }
  }
  return best;
}

MgfEstimate estimate(std::span<const SampleMatrix> family,
                     const std::vector<std::vector<double>>& axes,
                     const NaturalFunctionOptions& opt) {
  if (family.empty()) throw Error(ErrorCode::contract, "natural function needs at least one sample set");
  const std::size_t d = family.front().cols();
  check_lambda_axes(axes, d);
  for (const auto& s : family) {
    if (s.cols() != d) throw Error(ErrorCode::contract, "family members differ in dimension");
    if (s.rows() < kMinNaturalSamples)
      throw Error(ErrorCode::contract, "natural function needs at least 100 draws");
    if (opt.check_centering) check_centering(s);
  }

  MgfEstimate out;
  out.axes = axes;
  out.one_sided = opt.one_sided;
  out.sample_count = family.front().rows();
  const std::size_t points = grid_size(axes);
  out.values.assign(points, 0.0);
  out.std_errors.assign(points, 0.0);
  out.sign_index.assign(points, 0);
  out.member_index.assign(points, 0);
  out.kramer_flag.assign(points, 0);

  parallel_for(points, opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> scratch;
    for (std::size_t flat = begin; flat < end; ++flat) {
      const auto lambda = grid_point(axes, flat);
      PointEstimate best;
      std::size_t member = 0;
      for (std::size_t k = 0; k < family.size(); ++k) {
        const PointEstimate p = estimate_point(family[k], lambda, opt, scratch);
        if (p.value > best.value) {
          best = p;
          member = k;
        }
      }
      out.values[flat] = best.value;
      out.std_errors[flat] = best.std_error;
      out.sign_index[flat] = best.sign;
      out.member_index[flat] = member;
      out.kramer_flag[flat] = best.flagged ? 1 : 0;
    }
  });
  return out;
}

bool feasible(std::span<const double> lambda, std::span<const double> logmgf, const YoungFunction& phi,
              double tau, std::span<const std::uint8_t> skip) {
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    const double bound = phi(lambda[i] * tau);
    if (!(logmgf[i] <= bound + 1e-12 * std::max(1.0, std::abs(logmgf[i])))) return false;
  }
  return true;
}

template <typename Feasible>
double bisect_tau(Feasible&& ok, const NormOptions& opt) {
  if (!ok(opt.tau_hi)) return kInf;
  if (ok(opt.tau_lo)) return opt.tau_lo;
  double lo = std::log(opt.tau_lo);
  double hi = std::log(opt.tau_hi);
  for (int it = 0; it < opt.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(std::exp(mid)))
      hi = mid;
    else
      lo = mid;
  }
  return std::exp(hi);
}

std::vector<double> geometric(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) return {hi};
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace

// ---------------------------------------------------------- SampleMatrix

SampleMatrix::SampleMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (cols == 0) throw Error(ErrorCode::contract, "sample matrix needs at least one column");
}

SampleMatrix::SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (cols == 0 || data_.size() != rows * cols)
    throw Error(ErrorCode::contract, "sample matrix data does not match its shape");
}

SampleMatrix SampleMatrix::column(std::vector<double> values) {
  const std::size_t n = values.size();
  return SampleMatrix(n, 1, std::move(values));
}

std::vector<double> SampleMatrix::column_values(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

std::vector<int> sign_vector(std::size_t index, std::size_t dim) {
  std::vector<int> eps(dim);
  for (std::size_t j = 0; j < dim; ++j) eps[j] = ((index >> (dim - 1 - j)) & 1u) ? 1 : -1;
  return eps;
}

// ----------------------------------------------------------- MgfEstimate

std::size_t MgfEstimate::unreliable_points() const {
  return static_cast<std::size_t>(std::count(kramer_flag.begin(), kramer_flag.end(), 1));
}

YoungFunction MgfEstimate::to_young() const {
  if (axes.size() != 1) throw Error(ErrorCode::contract, "only 1-d estimates convert to a generating function");
  const auto& lam = axes.front();
  if (lam.front() != 0.0) throw Error(ErrorCode::contract, "lambda grid must start at 0");
  std::vector<double> l, v;
  for (std::size_t i = 0; i < lam.size() && !kramer_flag[i]; ++i) {
    l.push_back(lam[i]);
    v.push_back(std::max(0.0, values[i]));
  }
  if (l.size() < 2)
    throw Error(ErrorCode::domain, "no reliable lambda range: the first positive grid point is Kramer-flagged");
  return YoungFunction::tabulated(std::move(l), std::move(v));
}

MgfEstimate natural_function(const SampleMatrix& samples,
                             const std::vector<std::vector<double>>& lambda_axes,
                             const NaturalFunctionOptions& options) {
  return estimate(std::span<const SampleMatrix>(&samples, 1), lambda_axes, options);
}

MgfEstimate natural_function_family(std::span<const SampleMatrix> family,
                                    const std::vector<std::vector<double>>& lambda_axes,
                                    const NaturalFunctionOptions& options) {
  return estimate(family, lambda_axes, options);
}

// ------------------------------------------------------------------ norms

std::vector<double> norm_lambda_grid(const YoungFunction& phi, const NormOptions& opt) {
  if (opt.lambda_points < 2) throw Error(ErrorCode::contract, "norm lambda grid needs >= 2 points");
  const double r = phi.radius();
  if (std::isfinite(r)) {
    const double hi = (1.0 - 1e-6) * r;
    return geometric(opt.lambda_lo * r, hi, opt.lambda_points);
  }
  return geometric(opt.lambda_lo, opt.lambda_hi, opt.lambda_points);
}

double bplus_norm_on_grid(std::span<const double> lambda, std::span<const double> logmgf,
                          const YoungFunction& phi, const NormOptions& opt,
                          std::span<const std::uint8_t> skip) {
  if (lambda.size() != logmgf.size() || (!skip.empty() && skip.size() != lambda.size()))
    throw Error(ErrorCode::contract, "lambda grid and log-MGF values differ in length");
  bool degenerate = true;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    if (std::isnan(logmgf[i])) throw Error(ErrorCode::contract, "log-MGF is NaN on the grid");
    if (logmgf[i] > 1e-15) degenerate = false;
  }
  if (degenerate) return 0.0;
  return bisect_tau([&](double tau) { return feasible(lambda, logmgf, phi, tau, skip); }, opt);
}

double bplus_norm(const LogMgf& logmgf, const YoungFunction& phi, const NormOptions& opt) {
  if (phi.dimension() != 1) throw Error(ErrorCode::contract, "bplus_norm needs a 1-d generating function");
  const double at_zero = logmgf(0.0);
  if (at_zero != 0.0) throw Error(ErrorCode::contract, "log-MGF must vanish at lambda = 0");
  const auto lambda = norm_lambda_grid(phi, opt);
  std::vector<double> values(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) values[i] = logmgf(lambda[i]);
  return bplus_norm_on_grid(lambda, values, phi, opt);
}

double bphi_norm(const VectorLogMgf& logmgf, const YoungFunction& phi, const NormOptions& opt) {
  const std::size_t d = phi.dimension();
  {
    const std::vector<double> zero(d, 0.0);
    if (logmgf(zero) != 0.0) throw Error(ErrorCode::contract, "log-MGF must vanish at lambda = 0");
  }
  // Per-axis grid: {0} plus geometric points up to the domain edge.
  const auto per_axis = std::max<std::size_t>(
      8, static_cast<std::size_t>(std::round(std::pow(static_cast<double>(opt.lambda_points),
                                                      1.0 / static_cast<double>(d)))));
  std::vector<std::vector<double>> axes(d);
  const MultiDomain& dom = phi.domain();
  for (std::size_t j = 0; j < d; ++j) {
    double hi = opt.lambda_hi;
    double lo = opt.lambda_lo;
    if (dom.shape == MultiDomain::Shape::box && std::isfinite(dom.upper[j])) {
      hi = (1.0 - 1e-6) * dom.upper[j];
      lo = opt.lambda_lo * dom.upper[j];
    } else if (dom.shape == MultiDomain::Shape::ellipsoid) {
      const auto jj = static_cast<Eigen::Index>(j);
      hi = (1.0 - 1e-6) / std::sqrt(dom.shape_matrix(jj, jj));
      lo = opt.lambda_lo * hi;
    }
    axes[j] = d == 1 ? geometric(lo, hi, opt.lambda_points) : geometric(lo, hi, per_axis);
    if (d > 1) axes[j].insert(axes[j].begin(), 0.0);
  }

  std::vector<std::vector<double>> points;
  std::vector<double> values;
  const std::size_t total = grid_size(axes);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const auto lambda = grid_point(axes, flat);
    if (std::all_of(lambda.begin(), lambda.end(), [](double v) { return v == 0.0; })) continue;
    for (std::size_t e = 0; e < (std::size_t{1} << d); ++e) {
      const auto eps = sign_vector(e, d);
      std::vector<double> signed_lambda(d);
      for (std::size_t j = 0; j < d; ++j) signed_lambda[j] = eps[j] * lambda[j];
      values.push_back(logmgf(signed_lambda));
      points.push_back(std::move(signed_lambda));
    }
  }
  bool degenerate = true;
  for (double v : values) {
    if (std::isnan(v)) throw Error(ErrorCode::contract, "log-MGF is NaN on the grid");
    if (v > 1e-15) degenerate = false;
  }
  if (degenerate) return 0.0;

  auto ok = [&](double tau) {
    std::vector<double> scaled(d);
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) scaled[j] = points[i][j] * tau;
      const double bound = phi(std::span<const double>(scaled));
      if (!(values[i] <= bound + 1e-12 * std::max(1.0, std::abs(values[i])))) return false;
    }
    return true;
  };
  return bisect_tau(ok, opt);
}

// ---------------------------------------------------------- tail bounds

double chernov_bound_nd(const ConjugateTable& conj, std::span<const double> x, double norm) {
  if (!(norm > 0.0)) throw Error(ErrorCode::contract, "norm must be positive");
  std::vector<double> scaled(x.begin(), x.end());
  for (auto& v : scaled) {
    if (v < 0.0) throw Error(ErrorCode::contract, "threshold must be componentwise nonnegative");
    v /= norm;
  }
  return std::min(1.0, std::exp(-conj.value_at(scaled)));
}

double chernov_bound(const ConjugateTable& conj, double x, double norm) {
  return chernov_bound_nd(conj, std::span<const double>(&x, 1), norm);
}

double min_coordinate_bound(const ConjugateTable& conj, double y, double norm) {
  if (!(y > 0.0) || !(norm > 0.0)) throw Error(ErrorCode::contract, "y and norm must be positive");
  const std::size_t d = conj.dimension();
  const std::vector<double> point(d, y / norm);
  const double bound = std::ldexp(std::exp(-conj.value_at(point)), static_cast<int>(d));
  return std::min(1.0, bound);
}

TailObservation empirical_tail(const SampleMatrix& samples, std::span<const double> x,
                               double confidence) {
  const std::size_t d = samples.cols();
  if (samples.rows() == 0) throw Error(ErrorCode::contract, "empirical tail needs at least one draw");
  if (x.size() != d) throw Error(ErrorCode::contract, "threshold dimension does not match samples");
  for (double v : x)
    if (v < 0.0) throw Error(ErrorCode::contract, "threshold must be componentwise nonnegative");

  TailObservation out;
  out.x.assign(x.begin(), x.end());
  out.sample_count = samples.rows();
  out.confidence = confidence;
  bool first = true;
  for (std::size_t e = 0; e < (std::size_t{1} << d); ++e) {
    const auto eps = sign_vector(e, d);
    std::uint64_t count = 0;
    for (std::size_t r = 0; r < samples.rows(); ++r) {
      bool all = true;
      for (std::size_t j = 0; j < d && all; ++j) all = eps[j] * samples(r, j) > x[j];
      if (all) ++count;
    }
    if (first || count > out.exceedances) {
      out.exceedances = count;
      out.sign_index = e;
      first = false;
    }
  }
  out.value = static_cast<double>(out.exceedances) / static_cast<double>(out.sample_count);
  const auto ci = stats::clopper_pearson(out.exceedances, out.sample_count, confidence);
  out.ci_lo = ci.lo;
  out.ci_hi = ci.hi;
  return out;
}

}  // namespace tailbound
