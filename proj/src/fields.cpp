#include "tailbound/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "tailbound/error.hpp"
#include "tailbound/parallel.hpp"
#include "tailbound/rng.hpp"
#include "tailbound/stats.hpp"

namespace tailbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> geometric(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

void sorted_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<double> even_grid(std::size_t resolution) {
  std::vector<double> g(resolution);
  for (std::size_t i = 0; i < resolution; ++i)
    g[i] = resolution == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(resolution - 1);
  return g;
}

}  // namespace

// ------------------------------------------------------------ FieldModel

FieldModel FieldModel::constant_gaussian(std::size_t dim) {
  FieldModel m;
  m.kind = Kind::constant_gaussian;
  m.dimension = dim;
  return m;
}

FieldModel FieldModel::constant_poisson(double mu, std::size_t dim) {
  FieldModel m;
  m.kind = Kind::constant_poisson;
  m.dimension = dim;
  m.mu = mu;
  return m;
}

FieldModel FieldModel::compound_poisson(double mu, std::size_t dim) {
  FieldModel m;
  m.kind = Kind::compound_poisson;
  m.dimension = dim;
  m.mu = mu;
  return m;
}

FieldModel FieldModel::empirical_process(std::size_t n, std::size_t dim) {
  FieldModel m;
  m.kind = Kind::empirical_process;
  m.dimension = dim;
  m.sample_size = n;
  return m;
}

void FieldModel::validate() const {
  if (dimension < 1 || dimension > 4) throw Error(ErrorCode::config, "field dimension must be in 1..4");
  if ((kind == Kind::constant_poisson || kind == Kind::compound_poisson) && !(mu > 0.0 && std::isfinite(mu)))
    throw Error(ErrorCode::config, "Poisson intensity mu must be positive");
  if (kind == Kind::empirical_process && sample_size < 1)
    throw Error(ErrorCode::config, "empirical process needs sample size n >= 1");
}

std::string to_string(FieldModel::Kind kind) {
  switch (kind) {
    case FieldModel::Kind::constant_gaussian: return "constant_gaussian";
    case FieldModel::Kind::constant_poisson: return "constant_poisson";
    case FieldModel::Kind::compound_poisson: return "compound_poisson";
    case FieldModel::Kind::empirical_process: return "empirical_process";
  }
  return "unknown";
}

std::string FieldModel::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(m=" << dimension;
  if (kind == Kind::constant_poisson || kind == Kind::compound_poisson) os << ", mu=" << mu;
  if (kind == Kind::empirical_process) os << ", n=" << sample_size;
  os << ')';
  return os.str();
}

// ------------------------------------------------------------- FieldPath

FieldPath FieldPath::constant(std::size_t dim, double value) {
  FieldPath p(Kind::constant, dim);
  p.constant_ = value;
  return p;
}

FieldPath FieldPath::jump_sum(std::size_t dim, std::vector<double> points, std::vector<double> weights) {
  if (points.size() != weights.size() * dim)
    throw Error(ErrorCode::contract, "jump locations and weights differ in count");
  FieldPath p(Kind::jump_sum, dim);
  p.points_ = std::move(points);
  p.weights_ = std::move(weights);
  return p;
}

FieldPath FieldPath::empirical(std::size_t dim, std::vector<double> points, double scale) {
  if (dim == 0 || points.size() % dim != 0 || points.empty())
    throw Error(ErrorCode::contract, "empirical path needs at least one point");
  FieldPath p(Kind::empirical, dim);
  const std::size_t n = points.size() / dim;
  p.points_ = std::move(points);
  p.weights_.assign(n, 1.0);
  p.scale_ = scale;
  p.total_ = static_cast<double>(n);
  return p;
}

double FieldPath::value_from_count(double acc, std::span<const double> t) const {
  switch (kind_) {
    case Kind::constant: return constant_;
    case Kind::jump_sum: return acc;
    case Kind::empirical: {
      double vol = 1.0;
      for (double x : t) vol *= x;
      return scale_ * (acc / total_ - vol);
    }
  }
  return 0.0;
}

double FieldPath::value(std::span<const double> t) const {
  if (t.size() != dim_) throw Error(ErrorCode::contract, "evaluation point has the wrong dimension");
  if (kind_ == Kind::constant) return constant_;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    bool below = true;
    for (std::size_t j = 0; j < dim_ && below; ++j) below = points_[k * dim_ + j] <= t[j];
    if (below) acc += weights_[k];
  }
  return value_from_count(acc, t);
}

double FieldPath::value(double t) const { return value(std::span<const double>(&t, 1)); }

FieldPath::Extremes FieldPath::extremes_1d(std::size_t grid_resolution) const {
  std::vector<std::size_t> order(weights_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points_[a] < points_[b]; });
  std::vector<double> coords = even_grid(grid_resolution);
  coords.push_back(0.0);
  coords.insert(coords.end(), points_.begin(), points_.end());
  sorted_unique(coords);

  Extremes e{-kInf, kInf};
  double acc = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double t = coords[i];
    while (next < order.size() && points_[order[next]] <= t) acc += weights_[order[next++]];
    const double v = value_from_count(acc, std::span<const double>(&t, 1));
    e.sup = std::max(e.sup, v);
    e.inf = std::min(e.inf, v);
    // Left limit at the next coordinate.
    if (kind_ == Kind::empirical && i + 1 < coords.size())
      e.inf = std::min(e.inf, v - scale_ * (coords[i + 1] - t));
  }
  return e;
}

FieldPath::Extremes FieldPath::extremes(std::size_t grid_resolution) const {
  if (kind_ == Kind::constant) return {constant_, constant_};
  if (dim_ == 1) return extremes_1d(grid_resolution);

  std::vector<std::vector<double>> axes(dim_, even_grid(grid_resolution));
  for (std::size_t j = 0; j < dim_; ++j) {
    axes[j].push_back(0.0);
    for (std::size_t k = 0; k < weights_.size(); ++k) axes[j].push_back(points_[k * dim_ + j]);
    sorted_unique(axes[j]);
  }
  Extremes e{-kInf, kInf};
  std::vector<std::size_t> idx(dim_, 0);
  std::vector<double> t(dim_);
  while (true) {
    for (std::size_t j = 0; j < dim_; ++j) t[j] = axes[j][idx[j]];
    const double v = value(t);
    e.sup = std::max(e.sup, v);
    e.inf = std::min(e.inf, v);
    if (kind_ == Kind::empirical) {
      double lower = 1.0, upper = 1.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        lower *= t[j];
        upper *= idx[j] + 1 < axes[j].size() ? axes[j][idx[j] + 1] : t[j];
      }
      e.inf = std::min(e.inf, v - scale_ * (upper - lower));
    }
    std::size_t j = dim_;
    while (j > 0) {
      --j;
      if (++idx[j] < axes[j].size()) break;
      idx[j] = 0;
      if (j == 0) return e;
    }
  }
}

double FieldPath::grid_max(std::size_t grid_resolution) const {
  const auto g = even_grid(grid_resolution);
  std::vector<std::size_t> idx(dim_, 0);
  std::vector<double> t(dim_);
  double best = -kInf;
  while (true) {
    for (std::size_t j = 0; j < dim_; ++j) t[j] = g[idx[j]];
    best = std::max(best, value(t));
    std::size_t j = dim_;
    while (j > 0) {
      --j;
      if (++idx[j] < g.size()) break;
      idx[j] = 0;
      if (j == 0) return best;
    }
  }
}

FieldPath FieldPath::normalized_sum(std::span<const FieldPath> paths) {
  if (paths.empty()) throw Error(ErrorCode::contract, "normalized sum needs at least one path");
  const Kind kind = paths.front().kind_;
  const std::size_t dim = paths.front().dim_;
  for (const auto& p : paths)
    if (p.kind_ != kind || p.dim_ != dim) throw Error(ErrorCode::contract, "summed paths must share kind and dimension");
  const double root = std::sqrt(static_cast<double>(paths.size()));

  FieldPath out(kind, dim);
  if (kind == Kind::constant) {
    double s = 0.0;
    for (const auto& p : paths) s += p.constant_;
    out.constant_ = s / root;
    return out;
  }
  for (const auto& p : paths) {
    out.points_.insert(out.points_.end(), p.points_.begin(), p.points_.end());
    out.weights_.insert(out.weights_.end(), p.weights_.begin(), p.weights_.end());
  }
  if (kind == Kind::jump_sum) {
    for (double& w : out.weights_) w /= root;
    return out;
  }
  double scale = 0.0;
  double total = 0.0;
  for (const auto& p : paths) {
    if (p.total_ != paths.front().total_)
      throw Error(ErrorCode::contract, "empirical paths in a sum must share the sample size");
    scale += p.scale_;
    total += p.total_;
  }
  out.scale_ = scale / root;
  out.total_ = total;
  return out;
}

// -------------------------------------------------------------- sampling

FieldPath sample_field(const FieldModel& model, std::uint64_t seed, std::uint64_t stream, std::uint32_t substream) {
  model.validate();
  PhiloxEngine eng(seed, stream, substream);
  const std::size_t dim = model.dimension;
  switch (model.kind) {
    case FieldModel::Kind::constant_gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      return FieldPath::constant(dim, normal(eng));
    }
    case FieldModel::Kind::constant_poisson: {
      std::poisson_distribution<long> poisson(model.mu);
      const double k = static_cast<double>(poisson(eng));
      return FieldPath::constant(dim, (k - model.mu) / std::sqrt(model.mu));
    }
    case FieldModel::Kind::compound_poisson: {
      std::poisson_distribution<long> poisson(model.mu);
      std::exponential_distribution<double> expo(1.0);
      const auto k = static_cast<std::size_t>(poisson(eng));
      const double root = std::sqrt(model.mu);
      std::vector<double> points(k * dim);
      std::vector<double> weights(k);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < dim; ++j) points[i * dim + j] = eng.uniform_open();
        weights[i] = (expo(eng) - 1.0) / root;
      }
      return FieldPath::jump_sum(dim, std::move(points), std::move(weights));
    }
    case FieldModel::Kind::empirical_process: {
      const std::size_t n = model.sample_size;
      std::vector<double> points(n * dim);
      for (double& x : points) x = eng.uniform_open();
      return FieldPath::empirical(dim, std::move(points), std::sqrt(static_cast<double>(n)));
    }
  }
  throw Error(ErrorCode::config, "unknown field model");
}

FieldPath sample_sum_field(const FieldModel& model, std::size_t summands, std::uint64_t seed, std::uint64_t stream) {
  if (summands == 0) throw Error(ErrorCode::config, "number of summands must be >= 1");
  if (summands == 1) return sample_field(model, seed, stream, 0);
  std::vector<FieldPath> paths;
  paths.reserve(summands);
  for (std::size_t j = 0; j < summands; ++j)
    paths.push_back(sample_field(model, seed, stream, static_cast<std::uint32_t>(j)));
  return FieldPath::normalized_sum(paths);
}

// ------------------------------------------------------------ Monte Carlo

std::vector<double> sample_sups(const FieldModel& model, std::size_t summands, const McOptions& options) {
  model.validate();
  if (options.replicates == 0) throw Error(ErrorCode::config, "replicate count must be positive");
  if (options.grid_resolution < 2) throw Error(ErrorCode::config, "evaluation grid needs >= 2 points per axis");
  std::vector<double> sups(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const FieldPath path = sample_sum_field(model, summands, options.seed, i);
      const auto e = path.extremes(options.grid_resolution);
      sups[i] = options.two_sided ? std::max(e.sup, -e.inf) : e.sup;
    }
  });
  return sups;
}

McReport tail_report(std::span<const double> sups, const McOptions& options, std::size_t summands) {
  McReport r;
  r.u = options.u_grid;
  r.replicates = sups.size();
  r.summands = summands;
  r.grid_resolution = options.grid_resolution;
  r.confidence = options.confidence;
  r.seed = options.seed;
  r.two_sided = options.two_sided;
  for (double u : options.u_grid) {
    const auto k = static_cast<std::uint64_t>(std::count_if(sups.begin(), sups.end(), [u](double s) { return s > u; }));
    const auto ci = stats::clopper_pearson(k, sups.size(), options.confidence);
    r.exceedances.push_back(k);
    r.estimate.push_back(static_cast<double>(k) / static_cast<double>(sups.size()));
    r.ci_lo.push_back(ci.lo);
    r.ci_hi.push_back(ci.hi);
  }
  return r;
}

McReport mc_sup_tail(const FieldModel& model, const McOptions& options) {
  return mc_sum_sup_tail(model, 1, options);
}

McReport mc_sum_sup_tail(const FieldModel& model, std::size_t summands, const McOptions& options) {
  if (summands == 0) throw Error(ErrorCode::config, "number of summands must be >= 1");
  const auto sups = sample_sups(model, summands, options);
  return tail_report(sups, options, summands);
}

// ------------------------------------------------------- increment norms

IncrementNormResult increment_norm_from_samples(std::span<const double> increments, const YoungFunction& phi,
                                                const IncrementNormOptions& options) {
  if (increments.size() < 100) throw Error(ErrorCode::contract, "increment norm needs at least 100 draws");
  if (phi.dimension() != 1) throw Error(ErrorCode::contract, "increment norms need a 1-d generating function");
  if (options.summands == 0) throw Error(ErrorCode::config, "number of summands must be >= 1");
  IncrementNormResult out;
  const auto mom = stats::moments(increments);
  out.mean = mom.mean;
  out.std_error = mom.std_error;
  if (std::all_of(increments.begin(), increments.end(), [](double x) { return x == 0.0; })) return out;
  if (options.check_centering && mom.mean > 3.0 * mom.std_error)
    throw Error(ErrorCode::centering, "increment sample mean " + std::to_string(mom.mean) +
                                          " is positive beyond 3 standard errors");

  std::vector<double> centered(increments.begin(), increments.end());
  for (double& v : centered) v -= mom.mean;

  const double r = phi.radius();
  const auto& no = options.norm;
  const auto lambda = std::isfinite(r) ? geometric(no.lambda_lo * r, options.lambda_span * r, no.lambda_points)
                                       : geometric(no.lambda_lo, no.lambda_hi, no.lambda_points);
  const double n = static_cast<double>(options.summands);
  const double root = std::sqrt(n);
  std::vector<double> values(lambda.size());
  std::vector<std::uint8_t> skip(lambda.size(), 0);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const auto lme = stats::log_mean_exp(centered, lambda[i] / root);
    values[i] = n * lme.value;
    if (lme.max_share > options.kramer_share || !std::isfinite(lme.value)) {
      skip[i] = 1;
      values[i] = 0.0;
      ++out.kramer_points;
    }
  }
  out.norm = bplus_norm_on_grid(lambda, values, phi, no, skip);
  return out;
}

IncrementNormResult estimate_increment_norm(const FieldModel& model, std::span<const double> t,
                                            std::span<const double> s, const YoungFunction& phi,
                                            std::size_t replicates, std::uint64_t seed,
                                            const IncrementNormOptions& options) {
  model.validate();
  if (replicates < 10'000) throw Error(ErrorCode::config, "increment norm estimation needs R >= 10^4");
  if (t.size() != model.dimension || s.size() != model.dimension)
    throw Error(ErrorCode::contract, "increment points have the wrong dimension");
  if (std::equal(t.begin(), t.end(), s.begin())) return {};
  std::vector<double> inc(replicates);
  for (std::size_t i = 0; i < replicates; ++i) {
    const FieldPath p = sample_field(model, seed, i);
    inc[i] = p.value(t) - p.value(s);
  }
  return increment_norm_from_samples(inc, phi, options);
}

EmpiricalIncrementModel::EmpiricalIncrementModel(const FieldModel& model, YoungFunction phi, std::size_t replicates,
                                                 std::uint64_t seed, IncrementNormOptions options, std::string phi_id)
    : model_(model), phi_(std::move(phi)), options_(options), phi_id_(std::move(phi_id)) {
  model_.validate();
  if (replicates < 10'000) throw Error(ErrorCode::config, "increment norm estimation needs R >= 10^4");
  bank_.reserve(replicates);
  for (std::size_t i = 0; i < replicates; ++i) bank_.push_back(sample_field(model_, seed, i));
}

double EmpiricalIncrementModel::norm(std::span<const double> t, std::span<const double> s) const {
  if (std::equal(t.begin(), t.end(), s.begin(), s.end())) return 0.0;
  std::vector<double> key(t.begin(), t.end());
  key.insert(key.end(), s.begin(), s.end());
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::vector<double> inc(bank_.size());
  for (std::size_t i = 0; i < bank_.size(); ++i) inc[i] = bank_[i].value(t) - bank_[i].value(s);
  const double v = increment_norm_from_samples(inc, phi_, options_).norm;
  std::lock_guard lock(mutex_);
  cache_.emplace(std::move(key), v);
  return v;
}

LagIncrementModel::LagIncrementModel(const FieldModel& model, YoungFunction phi, std::size_t replicates,
                                     std::uint64_t seed, std::size_t lag_count, double min_lag,
                                     IncrementNormOptions options, std::string phi_id)
    : phi_id_(std::move(phi_id)) {
  model.validate();
  if (model.kind != FieldModel::Kind::compound_poisson || model.dimension != 1)
    throw Error(ErrorCode::contract, "lag tabulation needs the 1-d compound-Poisson field");
  if (replicates < 10'000) throw Error(ErrorCode::config, "increment norm estimation needs R >= 10^4");
  if (lag_count < 2 || !(min_lag > 0.0 && min_lag < 1.0))
    throw Error(ErrorCode::config, "lag table needs >= 2 lags and a minimum lag in (0,1)");
  lags_ = geometric(min_lag, 1.0, lag_count);
  std::vector<FieldPath> bank;
  bank.reserve(replicates);
  for (std::size_t i = 0; i < replicates; ++i) bank.push_back(sample_field(model, seed, i));
  std::vector<double> inc(replicates);
  double fwd = 0.0;
  double bwd = 0.0;
  for (double d : lags_) {
    for (std::size_t i = 0; i < replicates; ++i) inc[i] = bank[i].value(0.0) - bank[i].value(d);
    fwd = std::max(fwd, increment_norm_from_samples(inc, phi, options).norm);
    forward_.push_back(fwd);
    for (double& x : inc) x = -x;
    bwd = std::max(bwd, increment_norm_from_samples(inc, phi, options).norm);
    backward_.push_back(bwd);
  }
}

double LagIncrementModel::norm(std::span<const double> t, std::span<const double> s) const {
  const double lag = s[0] - t[0];
  if (lag == 0.0) return 0.0;
  const double a = std::abs(lag);
  auto it = std::lower_bound(lags_.begin(), lags_.end(), a);
  const std::size_t i = it == lags_.end() ? lags_.size() - 1 : static_cast<std::size_t>(it - lags_.begin());
  return lag > 0.0 ? forward_[i] : backward_[i];
}

std::vector<SampleMatrix> field_point_samples(const FieldModel& model, const std::vector<double>& points,
                                              std::size_t replicates, std::uint64_t seed, unsigned threads) {
  model.validate();
  std::vector<std::vector<double>> cols(points.size(), std::vector<double>(replicates));
  parallel_for(replicates, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> t(model.dimension);
    for (std::size_t i = begin; i < end; ++i) {
      const FieldPath p = sample_field(model, seed, i);
      for (std::size_t k = 0; k < points.size(); ++k) {
        std::fill(t.begin(), t.end(), points[k]);
        cols[k][i] = p.value(t);
      }
    }
  });
  std::vector<SampleMatrix> out;
  out.reserve(points.size());
  for (auto& c : cols) out.push_back(SampleMatrix::column(std::move(c)));
  return out;
}

}  // namespace tailbound
