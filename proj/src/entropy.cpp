#include "tailbound/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "tailbound/error.hpp"

namespace tailbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<int>> all_sign_vectors(std::size_t dim) {
  std::vector<std::vector<int>> out;
  for (std::size_t e = 0; e < (std::size_t{1} << dim); ++e) {
    std::vector<int> eps(dim);
    for (std::size_t j = 0; j < dim; ++j) eps[j] = ((e >> (dim - 1 - j)) & 1u) ? 1 : -1;
    out.push_back(std::move(eps));
  }
  return out;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

// -------------------------------------------------------------------- Net

Net::Net(std::vector<std::vector<double>> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw Error(ErrorCode::contract, "net needs at least one axis");
  for (const auto& axis : knots_) {
    if (axis.empty()) throw Error(ErrorCode::contract, "every net axis needs at least one knot");
    for (std::size_t i = 0; i < axis.size(); ++i) {
      if (!(axis[i] >= 0.0 && axis[i] <= 1.0))
        throw Error(ErrorCode::contract, "net knots must lie in [0, 1]");
      if (i > 0 && !(axis[i] > axis[i - 1]))
        throw Error(ErrorCode::contract, "net knots must be strictly increasing");
    }
  }
}

Net Net::uniform(std::size_t dim, std::size_t per_axis) {
  return uniform(std::vector<std::size_t>(dim, per_axis));
}

Net Net::uniform(const std::vector<std::size_t>& per_axis) {
  std::vector<std::vector<double>> knots;
  for (std::size_t n : per_axis) {
    if (n == 0) throw Error(ErrorCode::contract, "per-axis knot count must be positive");
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i)
      axis[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    knots.push_back(std::move(axis));
  }
  return Net(std::move(knots));
}

std::uint64_t Net::cardinality() const {
  std::uint64_t k = 1;
  for (const auto& axis : knots_) {
    const std::uint64_t n = axis.size();
    if (k > std::numeric_limits<std::uint64_t>::max() / n) return std::numeric_limits<std::uint64_t>::max();
    k *= n;
  }
  return k;
}

Projection project(const Net& net, std::span<const double> t, std::span<const int> eps) {
  const std::size_t m = net.dimension();
  if (t.size() != m || eps.size() != m) throw Error(ErrorCode::contract, "projection dimension mismatch");
  Projection out;
  out.point.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& k = net.axis(j);
    if (eps[j] > 0) {
      auto it = std::lower_bound(k.begin(), k.end(), t[j]);  // first knot >= t
      if (it == k.end()) {
        out.point[j] = k.back();
        out.clamped = true;
      } else {
        out.point[j] = *it;
      }
    } else {
      auto it = std::lower_bound(k.begin(), k.end(), t[j]);  // first knot >= t; previous is < t
      if (it == k.begin()) {
        out.point[j] = k.front();
        out.clamped = true;
      } else {
        out.point[j] = *(it - 1);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- models

std::optional<double> IncrementNormModel::exact_delta(const Net&) const { return std::nullopt; }

HolderModel::HolderModel(double c, double alpha, std::size_t dim, std::string phi_id)
    : c_(c), alpha_(alpha), dim_(dim), phi_id_(std::move(phi_id)) {
  if (!(c > 0.0)) throw Error(ErrorCode::config, "Holder constant C must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::config, "Holder exponent alpha must lie in (0, 1]");
  if (dim == 0) throw Error(ErrorCode::config, "Holder model dimension must be positive");
}

double HolderModel::norm(std::span<const double> t, std::span<const double> s) const {
  if (t.size() != dim_ || s.size() != dim_) throw Error(ErrorCode::contract, "increment dimension mismatch");
  double dist = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) dist = std::max(dist, std::abs(t[j] - s[j]));
  if (dist == 0.0) return 0.0;
  return c_ * std::pow(dist, alpha_);
}

std::optional<double> HolderModel::exact_delta(const Net& net) const {
  if (net.dimension() != dim_) throw Error(ErrorCode::contract, "net dimension mismatch");
  double worst = 0.0;
  for (const auto& k : net.knots()) {
    double d = std::max(k.front(), 1.0 - k.back());
    for (std::size_t i = 1; i < k.size(); ++i) d = std::max(d, 0.5 * (k[i] - k[i - 1]));
    worst = std::max(worst, d);
  }
  return worst == 0.0 ? 0.0 : c_ * std::pow(worst, alpha_);
}

OptimalProjection optimal_projection(const Net& net, std::span<const double> t,
                                     const IncrementNormModel& model) {
  if (model.dimension() != net.dimension()) throw Error(ErrorCode::contract, "model and net dimensions differ");
  OptimalProjection best;
  best.norm = kInf;
  for (const auto& eps : all_sign_vectors(net.dimension())) {
    Projection p = project(net, t, eps);
    const double v = model.norm(t, p.point);
    if (v < best.norm) {
      best.norm = v;
      best.point = std::move(p.point);
      best.eps = eps;
      best.clamped = p.clamped;
    }
  }
  return best;
}

double probe_delta(const Net& net, const IncrementNormModel& model,
                   const std::vector<std::vector<double>>& probe_axes, std::vector<double>* argmax) {
  const std::size_t m = net.dimension();
  if (probe_axes.size() != m) throw Error(ErrorCode::contract, "probe grid dimension mismatch");
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> t(m);
  double best = 0.0;
  if (argmax) argmax->assign(m, 0.0);
  for (;;) {
    for (std::size_t j = 0; j < m; ++j) t[j] = probe_axes[j][idx[j]];
    const double v = optimal_projection(net, t, model).norm;
    if (v > best) {
      best = v;
      if (argmax) *argmax = t;
    }
    std::size_t j = 0;
    while (j < m && ++idx[j] == probe_axes[j].size()) idx[j++] = 0;
    if (j == m) break;
  }
  return best;
}

NetDelta net_delta(const Net& net, const IncrementNormModel& model, std::size_t probe_resolution) {
  if (probe_resolution < 2) throw Error(ErrorCode::contract, "probe resolution must be at least 2 per axis");
  const std::size_t m = net.dimension();
  std::vector<std::vector<double>> axes(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> a;
    for (std::size_t i = 0; i < probe_resolution; ++i)
      a.push_back(static_cast<double>(i) / static_cast<double>(probe_resolution - 1));
    const auto& k = net.axis(j);
    a.insert(a.end(), k.begin(), k.end());
    for (std::size_t i = 1; i < k.size(); ++i) a.push_back(0.5 * (k[i - 1] + k[i]));
    axes[j] = sorted_unique(std::move(a));
  }
  NetDelta out;
  out.probes = 1;
  for (const auto& a : axes) out.probes *= a.size();
  out.probe_value = probe_delta(net, model, axes, &out.argmax);
  out.value = out.probe_value;
  out.exact = model.exact_delta(net);
  if (out.exact) {
    out.cross_check_ok = std::abs(*out.exact - out.probe_value) <= 1e-9 * std::max(1.0, *out.exact);
    out.value = *out.exact;
  }
  return out;
}

// ---------------------------------------------------------------- profile

EntropyProfile entropy_profile(const IncrementNormModel& model, std::span<const double> delta_grid,
                               const EntropyOptions& options) {
  const std::size_t m = model.dimension();
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > 0.0)) throw Error(ErrorCode::domain, "entropy needs delta > 0");
    if (i > 0 && !(delta_grid[i] < delta_grid[i - 1]))
      throw Error(ErrorCode::contract, "delta grid must be strictly decreasing");
  }

  std::map<std::size_t, double> cache;
  auto delta_of = [&](std::size_t n) {
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const Net net = Net::uniform(m, n);
    double v;
    if (!options.cross_check) {
      if (auto exact = model.exact_delta(net))
        v = *exact;
      else
        v = net_delta(net, model, options.probe_resolution).value;
    } else {
      v = net_delta(net, model, options.probe_resolution).value;
    }
    cache.emplace(n, v);
    return v;
  };

  EntropyProfile out;
  out.dimension = m;
  out.construction = "isotropic uniform nets, phi=" + model.phi_id();
  std::size_t floor_n = 1;  // running max keeps M nonincreasing in delta
  for (double delta : delta_grid) {
    std::size_t n;
    if (delta_of(1) < delta) {
      n = 1;
    } else {
      std::size_t lo = 1, hi = 2;
      while (!(delta_of(hi) < delta)) {
        lo = hi;
        if (hi >= options.max_per_axis)
          throw Error(ErrorCode::resource, "no uniform net with at most " +
                                               std::to_string(options.max_per_axis) +
                                               " knots per axis reaches Delta < " + fmt(delta));
        hi = std::min(options.max_per_axis, hi * 2);
      }
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (delta_of(mid) < delta)
          hi = mid;
        else
          lo = mid;
      }
      n = hi;
    }
    n = std::max(n, floor_n);
    floor_n = n;
    const std::uint64_t count = Net::uniform(m, n).cardinality();
    out.delta.push_back(delta);
    out.per_axis.push_back(n);
    out.count.push_back(count);
    out.log_count.push_back(std::log(static_cast<double>(count)));
    out.achieved_delta.push_back(delta_of(n));
  }
  return out;
}

// -------------------------------------------------------- EntropyFunction

EntropyFunction EntropyFunction::zero() {
  EntropyFunction f;
  f.fn_ = [](double) { return 0.0; };
  f.growth_ = Growth::log_law;
  f.description_ = "zero";
  return f;
}

EntropyFunction EntropyFunction::log_law(double w, double kappa) {
  if (!(w >= 0.0) || !(kappa >= 0.0)) throw Error(ErrorCode::domain, "log-law entropy needs w >= 0, kappa >= 0");
  EntropyFunction f;
  f.fn_ = [w, kappa](double log_delta) { return w + kappa * std::abs(log_delta); };
  f.growth_ = Growth::log_law;
  f.w_ = w;
  f.kappa_ = kappa;
  f.description_ = "log_law(w=" + fmt(w) + ",kappa=" + fmt(kappa) + ")";
  return f;
}

EntropyFunction EntropyFunction::power_law(double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::domain, "power-law entropy needs nu > 0");
  EntropyFunction f;
  f.fn_ = [nu](double log_delta) { return std::exp(-nu * log_delta); };
  f.growth_ = Growth::power_law;
  f.nu_ = nu;
  f.description_ = "power_law(nu=" + fmt(nu) + ")";
  return f;
}

EntropyFunction EntropyFunction::holder(double c, double alpha, std::size_t dim) {
  const HolderModel model(c, alpha, dim);  // validates parameters
  EntropyFunction f;
  f.fn_ = [c, alpha, dim](double log_delta) {
    // Smallest N with C (1/(2N))^alpha < delta, i.e. N > (C/delta)^{1/alpha} / 2.
    const double log_x = (std::log(c) - log_delta) / alpha - std::log(2.0);
    double log_n;
    if (log_x > 20.0) {
      log_n = log_x + std::log1p(std::exp(-log_x));  // ln(x + 1) >= ln(floor(x) + 1)
    } else {
      const double x = std::exp(log_x);
      const double delta = std::exp(log_delta) * (1.0 - 1e-12);
      double n = std::max(1.0, std::floor(x) - 1.0);
      while (!(c * std::pow(0.5 / n, alpha) < delta)) n += 1.0;
      log_n = std::log(n);
    }
    return static_cast<double>(dim) * log_n;
  };
  f.description_ = "holder(C=" + fmt(c) + ",alpha=" + fmt(alpha) + ",m=" + std::to_string(dim) + ")";
  return f;
}

EntropyFunction EntropyFunction::from_profile(const EntropyProfile& profile,
                                              std::optional<double> tail_kappa) {
  if (profile.delta.empty()) throw Error(ErrorCode::contract, "entropy profile is empty");
  std::vector<double> log_delta(profile.delta.size());
  for (std::size_t i = 0; i < log_delta.size(); ++i) log_delta[i] = std::log(profile.delta[i]);
  const std::vector<double> values = profile.log_count;

  // Log-law envelope w + kappa |ln delta| through the non-trivial part of the
  // profile: least-squares slope, intercept raised until it dominates every
  // tabulated point.
  double kappa = 0.0;
  if (tail_kappa) {
    kappa = *tail_kappa;
  } else {
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] > 0.0) used.push_back(i);
    if (used.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i : used) {
        const double x = -log_delta[i];
        sx += x;
        sy += values[i];
        sxx += x * x;
        sxy += x * values[i];
      }
      const double k = static_cast<double>(used.size());
      const double denom = k * sxx - sx * sx;
      if (denom > 0.0) kappa = std::max(0.0, (k * sxy - sx * sy) / denom);
    }
  }
  double w = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) w = std::max(w, values[i] - kappa * std::abs(log_delta[i]));

  EntropyFunction f;
  f.fn_ = [log_delta, values, w, kappa](double ld) {
    if (ld >= log_delta.front()) return values.front();
    if (ld < log_delta.back()) return std::max(values.back(), w + kappa * std::abs(ld));
    // Grid is decreasing: first index with log_delta[i] <= ld.
    std::size_t i = 0;
    while (log_delta[i] > ld) ++i;
    return values[i];
  };
  f.growth_ = Growth::log_tail;
  f.w_ = std::max(w, values.back());
  f.kappa_ = kappa;
  f.tail_start_ = log_delta.back();
  f.description_ = "profile(points=" + std::to_string(values.size()) + ", tail w=" + fmt(w) +
                   " kappa=" + fmt(kappa) + ")";
  return f;
}

EntropyFunction EntropyFunction::custom(std::function<double(double)> of_log_delta, std::string description) {
  EntropyFunction f;
  f.fn_ = std::move(of_log_delta);
  f.description_ = std::move(description);
  return f;
}

double EntropyFunction::operator()(double delta) const {
  if (!(delta > 0.0)) throw Error(ErrorCode::domain, "entropy needs delta > 0");
  return fn_(std::log(delta));
}

// ------------------------------------------------------------------ series

GSeriesResult g_series(const EntropyFunction& m, double p, const GSeriesOptions& options) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::domain, "entropy series needs p in (0, 1)");
  const double log_p = std::log(p);
  const double abs_log_p = -log_p;

  if (m.growth() == EntropyFunction::Growth::power_law && m.nu() >= 1.0)
    throw Error(ErrorCode::divergence,
                "entropy series diverges for power-law entropy with nu >= 1: the chaining "
                "summability condition fails for every p");

  auto log_law_tail = [&](std::size_t n, double w, double kappa) {
    const double pn = std::exp(static_cast<double>(n) * log_p);
    const double nn = static_cast<double>(n);
    return w * pn + kappa * abs_log_p * pn * (nn + 1.0 - nn * p) / (1.0 - p);
  };
  // Bound on sum_{k>n} of the terms, or +inf when none is available yet.
  auto tail = [&](std::size_t n, double term, double previous) {
    switch (m.growth()) {
      case EntropyFunction::Growth::log_law:
        return log_law_tail(n, m.w(), m.kappa());
      case EntropyFunction::Growth::log_tail:
        if (static_cast<double>(n + 1) * log_p < m.tail_start()) return log_law_tail(n, m.w(), m.kappa());
        return kInf;
      case EntropyFunction::Growth::power_law:
        return (1.0 - p) * std::exp(-m.nu() * log_p + static_cast<double>(n) * (1.0 - m.nu()) * log_p) /
               (1.0 - std::exp((1.0 - m.nu()) * log_p));
      case EntropyFunction::Growth::generic:
        break;
    }
    if (term == 0.0) {
      // Only trust a run of zeros once the remaining weights are negligible.
      return std::exp(static_cast<double>(n) * log_p) < 1e-6 * options.truncation_tol ? 0.0 : kInf;
    }
    if (!(previous > 0.0)) return kInf;
    const double ratio = term / previous;
    if (!(ratio < 1.0)) return kInf;
    return term * ratio / (1.0 - ratio);
  };

  GSeriesResult out;
  double sum = 0.0, comp = 0.0;  // Neumaier summation
  double previous = 0.0;
  std::size_t non_decreasing_run = 0;
  for (std::size_t n = 1; n <= options.max_terms; ++n) {
    const double log_weight = std::log1p(-p) + static_cast<double>(n - 1) * log_p;
    const double mv = m.at_log(static_cast<double>(n) * log_p);
    if (!(mv >= 0.0) || std::isinf(mv))
      throw Error(ErrorCode::divergence,
                  "entropy m(p^n) is not finite and nonnegative at n = " + std::to_string(n) +
                      "; the chaining summability condition fails");
    const double term = mv == 0.0 ? 0.0 : std::exp(log_weight) * mv;
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    out.terms = n;
    if (!std::isfinite(sum))
      throw Error(ErrorCode::divergence, "entropy series partial sums overflow; summability fails");

    non_decreasing_run = (n > 1 && term > 0.0 && term >= previous) ? non_decreasing_run + 1 : 0;
    if (non_decreasing_run >= 64 && n >= 128)
      throw Error(ErrorCode::divergence,
                  "entropy series terms stop decaying for p = " + fmt(p) +
                      "; the chaining summability condition fails");

    const double rest = tail(n, term, previous);
    previous = term;
    if (rest < options.truncation_tol) {
      out.value = sum + comp;
      out.truncation_error = rest;
      return out;
    }
  }
  throw Error(ErrorCode::divergence, "entropy series did not converge within " +
                                         std::to_string(options.max_terms) + " terms for p = " + fmt(p));
}

double g_closed_form(ClosedFormKind kind, const ClosedFormParams& params, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::domain, "closed-form g needs p in (0, 1)");
  switch (kind) {
    case ClosedFormKind::log_law:
      if (!(params.w >= 0.0) || !(params.kappa >= 0.0))
        throw Error(ErrorCode::domain, "log-law g needs w >= 0 and kappa >= 0");
      return params.w + params.kappa * std::abs(std::log(p)) / (1.0 - p);
    case ClosedFormKind::power_law:
      if (!(params.nu > 0.0 && params.nu < 1.0))
        throw Error(ErrorCode::domain, "power-law g needs nu in (0, 1); the series diverges for nu >= 1");
      return std::pow(p, -params.nu) * (1.0 - p) / (1.0 - std::pow(p, 1.0 - params.nu));
  }
  return kInf;
}

double g_power_small_p_bound(double nu, double p) {
  if (!(nu > 0.0 && nu < 1.0)) throw Error(ErrorCode::domain, "power-law g needs nu in (0, 1)");
  if (!(p > 0.0 && p < 0.5)) throw Error(ErrorCode::domain, "this bound holds for p in (0, 1/2)");
  return std::pow(p, -nu) / (1.0 - std::pow(2.0, nu - 1.0));
}

}  // namespace tailbound
