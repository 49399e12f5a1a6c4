#include "tailbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailbound/error.hpp"
#include "tailbound/optimize.hpp"

namespace tailbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void require_1d(const ConjugateTable& conj) {
  if (conj.dimension() != 1) throw Error(ErrorCode::contract, "bound evaluators need a 1-d conjugate table");
}

BoundReport unit_report(double u) {
  BoundReport r;
  r.u = u;
  r.upper = 1.0;
  return r;
}

}  // namespace

GFunction make_g(const EntropyFunction& m, const GSeriesOptions& options) {
  return [m, options](double p) {
    if (!(p > 0.0 && p < 1.0)) return kInf;
    try {
      return g_series(m, p, options).value;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::divergence) return kInf;
      throw;
    }
  };
}

BoundReport theorem_a_bound(const ConjugateTable& conj, const GFunction& g, double u,
                            const PGridSpec& spec) {
  require_1d(conj);
  if (!(u >= 0.0) || !std::isfinite(u)) throw Error(ErrorCode::domain, "threshold u must be >= 0, got " + fmt(u));
  if (spec.count < 3 || !(spec.lo > 0.0) || !(spec.hi < 1.0) || !(spec.lo < spec.hi))
    throw Error(ErrorCode::config, "p grid needs at least 3 points inside (0,1)");
  if (u == 0.0) return unit_report(u);
  if (u > conj.max_x())
    throw Error(ErrorCode::extrapolation,
                "u = " + fmt(u) + " lies beyond the conjugate table (max x " + fmt(conj.max_x()) + ")", u);

  auto objective = [&](double p) {
    const double gp = g(p);
    if (!std::isfinite(gp)) return kInf;
    return gp - conj.value_at(u * (1.0 - p));
  };

  const double llo = std::log(spec.lo);
  const double lhi = std::log(spec.hi);
  std::vector<double> ps(spec.count);
  std::vector<double> vals(spec.count);
  std::size_t best = spec.count;
  for (std::size_t i = 0; i < spec.count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(spec.count - 1);
    ps[i] = std::exp(llo + t * (lhi - llo));
    vals[i] = objective(ps[i]);
    if (std::isfinite(vals[i]) && (best == spec.count || vals[i] < vals[best])) best = i;
  }
  if (best == spec.count)
    throw Error(ErrorCode::summability, "g(p) is infinite on the whole p grid; no p in (0,1) has g(p) < inf");

  BoundReport r;
  r.u = u;
  r.p_star = ps[best];
  double value = vals[best];
  r.p_trace.push_back(ps[best]);
  r.value_trace.push_back(value);
  r.boundary_optimum = best == 0 || best + 1 == spec.count;

  if (spec.refine) {
    const std::size_t a = best == 0 ? 0 : best - 1;
    const std::size_t b = std::min(best + 1, spec.count - 1);
    const auto m = golden_section_minimize([&](double lp) { return objective(std::exp(lp)); },
                                           std::log(ps[a]), std::log(ps[b]), 1e-13);
    const double pm = std::exp(m.x);
    r.p_trace.push_back(ps[a]);
    r.value_trace.push_back(vals[a]);
    r.p_trace.push_back(ps[b]);
    r.value_trace.push_back(vals[b]);
    r.p_trace.push_back(pm);
    r.value_trace.push_back(m.value);
    if (m.value < value) {
      value = m.value;
      r.p_star = pm;
    }
  }

  r.g_p_star = g(r.p_star);
  r.conj_value = conj.value_at(u * (1.0 - r.p_star));
  r.exponent = value;
  r.upper = std::min(1.0, std::exp(value));
  return r;
}

ProofReplayReport proof_replay_diagnostic(const ConjugateTable& conj, const YoungFunction& phi,
                                          const GFunction& g, double p, double u,
                                          const std::vector<double>& lambda_grid) {
  require_1d(conj);
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::domain, "p must lie in (0,1), got " + fmt(p));
  if (lambda_grid.empty()) throw Error(ErrorCode::config, "proof replay needs a lambda grid");
  ProofReplayReport r;
  r.p = p;
  r.u = u;
  r.g_p = g(p);
  r.lambda = lambda_grid;
  r.envelope.reserve(lambda_grid.size());
  double best = -kInf;
  for (double l : lambda_grid) {
    const double e = phi(l / (1.0 - p)) + r.g_p;
    r.envelope.push_back(e);
    if (std::isfinite(e)) best = std::max(best, l * u - e);
  }
  r.envelope_conjugate = best;
  r.expected = conj.value_at(u * (1.0 - p)) - r.g_p;
  r.discrepancy = std::abs(r.envelope_conjugate - r.expected);

  double power = 1.0;
  double sum = 0.0;
  for (int n = 1; n <= 20; ++n) {
    const double w = (1.0 - p) * power;
    r.holder_exponents.push_back(1.0 / w);
    sum += w;
    power *= p;
  }
  // Remaining terms sum to p^20 exactly.
  r.inverse_exponent_sum = sum + power;
  return r;
}

double pi_of_u(const ConjugateTable& conj, double u) {
  require_1d(conj);
  if (!(u > 0.0)) throw Error(ErrorCode::domain, "pi(u) needs u > 0");
  const double d = conj.derivative_at(u);
  if (!(d > 0.0)) return kInf;
  return 1.0 / (u * d);
}

double solve_u0(const ConjugateTable& conj, double p0) {
  require_1d(conj);
  const auto& xs = conj.x();
  double lo = 0.0;
  for (double x : xs)
    if (x > 0.0) {
      lo = x;
      break;
    }
  double hi = conj.max_x();
  if (!(lo > 0.0)) throw Error(ErrorCode::domain, "conjugate table has no positive x");
  if (pi_of_u(conj, lo) <= p0) return lo;
  if (pi_of_u(conj, hi) > p0)
    throw Error(ErrorCode::extrapolation,
                "pi(u) stays above " + fmt(p0) + " on the conjugate table; extend the x grid", hi);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pi_of_u(conj, mid) > p0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

Example1Report example1_bound(const ConjugateTable& conj, const GFunction& g, double u) {
  Example1Report r;
  r.u = u;
  r.u0 = solve_u0(conj, 0.5);
  if (u < r.u0 * (1.0 - 1e-12))
    throw Error(ErrorCode::domain, "u = " + fmt(u) + " is below u0 = " + fmt(r.u0) + " where pi(u0) = 1/2",
                r.u0);
  r.pi_u = std::min(pi_of_u(conj, u), 0.5);
  const double conj_u = conj.value_at(u);
  const double gp = g(r.pi_u);
  r.exponent = -conj_u + gp + 0.5;
  r.bound = std::min(1.0, std::exp(r.exponent));
  r.ratio = conj_u > 0.0 ? gp / conj_u : kInf;
  r.ratio_warning = !(r.ratio < 1.0);
  return r;
}

ClosedBoundReport example_closed_bounds(ClosedFormKind kind, const ClosedBoundParams& params,
                                        const ConjugateTable& conj, double u) {
  if (kind == ClosedFormKind::power_law && (!params.c1 || !params.c2))
    throw Error(ErrorCode::config, "power-law closed bound needs caller-supplied constants C1 and C2");
  const double u0 = solve_u0(conj, 0.5);
  if (u < u0 * (1.0 - 1e-12))
    throw Error(ErrorCode::domain, "u = " + fmt(u) + " is below u0 = " + fmt(u0) + " where pi(u0) = 1/2", u0);

  ClosedBoundReport r;
  r.u = u;
  r.pi_u = std::min(pi_of_u(conj, u), 0.5);
  const double conj_u = conj.value_at(u);
  const ClosedFormParams gp{params.w, params.kappa, params.nu};

  if (kind == ClosedFormKind::log_law) {
    r.raw = params.w * std::sqrt(std::exp(1.0)) * std::pow(r.pi_u, -params.kappa) * std::exp(-conj_u);
    const double additive = std::exp(params.w + 0.5 + params.kappa * std::abs(std::log(r.pi_u)) / (1.0 - r.pi_u) -
                                     conj_u);
    r.additive_form = additive;
    r.forms_disagree = std::abs(additive - r.raw) > 1e-9 * std::max(additive, r.raw);
  } else {
    r.raw = *params.c1 * std::exp(-conj_u + *params.c2 * std::pow(r.pi_u, -params.nu / (params.nu + 1.0)));
  }
  r.bound = std::clamp(r.raw, 0.0, 1.0);

  const GFunction g = [kind, gp](double p) { return g_closed_form(kind, gp, p); };
  r.theorem_a = theorem_a_bound(conj, g, u).upper;
  r.slack_ok = r.theorem_a <= 10.0 * r.raw;
  return r;
}

YoungFunction SumEnvelope::as_young() const {
  if (n) return YoungFunction::sum_scaled(base, *n);
  if (monotone_certified) return base;
  return YoungFunction::tabulated(lambda, values);
}

SumEnvelope sum_envelope(const YoungFunction& phi, std::optional<std::size_t> n,
                         const std::vector<double>& lambda_grid, std::size_t n_cutoff) {
  if (phi.dimension() != 1) throw Error(ErrorCode::contract, "sum envelopes are 1-d only");
  if (n && *n == 0) throw Error(ErrorCode::contract, "number of summands must be >= 1");
  if (!n && n_cutoff < 2) throw Error(ErrorCode::config, "uniform envelope needs n_cutoff >= 2");
  if (lambda_grid.empty()) throw Error(ErrorCode::config, "sum envelope needs a lambda grid");

  SumEnvelope env{phi, n, n_cutoff, lambda_grid, {}, {}, false};
  const std::size_t probe = n ? std::max<std::size_t>(*n, n_cutoff) : n_cutoff;
  std::vector<YoungFunction> scaled;
  scaled.reserve(probe);
  for (std::size_t k = 1; k <= probe; ++k) scaled.push_back(YoungFunction::sum_scaled(phi, k));

  bool monotone = true;
  env.values.reserve(lambda_grid.size());
  for (double l : lambda_grid) {
    double sup = -kInf;
    std::size_t arg = 1;
    double prev = kInf;
    for (std::size_t k = 1; k <= probe; ++k) {
      const double v = scaled[k - 1](l);
      if (v > prev + 1e-12 * std::max(1.0, std::abs(prev))) monotone = false;
      prev = v;
      if (k <= (n ? probe : n_cutoff) && v > sup) {
        sup = v;
        arg = k;
      }
    }
    if (n) {
      env.values.push_back(scaled[*n - 1](l));
    } else {
      env.values.push_back(sup);
      env.attaining_n.push_back(arg);
    }
  }
  env.monotone_certified = monotone;

  if (!n && !monotone) {
    for (std::size_t i = 0; i < env.attaining_n.size(); ++i)
      if (env.attaining_n[i] > n_cutoff / 2)
        throw Error(ErrorCode::unresolved_sup,
                    "sup over n of n phi(l/sqrt n) at l = " + fmt(lambda_grid[i]) + " is attained at n = " +
                        std::to_string(env.attaining_n[i]) + ", not stabilized by the cutoff " +
                        std::to_string(n_cutoff));
  }
  return env;
}

BoundReport theorem_b_bound(const SumEnvelope& envelope, const GFunction& g, double u, const PGridSpec& spec,
                            const LambdaGridSpec& lambda_spec) {
  if (!(u >= 0.0) || !std::isfinite(u)) throw Error(ErrorCode::domain, "threshold u must be >= 0, got " + fmt(u));
  if (u == 0.0) return unit_report(u);
  const YoungFunction phi = envelope.as_young();
  const auto xs = linspace(0.0, u, 4001);
  const ConjugateTable conj = conjugate_1d(phi, xs, lambda_spec);
  return theorem_a_bound(conj, g, u, spec);
}

double abs_value_bound(const BoundReport& plus, const BoundReport& minus) {
  if (std::abs(plus.u - minus.u) > 1e-12 * std::max({1.0, std::abs(plus.u), std::abs(minus.u)}))
    throw Error(ErrorCode::contract,
                "absolute-value bound needs both reports at the same u (" + fmt(plus.u) + " vs " + fmt(minus.u) + ")");
  return std::min(1.0, plus.upper + minus.upper);
}

SandwichReport lower_bound_sandwich(const SandwichInput& input, double u, double c,
                                    const std::optional<BoundReport>& upper) {
  if (!(c > 0.0)) throw Error(ErrorCode::config, "CLT constant c must be positive");
  if (input.point_samples < 2 || !std::isfinite(input.point_variance) || input.point_variance <= 1e-12)
    throw Error(ErrorCode::degenerate, "Var xi(t0) is statistically zero; pick a point with positive variance");
  SandwichReport r;
  r.u = u;
  r.c = c;
  r.mc = input.field_tail;
  r.mc_term = input.field_tail.ci_lo;
  r.lower = r.mc_term;
  if (u >= 1.0) {
    r.clt_term = std::exp(-c * u * u);
    r.lower = std::max(r.lower, *r.clt_term);
  }
  if (upper) {
    r.upper = upper->upper;
    r.inverted = r.lower > upper->upper;
  }
  return r;
}

}  // namespace tailbound
