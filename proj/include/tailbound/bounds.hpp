#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tailbound/entropy.hpp"
#include "tailbound/young.hpp"

namespace tailbound {

/// p -> g(p); may return +inf where the entropy series diverges.
using GFunction = std::function<double(double)>;

/// g(p) via the entropy series of `m`, +inf where the series diverges.
GFunction make_g(const EntropyFunction& m, const GSeriesOptions& options = {});

struct PGridSpec {
  std::size_t count = 512;
  double lo = 1e-6;
  double hi = 1.0 - 1e-4;
  bool refine = true;
};

struct McEstimate {
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
};

struct BoundReport {
  double u = 0.0;
  double p_star = 0.0;
  double g_p_star = 0.0;
  double conj_value = 0.0;  ///< phi*(u (1 - p*))
  double exponent = 0.0;    ///< g(p*) - phi*(u (1 - p*))
  double upper = 1.0;       ///< min(1, exp(exponent))
  bool boundary_optimum = false;
  std::vector<double> p_trace;      ///< coarse grid minimum, then refinement end points
  std::vector<double> value_trace;
  std::optional<double> closed_form;
  std::optional<double> lower;
  std::optional<McEstimate> mc;
};

/// inf over p in (0,1) of exp[g(p) - phi*(u(1-p))]: log-spaced grid plus
/// golden-section refinement of the best bracket.
BoundReport theorem_a_bound(const ConjugateTable& conj, const GFunction& g, double u,
                            const PGridSpec& spec = {});

struct ProofReplayReport {
  double p = 0.0;
  double u = 0.0;
  double g_p = 0.0;
  std::vector<double> lambda;
  std::vector<double> envelope;       ///< phi(l / (1 - p)) + g(p)
  double envelope_conjugate = 0.0;    ///< sup_l (l u - envelope(l)) on the grid
  double expected = 0.0;              ///< phi*(u (1 - p)) - g(p) from the table
  double discrepancy = 0.0;
  std::vector<double> holder_exponents;  ///< r_n = 1 / ((1 - p) p^{n-1}), first terms
  double inverse_exponent_sum = 0.0;     ///< sum 1/r_n over all n (closed form) == 1
};

/// Conjugates the chaining MGF envelope directly and compares with the
/// table route used by theorem_a_bound.
ProofReplayReport proof_replay_diagnostic(const ConjugateTable& conj, const YoungFunction& phi,
                                          const GFunction& g, double p, double u,
                                          const std::vector<double>& lambda_grid);

/// pi(u) = 1 / (u phi*'(u)).
double pi_of_u(const ConjugateTable& conj, double u);

/// Solves pi(u0) = p0 by bisection over the table range.
double solve_u0(const ConjugateTable& conj, double p0 = 0.5);

struct Example1Report {
  double u = 0.0;
  double u0 = 0.0;
  double pi_u = 0.0;
  double exponent = 0.0;  ///< -phi*(u) + g(pi(u)) + 1/2
  double bound = 1.0;     ///< min(1, exp(exponent))
  double ratio = 0.0;     ///< g(pi(u)) / phi*(u)
  bool ratio_warning = false;
};

/// exp{-phi*(u) + g(pi(u)) + 1/2} for u >= u0 (pi(u0) = 1/2).
Example1Report example1_bound(const ConjugateTable& conj, const GFunction& g, double u);

struct ClosedBoundParams {
  double w = 0.0;
  double kappa = 0.0;
  double nu = 0.5;
  std::optional<double> c1;  ///< power law: caller-supplied, no formula exists
  std::optional<double> c2;
};

struct ClosedBoundReport {
  double u = 0.0;
  double pi_u = 0.0;
  double bound = 1.0;          ///< displayed closed form, clamped to [0,1]
  double raw = 0.0;            ///< displayed closed form before clamping
  std::optional<double> additive_form;  ///< log law only: exp(w + 1/2 + kappa|ln pi|/(1-pi) - phi*(u))
  bool forms_disagree = false;
  double theorem_a = 1.0;      ///< optimized bound with the exact g of the same law
  bool slack_ok = true;        ///< theorem_a <= 10 * raw
};

/// log law: w sqrt(e) pi(u)^{-kappa} e^{-phi*(u)};
/// power law: C1 exp(-phi*(u) + C2 pi(u)^{-nu/(nu+1)}).
ClosedBoundReport example_closed_bounds(ClosedFormKind kind, const ClosedBoundParams& params,
                                        const ConjugateTable& conj, double u);

struct SumEnvelope {
  YoungFunction base;
  std::optional<std::size_t> n;  ///< empty: uniform envelope sup_n
  std::size_t n_cutoff = 0;
  std::vector<double> lambda;
  std::vector<double> values;
  std::vector<std::size_t> attaining_n;  ///< uniform mode
  bool monotone_certified = false;       ///< n -> n phi(l / sqrt n) nonincreasing at every l

  /// Generating function for the envelope: phi_n for fixed n, phi_1 when the
  /// uniform envelope is certified, else the tabulated supremum.
  YoungFunction as_young() const;
};

/// phi_n(l) = n phi(l / sqrt n), or the uniform envelope sup_{n <= cutoff}.
SumEnvelope sum_envelope(const YoungFunction& phi, std::optional<std::size_t> n,
                         const std::vector<double>& lambda_grid, std::size_t n_cutoff = 100);

/// Theorem A applied to the normalized sums: conjugates the envelope on
/// linspace(0, u, 4001) and optimizes p with the matching g_n (or g-bar).
BoundReport theorem_b_bound(const SumEnvelope& envelope, const GFunction& g, double u,
                            const PGridSpec& spec = {}, const LambdaGridSpec& lambda_spec = {});

/// min(1, bound+ + bound-) for P(max |xi| > u).
double abs_value_bound(const BoundReport& plus, const BoundReport& minus);

struct SandwichInput {
  McEstimate field_tail;            ///< MC estimate of P(T, u)
  double point_variance = 0.0;      ///< sample variance of xi(t0)
  std::size_t point_samples = 0;
  std::optional<McEstimate> point_sum_tail;  ///< MC P(S_n(t0) > u), reported only
};

struct SandwichReport {
  double u = 0.0;
  double c = 0.0;
  double lower = 0.0;
  std::optional<double> clt_term;  ///< exp(-c u^2), u >= 1 only
  double mc_term = 0.0;            ///< lower confidence limit of P(T, u)
  std::optional<double> upper;
  bool inverted = false;           ///< lower > upper: misconfigured c or model
  McEstimate mc;
};

/// lower = max(MC lower limit of P(T,u), exp(-c u^2)).
SandwichReport lower_bound_sandwich(const SandwichInput& input, double u, double c,
                                    const std::optional<BoundReport>& upper = std::nullopt);

}  // namespace tailbound
