#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tailbound {

/// Tensor-product net in [0,1]^m: one strictly increasing knot vector per axis.
class Net {
 public:
  explicit Net(std::vector<std::vector<double>> knots);
  /// Cell-centred knots (i + 1/2) / N on every axis.
  static Net uniform(std::size_t dim, std::size_t per_axis);
  static Net uniform(const std::vector<std::size_t>& per_axis);

  std::size_t dimension() const { return knots_.size(); }
  const std::vector<double>& axis(std::size_t j) const { return knots_[j]; }
  const std::vector<std::vector<double>>& knots() const { return knots_; }
  /// K = prod_j N(j), saturating at UINT64_MAX.
  std::uint64_t cardinality() const;

 private:
  std::vector<std::vector<double>> knots_;
};

struct Projection {
  std::vector<double> point;
  bool clamped = false;  ///< some coordinate had no neighbour on the requested side
};

/// One-sided coordinatewise neighbour: eps = +1 takes the smallest knot >= t,
/// eps = -1 the largest knot < t. Missing neighbours clamp to the nearest knot.
Projection project(const Net& net, std::span<const double> t, std::span<const int> eps);

/// t -> ||xi(t) - xi(s)||+ for a field on [0,1]^m.
class IncrementNormModel {
 public:
  virtual ~IncrementNormModel() = default;
  virtual std::size_t dimension() const = 0;
  virtual double norm(std::span<const double> t, std::span<const double> s) const = 0;
  /// Generating function the norms are measured against.
  virtual std::string phi_id() const = 0;
  /// Closed-form Delta for the net, when the model has one.
  virtual std::optional<double> exact_delta(const class Net& net) const;
};

/// ||xi(t) - xi(s)||+ = C * max_j |t(j) - s(j)|^alpha.
class HolderModel final : public IncrementNormModel {
 public:
  HolderModel(double c, double alpha, std::size_t dim, std::string phi_id = "quadratic");

  std::size_t dimension() const override { return dim_; }
  double norm(std::span<const double> t, std::span<const double> s) const override;
  std::string phi_id() const override { return phi_id_; }
  /// C * (largest distance from a point of [0,1] to its farther one-sided
  /// neighbour)^alpha, maximized over axes.
  std::optional<double> exact_delta(const Net& net) const override;

  double constant() const { return c_; }
  double alpha() const { return alpha_; }

 private:
  double c_;
  double alpha_;
  std::size_t dim_;
  std::string phi_id_;
};

struct OptimalProjection {
  std::vector<double> point;
  std::vector<int> eps;
  double norm = 0.0;
  bool clamped = false;
};

/// Projection minimizing the increment norm over all sign vectors; ties go
/// to the lexicographically smallest eps (-1 < +1).
OptimalProjection optimal_projection(const Net& net, std::span<const double> t,
                                     const IncrementNormModel& model);

struct NetDelta {
  double value = 0.0;
  std::vector<double> argmax;
  double probe_value = 0.0;  ///< maximum over the probe set
  std::optional<double> exact;
  bool cross_check_ok = true;
  std::size_t probes = 0;
};

/// Maximum optimal-projection norm over the tensor grid `probe_axes`.
double probe_delta(const Net& net, const IncrementNormModel& model,
                   const std::vector<std::vector<double>>& probe_axes,
                   std::vector<double>* argmax = nullptr);

/// Delta(net) = sup_t of the optimal projection norm, probed on a uniform
/// grid of `probe_resolution` points per axis plus knots and the midpoints
/// between adjacent knots. Models with a closed form report it and have it
/// cross-checked against the probe maximum.
NetDelta net_delta(const Net& net, const IncrementNormModel& model, std::size_t probe_resolution);

/// Tabulated entropy function on a decreasing delta grid.
struct EntropyProfile {
  std::size_t dimension = 1;
  std::vector<double> delta;
  std::vector<std::uint64_t> count;      ///< M(delta)
  std::vector<double> log_count;         ///< m(delta) = ln M(delta)
  std::vector<std::size_t> per_axis;     ///< N with M = N^m
  std::vector<double> achieved_delta;    ///< Delta of the chosen net (< delta)
  std::string construction;
};

struct EntropyOptions {
  std::size_t probe_resolution = 33;
  std::size_t max_per_axis = 1u << 16;
  /// Also probe models that have a closed-form Delta.
  bool cross_check = false;
};

/// M(delta) over isotropic uniform nets: the smallest per-axis count N whose
/// net has Delta < delta, found by integer bisection. This over-estimates the
/// unrestricted infimum, which keeps every downstream tail bound valid.
EntropyProfile entropy_profile(const IncrementNormModel& model, std::span<const double> delta_grid,
                               const EntropyOptions& options = {});

/// m(delta), evaluated through ln(delta) so that deep terms of the entropy
/// series never underflow.
class EntropyFunction {
 public:
  /// How the series tail is bounded: exactly for the analytic laws, by the
  /// log-law envelope once below `tail_start` for profiles, by the observed
  /// term ratio otherwise.
  enum class Growth { generic, log_law, power_law, log_tail };

  static EntropyFunction zero();
  /// w + kappa |ln delta|
  static EntropyFunction log_law(double w, double kappa);
  /// delta^{-nu}
  static EntropyFunction power_law(double nu);
  /// Exact m for a Holder model over isotropic uniform nets.
  static EntropyFunction holder(double c, double alpha, std::size_t dim);
  /// Step-function lookup in a profile (conservative: between grid points the
  /// value at the smaller delta is used) with a log-law tail below the
  /// smallest tabulated delta. The tail slope is fitted unless given.
  static EntropyFunction from_profile(const EntropyProfile& profile,
                                      std::optional<double> tail_kappa = std::nullopt);
  static EntropyFunction custom(std::function<double(double)> of_log_delta,
                                std::string description = "custom");

  double at_log(double log_delta) const { return fn_(log_delta); }
  double operator()(double delta) const;

  Growth growth() const { return growth_; }
  double w() const { return w_; }
  double kappa() const { return kappa_; }
  double nu() const { return nu_; }
  double tail_start() const { return tail_start_; }  ///< ln delta below which the log law holds
  const std::string& describe() const { return description_; }

 private:
  std::function<double(double)> fn_;
  Growth growth_ = Growth::generic;
  double w_ = 0.0;
  double kappa_ = 0.0;
  double nu_ = 0.0;
  double tail_start_ = 0.0;
  std::string description_;
};

struct GSeriesOptions {
  double truncation_tol = 1e-12;
  std::size_t max_terms = 1'000'000;
};

struct GSeriesResult {
  double value = 0.0;
  double truncation_error = 0.0;  ///< bound on the discarded tail
  std::size_t terms = 0;
};

/// g(p) = (1 - p) sum_{n>=1} p^{n-1} m(p^n). Throws a divergence error when
/// the terms stop decaying.
GSeriesResult g_series(const EntropyFunction& m, double p, const GSeriesOptions& options = {});

enum class ClosedFormKind { log_law, power_law };

struct ClosedFormParams {
  double w = 0.0;
  double kappa = 0.0;
  double nu = 0.5;
};

/// log law: w + kappa |ln p| / (1 - p); power law: p^{-nu} (1 - p) / (1 - p^{1-nu}).
double g_closed_form(ClosedFormKind kind, const ClosedFormParams& params, double p);

/// Cruder power-law bound p^{-nu} / (1 - 2^{nu-1}), valid for p in (0, 1/2).
double g_power_small_p_bound(double nu, double p);

}  // namespace tailbound
