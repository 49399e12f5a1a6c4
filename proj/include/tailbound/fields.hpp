#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "tailbound/entropy.hpp"
#include "tailbound/phispace.hpp"
#include "tailbound/young.hpp"

namespace tailbound {

/// Catalog of random fields on [0,1]^m.
struct FieldModel {
  enum class Kind {
    constant_gaussian,  ///< xi(t) = rho, rho ~ N(0,1)
    constant_poisson,   ///< xi(t) = (K - mu) / sqrt(mu), K ~ Poisson(mu)
    compound_poisson,   ///< sum of (E_k - 1) / sqrt(mu) over jump points u_k <= t
    empirical_process,  ///< sqrt(n) (F_n(t) - t(1) ... t(m)) for n uniform points
  };

  Kind kind = Kind::constant_gaussian;
  std::size_t dimension = 1;
  double mu = 5.0;
  std::size_t sample_size = 100;

  static FieldModel constant_gaussian(std::size_t dim = 1);
  static FieldModel constant_poisson(double mu, std::size_t dim = 1);
  static FieldModel compound_poisson(double mu, std::size_t dim = 1);
  static FieldModel empirical_process(std::size_t n, std::size_t dim = 1);

  /// Throws a configuration error for invalid parameters.
  void validate() const;
  std::string describe() const;
};

std::string to_string(FieldModel::Kind kind);

/// One realization. Evaluation at any t is exact.
class FieldPath {
 public:
  enum class Kind { constant, jump_sum, empirical };

  static FieldPath constant(std::size_t dim, double value);
  /// Value at t: sum of weights over points (row-major, dim per point) that are <= t.
  static FieldPath jump_sum(std::size_t dim, std::vector<double> points, std::vector<double> weights);
  /// Value at t: scale * (#{points <= t} / total - t(1) ... t(m)).
  static FieldPath empirical(std::size_t dim, std::vector<double> points, double scale);

  Kind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }
  std::size_t jump_count() const { return weights_.size(); }
  std::span<const double> jump_location(std::size_t k) const { return {points_.data() + k * dim_, dim_}; }

  double value(std::span<const double> t) const;
  double value(double t) const;

  /// Sup and inf over the tensor grid built per axis from {0}, the jump
  /// coordinates and `grid_resolution` evenly spaced points on [0,1]. The
  /// sup is exact for every catalog path: paths are constant (jump sums) or
  /// decreasing (empirical process) on each cell, so the lower corners,
  /// which lie on this grid, carry the supremum. The inf of an empirical
  /// path also takes the left limits at upper cell corners.
  struct Extremes {
    double sup;
    double inf;
  };
  Extremes extremes(std::size_t grid_resolution) const;
  double sup(std::size_t grid_resolution) const { return extremes(grid_resolution).sup; }
  /// Maximum over the evenly spaced grid alone.
  double grid_max(std::size_t grid_resolution) const;

  /// n^{-1/2} (xi_1 + ... + xi_n) for paths of one kind and dimension.
  static FieldPath normalized_sum(std::span<const FieldPath> paths);

 private:
  FieldPath(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}
  double value_from_count(double acc, std::span<const double> t) const;
  Extremes extremes_1d(std::size_t grid_resolution) const;

  Kind kind_;
  std::size_t dim_;
  double constant_ = 0.0;
  std::vector<double> points_;
  std::vector<double> weights_;  ///< jump_sum weights; empirical: 1 per point
  double scale_ = 1.0;           ///< empirical only
  double total_ = 1.0;           ///< empirical only: number of pooled sample points
};

/// Deterministic given (model, seed, stream, substream).
FieldPath sample_field(const FieldModel& model, std::uint64_t seed, std::uint64_t stream,
                       std::uint32_t substream = 0);

/// Path of the normalized sum of `summands` independent copies; summand j of
/// replicate i uses stream i, substream j.
FieldPath sample_sum_field(const FieldModel& model, std::size_t summands, std::uint64_t seed,
                           std::uint64_t stream);

struct McOptions {
  std::vector<double> u_grid;
  std::size_t replicates = 100'000;
  std::size_t grid_resolution = 65;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Estimate P(sup |xi| > u) instead of P(sup xi > u).
  bool two_sided = false;
};

struct McReport {
  std::vector<double> u;
  std::vector<double> estimate;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<std::uint64_t> exceedances;
  std::size_t replicates = 0;
  std::size_t summands = 1;
  std::size_t grid_resolution = 0;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  bool two_sided = false;
};

/// Per-replicate path suprema (or sup |.| when two-sided). Bit-identical for
/// any thread count.
std::vector<double> sample_sups(const FieldModel& model, std::size_t summands, const McOptions& options);

/// P(sup_t xi(t) > u) per u with exact binomial intervals.
McReport mc_sup_tail(const FieldModel& model, const McOptions& options);

/// Q_n(T,u) = P(sup_t S_n(t) > u). n = 1 reproduces mc_sup_tail exactly.
McReport mc_sum_sup_tail(const FieldModel& model, std::size_t summands, const McOptions& options);

/// Tail report from precomputed suprema.
McReport tail_report(std::span<const double> sups, const McOptions& options, std::size_t summands);

struct IncrementNormOptions {
  NormOptions norm;
  /// lambda grid spans [lambda_lo * r, lambda_span * r] for radius r; the
  /// increment may have a wider exponential range than phi itself.
  double lambda_span = 20.0;
  double kramer_share = 0.5;
  bool check_centering = true;
  /// Increments of a normalized sum of n copies: log-MGF n L(l / sqrt n).
  std::size_t summands = 1;
};

struct IncrementNormResult {
  double norm = 0.0;
  std::size_t kramer_points = 0;  ///< grid points left out as unreliable
  double mean = 0.0;
  double std_error = 0.0;
};

/// ||X||+ in B+(phi) from draws of X via the empirical log-MGF.
IncrementNormResult increment_norm_from_samples(std::span<const double> increments, const YoungFunction& phi,
                                                const IncrementNormOptions& options = {});

/// Empirical ||xi(t) - xi(s)||+ from R >= 10^4 sampled paths.
IncrementNormResult estimate_increment_norm(const FieldModel& model, std::span<const double> t,
                                            std::span<const double> s, const YoungFunction& phi,
                                            std::size_t replicates, std::uint64_t seed,
                                            const IncrementNormOptions& options = {});

/// Increment norms from a fixed bank of sampled paths, cached per (t, s).
class EmpiricalIncrementModel final : public IncrementNormModel {
 public:
  EmpiricalIncrementModel(const FieldModel& model, YoungFunction phi, std::size_t replicates,
                          std::uint64_t seed, IncrementNormOptions options = {}, std::string phi_id = "natural");

  std::size_t dimension() const override { return model_.dimension; }
  double norm(std::span<const double> t, std::span<const double> s) const override;
  std::string phi_id() const override { return phi_id_; }

 private:
  FieldModel model_;
  YoungFunction phi_;
  IncrementNormOptions options_;
  std::string phi_id_;
  std::vector<FieldPath> bank_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<double>, double> cache_;
};

/// 1-d compound-Poisson increments depend only on the signed lag s - t.
/// Norms are tabulated on geometric lags and looked up at the next larger
/// tabulated lag after a running maximum, so lookups never understate the
/// tabulated norms.
class LagIncrementModel final : public IncrementNormModel {
 public:
  LagIncrementModel(const FieldModel& model, YoungFunction phi, std::size_t replicates, std::uint64_t seed,
                    std::size_t lag_count = 64, double min_lag = 1.0 / 131072.0, IncrementNormOptions options = {},
                    std::string phi_id = "natural");

  std::size_t dimension() const override { return 1; }
  double norm(std::span<const double> t, std::span<const double> s) const override;
  std::string phi_id() const override { return phi_id_; }

  const std::vector<double>& lags() const { return lags_; }
  const std::vector<double>& forward() const { return forward_; }    ///< s > t
  const std::vector<double>& backward() const { return backward_; }  ///< s < t

 private:
  std::vector<double> lags_;
  std::vector<double> forward_;
  std::vector<double> backward_;
  std::string phi_id_;
};

/// Samples of xi(x, ..., x) for each x in `points` (one matrix per point)
/// from R paths; replicate i uses stream i.
std::vector<SampleMatrix> field_point_samples(const FieldModel& model, const std::vector<double>& points,
                                              std::size_t replicates, std::uint64_t seed, unsigned threads = 1);

}  // namespace tailbound
