#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tailbound {

/// Generating-function families addressable by string id in configs.
enum class YoungKind {
  quadratic,       ///< phi(l) = |l|^2 / 2
  quadratic_form,  ///< phi(l) = (B l, l) / 2, B symmetric positive definite
  poissonian,      ///< phi(l) = e^|l| - 1 - |l|
  tabulated,       ///< piecewise-linear through (lambda, phi) rows, 1-d only
  sum_scaled,      ///< n * base(l / sqrt(n)); envelope of normalized sums
};

std::string to_string(YoungKind kind);

/// Open convex symmetric support set for d > 1. Either a box
/// lower < l < upper or an ellipsoid (A l, l) < 1.
struct MultiDomain {
  enum class Shape { box, ellipsoid };
  Shape shape = Shape::box;
  std::vector<double> lower;  ///< box only; entries may be -inf
  std::vector<double> upper;  ///< box only; entries may be +inf
  Eigen::MatrixXd shape_matrix;  ///< ellipsoid only

  static MultiDomain whole_space(std::size_t dim);
  static MultiDomain box(std::vector<double> lower, std::vector<double> upper);
  static MultiDomain ellipsoid(Eigen::MatrixXd a);

  bool contains(std::span<const double> lambda) const;
};

/// Even convex generating function with phi(0) = 0. Immutable value type;
/// copies share the underlying evaluator.
class YoungFunction {
 public:
  static YoungFunction quadratic(std::size_t dim = 1);
  static YoungFunction quadratic_form(Eigen::MatrixXd b);
  static YoungFunction poissonian();
  /// 1-d table; lambda strictly increasing and containing 0. Rows with
  /// negative lambda are used as given, otherwise phi(-l) = phi(l).
  static YoungFunction tabulated(std::vector<double> lambda, std::vector<double> phi);
  /// phi_n(l) = n * base(l / sqrt(n)). Quadratic bases return themselves:
  /// the identity is exact, not merely numerical.
  static YoungFunction sum_scaled(const YoungFunction& base, std::size_t n);

  /// Replaces the declared domain. Intended for validation tests and for
  /// tabulated inputs whose reliable range is narrower than the table.
  YoungFunction with_radius(double radius) const;
  YoungFunction with_domain(MultiDomain domain) const;

  YoungKind kind() const;
  std::size_t dimension() const;
  /// 1-d domain radius lambda_0 (may be +inf). For d > 1 the box or
  /// ellipsoid in domain() applies instead.
  double radius() const;
  const MultiDomain& domain() const;
  bool in_domain(std::span<const double> lambda) const;

  /// Catalog id plus parameters, e.g. "quadratic_form(B=[[2,0],[0,1]])".
  std::string describe() const;

  /// +inf outside the domain.
  double operator()(double lambda) const;
  double operator()(std::span<const double> lambda) const;

  const Eigen::MatrixXd& form_matrix() const;  ///< quadratic_form only
  const std::vector<double>& table_lambda() const;  ///< tabulated only
  const std::vector<double>& table_phi() const;     ///< tabulated only
  std::size_t summands() const;  ///< sum_scaled only
  const YoungFunction& base() const;  ///< sum_scaled only

 private:
  struct Impl;
  explicit YoungFunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// Reads `lambda,phi` CSV into a tabulated function.
YoungFunction read_tabulated_csv(std::istream& in);

struct AxiomCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<AxiomCheck> checks;
  bool passed() const;
  /// Name of the first failing axiom, if any.
  std::optional<std::string> first_failure() const;
};

/// Checks zero-at-origin, evenness, midpoint convexity and the
/// superlinearity proxy (phi(l)/l nondecreasing) on sampled points.
/// Stops at the first non-finite value inside the declared domain.
ValidationReport validate_young(const YoungFunction& f, std::size_t sample_count,
                                double tolerance = 1e-9);

struct LambdaGridSpec {
  double max_lambda = 10.0;
  std::size_t count = 10001;  ///< points on [0, max_lambda] (1-d) or per axis (d > 1)
  int max_doublings = 12;     ///< 1-d, infinite radius only
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
};

struct ConjugateProvenance {
  std::string source;
  double lambda_max = 0.0;
  std::size_t lambda_count = 0;
  int doublings = 0;
  std::size_t boundary_hits = 0;  ///< grid points whose maximizer sat on the lambda boundary
};

/// Tabulated Legendre-Fenchel transform phi*(x) = sup_l ((l, x) - phi(l))
/// on a tensor grid over the nonnegative orthant.
class ConjugateTable {
 public:
  ConjugateTable(std::vector<std::vector<double>> axes, std::vector<double> values,
                 std::vector<double> derivative, ConjugateProvenance provenance);

  std::size_t dimension() const { return axes_.size(); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& x() const { return axes_.front(); }  ///< 1-d grid
  /// Row-major over axes (last axis fastest).
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& derivative() const { return derivative_; }  ///< 1-d only
  const ConjugateProvenance& provenance() const { return provenance_; }

  /// Multilinear interpolation; throws extrapolation error outside the hull.
  double value_at(std::span<const double> x) const;
  double value_at(double x) const;
  /// Linear interpolation of the finite-difference derivative column.
  double derivative_at(double x) const;
  double max_x() const;  ///< upper end of the first axis

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  std::vector<double> derivative_;
  ConjugateProvenance provenance_;
};

/// phi* on x_grid by direct maximization over a uniform lambda grid on
/// [0, max_lambda]. With infinite radius the grid is doubled while the
/// maximizer sits on the last point; a finite radius clips the grid to
/// (1 - 1e-6) * radius.
ConjugateTable conjugate_1d(const YoungFunction& f, std::span<const double> x_grid,
                            const LambdaGridSpec& spec = {});

/// phi* on the tensor grid `axes` by maximizing over the symmetric lambda box
/// [-max_lambda, max_lambda]^d intersected with the domain. Reduces one axis
/// at a time, which is exact for the grid maximum.
ConjugateTable conjugate_nd(const YoungFunction& f, const std::vector<std::vector<double>>& axes,
                            const LambdaGridSpec& spec);

/// Evenly spaced points on [lo, hi], both ends included.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace tailbound
