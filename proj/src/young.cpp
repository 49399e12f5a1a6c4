#include "tailbound/young.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "tailbound/error.hpp"

namespace tailbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClipMargin = 1e-6;
// Sampling half-width used by validate_young when the domain is unbounded.
constexpr double kDefaultValidationSpan = 4.0;

double poissonian_value(double lambda) {
  const double a = std::abs(lambda);
  if (a < 1e-3) {
    // e^a - 1 - a loses all relative precision near zero; use the series.
    return a * a * (0.5 + a * (1.0 / 6.0 + a * (1.0 / 24.0 + a / 120.0)));
  }
  return std::expm1(a) - a;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_increasing(std::span<const double> v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1]))
      throw Error(ErrorCode::contract, std::string(what) + " must be strictly increasing");
}

}  // namespace

std::string to_string(YoungKind kind) {
  switch (kind) {
    case YoungKind::quadratic: return "quadratic";
    case YoungKind::quadratic_form: return "quadratic_form";
    case YoungKind::poissonian: return "poissonian";
    case YoungKind::tabulated: return "tabulated";
    case YoungKind::sum_scaled: return "sum_scaled";
  }
  return "unknown";
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

// ---------------------------------------------------------------- domains

MultiDomain MultiDomain::whole_space(std::size_t dim) {
  return box(std::vector<double>(dim, -kInf), std::vector<double>(dim, kInf));
}

MultiDomain MultiDomain::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size() || lower.empty())
    throw Error(ErrorCode::invalid_domain, "box bounds must have equal, nonzero length");
  MultiDomain d;
  d.shape = Shape::box;
  d.lower = std::move(lower);
  d.upper = std::move(upper);
  return d;
}

MultiDomain MultiDomain::ellipsoid(Eigen::MatrixXd a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorCode::invalid_domain, "ellipsoid matrix must be square");
  MultiDomain d;
  d.shape = Shape::ellipsoid;
  d.shape_matrix = std::move(a);
  return d;
}

bool MultiDomain::contains(std::span<const double> lambda) const {
  if (shape == Shape::box) {
    for (std::size_t j = 0; j < lambda.size(); ++j)
      if (!(lambda[j] > lower[j] && lambda[j] < upper[j])) return false;
    return true;
  }
  const Eigen::Map<const Eigen::VectorXd> l(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
  return l.dot(shape_matrix * l) < 1.0;
}

// ---------------------------------------------------------- YoungFunction

struct YoungFunction::Impl {
  YoungKind kind = YoungKind::quadratic;
  std::size_t dim = 1;
  MultiDomain domain;
  Eigen::MatrixXd form;
  std::vector<double> table_lambda;
  std::vector<double> table_phi;
  bool table_signed = false;
  std::size_t summands = 1;
  std::optional<YoungFunction> base;
};

YoungFunction::YoungFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

YoungFunction YoungFunction::quadratic(std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::contract, "dimension must be at least 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = YoungKind::quadratic;
  impl->dim = dim;
  impl->domain = MultiDomain::whole_space(dim);
  return YoungFunction(std::move(impl));
}

YoungFunction YoungFunction::quadratic_form(Eigen::MatrixXd b) {
  if (b.rows() != b.cols() || b.rows() == 0)
    throw Error(ErrorCode::config, "quadratic_form matrix must be square and nonempty");
  if (!b.isApprox(b.transpose(), 1e-12))
    throw Error(ErrorCode::config, "quadratic_form matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::config, "quadratic_form matrix must be positive definite");
  auto impl = std::make_shared<Impl>();
  impl->kind = YoungKind::quadratic_form;
  impl->dim = static_cast<std::size_t>(b.rows());
  impl->domain = MultiDomain::whole_space(impl->dim);
  impl->form = std::move(b);
  return YoungFunction(std::move(impl));
}

YoungFunction YoungFunction::poissonian() {
  auto impl = std::make_shared<Impl>();
  impl->kind = YoungKind::poissonian;
  impl->domain = MultiDomain::whole_space(1);
  return YoungFunction(std::move(impl));
}

YoungFunction YoungFunction::tabulated(std::vector<double> lambda, std::vector<double> phi) {
  if (lambda.size() != phi.size() || lambda.size() < 2)
    throw Error(ErrorCode::config, "tabulated function needs at least two (lambda, phi) rows");
  for (std::size_t i = 1; i < lambda.size(); ++i)
    if (!(lambda[i] > lambda[i - 1]))
      throw Error(ErrorCode::config, "tabulated lambda values must be strictly increasing");
  if (std::find(lambda.begin(), lambda.end(), 0.0) == lambda.end())
    throw Error(ErrorCode::config, "tabulated grid must contain lambda = 0");
  auto impl = std::make_shared<Impl>();
  impl->kind = YoungKind::tabulated;
  impl->table_signed = lambda.front() < 0.0;
  if (impl->table_signed)
    impl->domain = MultiDomain::box({lambda.front()}, {lambda.back()});
  else
    impl->domain = MultiDomain::box({-lambda.back()}, {lambda.back()});
  impl->table_lambda = std::move(lambda);
  impl->table_phi = std::move(phi);
  return YoungFunction(std::move(impl));
}

YoungFunction YoungFunction::sum_scaled(const YoungFunction& base, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::contract, "number of summands must be at least 1");
  if (n == 1 || base.kind() == YoungKind::quadratic || base.kind() == YoungKind::quadratic_form)
    return base;
  auto impl = std::make_shared<Impl>();
  impl->kind = YoungKind::sum_scaled;
  impl->dim = base.dimension();
  impl->summands = n;
  const double scale = std::sqrt(static_cast<double>(n));
  const MultiDomain& bd = base.domain();
  if (bd.shape == MultiDomain::Shape::box) {
    std::vector<double> lo = bd.lower, hi = bd.upper;
    for (auto& v : lo) v *= scale;
    for (auto& v : hi) v *= scale;
    impl->domain = MultiDomain::box(std::move(lo), std::move(hi));
  } else {
    impl->domain = MultiDomain::ellipsoid(bd.shape_matrix / static_cast<double>(n));
  }
  impl->base = base;
  return YoungFunction(std::move(impl));
}

YoungFunction YoungFunction::with_radius(double radius) const {
  if (dimension() != 1) throw Error(ErrorCode::contract, "with_radius applies to 1-d functions");
  auto impl = std::make_shared<Impl>(*impl_);
  impl->domain = MultiDomain::box({-radius}, {radius});
  return YoungFunction(std::move(impl));
}

YoungFunction YoungFunction::with_domain(MultiDomain domain) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->domain = std::move(domain);
  return YoungFunction(std::move(impl));
}

YoungKind YoungFunction::kind() const { return impl_->kind; }
std::size_t YoungFunction::dimension() const { return impl_->dim; }
const MultiDomain& YoungFunction::domain() const { return impl_->domain; }

double YoungFunction::radius() const {
  const MultiDomain& d = impl_->domain;
  if (d.shape == MultiDomain::Shape::ellipsoid) return 1.0 / std::sqrt(d.shape_matrix(0, 0));
  return std::min(-d.lower.front(), d.upper.front());
}

bool YoungFunction::in_domain(std::span<const double> lambda) const {
  return impl_->domain.contains(lambda);
}

const Eigen::MatrixXd& YoungFunction::form_matrix() const { return impl_->form; }
const std::vector<double>& YoungFunction::table_lambda() const { return impl_->table_lambda; }
const std::vector<double>& YoungFunction::table_phi() const { return impl_->table_phi; }
std::size_t YoungFunction::summands() const { return impl_->summands; }

const YoungFunction& YoungFunction::base() const {
  if (!impl_->base) throw Error(ErrorCode::contract, "function has no base generating function");
  return *impl_->base;
}

std::string YoungFunction::describe() const {
  switch (impl_->kind) {
    case YoungKind::quadratic:
      return impl_->dim == 1 ? "quadratic" : "quadratic(d=" + std::to_string(impl_->dim) + ")";
    case YoungKind::quadratic_form: {
      std::ostringstream os;
      os << "quadratic_form(B=[";
      for (Eigen::Index i = 0; i < impl_->form.rows(); ++i) {
        os << (i ? ",[" : "[");
        for (Eigen::Index j = 0; j < impl_->form.cols(); ++j)
          os << (j ? "," : "") << format_number(impl_->form(i, j));
        os << "]";
      }
      os << "])";
      return os.str();
    }
    case YoungKind::poissonian: return "poissonian";
    case YoungKind::tabulated:
      return "tabulated(rows=" + std::to_string(impl_->table_lambda.size()) + ")";
    case YoungKind::sum_scaled:
      return "sum_scaled(n=" + std::to_string(impl_->summands) + ", base=" +
             impl_->base->describe() + ")";
  }
  return "unknown";
}

double YoungFunction::operator()(double lambda) const {
  if (impl_->dim != 1) {
    const double l[1] = {lambda};
    return (*this)(std::span<const double>(l, 1));
  }
  if (!impl_->domain.contains(std::span<const double>(&lambda, 1))) return kInf;
  switch (impl_->kind) {
    case YoungKind::quadratic: return 0.5 * lambda * lambda;
    case YoungKind::quadratic_form: return 0.5 * impl_->form(0, 0) * lambda * lambda;
    case YoungKind::poissonian: return poissonian_value(lambda);
    case YoungKind::tabulated: {
      const auto& xs = impl_->table_lambda;
      const auto& ys = impl_->table_phi;
      const double l = impl_->table_signed ? lambda : std::abs(lambda);
      if (l < xs.front() || l > xs.back()) return kInf;
      auto it = std::upper_bound(xs.begin(), xs.end(), l);
      if (it == xs.end()) return ys.back();
      const auto i = static_cast<std::size_t>(it - xs.begin());
      const double w = (l - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
    case YoungKind::sum_scaled: {
      const double n = static_cast<double>(impl_->summands);
      return n * (*impl_->base)(lambda / std::sqrt(n));
    }
  }
  return kInf;
}

double YoungFunction::operator()(std::span<const double> lambda) const {
  if (lambda.size() != impl_->dim)
    throw Error(ErrorCode::contract, "argument dimension does not match generating function");
  if (impl_->dim == 1) return (*this)(lambda[0]);
  if (!impl_->domain.contains(lambda)) return kInf;
  switch (impl_->kind) {
    case YoungKind::quadratic: {
      double s = 0.0;
      for (double v : lambda) s += v * v;
      return 0.5 * s;
    }
    case YoungKind::quadratic_form: {
      const Eigen::Map<const Eigen::VectorXd> l(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
      return 0.5 * l.dot(impl_->form * l);
    }
    case YoungKind::sum_scaled: {
      const double n = static_cast<double>(impl_->summands);
      std::vector<double> scaled(lambda.begin(), lambda.end());
      for (auto& v : scaled) v /= std::sqrt(n);
      return n * (*impl_->base)(std::span<const double>(scaled));
    }
    case YoungKind::poissonian:
    case YoungKind::tabulated: break;
  }
  return kInf;
}

YoungFunction read_tabulated_csv(std::istream& in) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  std::string line;
  if (!std::getline(in, line) || trim(line) != "lambda,phi")
    throw Error(ErrorCode::config, "tabulated CSV must start with header 'lambda,phi'");
  std::vector<double> lambda, phi;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::config, "tabulated CSV row " + std::to_string(row) + " needs two columns");
    try {
      std::size_t used = 0;
      const std::string a = trim(line.substr(0, comma));
      const std::string b = trim(line.substr(comma + 1));
      lambda.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument(a);
      phi.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::config, "tabulated CSV row " + std::to_string(row) + " is not numeric");
    }
  }
  return YoungFunction::tabulated(std::move(lambda), std::move(phi));
}

// ------------------------------------------------------------- validation

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
}

std::optional<std::string> ValidationReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return c.name;
  return std::nullopt;
}

namespace {

void check_domain_shape(const YoungFunction& f) {
  const MultiDomain& d = f.domain();
  if (d.shape == MultiDomain::Shape::ellipsoid) {
    if (static_cast<std::size_t>(d.shape_matrix.rows()) != f.dimension())
      throw Error(ErrorCode::invalid_domain, "ellipsoid dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(d.shape_matrix);
    if (llt.info() != Eigen::Success || !d.shape_matrix.isApprox(d.shape_matrix.transpose()))
      throw Error(ErrorCode::invalid_domain, "ellipsoid matrix must be symmetric positive definite");
    return;
  }
  if (d.lower.size() != f.dimension())
    throw Error(ErrorCode::invalid_domain, "box dimension mismatch");
  for (std::size_t j = 0; j < d.lower.size(); ++j) {
    if (!(d.upper[j] > 0.0) || !(d.lower[j] < 0.0))
      throw Error(ErrorCode::invalid_domain, "domain is empty around the origin");
    if (d.lower[j] != -d.upper[j])
      throw Error(ErrorCode::invalid_domain, "domain is not symmetric about the origin");
  }
}

// Half-width of the sampling box along each axis.
std::vector<double> sampling_span(const YoungFunction& f) {
  const MultiDomain& d = f.domain();
  std::vector<double> span(f.dimension(), kDefaultValidationSpan);
  const double shrink = 1.0 - kClipMargin;
  if (d.shape == MultiDomain::Shape::box) {
    for (std::size_t j = 0; j < span.size(); ++j)
      if (std::isfinite(d.upper[j])) span[j] = d.upper[j] * shrink;
  } else {
    // Box inscribed in the ellipsoid along coordinate directions.
    const double k = std::sqrt(static_cast<double>(f.dimension()));
    for (std::size_t j = 0; j < span.size(); ++j)
      span[j] = shrink / (k * std::sqrt(d.shape_matrix(static_cast<Eigen::Index>(j),
                                                       static_cast<Eigen::Index>(j))));
  }
  return span;
}

}  // namespace

ValidationReport validate_young(const YoungFunction& f, std::size_t sample_count, double tol) {
  if (sample_count < 8) throw Error(ErrorCode::contract, "validation needs at least 8 samples");
  check_domain_shape(f);

  const std::size_t d = f.dimension();
  const std::vector<double> span = sampling_span(f);

  // Sample points: symmetric 1-d grid, or a symmetric tensor grid for d > 1.
  std::vector<std::vector<double>> points;
  if (d == 1) {
    for (std::size_t k = 0; k < sample_count; ++k) {
      const double s = span[0] * static_cast<double>(k + 1) / static_cast<double>(sample_count);
      points.push_back({-s});
      points.push_back({s});
    }
  } else {
    const auto per_axis = std::max<std::size_t>(
        3, static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(sample_count), 1.0 / static_cast<double>(d)))));
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
      std::vector<double> p(d);
      for (std::size_t j = 0; j < d; ++j)
        p[j] = -span[j] + 2.0 * span[j] * static_cast<double>(idx[j]) / static_cast<double>(per_axis - 1);
      points.push_back(std::move(p));
      std::size_t j = 0;
      while (j < d && ++idx[j] == per_axis) idx[j++] = 0;
      if (j == d) break;
    }
  }

  auto eval = [&](const std::vector<double>& p) { return f(std::span<const double>(p)); };
  auto slack = [&](double scale) { return tol * std::max(1.0, std::abs(scale)); };

  ValidationReport report;

  AxiomCheck finite{"finite", true, {}};
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    values[i] = eval(points[i]);
    if (!std::isfinite(values[i])) {
      finite.passed = false;
      finite.detail = "non-finite value inside the declared domain";
      report.checks.push_back(finite);
      return report;
    }
  }
  report.checks.push_back(finite);

  AxiomCheck zero{"zero at origin", true, {}};
  const double at_zero = eval(std::vector<double>(d, 0.0));
  if (!(std::abs(at_zero) <= tol)) {
    zero.passed = false;
    zero.detail = "phi(0) = " + format_number(at_zero);
  }
  report.checks.push_back(zero);

  AxiomCheck even{"evenness", true, {}};
  for (std::size_t i = 0; i < points.size() && even.passed; ++i) {
    std::vector<double> neg = points[i];
    for (auto& v : neg) v = -v;
    const double a = values[i];
    const double b = eval(neg);
    if (!(std::abs(a - b) <= slack(a))) {
      even.passed = false;
      even.detail = "phi(l) != phi(-l) at sample " + std::to_string(i);
    }
  }
  report.checks.push_back(even);

  AxiomCheck convex{"convexity", true, {}};
  for (std::size_t i = 0; i < points.size() && convex.passed; ++i) {
    for (std::size_t k = i + 1; k < points.size(); ++k) {
      std::vector<double> mid(d);
      for (std::size_t j = 0; j < d; ++j) mid[j] = 0.5 * (points[i][j] + points[k][j]);
      const double chord = 0.5 * (values[i] + values[k]);
      const double m = eval(mid);
      if (!(m <= chord + slack(chord))) {
        convex.passed = false;
        convex.detail = "midpoint value exceeds chord between samples " + std::to_string(i) +
                        " and " + std::to_string(k);
        break;
      }
    }
  }
  report.checks.push_back(convex);

  AxiomCheck superlinear{"superlinearity", true, {}};
  for (std::size_t i = 0; i < points.size() && superlinear.passed; ++i) {
    double previous = -kInf;
    for (double c : {0.25, 0.5, 0.75, 1.0}) {
      std::vector<double> p = points[i];
      for (auto& v : p) v *= c;
      const double ratio = eval(p) / c;
      if (!(ratio >= previous - slack(previous))) {
        superlinear.passed = false;
        superlinear.detail = "phi(c l)/c decreases along the ray through sample " + std::to_string(i);
        break;
      }
      previous = ratio;
    }
  }
  report.checks.push_back(superlinear);
  return report;
}

// ------------------------------------------------------------ conjugates

ConjugateTable::ConjugateTable(std::vector<std::vector<double>> axes, std::vector<double> values,
                               std::vector<double> derivative, ConjugateProvenance provenance)
    : axes_(std::move(axes)),
      values_(std::move(values)),
      derivative_(std::move(derivative)),
      provenance_(std::move(provenance)) {
  std::size_t expected = 1;
  for (const auto& a : axes_) expected *= a.size();
  if (axes_.empty() || expected != values_.size())
    throw Error(ErrorCode::contract, "conjugate table shape mismatch");
}

double ConjugateTable::max_x() const { return axes_.front().back(); }

double ConjugateTable::value_at(double x) const { return value_at(std::span<const double>(&x, 1)); }

double ConjugateTable::value_at(std::span<const double> x) const {
  const std::size_t d = axes_.size();
  if (x.size() != d) throw Error(ErrorCode::contract, "conjugate lookup dimension mismatch");
  std::vector<std::size_t> lo(d);
  std::vector<double> w(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& a = axes_[j];
    const double tol = 1e-12 * std::max(1.0, std::abs(a.back()));
    if (!(x[j] >= a.front() - tol && x[j] <= a.back() + tol))
      throw Error(ErrorCode::extrapolation,
                  "argument " + format_number(x[j]) + " lies outside the conjugate grid [" +
                      format_number(a.front()) + ", " + format_number(a.back()) + "]",
                  x[j]);
    if (a.size() == 1) {
      lo[j] = 0;
      w[j] = 0.0;
      continue;
    }
    const double xc = std::clamp(x[j], a.front(), a.back());
    auto it = std::upper_bound(a.begin(), a.end(), xc);
    std::size_t i = it == a.end() ? a.size() - 1 : static_cast<std::size_t>(it - a.begin());
    lo[j] = i - 1;
    w[j] = (xc - a[i - 1]) / (a[i] - a[i - 1]);
  }
  double result = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const bool up = (corner >> j) & 1u;
      if (up && axes_[j].size() == 1) {
        weight = 0.0;
        break;
      }
      weight *= up ? w[j] : 1.0 - w[j];
      flat = flat * axes_[j].size() + lo[j] + (up ? 1 : 0);
    }
    if (weight != 0.0) result += weight * values_[flat];
  }
  return result;
}

double ConjugateTable::derivative_at(double x) const {
  if (axes_.size() != 1 || derivative_.empty())
    throw Error(ErrorCode::contract, "derivative column exists only for 1-d tables");
  const auto& a = axes_.front();
  const double tol = 1e-12 * std::max(1.0, std::abs(a.back()));
  if (!(x >= a.front() - tol && x <= a.back() + tol))
    throw Error(ErrorCode::extrapolation, "argument outside the conjugate grid", x);
  if (a.size() == 1) return derivative_.front();
  const double xc = std::clamp(x, a.front(), a.back());
  auto it = std::upper_bound(a.begin(), a.end(), xc);
  std::size_t i = it == a.end() ? a.size() - 1 : static_cast<std::size_t>(it - a.begin());
  const double w = (xc - a[i - 1]) / (a[i] - a[i - 1]);
  return (1.0 - w) * derivative_[i - 1] + w * derivative_[i];
}

namespace {

std::vector<double> finite_difference(const std::vector<double>& x, const std::vector<double>& f) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / (x[1] - x[0]);
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = x[i] - x[i - 1];
    const double h2 = x[i + 1] - x[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] +
           h1 / (h2 * (h1 + h2)) * f[i + 1];
  }
  {
    const double h1 = x[1] - x[0];
    const double h2 = x[2] - x[1];
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] -
           h1 / (h2 * (h1 + h2)) * f[2];
  }
  {
    const double h1 = x[n - 2] - x[n - 3];
    const double h2 = x[n - 1] - x[n - 2];
    d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
               (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
  }
  return d;
}

}  // namespace

ConjugateTable conjugate_1d(const YoungFunction& f, std::span<const double> x_grid,
                            const LambdaGridSpec& spec) {
  if (f.dimension() != 1) throw Error(ErrorCode::contract, "conjugate_1d needs a 1-d function");
  if (x_grid.empty()) throw Error(ErrorCode::contract, "x grid is empty");
  if (x_grid.front() < 0.0) throw Error(ErrorCode::contract, "x grid must be nonnegative");
  require_increasing(x_grid, "x grid");
  if (!(spec.max_lambda > 0.0) || spec.count < 2)
    throw Error(ErrorCode::contract, "lambda grid needs max > 0 and at least two points");

  const double radius = f.radius();
  const bool bounded = std::isfinite(radius);
  const double clip = bounded ? (1.0 - kClipMargin) * radius : kInf;
  const double step = spec.max_lambda / static_cast<double>(spec.count - 1);

  std::vector<double> xs(x_grid.begin(), x_grid.end());
  std::vector<double> values(xs.size());
  std::size_t boundary_hits = 0;
  double lambda_max = std::min(spec.max_lambda, clip);

  for (int doubling = 0;; ++doubling) {
    const auto count = static_cast<std::size_t>(std::ceil(lambda_max / step - 1e-9)) + 1;
    std::vector<double> lambda(count), phi(count);
    for (std::size_t i = 0; i < count; ++i) {
      lambda[i] = std::min(lambda_max, step * static_cast<double>(i));
      phi[i] = f(lambda[i]);
    }
    boundary_hits = 0;
    std::optional<double> pinned;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double best = -kInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < count; ++i) {
        const double v = lambda[i] * xs[k] - phi[i];
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      values[k] = best;
      if (arg == count - 1 && count > 1) {
        ++boundary_hits;
        if (!pinned) pinned = xs[k];
      }
    }
    const bool at_clip = lambda_max >= clip;
    if (!pinned || at_clip) {
      ConjugateProvenance prov{f.describe(), lambda_max, count, doubling, boundary_hits};
      std::vector<double> slope = finite_difference(xs, values);
      return ConjugateTable({std::move(xs)}, std::move(values), std::move(slope), std::move(prov));
    }
    if (doubling >= spec.max_doublings)
      throw Error(ErrorCode::unbounded_conjugate,
                  "conjugate maximizer pinned at lambda grid cap for x = " + format_number(*pinned),
                  *pinned);
    lambda_max = std::min(2.0 * lambda_max, clip);
  }
}

ConjugateTable conjugate_nd(const YoungFunction& f, const std::vector<std::vector<double>>& axes,
                            const LambdaGridSpec& spec) {
  const std::size_t d = f.dimension();
  if (d < 2 || d > 4) throw Error(ErrorCode::contract, "conjugate_nd supports 2 <= d <= 4");
  if (axes.size() != d) throw Error(ErrorCode::contract, "x grid dimension mismatch");
  for (const auto& a : axes) {
    if (a.empty() || a.front() < 0.0)
      throw Error(ErrorCode::contract, "x grid axes must be nonempty and nonnegative");
    require_increasing(a, "x grid axis");
  }
  if (!(spec.max_lambda > 0.0) || spec.count < 2)
    throw Error(ErrorCode::contract, "lambda grid needs max > 0 and at least two points");

  // Symmetric axis containing 0.
  const std::size_t n = spec.count % 2 == 1 ? spec.count : spec.count + 1;
  const std::vector<double> lam = linspace(-spec.max_lambda, spec.max_lambda, n);

  // Peak working set: the phi tensor plus the largest partially reduced table.
  double peak = std::pow(static_cast<double>(n), static_cast<double>(d));
  {
    double suffix = 1.0;
    for (std::size_t k = d; k-- > 1;) {
      suffix *= static_cast<double>(axes[k].size());
      peak = std::max(peak, std::pow(static_cast<double>(n), static_cast<double>(k)) * suffix +
                                std::pow(static_cast<double>(n), static_cast<double>(k + 1)) *
                                    suffix / static_cast<double>(axes[k].size()));
    }
  }
  const double bytes = peak * sizeof(double);
  if (bytes > static_cast<double>(spec.memory_budget_bytes))
    throw Error(ErrorCode::resource, "conjugate grid needs " + format_number(bytes) +
                                         " bytes, above the configured budget of " +
                                         std::to_string(spec.memory_budget_bytes));

  // table[p][i][s]: p over leading lambda axes, i over the axis being reduced,
  // s over already reduced x axes.
  std::vector<double> table(static_cast<std::size_t>(std::pow(static_cast<double>(n), static_cast<double>(d))));
  {
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> point(d);
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
      for (std::size_t j = 0; j < d; ++j) point[j] = lam[idx[j]];
      const double v = f(std::span<const double>(point));
      table[flat] = std::isfinite(v) ? -v : -kInf;
      for (std::size_t j = d; j-- > 0;) {
        if (++idx[j] < n) break;
        idx[j] = 0;
      }
    }
  }

  std::size_t suffix = 1;
  for (std::size_t k = d; k-- > 0;) {
    std::size_t prefix = 1;
    for (std::size_t j = 0; j < k; ++j) prefix *= n;
    const auto& xk = axes[k];
    std::vector<double> next(prefix * xk.size() * suffix, -kInf);
    for (std::size_t p = 0; p < prefix; ++p) {
      for (std::size_t jx = 0; jx < xk.size(); ++jx) {
        double* out = &next[(p * xk.size() + jx) * suffix];
        for (std::size_t i = 0; i < n; ++i) {
          const double shift = lam[i] * xk[jx];
          const double* in = &table[(p * n + i) * suffix];
          for (std::size_t s = 0; s < suffix; ++s) out[s] = std::max(out[s], in[s] + shift);
        }
      }
    }
    table.swap(next);
    suffix *= xk.size();
  }

  ConjugateProvenance prov{f.describe(), spec.max_lambda, n, 0, 0};
  return ConjugateTable(axes, std::move(table), {}, std::move(prov));
}

}  // namespace tailbound
