#include "tailbound/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "tailbound/error.hpp"

namespace tailbound::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

void write_conjugate_csv(std::ostream& out, const ConjugateTable& table) {
  const std::size_t d = table.dimension();
  if (d == 1) {
    out << "x,phi_star,dphi_star\n";
    const auto& x = table.x();
    for (std::size_t i = 0; i < x.size(); ++i)
      out << format_double(x[i]) << ',' << format_double(table.values()[i]) << ','
          << format_double(table.derivative()[i]) << '\n';
    return;
  }
  for (std::size_t j = 0; j < d; ++j) out << 'x' << (j + 1) << ',';
  out << "phi_star\n";
  const auto& axes = table.axes();
  std::vector<std::size_t> idx(d, 0);
  for (double v : table.values()) {
    for (std::size_t j = 0; j < d; ++j) out << format_double(axes[j][idx[j]]) << ',';
    out << format_double(v) << '\n';
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < axes[j].size()) break;
      idx[j] = 0;
    }
  }
}

void write_profile_csv(std::ostream& out, const EntropyProfile& profile) {
  out << "delta,M,m\n";
  for (std::size_t i = 0; i < profile.delta.size(); ++i)
    out << format_double(profile.delta[i]) << ',' << profile.count[i] << ','
        << format_double(profile.log_count[i]) << '\n';
}

void write_entropy_csv(std::ostream& out, const EntropyFunction& m, std::span<const double> delta) {
  out << "delta,M,m\n";
  for (double d : delta) {
    const double v = m(d);
    out << format_double(d) << ',' << format_double(std::exp(v)) << ',' << format_double(v) << '\n';
  }
}

void write_g_curve_csv(std::ostream& out, std::span<const double> p, std::span<const double> g) {
  if (p.size() != g.size()) throw Error(ErrorCode::contract, "g curve columns differ in length");
  out << "p,g\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << format_double(p[i]) << ',' << format_double(g[i]) << '\n';
}

void write_bounds_csv(std::ostream& out, std::span<const BoundReport> reports) {
  out << "u,p_star,g_pstar,conj_val,upper,lower,mc,mc_ci_lo,mc_ci_hi\n";
  for (const auto& r : reports) {
    out << format_double(r.u) << ',' << format_double(r.p_star) << ',' << format_double(r.g_p_star) << ','
        << format_double(r.conj_value) << ',' << format_double(r.upper) << ',' << opt(r.lower) << ',';
    if (r.mc)
      out << format_double(r.mc->estimate) << ',' << format_double(r.mc->ci_lo) << ',' << format_double(r.mc->ci_hi);
    else
      out << ",,";
    out << '\n';
  }
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j;
  j["u"] = num(r.u);
  j["p_star"] = num(r.p_star);
  j["g_pstar"] = num(r.g_p_star);
  j["conj_val"] = num(r.conj_value);
  j["exponent"] = num(r.exponent);
  j["upper"] = num(r.upper);
  j["boundary_optimum"] = r.boundary_optimum;
  auto& trace = j["trace"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.p_trace.size(); ++i)
    trace.push_back({{"p", num(r.p_trace[i])}, {"value", num(r.value_trace[i])}});
  j["closed_form"] = r.closed_form ? num(*r.closed_form) : nlohmann::json();
  j["lower"] = r.lower ? num(*r.lower) : nlohmann::json();
  if (r.mc)
    j["mc"] = {{"estimate", num(r.mc->estimate)}, {"ci_lo", num(r.mc->ci_lo)}, {"ci_hi", num(r.mc->ci_hi)}};
  else
    j["mc"] = nullptr;
  return j;
}

nlohmann::json to_json(const McReport& r) {
  nlohmann::json j;
  j["replicates"] = r.replicates;
  j["summands"] = r.summands;
  j["grid_resolution"] = r.grid_resolution;
  j["confidence"] = r.confidence;
  j["seed"] = r.seed;
  j["two_sided"] = r.two_sided;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.u.size(); ++i)
    rows.push_back({{"u", num(r.u[i])},
                    {"estimate", num(r.estimate[i])},
                    {"ci_lo", num(r.ci_lo[i])},
                    {"ci_hi", num(r.ci_hi[i])},
                    {"exceedances", r.exceedances[i]}});
  return j;
}

void write_verdict_csv(std::ostream& out, std::span<const Verdict> verdicts) {
  out << "u,mc,mc_ci_lo,mc_ci_hi,upper,lower,verdict\n";
  for (const auto& v : verdicts)
    out << format_double(v.u) << ',' << format_double(v.mc) << ',' << format_double(v.mc_ci_lo) << ','
        << format_double(v.mc_ci_hi) << ',' << format_double(v.upper) << ',' << opt(v.lower) << ','
        << (v.pass ? "PASS" : "FAIL") << '\n';
}

SampleMatrix read_samples_csv(std::istream& in) {
  std::string line;
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::io, "non-numeric sample row: '" + line + "'");
    }
    first = false;
    if (cols == 0) cols = row.size();
    if (row.size() != cols) throw Error(ErrorCode::io, "sample rows differ in column count");
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::io, "sample file has no rows");
  return SampleMatrix(rows, cols, std::move(data));
}

void write_path_csv(std::ostream& out, const FieldPath& path, std::size_t grid_resolution) {
  const std::size_t m = path.dimension();
  for (std::size_t j = 0; j < m; ++j) out << 't' << (j + 1) << ',';
  out << "value\n";
  const auto g = linspace(0.0, 1.0, grid_resolution);
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> t(m);
  while (true) {
    for (std::size_t j = 0; j < m; ++j) {
      t[j] = g[idx[j]];
      out << format_double(t[j]) << ',';
    }
    out << format_double(path.value(t)) << '\n';
    std::size_t j = m;
    while (j > 0) {
      --j;
      if (++idx[j] < g.size()) break;
      idx[j] = 0;
      if (j == 0) return;
    }
  }
}

}  // namespace tailbound::io
