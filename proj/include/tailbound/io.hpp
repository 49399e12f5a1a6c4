#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailbound/bounds.hpp"
#include "tailbound/entropy.hpp"
#include "tailbound/fields.hpp"
#include "tailbound/phispace.hpp"
#include "tailbound/young.hpp"

namespace tailbound::io {

/// Round-trip decimal ("%.17g"), "inf", "-inf" or "nan".
std::string format_double(double v);

/// 1-d: `x,phi_star,dphi_star`; d > 1: `x1,...,xd,phi_star`.
void write_conjugate_csv(std::ostream& out, const ConjugateTable& table);

/// `delta,M,m`
void write_profile_csv(std::ostream& out, const EntropyProfile& profile);
/// `delta,M,m` tabulated from an entropy function on a delta grid.
void write_entropy_csv(std::ostream& out, const EntropyFunction& m, std::span<const double> delta);

/// `p,g`
void write_g_curve_csv(std::ostream& out, std::span<const double> p, std::span<const double> g);

/// `u,p_star,g_pstar,conj_val,upper,lower,mc,mc_ci_lo,mc_ci_hi`; absent
/// optional values are left empty.
void write_bounds_csv(std::ostream& out, std::span<const BoundReport> reports);

nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const McReport& report);

struct Verdict {
  double u = 0.0;
  double mc = 0.0;
  double mc_ci_lo = 0.0;
  double mc_ci_hi = 0.0;
  double upper = 1.0;
  std::optional<double> lower;
  bool pass = false;
};

/// `u,mc,mc_ci_lo,mc_ci_hi,upper,lower,verdict`
void write_verdict_csv(std::ostream& out, std::span<const Verdict> verdicts);

/// One draw per row, d numeric columns; a non-numeric first row is a header.
SampleMatrix read_samples_csv(std::istream& in);

/// `t1,...,tm,value` on the evenly spaced grid.
void write_path_csv(std::ostream& out, const FieldPath& path, std::size_t grid_resolution);

}  // namespace tailbound::io
