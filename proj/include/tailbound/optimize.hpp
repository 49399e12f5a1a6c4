#pragma once

#include <cmath>
#include <utility>

namespace tailbound {

struct ScalarMinimum {
  double x;
  double value;
  int iterations;
};

/// Golden-section search for a minimum of f on [a, b]. Assumes f is
/// unimodal on the bracket; otherwise returns some local minimum.
template <typename F>
ScalarMinimum golden_section_minimize(F&& f, double a, double b, double tol = 1e-12,
                                      int max_iterations = 200) {
  constexpr double inv_phi = 0.6180339887498949;
  if (b < a) std::swap(a, b);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iterations && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc <= fd) return {c, fc, it};
  return {d, fd, it};
}

}  // namespace tailbound
