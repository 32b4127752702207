#pragma once

#include <cmath>
#include <string>

#include "gsom/errors.hpp"

namespace gsom::roots {

inline constexpr double kTolerance = 1e-12;
inline constexpr int kMaxIterations = 400;

/// Bisection on [lo, hi] for a function whose sign differs at the endpoints.
/// An endpoint that is already a root is returned as is.
template <typename F>
double bisect(F &&f, double lo, double hi, double tol = kTolerance) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) {
    return lo;
  }
  if (fhi == 0.0) {
    return hi;
  }
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericError("bisect: root not bracketed on [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]");
  }
  for (int it = 0; it < kMaxIterations && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    const double fmid = f(mid);
    if (fmid == 0.0) {
      return mid;
    }
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section search for the maximizer of a unimodal function on [lo, hi].
template <typename F>
double golden_max(F &&f, double lo, double hi, double tol = kTolerance) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < kMaxIterations && (b - a) > tol; ++it) {
    if (fc >= fd) {
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
  return 0.5 * (a + b);
}

} // namespace gsom::roots
