#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "gsom/families.hpp"

namespace gsom {

struct GridSpec {
  int rho_points = 200;
  int w_points = 50;
};

struct HypothesisCheck {
  std::string name;
  bool pass = true;
  double worst_violation = 0.0;
  double worst_rho = 0.0;
  double worst_w = 0.0;
};

struct FamilyReport {
  std::vector<HypothesisCheck> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const HypothesisCheck &c) { return c.pass; });
  }
  double worst_violation() const {
    double v = 0.0;
    for (const auto &c : checks) {
      v = std::max(v, c.worst_violation);
    }
    return v;
  }
  const HypothesisCheck *find(const std::string &name) const {
    for (const auto &c : checks) {
      if (c.name == name) {
        return &c;
      }
    }
    return nullptr;
  }
};

namespace detail {

// Second-order accurate derivatives on a uniform sample row, one-sided at the
// ends so the boundary samples are checked too.
inline double first_diff(const std::vector<double> &y, std::size_t k, double h) {
  const std::size_t n = y.size();
  if (k == 0) {
    return (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
  }
  if (k == n - 1) {
    return (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
  }
  return (y[k + 1] - y[k - 1]) / (2.0 * h);
}

inline double second_diff(const std::vector<double> &y, std::size_t k, double h) {
  const std::size_t n = y.size();
  if (k == 0) {
    return (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (h * h);
  }
  if (k == n - 1) {
    return (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / (h * h);
  }
  return (y[k + 1] - 2.0 * y[k] + y[k - 1]) / (h * h);
}

} // namespace detail

/// Samples the six structural hypotheses of a family by finite differences.
/// Strict inequalities must hold with margin `strict_margin`; the violation of
/// a strict check at a sample is max(0, value + margin).
template <FluxFamily M>
FamilyReport validate_family(const M &m, GridSpec grid = {},
                             double strict_margin = 1e-9) {
  const int nr = std::max(grid.rho_points, 4);
  const int nw = std::max(grid.w_points, 4);
  const double wl = m.w_min();
  const double wr = m.w_max();
  const double hw = (wr - wl) / (nw - 1);

  enum { H1, H2, H3, V1, V2, V3, kCount };
  std::array<HypothesisCheck, kCount> out{};
  out[H1].name = "H1";
  out[H2].name = "H2";
  out[H3].name = "H3";
  out[V1].name = "V1";
  out[V2].name = "V2";
  out[V3].name = "V3";

  auto record = [&](int id, double violation, double rho, double w) {
    if (violation > out[id].worst_violation) {
      out[id].worst_violation = violation;
      out[id].worst_rho = rho;
      out[id].worst_w = w;
    }
    if (violation > 0.0) {
      out[id].pass = false;
    }
  };

  // Rows at fixed w: derivatives in rho.
  std::vector<double> q(nr), v(nr);
  for (int j = 0; j < nw; ++j) {
    const double w = wl + hw * j;
    const double rmax = m.rho_max(w);
    const double hr = rmax / (nr - 1);
    for (int k = 0; k < nr; ++k) {
      const double r = hr * k;
      v[k] = m.velocity(r, w);
      q[k] = r * v[k];
    }
    const double scale = std::max(1.0, std::abs(m.velocity(0.0, w)) * rmax);
    record(H1, std::abs(q[0]) > 1e-12 * scale ? std::abs(q[0]) : 0.0, 0.0, w);
    record(H1, std::abs(q[nr - 1]) > 1e-12 * scale ? std::abs(q[nr - 1]) : 0.0,
           rmax, w);
    for (int k = 0; k < nr; ++k) {
      const double r = hr * k;
      const double q2 = detail::second_diff(q, static_cast<std::size_t>(k), hr);
      record(H2, std::max(0.0, q2 + strict_margin), r, w);
      record(V1, std::max(0.0, -v[k]), r, w);
      const double v1 = detail::first_diff(v, static_cast<std::size_t>(k), hr);
      record(V2, std::max(0.0, v1 + strict_margin), r, w);
    }
  }

  // Columns at fixed rho fraction: derivatives in w.
  std::vector<double> qw(nw), vw(nw);
  for (int k = 0; k < nr; ++k) {
    const double frac = static_cast<double>(k) / (nr - 1);
    for (int j = 0; j < nw; ++j) {
      const double w = wl + hw * j;
      const double r = frac * m.rho_max(w);
      vw[j] = m.velocity(r, w);
      qw[j] = r * vw[j];
    }
    for (int j = 0; j < nw; ++j) {
      const double w = wl + hw * j;
      const double r = frac * m.rho_max(w);
      const double dq = detail::first_diff(qw, static_cast<std::size_t>(j), hw);
      const double dv = detail::first_diff(vw, static_cast<std::size_t>(j), hw);
      // Round-off floor for differences of O(1) values.
      const double floor = 1e-12 / hw;
      record(H3, dq < -floor ? -dq : 0.0, r, w);
      record(V3, dv < -floor ? -dv : 0.0, r, w);
    }
  }

  FamilyReport rep;
  rep.checks.assign(out.begin(), out.end());
  return rep;
}

} // namespace gsom
