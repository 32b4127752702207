#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gsom/errors.hpp"
#include "gsom/fundamental_diagram.hpp"

namespace gsom {

enum class WaveFamily { rho, w };
enum class WaveKind { shock, rarefaction, contact };

inline const char *to_string(WaveFamily f) {
  return f == WaveFamily::rho ? "rho" : "w";
}
inline const char *to_string(WaveKind k) {
  switch (k) {
  case WaveKind::shock:
    return "shock";
  case WaveKind::rarefaction:
    return "rarefaction";
  default:
    return "contact";
  }
}

struct Wave {
  WaveFamily family = WaveFamily::rho;
  WaveKind kind = WaveKind::shock;
  RoadState left;
  RoadState right;
  double speed_lo = 0.0;
  double speed_hi = 0.0;
  /// Set when the wave borders a vacuum: the w jump is a passive label there
  /// and V is not conserved across it.
  bool vacuum = false;
};

struct RiemannSolution {
  std::vector<Wave> waves;
  RoadState middle;
  /// Left state was vacuum; the solution is pure label transport.
  bool vacuum_left = false;
};

/// U* with w* = w- and V(U*) = V(U+); vacuum (0, w-) when V(U+) is faster
/// than anything reachable at w-.
template <FluxFamily M>
RoadState middle_state(const FundamentalDiagram<M> &fd, const RoadState &um,
                       const RoadState &up) {
  fd.check(um);
  fd.check(up);
  const double vp = fd.velocity(up);
  return {fd.rho_dagger(um.w, vp), um.w};
}

/// Speed of the rho-wave joining a and b (same w): Rankine-Hugoniot for a
/// jump, characteristic speed in the degenerate case.
template <FluxFamily M>
double rho_jump_speed(const FundamentalDiagram<M> &fd, double ra, double rb,
                      double w) {
  if (std::abs(rb - ra) <= 1e-14) {
    return fd.lambda1(0.5 * (ra + rb), w);
  }
  return (fd.flux(rb, w) - fd.flux(ra, w)) / (rb - ra);
}

template <FluxFamily M>
RiemannSolution solve_riemann(const FundamentalDiagram<M> &fd,
                              const RoadState &um, const RoadState &up) {
  fd.check(um);
  fd.check(up);
  RiemannSolution sol;
  if (um.rho <= kStateTol) {
    sol.vacuum_left = true;
    sol.middle = um;
    if (!fd.same_state(um, up)) {
      Wave c;
      c.family = WaveFamily::w;
      c.kind = WaveKind::contact;
      c.left = um;
      c.right = up;
      c.speed_lo = c.speed_hi = fd.velocity(up);
      c.vacuum = true;
      sol.waves.push_back(c);
    }
    return sol;
  }

  const RoadState us = middle_state(fd, um, up);
  sol.middle = us;
  const bool vacuum_middle = us.rho <= 0.0 && fd.velocity(up) > fd.max_velocity(um.w);

  if (std::abs(um.rho - us.rho) > kStateTol) {
    Wave r;
    r.family = WaveFamily::rho;
    r.left = um;
    r.right = us;
    r.vacuum = vacuum_middle;
    if (um.rho < us.rho) {
      r.kind = WaveKind::shock;
      r.speed_lo = r.speed_hi = rho_jump_speed(fd, um.rho, us.rho, um.w);
    } else {
      r.kind = WaveKind::rarefaction;
      r.speed_lo = fd.lambda1(um);
      r.speed_hi = fd.lambda1(us);
    }
    sol.waves.push_back(r);
  }
  if (!fd.same_state(us, up)) {
    Wave c;
    c.family = WaveFamily::w;
    c.kind = WaveKind::contact;
    c.left = us;
    c.right = up;
    c.speed_lo = c.speed_hi = fd.velocity(up);
    c.vacuum = vacuum_middle || up.rho <= kStateTol;
    sol.waves.push_back(c);
  }
  return sol;
}

/// Resolves the collision of two adjacent waves as the Riemann problem of
/// their outer states.
template <FluxFamily M>
RiemannSolution interact(const FundamentalDiagram<M> &fd, const Wave &left,
                         const Wave &right) {
  if (!fd.same_state(left.right, right.left)) {
    throw PreconditionError("interact: waves are not adjacent");
  }
  if (left.family == WaveFamily::rho && right.family == WaveFamily::w &&
      left.speed_hi > 0.0 && right.speed_lo > 0.0) {
    throw PreconditionError(
        "interact: a rho-wave behind a w-wave with positive speeds never "
        "catches it");
  }
  const double scale = std::max({1.0, std::abs(left.speed_hi), std::abs(right.speed_lo)});
  if (!(left.speed_hi > right.speed_lo + 1e-10 * scale)) {
    throw PreconditionError("interact: waves do not approach each other");
  }
  return solve_riemann(fd, left.left, right.right);
}

} // namespace gsom
