#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsom/junction.hpp"

namespace gsom {

/// Two incoming roads feeding one outgoing road, solved by the explicit case
/// analysis on the (q1, q2) plane. Output layout matches aprsom_solve.
template <FluxFamily M>
JunctionSolution merge_solve(const FundamentalDiagram<M> &fd, const RoadState &u1,
                             const RoadState &u2, const RoadState &u3,
                             double p1, double p2, PriorityMode mode) {
  if (!(p1 > 0.0) || !(p2 > 0.0)) {
    throw SpecError("merge_solve: both priorities must be positive");
  }
  fd.check(u1);
  fd.check(u2);
  fd.check(u3);
  const double d1 = fd.demand(u1);
  const double d2 = fd.demand(u2);
  const double v3 = fd.velocity(u3);
  const double w1 = u1.w;
  const double w2 = u2.w;

  JunctionSolution sol;
  TranscriptStep first;
  first.step = 1;
  first.h_in = {detail::kNaN, detail::kNaN};
  first.h_out = {detail::kNaN};

  double q1 = 0.0;
  double q2 = 0.0;
  auto snap = [](double q, double d) {
    return q >= d - detail::kSnap * std::max(1.0, d) ? d : q;
  };
  auto s3 = [&](double w) { return outgoing_supply(fd, w, v3); };
  // Outgoing face reached while one incoming road stays at its demand.
  auto along_wall = [&](double d_fixed, double w_fixed, double p_free, double w_free,
                        double h_from) {
    const double q_cap = fd.max_flux(std::min(fd.w_max(), std::max(w1, w2)));
    return detail::supply_crossing(fd, h_from, p_free, d_fixed, p_free * w_free,
                                   d_fixed * w_fixed, v3, q_cap);
  };

  if (d1 <= 0.0 || d2 <= 0.0) {
    // One road is empty: a single road feeds the outgoing one.
    const bool one = d1 > 0.0;
    sol.notes.push_back(std::string("incoming road ") + (one ? "1" : "0") +
                        " has zero demand: removed");
    const double d = one ? d1 : d2;
    const double w = one ? w1 : w2;
    const double p = one ? p1 : p2;
    if (d > 0.0) {
      const double h_d = d / p;
      const double h_s = s3(w) / p;
      (one ? first.h_in[0] : first.h_in[1]) = h_d;
      first.h_out[0] = h_s;
      const bool out_wins = h_s <= h_d + detail::kTieRel * std::max(1.0, h_d);
      first.h_bar = out_wins ? h_s : h_d;
      first.binding = out_wins ? 2 : (one ? 0 : 1);
      first.outcome = out_wins ? "supply" : (mode == PriorityMode::strict ? "strict" : "complete");
      const double qq = snap(p * first.h_bar, d);
      (one ? q1 : q2) = qq;
      if (mode == PriorityMode::adaptive && !out_wins) {
        first.fixed = {one ? 0 : 1};
      }
    }
    sol.transcript.push_back(first);
  } else {
    const double h1 = d1 / p1;
    const double h2 = d2 / p2;
    const double w_ray = (p1 * w1 + p2 * w2) / (p1 + p2);
    const double h3 = s3(w_ray) / (p1 + p2);
    first.h_in = {h1, h2};
    first.h_out = {h3};
    const double hin = std::min(h1, h2);
    if (h3 <= hin + detail::kTieRel * std::max(1.0, std::min(hin, h3))) {
      // The ray meets the maximisation line first.
      first.h_bar = h3;
      first.binding = 2;
      first.outcome = "supply";
      q1 = snap(p1 * h3, d1);
      q2 = snap(p2 * h3, d2);
      sol.transcript.push_back(first);
    } else {
      const bool road1 = h1 <= h2;
      const double hb1 = road1 ? h1 : h2;
      first.h_bar = hb1;
      first.binding = road1 ? 0 : 1;
      if (mode == PriorityMode::strict) {
        first.outcome = "strict";
        q1 = snap(p1 * hb1, d1);
        q2 = snap(p2 * hb1, d2);
        sol.transcript.push_back(first);
      } else {
        first.outcome = "demand";
        first.fixed = {road1 ? 0 : 1};
        sol.transcript.push_back(first);
        TranscriptStep second;
        second.step = 2;
        second.fixed = first.fixed;
        second.h_in = {detail::kNaN, detail::kNaN};
        second.h_out = {detail::kNaN};
        if (road1) {
          // Move up the vertical side q1 = d1.
          const double h3b = along_wall(d1, w1, p2, w2, hb1);
          second.h_in[1] = h2;
          second.h_out[0] = h3b;
          const bool out_wins = h3b <= h2 + detail::kTieRel * std::max(1.0, h2);
          second.h_bar = out_wins ? h3b : h2;
          second.binding = out_wins ? 2 : 1;
          q1 = d1;
          q2 = snap(p2 * second.h_bar, d2);
          if (!out_wins) {
            second.fixed.push_back(1);
          }
          second.outcome = out_wins ? "supply" : "complete";
        } else {
          // Move along the horizontal side q2 = d2.
          const double h3b = along_wall(d2, w2, p1, w1, hb1);
          second.h_in[0] = h1;
          second.h_out[0] = h3b;
          const bool out_wins = h3b <= h1 + detail::kTieRel * std::max(1.0, h1);
          second.h_bar = out_wins ? h3b : h1;
          second.binding = out_wins ? 2 : 0;
          q2 = d2;
          q1 = snap(p1 * second.h_bar, d1);
          if (!out_wins) {
            second.fixed.push_back(0);
          }
          second.outcome = out_wins ? "supply" : "complete";
        }
        sol.transcript.push_back(second);
      }
    }
  }

  const double q3 = q1 + q2;
  const double w3 = q3 > 0.0 ? (q1 * w1 + q2 * w2) / q3 : u3.w;
  sol.q_hat = {q1, q2, q3};
  sol.w_hat = {w1, w2, std::clamp(w3, fd.w_min(), fd.w_max())};
  sol.u_hat = {incoming_trace(fd, u1, q1), incoming_trace(fd, u2, q2),
               outgoing_trace(fd, u3, sol.w_hat[2], q3)};
  sol.realised_priority = q3 > 0.0 ? std::vector<double>{q1 / q3, q2 / q3}
                                   : std::vector<double>{0.0, 0.0};
  return sol;
}

} // namespace gsom
