#pragma once

#include <random>
#include <vector>

#include "gsom/wft.hpp"

/// Randomized single-junction networks for the reference box
/// rho in [0, 1], w in [0.5, 2].
namespace gsom::scenarios {

namespace detail {

inline JunctionSpec random_spec(std::mt19937_64 &rng, int n, int m, PriorityMode mode) {
  std::uniform_real_distribution<double> up(0.1, 1.0);
  JunctionSpec s;
  s.n = n;
  s.m = m;
  s.mode = mode;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    s.p.push_back(up(rng));
    sum += s.p.back();
  }
  for (auto &p : s.p) {
    p /= sum;
  }
  s.alpha.assign(m, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    double col = 0.0;
    for (int j = 0; j < m; ++j) {
      s.alpha[j][i] = up(rng);
      col += s.alpha[j][i];
    }
    for (int j = 0; j < m; ++j) {
      s.alpha[j][i] /= col;
    }
  }
  return s;
}

/// Pieces of random length covering the road, starting at the far end for
/// incoming roads and at the junction for outgoing ones.
inline RoadProfile random_profile(std::mt19937_64 &rng, bool incoming, double length,
                                  int pieces, double rho_lo, double rho_hi, double w_lo,
                                  double w_hi) {
  std::uniform_real_distribution<double> ur(rho_lo, rho_hi), uw(w_lo, w_hi), u01(0.0, 1.0);
  const double a = incoming ? -length : 0.0;
  std::vector<double> cuts{a};
  for (int k = 1; k < pieces; ++k) {
    cuts.push_back(a + length * u01(rng));
  }
  std::sort(cuts.begin(), cuts.end());
  RoadProfile p;
  p.length = length;
  p.x = cuts;
  for (int k = 0; k < pieces; ++k) {
    p.states.push_back({ur(rng), uw(rng)});
  }
  return p;
}

} // namespace detail

/// Two incoming roads, m outgoing, one to four random pieces per road.
inline Network random_network(std::mt19937_64 &rng, int m,
                              PriorityMode mode = PriorityMode::adaptive) {
  std::uniform_int_distribution<int> pieces(1, 4);
  std::uniform_real_distribution<double> len(1.0, 2.0);
  Network net;
  net.junction = detail::random_spec(rng, 2, m, mode);
  for (int r = 0; r < 2 + m; ++r) {
    net.roads.push_back(
        detail::random_profile(rng, r < 2, len(rng), pieces(rng), 0.0, 1.0, 0.5, 2.0));
  }
  return net;
}

/// Outgoing roads carry light traffic near the junction and a dense block
/// downstream whose backward shock meets the waves emitted at the junction.
inline Network outgoing_returning(std::mt19937_64 &rng, int m,
                                  PriorityMode mode = PriorityMode::adaptive) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Network net;
  net.junction = detail::random_spec(rng, 2, m, mode);
  for (int i = 0; i < 2; ++i) {
    net.roads.push_back(detail::random_profile(rng, true, 2.0, 2, 0.1, 0.6, 0.5, 2.0));
  }
  for (int j = 0; j < m; ++j) {
    RoadProfile p;
    p.length = 3.0;
    const double cut = 0.4 + 0.8 * u01(rng);
    p.x = {0.0, cut};
    p.states = {{0.05 + 0.3 * u01(rng), 0.5 + 1.5 * u01(rng)},
                {0.85 + 0.15 * u01(rng), 0.5 + 1.5 * u01(rng)}};
    net.roads.push_back(p);
  }
  return net;
}

/// Incoming queues created by a congested outgoing stretch, later met by
/// light traffic and attribute changes arriving from upstream.
inline Network incoming_returning(std::mt19937_64 &rng, int m,
                                  PriorityMode mode = PriorityMode::adaptive) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Network net;
  net.junction = detail::random_spec(rng, 2, m, mode);
  for (int i = 0; i < 2; ++i) {
    RoadProfile p;
    p.length = 3.0;
    const double c1 = -3.0 + 0.6 * u01(rng);
    const double c2 = -2.0 + 1.2 * u01(rng);
    const double c3 = -0.6 + 0.4 * u01(rng);
    p.x = {-3.0, c1, c2, c3};
    p.states = {{0.02 + 0.1 * u01(rng), 0.5 + 1.5 * u01(rng)},
                {0.05 + 0.2 * u01(rng), 0.5 + 1.5 * u01(rng)},
                {0.2 + 0.3 * u01(rng), 0.5 + 1.5 * u01(rng)},
                {0.3 + 0.4 * u01(rng), 0.5 + 1.5 * u01(rng)}};
    net.roads.push_back(p);
  }
  for (int j = 0; j < m; ++j) {
    RoadProfile p;
    p.length = 3.0;
    const double cut = 0.2 + 0.5 * u01(rng);
    p.x = {0.0, cut};
    p.states = {{0.75 + 0.2 * u01(rng), 0.5 + 1.5 * u01(rng)},
                {0.02 + 0.2 * u01(rng), 0.5 + 1.5 * u01(rng)}};
    net.roads.push_back(p);
  }
  return net;
}

} // namespace gsom::scenarios
