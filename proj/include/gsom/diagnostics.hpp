#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsom/wft.hpp"

namespace gsom {

struct TVReport {
  double time = 0.0;
  /// Sum of Q over the incoming junction-adjacent states.
  double gamma = 0.0;
  double tv_q = 0.0;
  /// w jumps with vacuum on either side are left out and counted below.
  double tv_w = 0.0;
  double h_bar = 0.0;
  std::size_t vacuum_w_jumps = 0;
};

template <FluxFamily M>
TVReport functionals(const FundamentalDiagram<M> &fd, const NetworkState &state,
                     const JunctionSpec &spec) {
  TVReport rep;
  rep.time = state.time;
  for (std::size_t r = 0; r < state.roads.size(); ++r) {
    const auto &road = state.roads[r];
    if (static_cast<int>(r) < spec.n) {
      rep.gamma += fd.flux(road.junction_state());
    }
    for (std::size_t k = 0; k + 1 < road.states.size(); ++k) {
      const RoadState &a = road.states[k];
      const RoadState &b = road.states[k + 1];
      rep.tv_q += std::abs(fd.flux(b) - fd.flux(a));
      if (a.w != b.w) {
        if (a.rho <= 0.0 || b.rho <= 0.0) {
          ++rep.vacuum_w_jumps;
        } else {
          rep.tv_w += std::abs(b.w - a.w);
        }
      }
    }
  }
  rep.h_bar = theta_hbar(fd, state.junction_states(), spec);
  return rep;
}

/// Functionals after every event of a run, starting at t = 0.
template <FluxFamily M>
std::vector<TVReport> tv_series(const FundamentalDiagram<M> &fd, const Network &net,
                                const RunOptions &opt, Trajectory *traj_out = nullptr) {
  std::vector<TVReport> out;
  auto obs = [&](const NetworkState &s, const EventRecord &) {
    out.push_back(functionals(fd, s, net.junction));
  };
  auto traj = run_wft(fd, net, opt, obs);
  if (traj_out != nullptr) {
    *traj_out = std::move(traj);
  }
  return out;
}

struct CStarReport {
  double value = 0.0;
  bool analytic = false;
  /// Grid supremum at `resolution` points per axis and at twice that.
  double grid = 0.0;
  double grid_refined = 0.0;
  int resolution = 0;
  double rel_change = 0.0;
};

namespace detail {

/// 2 sup (-V_w(r, w) / V_r(r', w')) V(r'', w') over a tensor grid of n points
/// per axis. The three factors depend on disjoint variables once w' is fixed,
/// so the sup over the full n^5 grid is found in O(n^2) evaluations. Families
/// whose V_r vanishes somewhere give +inf.
template <FluxFamily M> double c_star_grid(const M &model, int n) {
  const double w_lo = model.w_min();
  const double w_hi = model.w_max();
  auto wv = [&](int k) { return w_lo + (w_hi - w_lo) * k / (n - 1); };
  double a_max = -std::numeric_limits<double>::infinity();
  for (int iw = 0; iw < n; ++iw) {
    const double w = wv(iw);
    for (int ir = 0; ir < n; ++ir) {
      const double r = model.rho_max(w) * ir / (n - 1);
      a_max = std::max(a_max, model.d_w_velocity(r, w));
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  for (int iw = 0; iw < n; ++iw) {
    const double w = wv(iw);
    double inv_lo = std::numeric_limits<double>::infinity(), inv_hi = 0.0;
    double v_lo = std::numeric_limits<double>::infinity(), v_hi = 0.0;
    for (int ir = 0; ir < n; ++ir) {
      const double r = model.rho_max(w) * ir / (n - 1);
      const double inv = 1.0 / std::abs(model.d_rho_velocity(r, w));
      inv_lo = std::min(inv_lo, inv);
      inv_hi = std::max(inv_hi, inv);
      const double v = model.velocity(r, w);
      v_lo = std::min(v_lo, v);
      v_hi = std::max(v_hi, v);
    }
    if (a_max == 0.0) {
      best = std::max(best, 0.0);
    } else {
      best = std::max(best, a_max > 0.0 ? a_max * inv_hi * v_hi : a_max * inv_lo * v_lo);
    }
  }
  return 2.0 * best;
}

} // namespace detail

template <FluxFamily M> CStarReport c_star(const M &model, int resolution = 64) {
  CStarReport rep;
  rep.resolution = resolution;
  rep.grid = detail::c_star_grid(model, resolution);
  rep.grid_refined = detail::c_star_grid(model, 2 * resolution);
  const double scale = std::max(std::abs(rep.grid_refined), 1e-300);
  rep.rel_change = rep.grid_refined == rep.grid ? 0.0 : std::abs(rep.grid_refined - rep.grid) / scale;
  if constexpr (HasCStar<M>) {
    rep.value = model.c_star();
    rep.analytic = true;
  } else {
    rep.value = rep.grid_refined;
  }
  return rep;
}

struct TreeNode {
  int id = -1;
  int level = 1;
  bool leaf = false;
};

/// Ancestry of a rho-front along rho-parents, cut at the original time t_o.
struct BackwardTree {
  int root = -1;
  /// Latest birth of a junction-emitted front in the rho-ancestry; NaN when
  /// the ancestry never touches the junction.
  double t_o = std::numeric_limits<double>::quiet_NaN();
  bool returning = false;
  int K = 1;
  /// Sum of |dw| over the w-fronts met after t_o.
  double tv_tree = 0.0;
  int n_rho_root = 0;
  std::vector<int> leaves;
  std::vector<int> w_interactions;
  std::vector<TreeNode> nodes;
  /// Sums of [Q(L) - Q(R)]+ and [Q(R) - Q(L)]+ over the leaves.
  double leaf_pos_minus = 0.0;
  double leaf_pos_plus = 0.0;
};

template <FluxFamily M>
BackwardTree backward_tree(const FundamentalDiagram<M> &fd, const Trajectory &traj, int id) {
  if (id < 0 || id >= static_cast<int>(traj.fronts.size()) || traj.fronts[id].id != id) {
    throw std::out_of_range("backward_tree: unknown front id " + std::to_string(id));
  }
  const auto &F = traj.fronts;
  BackwardTree tree;
  tree.root = id;

  // Pass 1: rho-ancestry, not crossing junction emissions or initial fronts.
  std::set<int> seen{id};
  std::vector<int> stack{id};
  double t_o = -std::numeric_limits<double>::infinity();
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    const auto &f = F[k];
    if (f.origin == Origin::junction) {
      t_o = std::max(t_o, f.t_birth);
      continue;
    }
    for (int p : f.parents) {
      if (F[p].family == WaveFamily::rho && seen.insert(p).second) {
        stack.push_back(p);
      }
    }
  }
  const double root_birth = F[id].t_birth;
  tree.returning = std::isfinite(t_o) && t_o < root_birth;
  if (std::isfinite(t_o)) {
    tree.t_o = t_o;
  }
  const double cut = std::isfinite(t_o) ? t_o : 0.0;
  const double tol = 1e-12 * std::max(1.0, cut);

  // Pass 2: levels with memoisation; leaves are the rho-fronts alive at the cut.
  std::map<int, int> level;
  std::set<int> leaves, wset;
  std::function<int(int)> walk = [&](int k) -> int {
    if (auto it = level.find(k); it != level.end()) {
      return it->second;
    }
    const auto &f = F[k];
    int lv = 1;
    bool leaf = f.t_birth <= cut + tol || f.origin != Origin::interaction;
    std::vector<int> rp;
    bool has_w = false;
    if (!leaf) {
      for (int p : f.parents) {
        if (F[p].family == WaveFamily::rho) {
          rp.push_back(p);
        } else {
          has_w = true;
        }
      }
      leaf = rp.empty();
    }
    if (leaf) {
      leaves.insert(k);
    } else {
      int best = 1;
      for (int p : rp) {
        best = std::max(best, walk(p));
      }
      lv = best + (has_w ? 1 : 0);
      for (int p : f.parents) {
        if (F[p].family == WaveFamily::w) {
          wset.insert(p);
        }
      }
    }
    level[k] = lv;
    tree.nodes.push_back({k, lv, leaf});
    return lv;
  };
  tree.K = walk(id);
  for (int k : leaves) {
    tree.leaves.push_back(k);
    const double dq = fd.flux(F[k].right) - fd.flux(F[k].left);
    tree.leaf_pos_plus += std::max(0.0, dq);
    tree.leaf_pos_minus += std::max(0.0, -dq);
  }
  tree.n_rho_root = static_cast<int>(tree.leaves.size());
  for (int k : wset) {
    tree.w_interactions.push_back(k);
    tree.tv_tree += std::abs(F[k].right.w - F[k].left.w);
  }
  std::sort(tree.nodes.begin(), tree.nodes.end(),
            [](const TreeNode &a, const TreeNode &b) { return a.id < b.id; });
  return tree;
}

enum class RoadSide { incoming, outgoing };

inline const char *to_string(RoadSide s) {
  return s == RoadSide::incoming ? "incoming" : "outgoing";
}

struct ReturningWaveRecord {
  int id = -1;
  int road = -1;
  double t_o = 0.0;
  double t_a = 0.0;
  RoadSide side = RoadSide::incoming;
  FrontKind kind = FrontKind::shock;
  int K = 1;
  double tv_tree = 0.0;
  int n_rho_root = 0;
  /// Q(L) - Q(R) on incoming roads, Q(R) - Q(L) on outgoing roads.
  double delta_q = 0.0;
  /// C* tv_tree plus the positive parts of the root flux variations.
  double bound = 0.0;
  /// "outgoing-shock", "incoming-shock", "rho-only" or "general".
  std::string rule;
  bool sign_ok = true;
  bool bound_ok = true;
  bool pass() const { return sign_ok && bound_ok; }
};

inline constexpr double kBoundSlack = 1e-12;

template <FluxFamily M>
std::vector<ReturningWaveRecord> classify_returning(const FundamentalDiagram<M> &fd,
                                                    const Trajectory &traj, int n,
                                                    double c_star_value) {
  std::vector<ReturningWaveRecord> out;
  for (const auto &jr : traj.junction_events) {
    for (int id : jr.absorbed) {
      const auto &f = traj.fronts[id];
      if (f.family != WaveFamily::rho) {
        continue;
      }
      const auto tree = backward_tree(fd, traj, id);
      if (!tree.returning || !(tree.t_o < jr.time)) {
        continue;
      }
      ReturningWaveRecord rec;
      rec.id = id;
      rec.road = f.road;
      rec.t_o = tree.t_o;
      rec.t_a = jr.time;
      rec.side = f.road < n ? RoadSide::incoming : RoadSide::outgoing;
      rec.kind = f.kind;
      rec.K = tree.K;
      rec.tv_tree = tree.tv_tree;
      rec.n_rho_root = tree.n_rho_root;
      const double dq = fd.flux(f.right) - fd.flux(f.left);
      if (rec.side == RoadSide::outgoing) {
        rec.delta_q = dq;
        rec.bound = c_star_value * tree.tv_tree + tree.leaf_pos_plus;
        rec.rule = "outgoing-shock";
        rec.sign_ok = f.kind == FrontKind::shock && rec.delta_q < 0.0;
        rec.bound_ok = rec.delta_q <= rec.bound + kBoundSlack;
      } else {
        rec.delta_q = -dq;
        rec.bound = c_star_value * tree.tv_tree + tree.leaf_pos_minus;
        rec.bound_ok = rec.delta_q <= rec.bound + kBoundSlack;
        if (f.kind == FrontKind::shock) {
          rec.rule = "incoming-shock";
          rec.sign_ok = rec.delta_q < 0.0;
        } else if (tree.K == 1) {
          rec.rule = "rho-only";
          rec.sign_ok = rec.delta_q < 0.0;
        } else {
          rec.rule = "general";
        }
      }
      out.push_back(rec);
    }
  }
  return out;
}

/// h-bar across junction events triggered by a single rho-front that lowers
/// the flux at the junction.
struct HbarMonotonicity {
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// Largest h_after - h_before seen over the checked events.
  double worst_increase = -std::numeric_limits<double>::infinity();
};

template <FluxFamily M>
HbarMonotonicity hbar_monotonicity(const FundamentalDiagram<M> &fd, const Trajectory &traj,
                                   const JunctionSpec &spec, double tol = 1e-10) {
  HbarMonotonicity rep;
  for (const auto &jr : traj.junction_events) {
    if (jr.absorbed.size() != 1) {
      continue;
    }
    const auto &f = traj.fronts[jr.absorbed[0]];
    if (f.family != WaveFamily::rho) {
      continue;
    }
    const bool in = f.road < spec.n;
    const double q_old = fd.flux(in ? f.right : f.left);
    const double q_new = fd.flux(in ? f.left : f.right);
    if (!(q_new < q_old)) {
      continue;
    }
    const double before = theta_hbar(fd, jr.before, spec);
    const double after = theta_hbar(fd, jr.solution.u_hat, spec);
    ++rep.checked;
    rep.worst_increase = std::max(rep.worst_increase, after - before);
    if (after > before + tol * std::max(1.0, before)) {
      ++rep.violations;
    }
  }
  return rep;
}

} // namespace gsom
