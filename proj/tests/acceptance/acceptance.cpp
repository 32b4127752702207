#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gsom/diagnostics.hpp"
#include "gsom/io/csv.hpp"
#include "gsom/junction.hpp"
#include "gsom/merge.hpp"
#include "gsom/properties.hpp"
#include "gsom/riemann.hpp"
#include "gsom/scenarios.hpp"
#include "gsom/validate.hpp"
#include "gsom/wft.hpp"
#include "support/oracles.hpp"

/// Acceptance criteria 1-10, one PASS/FAIL line each.

namespace {

using gsom::PriorityMode;
using gsom::RoadState;
using Fd = gsom::FundamentalDiagram<gsom::Greenshields>;

const Fd kFd(gsom::Greenshields(1.0, 0.5, 2.0));

struct Outcome {
  bool pass = false;
  std::string detail;
  /// Seconds; 0 when the criterion has no time limit.
  double limit = 0.0;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome c1_hypotheses() {
  const auto rep = gsom::validate_family(kFd.model(), gsom::GridSpec{200, 50});
  Outcome o;
  o.limit = 1.0;
  o.pass = rep.all_pass() && rep.worst_violation() < 1e-6;
  o.detail = std::to_string(rep.checks.size()) + " checks, worst violation " +
             num(rep.worst_violation());
  return o;
}

Outcome c2_riemann() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ur(0.0, 1.0), uw(0.5, 2.0);
  double worst_w = 0.0, worst_v = 0.0;
  long lax_bad = 0, order_bad = 0, shocks = 0;
  for (int k = 0; k < 100000; ++k) {
    const RoadState um{ur(rng), uw(rng)};
    const RoadState up{ur(rng), uw(rng)};
    const auto sol = gsom::solve_riemann(kFd, um, up);
    double rho_speed = -1e300;
    for (const auto &wv : sol.waves) {
      if (wv.family == gsom::WaveFamily::rho) {
        worst_w = std::max(worst_w, std::abs(wv.left.w - wv.right.w));
        rho_speed = wv.speed_hi;
        if (wv.kind == gsom::WaveKind::shock) {
          ++shocks;
          const bool lax = kFd.lambda1(wv.left) > wv.speed_lo && wv.speed_lo > kFd.lambda1(wv.right);
          lax_bad += lax ? 0 : 1;
        }
      } else {
        if (!wv.vacuum) {
          worst_v = std::max(worst_v, std::abs(kFd.velocity(wv.left) - kFd.velocity(wv.right)));
        }
        order_bad += wv.speed_lo >= rho_speed - 1e-12 ? 0 : 1;
      }
    }
  }
  Outcome o;
  o.limit = 10.0;
  o.pass = worst_w <= 1e-9 && worst_v <= 1e-9 && lax_bad == 0 && order_bad == 0;
  o.detail = "1e5 pairs, max |dw| over rho-waves " + num(worst_w) + ", max |dV| over w-waves " +
             num(worst_v) + ", Lax failures " + std::to_string(lax_bad) + "/" +
             std::to_string(shocks) + ", ordering failures " + std::to_string(order_bad);
  return o;
}

Outcome c3_junction() {
  std::mt19937_64 rng(3);
  double worst_cons = 0.0, worst_fix = 0.0;
  int count = 0;
  for (auto mode : {PriorityMode::strict, PriorityMode::adaptive}) {
    for (int m : {1, 2}) {
      for (int k = 0; k < 10000; ++k) {
        const auto inst = gsom::oracle::random_junction(rng, 2, m, mode);
        const auto sol = gsom::aprsom_solve(kFd, inst.states, inst.spec);
        const double in = sol.q_hat[0] + sol.q_hat[1];
        double out = 0.0;
        for (int j = 0; j < m; ++j) {
          out += sol.q_hat[2 + j];
        }
        worst_cons = std::max(worst_cons, std::abs(in - out));
        const auto again = gsom::aprsom_solve(kFd, sol.u_hat, inst.spec);
        for (int r = 0; r < 2 + m; ++r) {
          worst_fix = std::max(worst_fix, std::abs(again.q_hat[r] - sol.q_hat[r]));
          worst_fix = std::max(worst_fix, std::abs(again.u_hat[r].rho - sol.u_hat[r].rho));
          worst_fix = std::max(worst_fix, std::abs(again.u_hat[r].w - sol.u_hat[r].w));
        }
        ++count;
      }
    }
  }
  Outcome o;
  o.limit = 10.0;
  o.pass = worst_cons <= 1e-12 && worst_fix <= 1e-9;
  o.detail = std::to_string(count) + " inputs, max |sum in - sum out| " + num(worst_cons) +
             ", max |RS(RS) - RS| " + num(worst_fix);
  return o;
}

Outcome c4_oracles() {
  std::mt19937_64 rng(4);
  double worst_walk = 0.0;
  for (int k = 0; k < 500; ++k) {
    const auto inst = gsom::oracle::random_junction(rng, 2, 1 + k % 2, PriorityMode::adaptive);
    const auto sol = gsom::aprsom_solve(kFd, inst.states, inst.spec);
    const auto walk = gsom::oracle::walk_priority_path(kFd, inst.states, inst.spec, 1e-4);
    for (int i = 0; i < 2; ++i) {
      worst_walk = std::max(worst_walk, std::abs(sol.q_hat[i] - walk[i]));
    }
  }
  double worst_merge = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const auto mode = k % 2 ? PriorityMode::strict : PriorityMode::adaptive;
    const auto inst = gsom::oracle::random_junction(rng, 2, 1, mode);
    const auto gen = gsom::aprsom_solve(kFd, inst.states, inst.spec);
    const auto mer = gsom::merge_solve(kFd, inst.states[0], inst.states[1], inst.states[2],
                                       inst.spec.p[0], inst.spec.p[1], mode);
    for (int r = 0; r < 3; ++r) {
      worst_merge = std::max(worst_merge, std::abs(mer.q_hat[r] - gen.q_hat[r]));
      worst_merge = std::max(worst_merge, std::abs(mer.w_hat[r] - gen.w_hat[r]));
    }
  }
  Outcome o;
  o.limit = 60.0;
  o.pass = worst_walk <= 2e-4 && worst_merge <= 1e-9;
  o.detail = "walk oracle max diff " + num(worst_walk) + " on 500, merge vs general max diff " +
             num(worst_merge) + " on 1e4";
  return o;
}

Outcome c5_examples() {
  const Fd wide(gsom::Greenshields(4.0, 0.5, 2.0));
  const RoadState u1{wide.invert_flux_on_branch(0.2, 1.0, gsom::Branch::free_flow), 1.0};
  const RoadState u2{wide.invert_flux_on_branch(0.3, 1.0, gsom::Branch::free_flow), 1.0};
  const RoadState u3{wide.invert_flux_on_branch(0.6, 1.0, gsom::Branch::congested), 1.0};
  gsom::JunctionSpec merge;
  merge.n = 2;
  merge.m = 1;
  merge.p = {0.5, 0.5};
  merge.alpha = {{1.0, 1.0}};
  const auto a = gsom::aprsom_solve(wide, {u1, u2, u3}, merge);
  const std::vector<double> want_a{0.2, 0.3, 0.5};

  gsom::JunctionSpec cross;
  cross.n = 2;
  cross.m = 2;
  cross.p = {0.6, 0.4};
  cross.alpha = {{0.5, 0.5}, {0.5, 0.5}};
  const auto b = gsom::aprsom_solve(kFd, std::vector<RoadState>(4, RoadState{0.5, 1.0}), cross);
  double worst = 0.0;
  for (int r = 0; r < 3; ++r) {
    worst = std::max(worst, std::abs(a.q_hat[r] - want_a[r]));
  }
  for (int r = 0; r < 4; ++r) {
    worst = std::max(worst, std::abs(b.q_hat[r] - 0.25));
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = "merge (0.2, 0.3, 0.5) and 2x2 (0.25 x4), max diff " + num(worst);
  return o;
}

std::string render(const gsom::Trajectory &t) {
  std::ostringstream os;
  gsom::io::write_events(os, t);
  os << gsom::io::genealogy_json(t).dump();
  gsom::io::write_snapshot(os, kFd, t.final_state);
  return os.str();
}

Outcome c6_wft() {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  int truncated = 0, replay_bad = 0, ordering = 0;
  std::size_t events = 0;
  for (int k = 0; k < 100; ++k) {
    const auto mode = k % 2 ? PriorityMode::strict : PriorityMode::adaptive;
    const auto net = gsom::scenarios::random_network(rng, 1 + k % 2, mode);
    gsom::RunOptions opt;
    opt.t_end = 3.0;
    opt.eps_fan = 0.05;
    const auto a = gsom::run_wft(kFd, net, opt);
    const auto b = gsom::run_wft(kFd, net, opt);
    worst = std::max(worst, std::abs(a.mass.residual()) / opt.t_end);
    truncated += a.truncated ? 1 : 0;
    ordering += static_cast<int>(a.ordering_violations);
    replay_bad += render(a) == render(b) ? 0 : 1;
    events += a.events.size();
  }
  Outcome o;
  o.limit = 300.0;
  o.pass = worst <= 1e-8 && truncated == 0 && replay_bad == 0;
  o.detail = "100 runs, " + std::to_string(events) + " events, max mass residual per unit time " +
             num(worst) + ", truncated " + std::to_string(truncated) + ", replay mismatches " +
             std::to_string(replay_bad) + ", ordering violations " + std::to_string(ordering);
  return o;
}

std::vector<gsom::ReturningWaveRecord> returning_suite(bool outgoing, std::uint64_t seed,
                                                       int runs, double cs) {
  std::mt19937_64 rng(seed);
  std::vector<gsom::ReturningWaveRecord> out;
  for (int k = 0; k < runs; ++k) {
    const auto mode = k % 4 < 2 ? PriorityMode::adaptive : PriorityMode::strict;
    const auto net = outgoing ? gsom::scenarios::outgoing_returning(rng, 1 + k % 2, mode)
                              : gsom::scenarios::incoming_returning(rng, 1 + k % 2, mode);
    gsom::RunOptions opt;
    opt.t_end = 6.0;
    opt.eps_fan = 0.05;
    const auto traj = gsom::run_wft(kFd, net, opt);
    for (const auto &r : gsom::classify_returning(kFd, traj, 2, cs)) {
      if ((r.side == gsom::RoadSide::outgoing) == outgoing) {
        out.push_back(r);
      }
    }
  }
  return out;
}

Outcome c7_outgoing() {
  const auto recs = returning_suite(true, 77, 200, 2.0);
  int shock_neg = 0, shock_other = 0, frag = 0, frag_pos = 0, k1 = 0, k1_ok = 0, bound = 0;
  int kmax = 0;
  for (const auto &r : recs) {
    if (r.kind == gsom::FrontKind::shock) {
      (r.delta_q < 0.0 ? shock_neg : shock_other) += 1;
    } else {
      ++frag;
      frag_pos += r.delta_q > 0.0 ? 1 : 0;
    }
    if (r.K == 1) {
      ++k1;
      k1_ok += r.kind == gsom::FrontKind::shock && r.delta_q < 0.0 ? 1 : 0;
    }
    bound += r.bound_ok ? 1 : 0;
    kmax = std::max(kmax, r.K);
  }
  const int n = static_cast<int>(recs.size());
  Outcome o;
  o.pass = n >= 50 && shock_neg == n;
  o.detail = std::to_string(n) + " records: " + std::to_string(shock_neg) +
             " shocks with dQ<0, " + std::to_string(shock_other) + " other shocks, " +
             std::to_string(frag) + " rarefaction fragments (" + std::to_string(frag_pos) +
             " with dQ>0); K=1 records " + std::to_string(k1_ok) + "/" + std::to_string(k1) +
             " shocks with dQ<0; max K " + std::to_string(kmax) + "; general bound holds on " +
             std::to_string(bound) + "/" + std::to_string(n);
  return o;
}

Outcome c8_incoming() {
  const auto cs = gsom::c_star(kFd.model());
  const double grid_err = std::abs(cs.grid - 2.0) / 2.0;
  const auto recs = returning_suite(false, 88, 200, cs.value);
  int ok = 0, positive = 0;
  double margin = -1e300;
  for (const auto &r : recs) {
    ok += r.bound_ok ? 1 : 0;
    positive += r.delta_q > 0.0 ? 1 : 0;
    margin = std::max(margin, r.delta_q - r.bound);
  }
  const int n = static_cast<int>(recs.size());
  Outcome o;
  o.pass = n > 0 && ok == n && cs.value == 2.0 && grid_err < 0.01;
  o.detail = "C* " + num(cs.value) + " (grid " + num(cs.grid) + ", refined " +
             num(cs.grid_refined) + "); " + std::to_string(ok) + "/" + std::to_string(n) +
             " records within the bound, " + std::to_string(positive) +
             " with dQ>0, max dQ - bound " + num(margin);
  return o;
}

Outcome c9_properties() {
  const auto rep = gsom::appendix_a_suite(kFd, 1, 60, 3, 0);
  int identity = 0, factor4 = 0, p3 = 0, failing = 0;
  double cmax = 0.0;
  for (const auto &f : rep.families) {
    identity += f.identity_checked;
    factor4 += f.factor4_checked;
    p3 += f.p3_checked;
    failing += f.pass() ? 0 : 1;
    cmax = std::max({cmax, f.c_tv_q, f.c_tv_w, f.c_hbar, f.c_gamma, f.c1});
  }
  Outcome o;
  o.limit = 120.0;
  o.pass = rep.pass() && rep.families.size() == 24;
  o.detail = std::to_string(rep.families.size()) + " families, " +
             std::to_string(rep.perturbations) + " perturbations, failing families " +
             std::to_string(failing) + ", identity checks " + std::to_string(identity) +
             ", C3 factor-4 checks " + std::to_string(factor4) + ", flux-decreasing h checks " +
             std::to_string(p3) + ", largest constant " + num(cmax);
  return o;
}

Outcome c10_p1() {
  const auto res = gsom::p1_pairs(kFd, 1000, 10);
  Outcome o;
  o.pass = res.pairs == 1000 && res.mismatches == 0;
  o.detail = std::to_string(res.pairs) + " pairs, " + std::to_string(res.mismatches) +
             " differ";
  return o;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"model hypotheses", c1_hypotheses},
      {"road Riemann solver", c2_riemann},
      {"junction conservation and consistency", c3_junction},
      {"oracle equivalence", c4_oracles},
      {"worked examples", c5_examples},
      {"WFT conservation and determinism", c6_wft},
      {"outgoing returning waves are shocks with dQ<0", c7_outgoing},
      {"incoming returning-wave bound", c8_incoming},
      {"perturbation harness", c9_properties},
      {"P1 equality", c10_p1},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = o.limit <= 0.0 || secs < o.limit;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("criterion %zu: %s  %s: %s [%.2f s%s]\n", k + 1, pass ? "PASS" : "FAIL",
                criteria[k].first.c_str(), o.detail.c_str(), secs,
                o.limit > 0.0 ? (in_time ? ", within limit" : ", over limit") : "");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
