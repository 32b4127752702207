#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gsom/errors.hpp"
#include "gsom/fundamental_diagram.hpp"
#include "gsom/riemann.hpp"
#include "gsom/roots.hpp"

namespace gsom {

enum class PriorityMode { strict, adaptive };

inline const char *to_string(PriorityMode m) {
  return m == PriorityMode::strict ? "strict" : "adaptive";
}

/// n incoming roads (indices 0..n-1) and m outgoing roads (n..n+m-1).
/// alpha[j][i] is the share of incoming road i sent to outgoing road j.
struct JunctionSpec {
  int n = 0;
  int m = 0;
  std::vector<double> p;
  std::vector<std::vector<double>> alpha;
  PriorityMode mode = PriorityMode::adaptive;

  /// Every violated invariant, not only the first.
  std::vector<std::string> errors() const {
    std::vector<std::string> out;
    std::ostringstream os;
    os.precision(17);
    if (n < 1) {
      out.emplace_back("junction.incoming must be at least 1");
    }
    if (m < 1) {
      out.emplace_back("junction.outgoing must be at least 1");
    }
    if (static_cast<int>(p.size()) != n) {
      out.emplace_back("junction.priority has " + std::to_string(p.size()) +
                       " entries, expected " + std::to_string(n));
    } else {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!(p[i] >= 0.0)) {
          out.emplace_back("junction.priority[" + std::to_string(i) +
                           "] must be non-negative");
        }
        sum += p[i];
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        os.str("");
        os << "priority must sum to 1 (got " << sum << ")";
        out.emplace_back(os.str());
      }
    }
    if (static_cast<int>(alpha.size()) != m) {
      out.emplace_back("junction.distribution has " + std::to_string(alpha.size()) +
                       " rows, expected " + std::to_string(m));
      return out;
    }
    for (int j = 0; j < m; ++j) {
      if (static_cast<int>(alpha[j].size()) != n) {
        out.emplace_back("junction.distribution[" + std::to_string(j) + "] has " +
                         std::to_string(alpha[j].size()) + " entries, expected " +
                         std::to_string(n));
        return out;
      }
    }
    for (int j = 0; j < m; ++j) {
      bool any = false;
      for (int i = 0; i < n; ++i) {
        if (!(alpha[j][i] >= 0.0)) {
          out.emplace_back("junction.distribution[" + std::to_string(j) + "][" +
                           std::to_string(i) + "] must be non-negative");
        }
        any = any || alpha[j][i] > 0.0;
      }
      if (!any) {
        out.emplace_back("outgoing road " + std::to_string(n + j) +
                         " receives from no incoming road");
      }
    }
    for (int i = 0; i < n; ++i) {
      double col = 0.0;
      for (int j = 0; j < m; ++j) {
        col += alpha[j][i];
      }
      if (std::abs(col - 1.0) > 1e-9) {
        os.str("");
        os << "distribution column " << i << " must sum to 1 (got " << col << ")";
        out.emplace_back(os.str());
      }
    }
    return out;
  }

  void validate() const {
    const auto errs = errors();
    if (!errs.empty()) {
      std::string msg;
      for (const auto &e : errs) {
        msg += (msg.empty() ? "" : "; ") + e;
      }
      throw SpecError(msg);
    }
  }
};

struct TranscriptStep {
  int step = 0;
  double h_bar = 0.0;
  /// Candidate values; NaN for roads that are fixed or inactive.
  std::vector<double> h_in;
  std::vector<double> h_out;
  /// Incoming roads at demand after this step.
  std::vector<int> fixed;
  /// Road index that realised h_bar.
  int binding = -1;
  /// "supply" (stopped on an outgoing face), "demand" (fixed an incoming
  /// road), "strict" (stopped on an incoming face) or "complete".
  std::string outcome;
};

struct JunctionSolution {
  std::vector<double> q_hat;
  std::vector<double> w_hat;
  std::vector<RoadState> u_hat;
  std::vector<TranscriptStep> transcript;
  /// Reductions applied before the first step.
  std::vector<std::string> notes;
  /// Priority realised by the incoming fluxes (q_i / sum q).
  std::vector<double> realised_priority;
};

namespace detail {
inline constexpr double kTieRel = 1e-10;
inline constexpr double kSnap = 1e-12;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
} // namespace detail

/// Flux-weighted attribute of the mixture entering an outgoing road.
inline double mix_w(const std::vector<double> &q_in, const std::vector<double> &w_in,
                    const std::vector<double> &alpha_row) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < q_in.size(); ++i) {
    num += alpha_row[i] * q_in[i] * w_in[i];
    den += alpha_row[i] * q_in[i];
  }
  if (!(den > 0.0)) {
    throw PreconditionError("mix_w: no inflow; use the road's own attribute");
  }
  return num / den;
}

/// Union of at most two density intervals.
struct DensitySet {
  struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;
  };
  std::vector<Interval> parts;

  bool contains(double rho, double tol = 1e-12) const {
    for (const auto &iv : parts) {
      const bool above = iv.lo_open ? rho > iv.lo + tol : rho >= iv.lo - tol;
      const bool below = iv.hi_open ? rho < iv.hi - tol : rho <= iv.hi + tol;
      if (above && below) {
        return true;
      }
    }
    return false;
  }
};

struct IncomingAdmissible {
  DensitySet set;
  double demand = 0.0;
};

struct OutgoingAdmissible {
  DensitySet set;
  double rho_dagger = 0.0;
  double supply = 0.0;
  /// V(U+) exceeds the top speed at w_bar.
  bool unreachable = false;
};

template <FluxFamily M>
IncomingAdmissible incoming_admissible(const FundamentalDiagram<M> &fd,
                                       const RoadState &um) {
  fd.check(um);
  IncomingAdmissible out;
  out.demand = fd.demand(um);
  const double sigma = fd.critical_density(um.w);
  const double rmax = fd.rho_max(um.w);
  if (um.rho <= 0.0) {
    out.set.parts.push_back({0.0, 0.0, false, false});
  } else if (um.rho <= sigma) {
    out.set.parts.push_back({um.rho, um.rho, false, false});
    out.set.parts.push_back({fd.companion_density(um.rho, um.w), rmax, true, false});
  } else {
    out.set.parts.push_back({sigma, rmax, false, false});
  }
  return out;
}

template <FluxFamily M>
OutgoingAdmissible outgoing_admissible(const FundamentalDiagram<M> &fd,
                                       const RoadState &up, double w_bar) {
  fd.check(up);
  OutgoingAdmissible out;
  const double vp = fd.velocity(up);
  out.unreachable = vp > fd.max_velocity(w_bar);
  out.rho_dagger = fd.rho_dagger(w_bar, vp);
  out.supply = fd.supply(out.rho_dagger, w_bar);
  const double sigma = fd.critical_density(w_bar);
  if (out.rho_dagger <= sigma) {
    out.set.parts.push_back({0.0, sigma, false, false});
  } else {
    out.set.parts.push_back(
        {0.0, fd.companion_density(out.rho_dagger, w_bar), false, true});
  }
  return out;
}

/// Supply of an outgoing road whose right state moves at v_plus, when fed
/// with attribute w_bar.
template <FluxFamily M>
double outgoing_supply(const FundamentalDiagram<M> &fd, double w_bar, double v_plus) {
  return fd.supply(fd.rho_dagger(w_bar, v_plus), w_bar);
}

/// Incoming trace state carrying flux q.
template <FluxFamily M>
RoadState incoming_trace(const FundamentalDiagram<M> &fd, const RoadState &u,
                         double q) {
  const double sigma = fd.critical_density(u.w);
  const double qu = fd.flux(u);
  const double tol = detail::kSnap * std::max(1.0, fd.max_flux(u.w));
  if (u.rho <= sigma && std::abs(q - qu) <= tol) {
    return u;
  }
  return {fd.invert_flux_on_branch(std::min(q, fd.max_flux(u.w)), u.w,
                                   Branch::congested),
          u.w};
}

/// Outgoing trace state with attribute w_hat carrying flux q.
template <FluxFamily M>
RoadState outgoing_trace(const FundamentalDiagram<M> &fd, const RoadState &u,
                         double w_hat, double q) {
  const double vp = fd.velocity(u);
  const double rd = fd.rho_dagger(w_hat, vp);
  const double s = fd.supply(rd, w_hat);
  const double qmax = fd.max_flux(w_hat);
  const double tol = detail::kSnap * std::max(1.0, qmax);
  if (q >= s - tol && rd > fd.critical_density(w_hat)) {
    return {rd, w_hat};
  }
  return {fd.invert_flux_on_branch(std::clamp(q, 0.0, qmax), w_hat,
                                   Branch::free_flow),
          w_hat};
}

namespace detail {

/// Smallest h >= h0 with psi(h) = s(w(h)), where psi(h) = a h + b and
/// w(h) = (aw h + bw) / (a h + b). Returns +inf when a == 0.
template <FluxFamily M>
double supply_crossing(const FundamentalDiagram<M> &fd, double h0, double a,
                       double b, double aw, double bw, double v_plus,
                       double q_cap) {
  if (!(a > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  auto w_of = [&](double h) {
    const double den = a * h + b;
    return den > 0.0 ? (aw * h + bw) / den : aw / a;
  };
  auto g = [&](double h) {
    return (a * h + b) - outgoing_supply(fd, w_of(h), v_plus);
  };
  if (b <= 0.0 && bw <= 0.0) {
    // Constant mixture: closed form.
    return std::max(h0, outgoing_supply(fd, aw / a, v_plus) / a);
  }
  if (g(h0) >= 0.0) {
    return h0;
  }
  // psi exceeds every reachable supply beyond h_top.
  double h_top = std::max(h0, (q_cap - b) / a);
  h_top = h_top * (1.0 + 1e-9) + 1e-12;
  while (g(h_top) < 0.0) {
    h_top = 2.0 * h_top + 1.0;
  }
  constexpr int kScan = 64;
  double lo = h0;
  for (int k = 1; k <= kScan; ++k) {
    const double h = h0 + (h_top - h0) * k / kScan;
    if (g(h) >= 0.0) {
      return roots::bisect(g, lo, h);
    }
    lo = h;
  }
  return roots::bisect(g, lo, h_top);
}

} // namespace detail

/// Adapting priority solver at a junction. `states` holds the n incoming left
/// states followed by the m outgoing right states.
template <FluxFamily M>
JunctionSolution aprsom_solve(const FundamentalDiagram<M> &fd,
                              const std::vector<RoadState> &states,
                              const JunctionSpec &spec) {
  spec.validate();
  const int n = spec.n;
  const int m = spec.m;
  if (static_cast<int>(states.size()) != n + m) {
    throw SpecError("aprsom_solve: expected " + std::to_string(n + m) + " states");
  }
  for (const auto &u : states) {
    fd.check(u);
  }

  JunctionSolution sol;
  sol.q_hat.assign(n + m, 0.0);
  sol.w_hat.assign(n + m, 0.0);
  sol.u_hat.assign(n + m, RoadState{});

  std::vector<double> d(n), w(n), vplus(m);
  std::vector<bool> active(n, false);
  double w_top = 0.0;
  for (int i = 0; i < n; ++i) {
    d[i] = fd.demand(states[i]);
    w[i] = states[i].w;
    active[i] = spec.p[i] > 0.0 && d[i] > 0.0;
    if (!active[i]) {
      sol.notes.push_back("incoming road " + std::to_string(i) +
                          (spec.p[i] > 0.0 ? " has zero demand" : " has zero priority") +
                          ": removed");
    } else {
      w_top = std::max(w_top, w[i]);
    }
  }
  for (int j = 0; j < m; ++j) {
    vplus[j] = fd.velocity(states[n + j]);
  }
  const double q_cap = w_top > 0.0 ? fd.max_flux(std::min(w_top, fd.w_max())) : 0.0;

  std::vector<double> q(n, 0.0);
  std::vector<bool> fixed(n, false);
  std::vector<int> fixed_order;
  const bool any_active = std::any_of(active.begin(), active.end(), [](bool b) { return b; });
  double h_prev = 0.0;

  for (int step = 1; any_active; ++step) {
    TranscriptStep ts;
    ts.step = step;
    ts.h_in.assign(n, detail::kNaN);
    ts.h_out.assign(m, detail::kNaN);

    double best_in = std::numeric_limits<double>::infinity();
    int arg_in = -1;
    for (int i = 0; i < n; ++i) {
      if (active[i] && !fixed[i]) {
        ts.h_in[i] = d[i] / spec.p[i];
        if (ts.h_in[i] < best_in) {
          best_in = ts.h_in[i];
          arg_in = i;
        }
      }
    }
    double best_out = std::numeric_limits<double>::infinity();
    int arg_out = -1;
    for (int j = 0; j < m; ++j) {
      double a = 0.0, b = 0.0, aw = 0.0, bw = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!active[i]) {
          continue;
        }
        const double al = spec.alpha[j][i];
        if (fixed[i]) {
          b += al * d[i];
          bw += al * d[i] * w[i];
        } else {
          a += al * spec.p[i];
          aw += al * spec.p[i] * w[i];
        }
      }
      const double hj =
          detail::supply_crossing(fd, h_prev, a, b, aw, bw, vplus[j], q_cap);
      if (std::isfinite(hj)) {
        ts.h_out[j] = hj;
      }
      if (hj < best_out) {
        best_out = hj;
        arg_out = j;
      }
    }

    const double scale = std::max(1.0, std::min(best_in, best_out));
    const bool outgoing_wins =
        arg_out >= 0 && best_out <= best_in + detail::kTieRel * scale;
    auto fill_ray = [&](double h) {
      for (int i = 0; i < n; ++i) {
        if (active[i] && !fixed[i]) {
          double qi = spec.p[i] * h;
          if (qi >= d[i] - detail::kSnap * std::max(1.0, d[i])) {
            qi = d[i];
          }
          q[i] = qi;
        }
      }
    };

    if (outgoing_wins) {
      ts.h_bar = best_out;
      ts.binding = n + arg_out;
      ts.outcome = "supply";
      fill_ray(best_out);
    } else {
      ts.h_bar = best_in;
      ts.binding = arg_in;
      if (spec.mode == PriorityMode::strict) {
        ts.outcome = "strict";
        fill_ray(best_in);
      } else {
        q[arg_in] = d[arg_in];
        fixed[arg_in] = true;
        fixed_order.push_back(arg_in);
        ts.outcome = "demand";
        bool all = true;
        for (int i = 0; i < n; ++i) {
          all = all && (!active[i] || fixed[i]);
        }
        if (all) {
          ts.outcome = "complete";
        }
      }
    }
    ts.fixed = fixed_order;
    sol.transcript.push_back(ts);
    if (ts.outcome != "demand") {
      break;
    }
    h_prev = ts.h_bar;
  }

  // Outgoing fluxes and attributes.
  for (int i = 0; i < n; ++i) {
    sol.q_hat[i] = q[i];
    sol.w_hat[i] = w[i];
    sol.u_hat[i] = incoming_trace(fd, states[i], q[i]);
  }
  for (int j = 0; j < m; ++j) {
    double qj = 0.0;
    double num = 0.0;
    for (int i = 0; i < n; ++i) {
      qj += spec.alpha[j][i] * q[i];
      num += spec.alpha[j][i] * q[i] * w[i];
    }
    const double wj = qj > 0.0 ? num / qj : states[n + j].w;
    sol.q_hat[n + j] = qj;
    sol.w_hat[n + j] = std::clamp(wj, fd.w_min(), fd.w_max());
    sol.u_hat[n + j] = outgoing_trace(fd, states[n + j], sol.w_hat[n + j], qj);
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += q[i];
  }
  sol.realised_priority.assign(n, 0.0);
  if (total > 0.0) {
    for (int i = 0; i < n; ++i) {
      sol.realised_priority[i] = q[i] / total;
    }
  }
  return sol;
}

/// sup{h : h p in Theta}: the first face of the feasible set met by the
/// priority ray, with supplies evaluated at the p-weighted mixtures.
template <FluxFamily M>
double theta_hbar(const FundamentalDiagram<M> &fd, const std::vector<RoadState> &states,
                  const JunctionSpec &spec) {
  spec.validate();
  const int n = spec.n;
  const int m = spec.m;
  double h = std::numeric_limits<double>::infinity();
  std::vector<bool> active(n);
  for (int i = 0; i < n; ++i) {
    const double di = fd.demand(states[i]);
    active[i] = spec.p[i] > 0.0 && di > 0.0;
    if (active[i]) {
      h = std::min(h, di / spec.p[i]);
    }
  }
  for (int j = 0; j < m; ++j) {
    double a = 0.0, aw = 0.0;
    for (int i = 0; i < n; ++i) {
      if (active[i]) {
        a += spec.alpha[j][i] * spec.p[i];
        aw += spec.alpha[j][i] * spec.p[i] * states[i].w;
      }
    }
    if (a > 0.0) {
      h = std::min(h, outgoing_supply(fd, aw / a, fd.velocity(states[n + j])) / a);
    }
  }
  return std::isfinite(h) ? h : 0.0;
}

/// Checks that every wave between a road state and its trace leaves the
/// junction: negative speeds on incoming roads, positive on outgoing ones.
/// Zero-speed fan edges and waves inside jammed or empty stretches pass.
template <FluxFamily M>
bool junction_waves_admissible(const FundamentalDiagram<M> &fd,
                               const std::vector<RoadState> &states,
                               const JunctionSolution &sol, int n,
                               std::string *why = nullptr) {
  const int total = static_cast<int>(states.size());
  for (int r = 0; r < total; ++r) {
    const bool incoming = r < n;
    const auto rs = incoming ? solve_riemann(fd, states[r], sol.u_hat[r])
                             : solve_riemann(fd, sol.u_hat[r], states[r]);
    for (const auto &wv : rs.waves) {
      const double tol = 1e-9;
      const bool shock_like = wv.kind != WaveKind::rarefaction;
      bool ok;
      if (incoming) {
        ok = shock_like ? wv.speed_hi < 0.0 : wv.speed_hi <= tol;
      } else {
        ok = shock_like ? wv.speed_lo > 0.0 : wv.speed_lo >= -tol;
      }
      if (!ok) {
        if (why) {
          std::ostringstream os;
          os.precision(17);
          os << "road " << r << ": " << to_string(wv.family) << "-"
             << to_string(wv.kind) << " with speed [" << wv.speed_lo << ", "
             << wv.speed_hi << "]";
          *why = os.str();
        }
        return false;
      }
    }
  }
  return true;
}

} // namespace gsom
