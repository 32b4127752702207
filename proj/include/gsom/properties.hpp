#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gsom/errors.hpp"
#include "gsom/fundamental_diagram.hpp"
#include "gsom/junction.hpp"

namespace gsom {

/// One-wave perturbation harness on 2x2 junction equilibria.

enum class PerturbKind { rho, rho_w };

inline const char *to_string(PerturbKind k) { return k == PerturbKind::rho ? "rho" : "rho-w"; }

/// A 2x2 equilibrium with its case letter and the role of each road.
struct Equilibrium {
  std::vector<RoadState> states;
  JunctionSpec spec;
  JunctionSolution sol;
  char letter = '?';
  /// labels[r] is the family label of a wave hitting road r ("A1".."C4").
  std::vector<std::string> labels;
  double h_bar = 0.0;
};

namespace detail {
inline constexpr double kIdentityTol = 1e-12;
inline constexpr double kRatioTol = 1e-12;

/// lhs <= C rhs: the smallest such C, 0 when lhs is negligible, inf when
/// rhs vanishes and lhs does not.
inline double needed_constant(double lhs, double rhs) {
  if (lhs <= kRatioTol) {
    return 0.0;
  }
  if (rhs <= 1e-14) {
    return std::numeric_limits<double>::infinity();
  }
  return lhs / rhs;
}
} // namespace detail

/// Classifies a 2x2 equilibrium. Throws PreconditionError when the states are
/// not fixed by the solver.
template <FluxFamily M>
Equilibrium make_equilibrium(const FundamentalDiagram<M> &fd,
                             const std::vector<RoadState> &states, const JunctionSpec &spec,
                             double tol = 1e-9) {
  if (spec.n != 2 || spec.m != 2) {
    throw PreconditionError("property harness needs a 2x2 junction");
  }
  Equilibrium eq;
  eq.states = states;
  eq.spec = spec;
  eq.sol = aprsom_solve(fd, states, spec);
  for (int r = 0; r < 4; ++r) {
    const auto &a = states[r];
    const auto &b = eq.sol.u_hat[r];
    if (std::abs(a.rho - b.rho) > tol || std::abs(a.w - b.w) > tol) {
      std::ostringstream os;
      os.precision(17);
      os << "not an equilibrium: road " << r << " state (" << a.rho << ", " << a.w
         << ") has trace (" << b.rho << ", " << b.w << ")";
      throw PreconditionError(os.str());
    }
  }
  const auto &tr = eq.sol.transcript;
  if (tr.empty()) {
    throw PreconditionError("equilibrium with no active incoming road");
  }
  auto at_demand = [&](int i) {
    const double d = fd.demand(states[i]);
    return std::abs(eq.sol.q_hat[i] - d) <= 1e-12 * std::max(1.0, d);
  };
  const auto &first = tr.front();
  const auto &last = tr.back();
  eq.labels.assign(4, "");
  if (first.outcome == "supply") {
    eq.letter = 'C';
    const int b = first.binding;
    eq.labels = {"C1", "C2", b == 2 ? "C3" : "C4", b == 2 ? "C4" : "C3"};
  } else if (last.outcome == "complete" || (at_demand(0) && at_demand(1))) {
    eq.letter = 'A';
    const int hit = first.binding;
    eq.labels = {hit == 0 ? "A2" : "A1", hit == 0 ? "A1" : "A2", "A3", "A4"};
  } else {
    eq.letter = 'B';
    const int hit = first.binding;
    const int b = last.outcome == "supply" ? last.binding : 2;
    eq.labels = {hit == 0 ? "B1" : "B2", hit == 0 ? "B2" : "B1", b == 2 ? "B3" : "B4",
                 b == 2 ? "B4" : "B3"};
  }
  eq.h_bar = theta_hbar(fd, states, spec);
  return eq;
}

/// Outcome of one wave hitting the equilibrium.
struct PerturbationResult {
  std::string label;
  int road = -1;
  PerturbKind kind = PerturbKind::rho;
  int sign = 0;
  double q = 0.0;
  double q_tilde = 0.0;
  double w = 0.0;
  double w_tilde = 0.0;
  double d_gamma = 0.0;
  double h_before = 0.0;
  double h_after = 0.0;
  double d_hbar = 0.0;
  double d_tv_q = 0.0;
  double d_tv_w = 0.0;
  /// Fluxes, attributes and traces all equal the equilibrium ones.
  bool identity = false;
  JunctionSolution sol;
};

/// Replaces road `road` of the equilibrium by `u_tilde` and re-solves.
template <FluxFamily M>
PerturbationResult perturb(const FundamentalDiagram<M> &fd, const Equilibrium &eq, int road,
                           const RoadState &u_tilde) {
  if (road < 0 || road > 3) {
    throw PreconditionError("perturbed road must be 0..3");
  }
  PerturbationResult res;
  res.road = road;
  res.label = eq.labels[road];
  res.kind = u_tilde.w == eq.states[road].w ? PerturbKind::rho : PerturbKind::rho_w;
  if (res.kind == PerturbKind::rho_w && road >= 2) {
    throw PreconditionError("attribute perturbations act on incoming roads only");
  }
  res.q = eq.sol.q_hat[road];
  res.q_tilde = fd.flux(u_tilde);
  res.sign = res.q_tilde > res.q ? 1 : (res.q_tilde < res.q ? -1 : 0);
  res.w = eq.states[road].w;
  res.w_tilde = u_tilde.w;

  auto states = eq.states;
  states[road] = u_tilde;
  res.sol = aprsom_solve(fd, states, eq.spec);
  const auto &qh = res.sol.q_hat;
  const auto &q0 = eq.sol.q_hat;

  res.d_gamma = (qh[0] - q0[0]) + (qh[1] - q0[1]);
  res.h_before = eq.h_bar;
  res.h_after = theta_hbar(fd, res.sol.u_hat, eq.spec);
  res.d_hbar = res.h_after - res.h_before;

  double tv_q = 0.0;
  for (int s = 0; s < 4; ++s) {
    tv_q += std::abs(qh[s] - (s == road ? res.q_tilde : q0[s]));
  }
  res.d_tv_q = tv_q - std::abs(res.q_tilde - res.q);
  double tv_w = 0.0;
  for (int j = 2; j < 4; ++j) {
    tv_w += std::abs(res.sol.w_hat[j] - eq.states[j].w);
  }
  res.d_tv_w = tv_w - std::abs(res.w_tilde - res.w);

  bool same = true;
  for (int s = 0; s < 4; ++s) {
    same = same && std::abs(qh[s] - q0[s]) <= detail::kIdentityTol;
    if (s != road) {
      same = same && std::abs(res.sol.u_hat[s].rho - eq.states[s].rho) <= detail::kIdentityTol &&
             std::abs(res.sol.u_hat[s].w - eq.states[s].w) <= detail::kIdentityTol;
    }
  }
  for (int j = 2; j < 4; ++j) {
    same = same && std::abs(res.sol.w_hat[j] - eq.states[j].w) <= detail::kIdentityTol;
  }
  res.identity = same;
  return res;
}

/// "nothing happens" is claimed for these families when the flux grows.
inline bool identity_expected(const std::string &label) {
  return label == "A3" || label == "A4" || label == "B2" || label == "C1" || label == "C2";
}

/// Measured constants for one family label under one priority mode.
struct FamilyConstants {
  std::string label;
  PriorityMode mode = PriorityMode::adaptive;
  int rho_plus = 0;
  int rho_minus = 0;
  int rho_w_plus = 0;
  int rho_w_minus = 0;
  /// P2: dTV_Q, dTV_w <= C min(|dq|, |dGamma| + |dh|) and dh <= C |dq|.
  double c_tv_q = 1.0;
  double c_tv_w = 1.0;
  double c_hbar = 1.0;
  /// P3: dGamma <= C |dh| for flux-decreasing waves.
  double c_gamma = 1.0;
  int p3_checked = 0;
  int p3_hbar_increases = 0;
  double worst_hbar_increase = 0.0;
  /// P4: dTV_w <= C1 |dw| + C2 min(...), with C2 = c_tv_w.
  double c1 = 1.0;
  double c2 = 1.0;
  int identity_checked = 0;
  int identity_failures = 0;
  /// C3 with growing flux: dTV_Q <= 4 (|dGamma| + |dh|).
  int factor4_checked = 0;
  int factor4_failures = 0;
  double factor4_worst = -std::numeric_limits<double>::infinity();

  bool complete() const {
    const bool incoming = label[1] == '1' || label[1] == '2';
    return rho_plus > 0 && rho_minus > 0 &&
           (!incoming || (rho_w_plus > 0 && rho_w_minus > 0));
  }
  bool finite() const {
    return std::isfinite(c_tv_q) && std::isfinite(c_tv_w) && std::isfinite(c_hbar) &&
           std::isfinite(c_gamma) && std::isfinite(c1) && std::isfinite(c2);
  }
  bool pass() const {
    return complete() && finite() && p3_hbar_increases == 0 && identity_failures == 0 &&
           factor4_failures == 0;
  }
};

struct PropertyReport {
  std::vector<FamilyConstants> families;
  int equilibria = 0;
  int perturbations = 0;
  int p1_pairs = 0;
  int p1_mismatches = 0;

  bool pass() const {
    return p1_mismatches == 0 &&
           std::all_of(families.begin(), families.end(),
                       [](const FamilyConstants &f) { return f.pass(); });
  }

  std::string text() const {
    std::ostringstream os;
    os.precision(17);
    os << "equilibria " << equilibria << " perturbations " << perturbations << "\n";
    os << "family mode n(rho+,rho-,rw+,rw-) C_tvq C_tvw C_h C_gamma C1 C2 p3(checked,up) "
          "identity(checked,fail) factor4(checked,fail,worst) status\n";
    for (const auto &f : families) {
      os << f.label << " " << to_string(f.mode) << " (" << f.rho_plus << "," << f.rho_minus
         << "," << f.rho_w_plus << "," << f.rho_w_minus << ") " << f.c_tv_q << " " << f.c_tv_w
         << " " << f.c_hbar << " " << f.c_gamma << " " << f.c1 << " " << f.c2 << " ("
         << f.p3_checked << "," << f.p3_hbar_increases << ") (" << f.identity_checked << ","
         << f.identity_failures << ") (" << f.factor4_checked << "," << f.factor4_failures
         << "," << f.factor4_worst << ") " << (f.pass() ? "PASS" : "FAIL") << "\n";
    }
    os << "p1 pairs " << p1_pairs << " mismatches " << p1_mismatches << "\n";
    return os.str();
  }
};

/// Folds one perturbation into its family.
inline void accumulate(FamilyConstants &f, const PerturbationResult &r) {
  const double dq = std::abs(r.q_tilde - r.q);
  const double small = std::min(dq, std::abs(r.d_gamma) + std::abs(r.d_hbar));
  if (r.kind == PerturbKind::rho) {
    (r.sign > 0 ? f.rho_plus : f.rho_minus) += 1;
    f.c_tv_q = std::max(f.c_tv_q, detail::needed_constant(r.d_tv_q, small));
    f.c_tv_w = std::max(f.c_tv_w, detail::needed_constant(r.d_tv_w, small));
    f.c_hbar = std::max(f.c_hbar, detail::needed_constant(r.d_hbar, dq));
    if (r.sign < 0) {
      ++f.p3_checked;
      f.c_gamma = std::max(f.c_gamma, detail::needed_constant(r.d_gamma, std::abs(r.d_hbar)));
      const double up = r.h_after - r.h_before;
      if (up > 1e-10 * std::max(1.0, r.h_before)) {
        ++f.p3_hbar_increases;
        f.worst_hbar_increase = std::max(f.worst_hbar_increase, up);
      }
    } else {
      if (identity_expected(f.label)) {
        ++f.identity_checked;
        f.identity_failures += r.identity ? 0 : 1;
      }
      if (f.label == "C3") {
        ++f.factor4_checked;
        const double rhs = 4.0 * (std::abs(r.d_gamma) + std::abs(r.d_hbar));
        f.factor4_worst = std::max(f.factor4_worst, r.d_tv_q - rhs);
        f.factor4_failures += r.d_tv_q <= rhs + detail::kRatioTol ? 0 : 1;
      }
    }
  } else {
    (r.sign > 0 ? f.rho_w_plus : f.rho_w_minus) += 1;
  }
}

/// P4 C1 given the family's C2, over its attribute perturbations.
inline void finish_p4(FamilyConstants &f, const std::vector<PerturbationResult> &rw) {
  f.c2 = f.c_tv_w;
  for (const auto &r : rw) {
    const double small =
        std::min(std::abs(r.q_tilde - r.q), std::abs(r.d_gamma) + std::abs(r.d_hbar));
    const double rest = r.d_tv_w - f.c2 * small;
    f.c1 = std::max(f.c1, detail::needed_constant(rest, std::abs(r.w_tilde - r.w)));
  }
}

namespace detail {

/// Incoming perturbed data lie on the free branch (demand = flux), outgoing
/// ones on the congested branch (supply = flux at the road's own attribute).
template <FluxFamily M>
bool perturbed_state(const FundamentalDiagram<M> &fd, const Equilibrium &eq, int road,
                     int sign, double frac, double w_tilde, RoadState *out) {
  const double q = eq.sol.q_hat[road];
  const double qmax = fd.max_flux(w_tilde);
  double target;
  if (sign > 0) {
    const double room = qmax - q;
    if (room <= 1e-9) {
      return false;
    }
    target = q + frac * room;
  } else {
    if (q <= 1e-9) {
      return false;
    }
    target = q * (1.0 - frac);
  }
  const Branch br = road < 2 ? Branch::free_flow : Branch::congested;
  *out = {fd.invert_flux_on_branch(std::min(target, qmax), w_tilde, br), w_tilde};
  const double qt = fd.flux(*out);
  return sign > 0 ? qt > q : qt < q;
}

/// Random raw 2x2 data; `align` sets p proportional to the demands so the
/// strict ray reaches both demand walls at once.
template <FluxFamily M>
void random_raw(const FundamentalDiagram<M> &fd, std::mt19937_64 &rng, bool align,
                PriorityMode mode, std::vector<RoadState> *states, JunctionSpec *spec) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto w_of = [&] { return fd.w_min() + (fd.w_max() - fd.w_min()) * u01(rng); };
  auto rho_of = [&](double w, double lo, double hi) {
    return fd.rho_max(w) * (lo + (hi - lo) * u01(rng));
  };
  states->assign(4, RoadState{});
  for (int i = 0; i < 2; ++i) {
    const double w = w_of();
    (*states)[i] = {rho_of(w, 0.05, 0.95), w};
  }
  const double jam = u01(rng);
  for (int j = 2; j < 4; ++j) {
    const double w = w_of();
    (*states)[j] = jam < 0.5 ? RoadState{rho_of(w, 0.02, 0.5), w}
                             : RoadState{rho_of(w, 0.3, 0.95), w};
  }
  spec->n = 2;
  spec->m = 2;
  spec->mode = mode;
  const double p1 = 0.15 + 0.7 * u01(rng);
  spec->p = {p1, 1.0 - p1};
  if (align) {
    const double d1 = fd.demand((*states)[0]);
    const double d2 = fd.demand((*states)[1]);
    spec->p = {d1 / (d1 + d2), d2 / (d1 + d2)};
  }
  const double a1 = 0.15 + 0.7 * u01(rng);
  const double a2 = 0.15 + 0.7 * u01(rng);
  spec->alpha = {{a1, a2}, {1.0 - a1, 1.0 - a2}};
}

} // namespace detail

/// Paired 2x2 and 2->1 inputs that differ only in the densities of
/// congested (good) incoming data; solutions must agree bit for bit.
struct P1Result {
  int pairs = 0;
  int mismatches = 0;
};

inline bool bitwise_equal(const JunctionSolution &a, const JunctionSolution &b) {
  if (a.q_hat != b.q_hat || a.w_hat != b.w_hat || a.u_hat.size() != b.u_hat.size() ||
      a.transcript.size() != b.transcript.size()) {
    return false;
  }
  for (std::size_t s = 0; s < a.u_hat.size(); ++s) {
    if (a.u_hat[s].rho != b.u_hat[s].rho || a.u_hat[s].w != b.u_hat[s].w) {
      return false;
    }
  }
  for (std::size_t k = 0; k < a.transcript.size(); ++k) {
    const auto &x = a.transcript[k];
    const auto &y = b.transcript[k];
    if (x.h_bar != y.h_bar || x.binding != y.binding || x.outcome != y.outcome ||
        x.fixed != y.fixed) {
      return false;
    }
  }
  return true;
}

template <FluxFamily M>
P1Result p1_pairs(const FundamentalDiagram<M> &fd, int count, std::uint64_t seed = 7) {
  P1Result res;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    const bool merge = k % 2 == 1;
    const PriorityMode mode = (k / 2) % 2 == 0 ? PriorityMode::strict : PriorityMode::adaptive;
    std::vector<RoadState> st;
    JunctionSpec spec;
    detail::random_raw(fd, rng, false, mode, &st, &spec);
    if (merge) {
      st.resize(3);
      spec.m = 1;
      spec.alpha = {{1.0, 1.0}};
    }
    // At least one good incoming datum.
    const int good = static_cast<int>(u01(rng) * 2.0) % 2;
    auto congested = [&](double w) {
      const double sg = fd.critical_density(w);
      return sg + (fd.rho_max(w) - sg) * (0.001 + 0.998 * u01(rng));
    };
    st[good].rho = congested(st[good].w);
    auto other = st;
    for (int i = 0; i < 2; ++i) {
      if (st[i].rho > fd.critical_density(st[i].w)) {
        other[i].rho = congested(st[i].w);
      }
    }
    const auto a = aprsom_solve(fd, st, spec);
    const auto b = aprsom_solve(fd, other, spec);
    ++res.pairs;
    res.mismatches += bitwise_equal(a, b) ? 0 : 1;
  }
  return res;
}

/// Random equilibria of the requested case letter (via the solver's traces).
template <FluxFamily M>
std::vector<Equilibrium> sample_equilibria(const FundamentalDiagram<M> &fd, char letter,
                                           PriorityMode mode, int count, std::mt19937_64 &rng,
                                           int max_tries = 200000) {
  std::vector<Equilibrium> out;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int t = 0; t < max_tries && static_cast<int>(out.size()) < count; ++t) {
    std::vector<RoadState> raw;
    JunctionSpec spec;
    detail::random_raw(fd, rng, letter == 'A' && u01(rng) < 0.5, mode, &raw, &spec);
    const auto sol = aprsom_solve(fd, raw, spec);
    bool degenerate = false;
    for (int s = 0; s < 4; ++s) {
      degenerate = degenerate || sol.q_hat[s] <= 1e-6 || sol.u_hat[s].rho <= 0.0;
    }
    if (degenerate) {
      continue;
    }
    try {
      auto eq = make_equilibrium(fd, sol.u_hat, spec);
      if (eq.letter == letter) {
        out.push_back(std::move(eq));
      }
    } catch (const PreconditionError &) {
    }
  }
  return out;
}

/// The full case grid: every family label, both signs, rho and (rho, w)
/// perturbations, both priority modes.
template <FluxFamily M>
PropertyReport appendix_a_suite(const FundamentalDiagram<M> &fd, std::uint64_t seed = 1,
                                int per_case = 60, int magnitudes = 3,
                                int p1_count = 1000) {
  PropertyReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto frac = [&] { return std::pow(10.0, -3.0 + 2.9 * u01(rng)); };
  for (PriorityMode mode : {PriorityMode::strict, PriorityMode::adaptive}) {
    std::map<std::string, FamilyConstants> fam;
    std::map<std::string, std::vector<PerturbationResult>> rw;
    for (char letter : {'A', 'B', 'C'}) {
      const auto eqs = sample_equilibria(fd, letter, mode, per_case, rng);
      rep.equilibria += static_cast<int>(eqs.size());
      for (const auto &eq : eqs) {
        for (int r = 0; r < 4; ++r) {
          auto &f = fam[eq.labels[r]];
          f.label = eq.labels[r];
          f.mode = mode;
          for (int sign : {1, -1}) {
            for (int k = 0; k < magnitudes; ++k) {
              RoadState ut;
              if (detail::perturbed_state(fd, eq, r, sign, frac(), eq.states[r].w, &ut)) {
                accumulate(f, perturb(fd, eq, r, ut));
                ++rep.perturbations;
              }
              if (r >= 2) {
                continue;
              }
              const double span = fd.w_max() - fd.w_min();
              double wt = eq.states[r].w + (u01(rng) < 0.5 ? -1.0 : 1.0) *
                                               span * std::pow(10.0, -2.0 + 2.0 * u01(rng));
              wt = std::clamp(wt, fd.w_min(), fd.w_max());
              if (std::abs(wt - eq.states[r].w) < 1e-6) {
                continue;
              }
              if (detail::perturbed_state(fd, eq, r, sign, frac(), wt, &ut)) {
                auto res = perturb(fd, eq, r, ut);
                accumulate(f, res);
                rw[f.label].push_back(std::move(res));
                ++rep.perturbations;
              }
            }
          }
        }
      }
    }
    for (auto &[label, f] : fam) {
      finish_p4(f, rw[label]);
      rep.families.push_back(f);
    }
  }
  const auto p1 = p1_pairs(fd, p1_count, seed + 1);
  rep.p1_pairs = p1.pairs;
  rep.p1_mismatches = p1.mismatches;
  return rep;
}

} // namespace gsom
