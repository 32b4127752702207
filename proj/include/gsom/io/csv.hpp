#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsom/diagnostics.hpp"
#include "gsom/junction.hpp"
#include "gsom/riemann.hpp"
#include "gsom/wft.hpp"

/// Plain-text writers. Every number goes out with 17 significant digits.
namespace gsom::io {

namespace detail {

struct Precision {
  explicit Precision(std::ostream &os) : os_(os), old_(os.precision(17)) {}
  ~Precision() { os_.precision(old_); }
  Precision(const Precision &) = delete;
  Precision &operator=(const Precision &) = delete;

private:
  std::ostream &os_;
  std::streamsize old_;
};

inline std::string ids(const std::vector<int> &v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    s += (k ? ";" : "") + std::to_string(v[k]);
  }
  return s;
}

} // namespace detail

/// family,kind,speed_lo,speed_hi,left_rho,left_w,right_rho,right_w,vacuum
inline void write_waves(std::ostream &os, const RiemannSolution &sol) {
  detail::Precision p(os);
  os << "family,kind,speed_lo,speed_hi,left_rho,left_w,right_rho,right_w,vacuum\n";
  for (const auto &w : sol.waves) {
    os << to_string(w.family) << "," << to_string(w.kind) << "," << w.speed_lo << ","
       << w.speed_hi << "," << w.left.rho << "," << w.left.w << "," << w.right.rho << ","
       << w.right.w << "," << (w.vacuum ? 1 : 0) << "\n";
  }
}

/// Per-road solution table followed by the solver transcript.
inline void write_junction(std::ostream &os, const JunctionSolution &sol, int n) {
  detail::Precision p(os);
  os << "road,side,q_hat,w_hat,rho_trace,w_trace\n";
  for (std::size_t r = 0; r < sol.q_hat.size(); ++r) {
    os << r << "," << (static_cast<int>(r) < n ? "incoming" : "outgoing") << ","
       << sol.q_hat[r] << "," << sol.w_hat[r] << "," << sol.u_hat[r].rho << ","
       << sol.u_hat[r].w << "\n";
  }
  os << "\nstep,outcome,h_bar,binding,fixed\n";
  for (const auto &t : sol.transcript) {
    os << t.step << "," << t.outcome << "," << t.h_bar << "," << t.binding << ","
       << detail::ids(t.fixed) << "\n";
  }
  for (const auto &note : sol.notes) {
    os << "# " << note << "\n";
  }
}

/// time,road,x,rho,w,q with x the left end of each constant piece.
inline void write_snapshot_header(std::ostream &os) { os << "time,road,x,rho,w,q\n"; }

template <FluxFamily M>
void write_snapshot(std::ostream &os, const FundamentalDiagram<M> &fd, const NetworkState &s) {
  detail::Precision p(os);
  for (std::size_t r = 0; r < s.roads.size(); ++r) {
    const auto &road = s.roads[r];
    for (std::size_t k = 0; k < road.states.size(); ++k) {
      const double x = k == 0 ? road.a : road.x[k - 1];
      const auto &u = road.states[k];
      os << s.time << "," << r << "," << x << "," << u.rho << "," << u.w << "," << fd.flux(u)
         << "\n";
    }
  }
}

/// time,type,road,front_ids,parent_ids (ids separated by ';').
inline void write_events(std::ostream &os, const Trajectory &traj) {
  detail::Precision p(os);
  os << "time,type,road,front_ids,parent_ids\n";
  for (const auto &e : traj.events) {
    os << e.time << "," << to_string(e.type) << "," << e.road << "," << detail::ids(e.created)
       << "," << detail::ids(e.consumed) << "\n";
  }
}

inline nlohmann::json genealogy_json(const Trajectory &traj) {
  auto arr = nlohmann::json::array();
  for (const auto &f : traj.fronts) {
    nlohmann::json j = {{"id", f.id},
                        {"road", f.road},
                        {"family", to_string(f.family)},
                        {"kind", to_string(f.kind)},
                        {"origin", to_string(f.origin)},
                        {"left", {f.left.rho, f.left.w}},
                        {"right", {f.right.rho, f.right.w}},
                        {"speed", f.speed},
                        {"vacuum", f.vacuum},
                        {"t_birth", f.t_birth},
                        {"x_birth", f.x_birth},
                        {"fate", f.fate},
                        {"parents", f.parents},
                        {"children", f.children}};
    j["t_death"] = std::isfinite(f.t_death) ? nlohmann::json(f.t_death) : nlohmann::json();
    arr.push_back(std::move(j));
  }
  return arr;
}

inline void write_tv_series(std::ostream &os, const std::vector<TVReport> &series) {
  detail::Precision p(os);
  os << "time,gamma,tv_q,tv_w,h_bar,vacuum_w_jumps\n";
  for (const auto &r : series) {
    os << r.time << "," << r.gamma << "," << r.tv_q << "," << r.tv_w << "," << r.h_bar << ","
       << r.vacuum_w_jumps << "\n";
  }
}

/// run,id,road,side,t_o,t_a,kind,K,tv_tree,n_rho_root,delta_q,bound,rule,sign_ok,bound_ok
inline void write_returning_header(std::ostream &os) {
  os << "run,id,road,side,t_o,t_a,kind,K,tv_tree,n_rho_root,delta_q,bound,rule,sign_ok,"
        "bound_ok\n";
}

inline void write_returning(std::ostream &os, const std::vector<ReturningWaveRecord> &recs,
                            int run = 0) {
  detail::Precision p(os);
  for (const auto &r : recs) {
    os << run << "," << r.id << "," << r.road << "," << to_string(r.side) << "," << r.t_o << "," << r.t_a
       << "," << to_string(r.kind) << "," << r.K << "," << r.tv_tree << "," << r.n_rho_root
       << "," << r.delta_q << "," << r.bound << "," << r.rule << "," << (r.sign_ok ? 1 : 0)
       << "," << (r.bound_ok ? 1 : 0) << "\n";
  }
}

} // namespace gsom::io
