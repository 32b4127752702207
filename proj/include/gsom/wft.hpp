#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gsom/errors.hpp"
#include "gsom/junction.hpp"
#include "gsom/riemann.hpp"

namespace gsom {

enum class FrontKind { shock, fragment, contact };
enum class Origin { initial, interaction, junction };
enum class EventType { collision, junction, exit, horizon };

inline const char *to_string(FrontKind k) {
  switch (k) {
  case FrontKind::shock:
    return "shock";
  case FrontKind::fragment:
    return "rarefaction-fragment";
  default:
    return "contact";
  }
}
inline const char *to_string(Origin o) {
  switch (o) {
  case Origin::initial:
    return "initial";
  case Origin::interaction:
    return "interaction";
  default:
    return "junction";
  }
}
inline const char *to_string(EventType e) {
  switch (e) {
  case EventType::collision:
    return "collision";
  case EventType::junction:
    return "junction";
  case EventType::exit:
    return "exit";
  default:
    return "horizon";
  }
}

struct WaveFront {
  int id = -1;
  int road = -1;
  WaveFamily family = WaveFamily::rho;
  FrontKind kind = FrontKind::shock;
  RoadState left;
  RoadState right;
  double speed = 0.0;
  /// Position x0 at time t0; fronts move linearly.
  double x0 = 0.0;
  double t0 = 0.0;
  bool vacuum = false;

  double position(double t) const { return x0 + speed * (t - t0); }
};

/// Genealogy entry; one per front ever created, indexed by id.
struct FrontRecord {
  int id = -1;
  int road = -1;
  WaveFamily family = WaveFamily::rho;
  FrontKind kind = FrontKind::shock;
  RoadState left;
  RoadState right;
  double speed = 0.0;
  bool vacuum = false;
  Origin origin = Origin::initial;
  double t_birth = 0.0;
  double x_birth = 0.0;
  double t_death = std::numeric_limits<double>::quiet_NaN();
  /// "alive", "collision", "junction" or "exit".
  std::string fate = "alive";
  std::vector<int> parents;
  std::vector<int> children;
};

/// Piecewise-constant initial profile: states[k] holds from x[k] to x[k+1]
/// (or the road end). Incoming roads span [-length, 0], outgoing [0, length].
struct RoadProfile {
  double length = 1.0;
  std::vector<double> x;
  std::vector<RoadState> states;

  static RoadProfile constant(double length, bool incoming, RoadState u) {
    return {length, {incoming ? -length : 0.0}, {u}};
  }
};

struct Network {
  JunctionSpec junction;
  /// n incoming profiles followed by m outgoing ones.
  std::vector<RoadProfile> roads;
};

struct RoadSnapshot {
  bool incoming = true;
  double a = 0.0;
  double b = 0.0;
  /// Front positions and ids, left to right.
  std::vector<double> x;
  std::vector<int> ids;
  /// states.size() == x.size() + 1.
  std::vector<RoadState> states;

  /// State adjacent to the junction.
  const RoadState &junction_state() const { return incoming ? states.back() : states.front(); }

  double mass() const {
    double m = 0.0;
    double from = a;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const double to = k < x.size() ? x[k] : b;
      m += states[k].rho * (to - from);
      from = to;
    }
    return m;
  }
};

struct NetworkState {
  double time = 0.0;
  std::vector<RoadSnapshot> roads;

  std::vector<RoadState> junction_states() const {
    std::vector<RoadState> out;
    for (const auto &r : roads) {
      out.push_back(r.junction_state());
    }
    return out;
  }
  double mass() const {
    double m = 0.0;
    for (const auto &r : roads) {
      m += r.mass();
    }
    return m;
  }
  std::size_t front_count() const {
    std::size_t c = 0;
    for (const auto &r : roads) {
      c += r.x.size();
    }
    return c;
  }
};

struct EventRecord {
  double time = 0.0;
  EventType type = EventType::collision;
  /// -1 for junction events.
  int road = -1;
  std::vector<int> consumed;
  std::vector<int> created;
};

struct JunctionRecord {
  double time = 0.0;
  std::vector<int> absorbed;
  std::vector<int> emitted;
  /// Junction-adjacent states just before the event.
  std::vector<RoadState> before;
  /// States handed to the solver (after absorbing arriving fronts).
  std::vector<RoadState> input;
  JunctionSolution solution;
};

/// Integrated boundary fluxes. Far ends are transparent; the junction
/// columns hold the trace fluxes on either side of the node.
struct MassLedger {
  double initial = 0.0;
  double final = 0.0;
  double boundary_in = 0.0;
  double boundary_out = 0.0;
  double junction_in = 0.0;
  double junction_out = 0.0;

  /// Mass change not explained by the far-end fluxes.
  double residual() const { return (final - initial) - (boundary_in - boundary_out); }
  double junction_imbalance() const { return junction_in - junction_out; }
};

struct RunOptions {
  double t_end = 1.0;
  double eps_fan = 0.02;
  std::size_t max_events = 1000000;
  std::size_t max_fronts = 100000;
  std::vector<double> snapshot_times;
};

struct Trajectory {
  std::vector<FrontRecord> fronts;
  std::vector<EventRecord> events;
  std::vector<JunctionRecord> junction_events;
  std::vector<NetworkState> snapshots;
  NetworkState final_state;
  MassLedger mass;
  bool truncated = false;
  std::string truncation;
  /// rho-front colliding with a w-front ahead, both moving right. Contacts
  /// bordering vacuum are exempt: V jumps across them.
  std::size_t ordering_violations = 0;
  std::size_t max_live_fronts = 0;
};

/// Splits a rarefaction into fragments with |drho| <= eps_fan, each moving at
/// the Rankine-Hugoniot speed of its endpoints. The critical density is
/// always a cut so no fragment straddles the flux maximum.
template <FluxFamily M>
std::vector<Wave> fan_discretize(const FundamentalDiagram<M> &fd, const Wave &r,
                                 double eps_fan) {
  if (r.kind != WaveKind::rarefaction) {
    return {r};
  }
  if (!(eps_fan > 0.0)) {
    throw PreconditionError("fan_discretize: eps_fan must be positive");
  }
  const double w = r.left.w;
  const double hi = r.left.rho;
  const double lo = r.right.rho;
  std::vector<double> cuts{hi};
  auto split = [&](double from, double to) {
    const int n = std::max(1, static_cast<int>(std::ceil((from - to) / eps_fan - 1e-9)));
    for (int k = 1; k <= n; ++k) {
      cuts.push_back(k == n ? to : from - (from - to) * k / n);
    }
  };
  const double sigma = fd.critical_density(w);
  if (sigma < hi - kStateTol && sigma > lo + kStateTol) {
    split(hi, sigma);
    split(sigma, lo);
  } else {
    split(hi, lo);
  }
  std::vector<Wave> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    Wave f;
    f.family = WaveFamily::rho;
    f.kind = WaveKind::rarefaction;
    f.left = {cuts[k], w};
    f.right = {cuts[k + 1], w};
    f.speed_lo = f.speed_hi = rho_jump_speed(fd, cuts[k], cuts[k + 1], w);
    f.vacuum = cuts[k + 1] <= kStateTol;
    out.push_back(f);
  }
  out.front().left = r.left;
  out.back().right = r.right;
  return out;
}

/// Staircase approximation of a profile given as a function on [a, b]: a new
/// piece starts whenever rho or w drifts more than eps0 from the current
/// piece, so the piece count is at most TV / eps0 + 1.
inline RoadProfile sample_profile(const std::function<RoadState(double)> &f, double a,
                                  double b, double eps0, int samples = 4096) {
  if (!(b > a) || !(eps0 > 0.0) || samples < 1) {
    throw PreconditionError("sample_profile: need a < b, eps0 > 0");
  }
  RoadProfile p;
  p.length = b - a;
  p.x.push_back(a);
  p.states.push_back(f(a));
  for (int k = 1; k < samples; ++k) {
    const double x = a + (b - a) * k / samples;
    const RoadState u = f(x);
    const RoadState &cur = p.states.back();
    if (std::abs(u.rho - cur.rho) > eps0 || std::abs(u.w - cur.w) > eps0) {
      p.x.push_back(x);
      p.states.push_back(u);
    }
  }
  return p;
}

/// Validated piecewise-constant data with zero-length pieces and repeated
/// states removed. Throws DomainError for invalid states.
template <FluxFamily M>
RoadProfile normalize_profile(const FundamentalDiagram<M> &fd, const RoadProfile &p,
                              bool incoming) {
  if (p.states.empty() || p.x.size() != p.states.size()) {
    throw PreconditionError("profile needs one start position per state");
  }
  if (!(p.length > 0.0)) {
    throw PreconditionError("road length must be positive");
  }
  const double a = incoming ? -p.length : 0.0;
  const double b = incoming ? 0.0 : p.length;
  RoadProfile out;
  out.length = p.length;
  for (std::size_t k = 0; k < p.states.size(); ++k) {
    fd.check(p.states[k]);
    const double from = k == 0 ? a : std::clamp(p.x[k], a, b);
    const double to = k + 1 < p.x.size() ? std::clamp(p.x[k + 1], a, b) : b;
    if (k > 0 && p.x[k] < p.x[k - 1]) {
      throw PreconditionError("profile positions must be ascending");
    }
    if (!(to > from)) {
      continue;
    }
    if (!out.states.empty() && out.states.back() == p.states[k]) {
      continue;
    }
    out.x.push_back(out.states.empty() ? a : from);
    out.states.push_back(p.states[k]);
  }
  if (out.states.empty()) {
    out.x.push_back(a);
    out.states.push_back(p.states.back());
  }
  return out;
}

/// Initial network state: normalized profiles before any wave is created.
template <FluxFamily M>
NetworkState sample_initial(const FundamentalDiagram<M> &fd, const Network &net) {
  NetworkState s;
  const int n = net.junction.n;
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    const bool incoming = static_cast<int>(r) < n;
    const auto p = normalize_profile(fd, net.roads[r], incoming);
    RoadSnapshot rs;
    rs.incoming = incoming;
    rs.a = incoming ? -p.length : 0.0;
    rs.b = incoming ? 0.0 : p.length;
    rs.states = p.states;
    rs.x.assign(p.x.begin() + 1, p.x.end());
    rs.ids.assign(rs.x.size(), -1);
    s.roads.push_back(rs);
  }
  return s;
}

/// Event-driven front tracking on one junction.
template <FluxFamily M> class WftEngine {
public:
  struct Event {
    EventType type = EventType::horizon;
    double time = 0.0;
    int road = -1;
    /// Index of the left front of the colliding pair, or of the front
    /// leaving the domain.
    int index = -1;
  };

  using Observer = std::function<void(const NetworkState &, const EventRecord &)>;

  WftEngine(const FundamentalDiagram<M> &fd, const Network &net, RunOptions opt,
            Observer observer = {})
      : fd_(fd), spec_(net.junction), opt_(std::move(opt)), observer_(std::move(observer)) {
    spec_.validate();
    if (static_cast<int>(net.roads.size()) != spec_.n + spec_.m) {
      throw SpecError("network has " + std::to_string(net.roads.size()) +
                      " roads, junction expects " + std::to_string(spec_.n + spec_.m));
    }
    if (!(opt_.eps_fan > 0.0) || !(opt_.t_end >= 0.0)) {
      throw PreconditionError("run options need eps_fan > 0 and t_end >= 0");
    }
    std::sort(opt_.snapshot_times.begin(), opt_.snapshot_times.end());
    const auto init = sample_initial(fd_, net);
    for (std::size_t r = 0; r < init.roads.size(); ++r) {
      const auto &src = init.roads[r];
      Road road;
      road.incoming = src.incoming;
      road.a = src.a;
      road.b = src.b;
      road.first = src.states.front();
      roads_.push_back(road);
      for (std::size_t k = 0; k < src.x.size(); ++k) {
        auto fronts = make_fronts(static_cast<int>(r), src.states[k], src.states[k + 1],
                                  src.x[k], 0.0, {}, Origin::initial, true);
        auto &dst = roads_[r].fronts;
        dst.insert(dst.end(), fronts.begin(), fronts.end());
      }
    }
    traj_.mass.initial = state().mass();
    resolve_junction({});
    note_fronts();
  }

  double time() const { return t_; }
  const Trajectory &trajectory() const { return traj_; }
  bool done() const { return done_; }

  NetworkState state() const { return state_at(t_); }

  /// Earliest pending event by linear motion; horizon if none before t_end.
  Event next_event() const {
    const double inf = std::numeric_limits<double>::infinity();
    Event best;
    best.time = inf;
    int best_rank = 3;
    double best_pos = inf;
    auto offer = [&](EventType type, double te, int road, int index, double pos) {
      const int rank = type == EventType::junction ? 0 : type == EventType::collision ? 1 : 2;
      const double tol = 1e-12 * std::max(1.0, std::abs(te));
      bool take = false;
      if (te < best.time - tol) {
        take = true;
      } else if (te <= best.time + tol) {
        take = std::tie(rank, road, pos) < std::tie(best_rank, best.road, best_pos);
      }
      if (take) {
        best.type = type;
        best.time = te;
        best.road = road;
        best.index = index;
        best_rank = rank;
        best_pos = pos;
      }
    };
    for (int r = 0; r < static_cast<int>(roads_.size()); ++r) {
      const auto &road = roads_[r];
      const auto &fr = road.fronts;
      if (fr.empty()) {
        continue;
      }
      // Junction arrivals.
      if (road.incoming) {
        const auto &f = fr.back();
        if (f.speed > 0.0) {
          const double x = std::min(0.0, f.position(t_));
          offer(EventType::junction, t_ + (-x) / f.speed, r, static_cast<int>(fr.size()) - 1, 0.0);
        }
      } else {
        const auto &f = fr.front();
        if (f.speed < 0.0) {
          const double x = std::max(0.0, f.position(t_));
          offer(EventType::junction, t_ + x / (-f.speed), r, 0, 0.0);
        }
      }
      // Collisions between neighbours.
      for (std::size_t k = 0; k + 1 < fr.size(); ++k) {
        if (approaching(fr[k], fr[k + 1])) {
          const double gap = std::max(0.0, fr[k + 1].position(t_) - fr[k].position(t_));
          offer(EventType::collision, t_ + gap / (fr[k].speed - fr[k + 1].speed), r,
                static_cast<int>(k), fr[k].position(t_));
        }
      }
      // Exits through the far end.
      if (road.incoming && fr.front().speed < 0.0) {
        const double x = std::max(road.a, fr.front().position(t_));
        offer(EventType::exit, t_ + (x - road.a) / (-fr.front().speed), r, 0, road.a);
      }
      if (!road.incoming && fr.back().speed > 0.0) {
        const double x = std::min(road.b, fr.back().position(t_));
        offer(EventType::exit, t_ + (road.b - x) / fr.back().speed, r,
              static_cast<int>(fr.size()) - 1, road.b);
      }
    }
    if (!(best.time <= opt_.t_end)) {
      best = Event{};
      best.type = EventType::horizon;
      best.time = opt_.t_end;
    }
    return best;
  }

  /// Advances to the event time and applies it.
  void resolve(const Event &ev) {
    if (done_) {
      return;
    }
    advance_to(std::max(t_, ev.time));
    switch (ev.type) {
    case EventType::collision:
      resolve_collision(ev.road, ev.index);
      break;
    case EventType::junction:
      resolve_junction_arrival();
      break;
    case EventType::exit:
      resolve_exit(ev.road, ev.index);
      break;
    case EventType::horizon:
      finish();
      return;
    }
    note_fronts();
    if (traj_.events.size() >= opt_.max_events) {
      truncate("event cap of " + std::to_string(opt_.max_events) + " reached at t=" +
               fmt(t_));
    } else if (live_fronts() > opt_.max_fronts) {
      truncate("front cap of " + std::to_string(opt_.max_fronts) + " exceeded at t=" +
               fmt(t_));
    }
  }

  Trajectory run() {
    while (!done_) {
      resolve(next_event());
    }
    return traj_;
  }

private:
  struct Road {
    bool incoming = true;
    double a = 0.0;
    double b = 0.0;
    /// Leftmost state; the far-end state on incoming roads and the
    /// junction-adjacent state on outgoing ones.
    RoadState first;
    std::vector<WaveFront> fronts;

    const RoadState &last() const { return fronts.empty() ? first : fronts.back().right; }
    const RoadState &at_junction() const { return incoming ? last() : first; }
  };

  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

  static bool approaching(const WaveFront &l, const WaveFront &r) {
    const double scale = std::max({1.0, std::abs(l.speed), std::abs(r.speed)});
    return l.speed > r.speed + 1e-10 * scale;
  }

  double tol_t() const { return 1e-12 * std::max(1.0, std::abs(t_)); }

  std::size_t live_fronts() const {
    std::size_t c = 0;
    for (const auto &r : roads_) {
      c += r.fronts.size();
    }
    return c;
  }

  void note_fronts() {
    traj_.max_live_fronts = std::max(traj_.max_live_fronts, live_fronts());
  }

  NetworkState state_at(double t) const {
    NetworkState s;
    s.time = t;
    for (const auto &road : roads_) {
      RoadSnapshot rs;
      rs.incoming = road.incoming;
      rs.a = road.a;
      rs.b = road.b;
      rs.states.push_back(road.first);
      double prev = road.a;
      for (const auto &f : road.fronts) {
        const double x = std::clamp(f.position(t), std::max(prev, road.a), road.b);
        rs.x.push_back(x);
        rs.ids.push_back(f.id);
        rs.states.push_back(f.right);
        prev = x;
      }
      s.roads.push_back(rs);
    }
    return s;
  }

  /// Integrates boundary fluxes and takes snapshots up to time t.
  void advance_to(double t) {
    const double dt = t - t_;
    if (dt > 0.0) {
      for (const auto &road : roads_) {
        if (road.incoming) {
          traj_.mass.boundary_in += fd_.flux(road.first) * dt;
          traj_.mass.junction_in += fd_.flux(road.last()) * dt;
        } else {
          traj_.mass.boundary_out += fd_.flux(road.last()) * dt;
          traj_.mass.junction_out += fd_.flux(road.first) * dt;
        }
      }
    }
    while (snap_next_ < opt_.snapshot_times.size() &&
           opt_.snapshot_times[snap_next_] <= t && opt_.snapshot_times[snap_next_] <= opt_.t_end) {
      const double ts = std::max(t_, opt_.snapshot_times[snap_next_]);
      traj_.snapshots.push_back(state_at(ts));
      ++snap_next_;
    }
    t_ = t;
  }

  /// Fronts for the Riemann problem (ul, ur) at (x, t). With `keep_tiny`, a
  /// jump below the state tolerance still gets a front so that adjacent
  /// states stay exactly consistent.
  std::vector<WaveFront> make_fronts(int road, const RoadState &ul, const RoadState &ur,
                                     double x, double t, const std::vector<int> &parents,
                                     Origin origin, bool keep_tiny) {
    std::vector<WaveFront> out;
    if (ul == ur) {
      return out;
    }
    auto sol = solve_riemann(fd_, ul, ur);
    std::vector<Wave> waves;
    for (const auto &wv : sol.waves) {
      for (const auto &f : fan_discretize(fd_, wv, opt_.eps_fan)) {
        waves.push_back(f);
      }
    }
    if (waves.empty()) {
      if (!keep_tiny) {
        return out;
      }
      Wave wv;
      wv.left = ul;
      wv.right = ur;
      if (ul.w == ur.w) {
        wv.family = WaveFamily::rho;
        wv.kind = ul.rho < ur.rho ? WaveKind::shock : WaveKind::rarefaction;
        wv.speed_lo = wv.speed_hi = rho_jump_speed(fd_, ul.rho, ur.rho, ul.w);
      } else {
        wv.family = WaveFamily::w;
        wv.kind = WaveKind::contact;
        wv.speed_lo = wv.speed_hi = fd_.velocity(ur);
      }
      waves.push_back(wv);
    }
    waves.front().left = ul;
    waves.back().right = ur;
    for (const auto &wv : waves) {
      WaveFront f;
      f.id = static_cast<int>(traj_.fronts.size());
      f.road = road;
      f.family = wv.family;
      f.kind = wv.kind == WaveKind::shock ? FrontKind::shock
               : wv.kind == WaveKind::rarefaction ? FrontKind::fragment
                                                  : FrontKind::contact;
      f.left = wv.left;
      f.right = wv.right;
      f.speed = wv.speed_lo;
      f.x0 = x;
      f.t0 = t;
      f.vacuum = wv.vacuum;
      FrontRecord rec;
      rec.id = f.id;
      rec.road = road;
      rec.family = f.family;
      rec.kind = f.kind;
      rec.left = f.left;
      rec.right = f.right;
      rec.speed = f.speed;
      rec.vacuum = f.vacuum;
      rec.origin = origin;
      rec.t_birth = t;
      rec.x_birth = x;
      rec.parents = parents;
      for (int p : parents) {
        traj_.fronts[p].children.push_back(f.id);
      }
      traj_.fronts.push_back(rec);
      out.push_back(f);
    }
    return out;
  }

  void retire(const WaveFront &f, const char *fate) {
    auto &rec = traj_.fronts[f.id];
    rec.t_death = t_;
    rec.fate = fate;
  }

  void emit(EventRecord ev) {
    traj_.events.push_back(ev);
    if (observer_) {
      observer_(state(), traj_.events.back());
    }
  }

  void resolve_collision(int r, int k) {
    auto &fr = roads_[r].fronts;
    const double te = t_ + tol_t();
    auto meets = [&](int i) {
      if (!approaching(fr[i], fr[i + 1])) {
        return false;
      }
      const double gap = std::max(0.0, fr[i + 1].position(t_) - fr[i].position(t_));
      return gap / (fr[i].speed - fr[i + 1].speed) <= te - t_;
    };
    int lo = k;
    int hi = k + 1;
    while (lo > 0 && meets(lo - 1)) {
      --lo;
    }
    while (hi + 1 < static_cast<int>(fr.size()) && meets(hi)) {
      ++hi;
    }
    for (int i = lo; i < hi; ++i) {
      if (fr[i].family == WaveFamily::rho && fr[i + 1].family == WaveFamily::w &&
          !fr[i + 1].vacuum && fr[i].speed > 0.0 && fr[i + 1].speed > 0.0) {
        ++traj_.ordering_violations;
      }
    }
    const RoadState ul = fr[lo].left;
    const RoadState ur = fr[hi].right;
    const double x = std::clamp(fr[k].position(t_), roads_[r].a, roads_[r].b);
    std::vector<int> parents;
    for (int i = lo; i <= hi; ++i) {
      parents.push_back(fr[i].id);
      retire(fr[i], "collision");
    }
    auto born = make_fronts(r, ul, ur, x, t_, parents, Origin::interaction, true);
    EventRecord ev;
    ev.time = t_;
    ev.type = EventType::collision;
    ev.road = r;
    ev.consumed = parents;
    for (const auto &f : born) {
      ev.created.push_back(f.id);
    }
    fr.erase(fr.begin() + lo, fr.begin() + hi + 1);
    fr.insert(fr.begin() + lo, born.begin(), born.end());
    emit(ev);
  }

  void resolve_exit(int r, int k) {
    auto &road = roads_[r];
    const WaveFront f = road.fronts[k];
    retire(f, "exit");
    if (road.incoming) {
      road.first = f.right;
    }
    road.fronts.erase(road.fronts.begin() + k);
    EventRecord ev;
    ev.time = t_;
    ev.type = EventType::exit;
    ev.road = r;
    ev.consumed = {f.id};
    emit(ev);
  }

  void resolve_junction_arrival() {
    std::vector<int> absorbed;
    std::vector<RoadState> before;
    for (const auto &road : roads_) {
      before.push_back(road.at_junction());
    }
    const double te = tol_t();
    for (int r = 0; r < static_cast<int>(roads_.size()); ++r) {
      auto &road = roads_[r];
      auto &fr = road.fronts;
      if (road.incoming) {
        while (!fr.empty() && fr.back().speed > 0.0 &&
               -std::min(0.0, fr.back().position(t_)) / fr.back().speed <= te) {
          absorbed.push_back(fr.back().id);
          retire(fr.back(), "junction");
          fr.pop_back();
        }
      } else {
        while (!fr.empty() && fr.front().speed < 0.0 &&
               std::max(0.0, fr.front().position(t_)) / (-fr.front().speed) <= te) {
          absorbed.push_back(fr.front().id);
          retire(fr.front(), "junction");
          road.first = fr.front().right;
          fr.erase(fr.begin());
        }
      }
    }
    std::sort(absorbed.begin(), absorbed.end());
    resolve_junction(absorbed, std::move(before));
  }

  /// Re-solves the junction with the current adjacent states and emits the
  /// resulting waves. `before` holds the adjacent states prior to absorbing
  /// the arriving fronts.
  void resolve_junction(const std::vector<int> &absorbed,
                        std::vector<RoadState> before = {}) {
    JunctionRecord jr;
    jr.time = t_;
    jr.absorbed = absorbed;
    for (const auto &road : roads_) {
      jr.input.push_back(road.at_junction());
    }
    jr.before = before.empty() ? jr.input : std::move(before);
    jr.solution = aprsom_solve(fd_, jr.input, spec_);

    EventRecord ev;
    ev.time = t_;
    ev.type = EventType::junction;
    ev.consumed = absorbed;
    for (int r = 0; r < static_cast<int>(roads_.size()); ++r) {
      auto &road = roads_[r];
      const RoadState u = road.at_junction();
      const RoadState trace = jr.solution.u_hat[r];
      if (fd_.same_state(u, trace)) {
        continue;
      }
      auto born = road.incoming
                      ? make_fronts(r, u, trace, 0.0, t_, absorbed, Origin::junction, false)
                      : make_fronts(r, trace, u, 0.0, t_, absorbed, Origin::junction, false);
      for (const auto &f : born) {
        const bool ok = road.incoming ? f.speed < 0.0 : f.speed > 0.0;
        if (!ok) {
          throw InvariantViolation("junction emitted a " + std::string(to_string(f.kind)) +
                                   " with speed " + fmt(f.speed) + " on road " +
                                   std::to_string(r) + " at t=" + fmt(t_));
        }
        ev.created.push_back(f.id);
        jr.emitted.push_back(f.id);
      }
      if (road.incoming) {
        road.fronts.insert(road.fronts.end(), born.begin(), born.end());
      } else {
        road.fronts.insert(road.fronts.begin(), born.begin(), born.end());
        road.first = trace;
      }
    }
    traj_.junction_events.push_back(std::move(jr));
    emit(ev);
  }

  void finish() {
    traj_.final_state = state();
    traj_.mass.final = traj_.final_state.mass();
    EventRecord ev;
    ev.time = t_;
    ev.type = EventType::horizon;
    traj_.events.push_back(ev);
    if (observer_) {
      observer_(traj_.final_state, traj_.events.back());
    }
    done_ = true;
  }

  void truncate(const std::string &why) {
    traj_.truncated = true;
    traj_.truncation = why;
    traj_.final_state = state();
    traj_.mass.final = traj_.final_state.mass();
    done_ = true;
  }

  FundamentalDiagram<M> fd_;
  JunctionSpec spec_;
  RunOptions opt_;
  Observer observer_;
  std::vector<Road> roads_;
  Trajectory traj_;
  double t_ = 0.0;
  std::size_t snap_next_ = 0;
  bool done_ = false;
};

template <FluxFamily M>
Trajectory run_wft(const FundamentalDiagram<M> &fd, const Network &net, const RunOptions &opt,
                   typename WftEngine<M>::Observer observer = {}) {
  WftEngine<M> engine(fd, net, opt, std::move(observer));
  return engine.run();
}

} // namespace gsom
