#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "gsom/families.hpp"
#include "gsom/fundamental_diagram.hpp"
#include "gsom/junction.hpp"
#include "gsom/wft.hpp"

/// Scenario files: a YAML tree with model, junction, roads and run blocks.
namespace gsom::io {

struct ModelConfig {
  std::string family = "greenshields";
  double rho_max = 1.0;
  double w_min = 0.5;
  double w_max = 2.0;
  int grid_rho = 200;
  int grid_w = 50;
};

struct RoadConfig {
  bool incoming = true;
  double length = 1.0;
  /// "piecewise": each point holds until the next one. "linear": straight
  /// lines between points, sampled into a staircase with run.eps_0.
  std::string profile = "piecewise";
  /// (x, rho, w) breakpoints in road coordinates.
  std::vector<std::array<double, 3>> points;
};

struct RunConfig {
  double t_end = 1.0;
  double eps_fan = 0.02;
  double eps_0 = 0.01;
  std::uint64_t max_events = 1000000;
  std::uint64_t max_fronts = 100000;
  std::vector<double> snapshots;
  std::uint64_t seed = 1;
};

struct ScenarioConfig {
  ModelConfig model;
  JunctionSpec junction;
  std::vector<RoadConfig> roads;
  RunConfig run;
};

struct ConfigIssue {
  std::string path;
  /// 1-based; 0 when unknown.
  int line = 0;
  int column = 0;
  std::string message;

  std::string text() const {
    std::ostringstream os;
    if (line > 0) {
      os << line << ":" << column << ": ";
    }
    os << (path.empty() ? "<root>" : path) << ": " << message;
    return os.str();
  }
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue> &issues() const { return issues_; }

private:
  static std::string join(const std::vector<ConfigIssue> &issues) {
    std::string s;
    for (const auto &i : issues) {
      s += (s.empty() ? "" : "\n") + i.text();
    }
    return s;
  }
  std::vector<ConfigIssue> issues_;
};

inline const std::vector<std::string> &known_families() {
  static const std::vector<std::string> f{"greenshields", "quadratic-decay", "cubic-speed",
                                          "attribute-free"};
  return f;
}

namespace detail {

class Reader {
public:
  std::vector<ConfigIssue> issues;

  void add(const YAML::Node &n, const std::string &path, const std::string &msg) {
    ConfigIssue i;
    i.path = path;
    i.message = msg;
    if (n.IsDefined()) {
      const auto m = n.Mark();
      if (!m.is_null()) {
        i.line = m.line + 1;
        i.column = m.column + 1;
      }
    }
    issues.push_back(std::move(i));
  }

  /// Complains about keys outside `allowed`.
  void keys(const YAML::Node &map, const std::string &path,
            const std::vector<std::string> &allowed) {
    if (!map.IsDefined() || !map.IsMap()) {
      return;
    }
    for (const auto &kv : map) {
      const auto k = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        add(kv.first, join(path, k), "unknown key");
      }
    }
  }

  YAML::Node block(const YAML::Node &parent, const std::string &key, bool required) {
    const YAML::Node n = parent[key];
    if (!n.IsDefined()) {
      if (required) {
        add(parent, key, "missing block");
      }
      return YAML::Node(YAML::NodeType::Undefined);
    }
    if (!n.IsMap()) {
      add(n, key, "expected a mapping");
      return YAML::Node(YAML::NodeType::Undefined);
    }
    return n;
  }

  template <typename T>
  void scalar(const YAML::Node &map, const std::string &path, const std::string &key, T &out,
              bool required = false) {
    if (!map.IsDefined()) {
      return;
    }
    const YAML::Node n = map[key];
    const auto p = join(path, key);
    if (!n.IsDefined()) {
      if (required) {
        add(map, p, "missing value");
      }
      return;
    }
    convert(n, p, out);
  }

  template <typename T> bool convert(const YAML::Node &n, const std::string &p, T &out) {
    if (!n.IsScalar()) {
      add(n, p, std::string("expected ") + kind<T>());
      return false;
    }
    try {
      out = n.as<T>();
    } catch (const YAML::Exception &) {
      add(n, p, std::string("expected ") + kind<T>());
      return false;
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(out)) {
        add(n, p, "must be finite");
        return false;
      }
    }
    return true;
  }

  template <typename T> bool list(const YAML::Node &n, const std::string &p, std::vector<T> &out) {
    if (!n.IsSequence()) {
      add(n, p, "expected a list");
      return false;
    }
    out.clear();
    bool ok = true;
    for (std::size_t k = 0; k < n.size(); ++k) {
      T v{};
      ok = convert(n[k], p + "[" + std::to_string(k) + "]", v) && ok;
      out.push_back(v);
    }
    return ok;
  }

  static std::string join(const std::string &a, const std::string &b) {
    return a.empty() ? b : a + "." + b;
  }

private:
  template <typename T> static const char *kind() {
    if constexpr (std::is_same_v<T, std::string>) {
      return "a string";
    } else if constexpr (std::is_integral_v<T>) {
      return "an integer";
    } else {
      return "a number";
    }
  }
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace detail

/// Parses and validates; throws ConfigError listing every problem found.
inline ScenarioConfig parse(const std::string &text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException &e) {
    ConfigIssue i;
    i.line = e.mark.line + 1;
    i.column = e.mark.column + 1;
    i.message = "parse error: " + e.msg;
    throw ConfigError({i});
  }
  detail::Reader rd;
  ScenarioConfig cfg;
  if (!root.IsMap()) {
    rd.add(root, "", "expected a mapping with model, junction, roads and run");
    throw ConfigError(rd.issues);
  }
  rd.keys(root, "", {"model", "junction", "roads", "run"});

  // model
  const std::size_t before_model = rd.issues.size();
  const auto model = rd.block(root, "model", false);
  auto &mc = cfg.model;
  rd.keys(model, "model", {"family", "rho_max", "w_min", "w_max", "grid"});
  rd.scalar(model, "model", "family", mc.family);
  rd.scalar(model, "model", "rho_max", mc.rho_max);
  rd.scalar(model, "model", "w_min", mc.w_min);
  rd.scalar(model, "model", "w_max", mc.w_max);
  if (model.IsDefined()) {
    const auto grid = rd.block(model, "grid", false);
    rd.keys(grid, "model.grid", {"rho", "w"});
    rd.scalar(grid, "model.grid", "rho", mc.grid_rho);
    rd.scalar(grid, "model.grid", "w", mc.grid_w);
    const auto &fams = known_families();
    if (std::find(fams.begin(), fams.end(), mc.family) == fams.end()) {
      rd.add(model["family"], "model.family", "unknown family '" + mc.family + "'");
    }
    if (!(mc.rho_max > 0.0)) {
      rd.add(model["rho_max"], "model.rho_max", "must be positive");
    }
    if (!(mc.w_min > 0.0 && mc.w_min < mc.w_max)) {
      rd.add(model["w_min"], "model.w_min", "need 0 < w_min < w_max");
    }
    if (mc.grid_rho < 3 || mc.grid_w < 2) {
      rd.add(model["grid"], "model.grid", "need at least 3 rho and 2 w points");
    }
  }
  // Unknown keys do not spoil the values that were read.
  const bool model_ok =
      std::all_of(rd.issues.begin() + static_cast<std::ptrdiff_t>(before_model), rd.issues.end(),
                  [](const ConfigIssue &i) { return i.message == "unknown key"; });

  // junction
  const auto jn = rd.block(root, "junction", true);
  auto &js = cfg.junction;
  rd.keys(jn, "junction", {"incoming", "outgoing", "priority", "distribution", "mode"});
  rd.scalar(jn, "junction", "incoming", js.n, true);
  rd.scalar(jn, "junction", "outgoing", js.m, true);
  std::string mode = "adaptive";
  rd.scalar(jn, "junction", "mode", mode);
  if (jn.IsDefined()) {
    if (mode == "strict") {
      js.mode = PriorityMode::strict;
    } else if (mode == "adaptive") {
      js.mode = PriorityMode::adaptive;
    } else {
      rd.add(jn["mode"], "junction.mode", "must be strict or adaptive");
    }
    bool shapes_ok = true;
    if (jn["priority"].IsDefined()) {
      shapes_ok = rd.list(jn["priority"], "junction.priority", js.p) && shapes_ok;
    } else {
      rd.add(jn, "junction.priority", "missing value");
      shapes_ok = false;
    }
    const auto dist = jn["distribution"];
    if (!dist.IsDefined()) {
      rd.add(jn, "junction.distribution", "missing value");
      shapes_ok = false;
    } else if (!dist.IsSequence()) {
      rd.add(dist, "junction.distribution", "expected a list of rows");
      shapes_ok = false;
    } else {
      js.alpha.clear();
      for (std::size_t j = 0; j < dist.size(); ++j) {
        std::vector<double> row;
        shapes_ok =
            rd.list(dist[j], "junction.distribution[" + std::to_string(j) + "]", row) &&
            shapes_ok;
        js.alpha.push_back(row);
      }
    }
    if (shapes_ok) {
      for (const auto &e : js.errors()) {
        const bool about_p = e.find("priority") != std::string::npos;
        rd.add(about_p ? jn["priority"] : jn["distribution"],
               about_p ? "junction.priority" : "junction.distribution", e);
      }
    }
  }

  // roads
  const auto roads = root["roads"];
  if (!roads.IsDefined()) {
    rd.add(root, "roads", "missing list");
  } else if (!roads.IsSequence()) {
    rd.add(roads, "roads", "expected a list");
  } else {
    if (static_cast<int>(roads.size()) != js.n + js.m) {
      rd.add(roads, "roads",
             "has " + std::to_string(roads.size()) + " entries, expected incoming + outgoing = " +
                 std::to_string(js.n + js.m));
    }
    for (std::size_t r = 0; r < roads.size(); ++r) {
      const auto node = roads[r];
      const auto path = "roads[" + std::to_string(r) + "]";
      RoadConfig rc;
      rc.incoming = static_cast<int>(r) < js.n;
      if (!node.IsMap()) {
        rd.add(node, path, "expected a mapping");
        cfg.roads.push_back(rc);
        continue;
      }
      rd.keys(node, path, {"side", "length", "profile", "points"});
      std::string side = rc.incoming ? "incoming" : "outgoing";
      rd.scalar(node, path, "side", side);
      if (side != (rc.incoming ? "incoming" : "outgoing")) {
        rd.add(node["side"], path + ".side",
               std::string("must be ") + (rc.incoming ? "incoming" : "outgoing") +
                   " (incoming roads are listed first)");
      }
      rd.scalar(node, path, "length", rc.length);
      if (!(rc.length > 0.0)) {
        rd.add(node["length"], path + ".length", "must be positive");
      }
      rd.scalar(node, path, "profile", rc.profile);
      if (rc.profile != "piecewise" && rc.profile != "linear") {
        rd.add(node["profile"], path + ".profile", "must be piecewise or linear");
      }
      const auto pts = node["points"];
      if (!pts.IsDefined() || !pts.IsSequence() || pts.size() == 0) {
        rd.add(pts.IsDefined() ? pts : node, path + ".points",
               "expected a non-empty list of [x, rho, w]");
      } else {
        const double a = rc.incoming ? -rc.length : 0.0;
        const double b = rc.incoming ? 0.0 : rc.length;
        for (std::size_t k = 0; k < pts.size(); ++k) {
          const auto pp = path + ".points[" + std::to_string(k) + "]";
          std::vector<double> v;
          if (!rd.list(pts[k], pp, v)) {
            continue;
          }
          if (v.size() != 3) {
            rd.add(pts[k], pp, "expected [x, rho, w]");
            continue;
          }
          rc.points.push_back({v[0], v[1], v[2]});
          if (v[0] < a - 1e-12 || v[0] > b + 1e-12) {
            rd.add(pts[k][0], pp + ".x",
                   "outside the road [" + detail::fmt(a) + ", " + detail::fmt(b) + "]");
          }
          if (k > 0 && rc.points.size() >= 2 &&
              !(v[0] > rc.points[rc.points.size() - 2][0])) {
            rd.add(pts[k][0], pp + ".x", "breakpoints must be strictly increasing");
          }
          if (model_ok) {
            if (v[1] < 0.0 || v[1] > mc.rho_max) {
              rd.add(pts[k][1], pp + ".rho",
                     "outside [0, " + detail::fmt(mc.rho_max) + "]");
            }
            if (v[2] < mc.w_min || v[2] > mc.w_max) {
              rd.add(pts[k][2], pp + ".w",
                     "outside [" + detail::fmt(mc.w_min) + ", " + detail::fmt(mc.w_max) + "]");
            }
          }
        }
      }
      cfg.roads.push_back(rc);
    }
  }

  // run
  const auto run = rd.block(root, "run", false);
  auto &rc = cfg.run;
  rd.keys(run, "run",
          {"t_end", "eps_fan", "eps_0", "max_events", "max_fronts", "snapshots", "seed"});
  rd.scalar(run, "run", "t_end", rc.t_end);
  rd.scalar(run, "run", "eps_fan", rc.eps_fan);
  rd.scalar(run, "run", "eps_0", rc.eps_0);
  rd.scalar(run, "run", "max_events", rc.max_events);
  rd.scalar(run, "run", "max_fronts", rc.max_fronts);
  rd.scalar(run, "run", "seed", rc.seed);
  if (run.IsDefined()) {
    if (run["snapshots"].IsDefined()) {
      rd.list(run["snapshots"], "run.snapshots", rc.snapshots);
    }
    if (!(rc.t_end > 0.0)) {
      rd.add(run["t_end"], "run.t_end", "must be positive");
    }
    if (!(rc.eps_fan > 0.0)) {
      rd.add(run["eps_fan"], "run.eps_fan", "must be positive");
    }
    if (!(rc.eps_0 > 0.0)) {
      rd.add(run["eps_0"], "run.eps_0", "must be positive");
    }
    for (std::size_t k = 0; k < rc.snapshots.size(); ++k) {
      if (rc.snapshots[k] < 0.0 || rc.snapshots[k] > rc.t_end) {
        rd.add(run["snapshots"][k], "run.snapshots[" + std::to_string(k) + "]",
               "outside [0, t_end]");
      }
    }
  }

  if (!rd.issues.empty()) {
    throw ConfigError(rd.issues);
  }
  return cfg;
}

inline ScenarioConfig load(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    ConfigIssue i;
    i.message = "cannot read " + path;
    throw ConfigError({i});
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

/// Canonical text: fixed key order, flow-style lists, 17 significant digits.
inline std::string emit(const ScenarioConfig &cfg) {
  using detail::fmt;
  auto vec = [](const std::vector<double> &v) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) {
      s += (k ? ", " : "") + fmt(v[k]);
    }
    return s + "]";
  };
  std::ostringstream os;
  const auto &m = cfg.model;
  os << "model:\n"
     << "  family: " << m.family << "\n"
     << "  rho_max: " << fmt(m.rho_max) << "\n"
     << "  w_min: " << fmt(m.w_min) << "\n"
     << "  w_max: " << fmt(m.w_max) << "\n"
     << "  grid: {rho: " << m.grid_rho << ", w: " << m.grid_w << "}\n";
  const auto &j = cfg.junction;
  os << "junction:\n"
     << "  incoming: " << j.n << "\n"
     << "  outgoing: " << j.m << "\n"
     << "  mode: " << to_string(j.mode) << "\n"
     << "  priority: " << vec(j.p) << "\n"
     << "  distribution:\n";
  for (const auto &row : j.alpha) {
    os << "    - " << vec(row) << "\n";
  }
  os << "roads:\n";
  for (const auto &r : cfg.roads) {
    os << "  - side: " << (r.incoming ? "incoming" : "outgoing") << "\n"
       << "    length: " << fmt(r.length) << "\n"
       << "    profile: " << r.profile << "\n"
       << "    points:\n";
    for (const auto &p : r.points) {
      os << "      - " << vec({p[0], p[1], p[2]}) << "\n";
    }
  }
  const auto &r = cfg.run;
  os << "run:\n"
     << "  t_end: " << fmt(r.t_end) << "\n"
     << "  eps_fan: " << fmt(r.eps_fan) << "\n"
     << "  eps_0: " << fmt(r.eps_0) << "\n"
     << "  max_events: " << r.max_events << "\n"
     << "  max_fronts: " << r.max_fronts << "\n"
     << "  snapshots: " << vec(r.snapshots) << "\n"
     << "  seed: " << r.seed << "\n";
  return os.str();
}

inline nlohmann::json to_json(const ScenarioConfig &cfg) {
  nlohmann::json j;
  const auto &m = cfg.model;
  j["model"] = {{"family", m.family},
                {"rho_max", m.rho_max},
                {"w_min", m.w_min},
                {"w_max", m.w_max},
                {"grid", {{"rho", m.grid_rho}, {"w", m.grid_w}}}};
  j["junction"] = {{"incoming", cfg.junction.n},
                   {"outgoing", cfg.junction.m},
                   {"mode", to_string(cfg.junction.mode)},
                   {"priority", cfg.junction.p},
                   {"distribution", cfg.junction.alpha}};
  j["roads"] = nlohmann::json::array();
  for (const auto &r : cfg.roads) {
    j["roads"].push_back({{"side", r.incoming ? "incoming" : "outgoing"},
                          {"length", r.length},
                          {"profile", r.profile},
                          {"points", r.points}});
  }
  const auto &r = cfg.run;
  j["run"] = {{"t_end", r.t_end},         {"eps_fan", r.eps_fan},
              {"eps_0", r.eps_0},         {"max_events", r.max_events},
              {"max_fronts", r.max_fronts}, {"snapshots", r.snapshots},
              {"seed", r.seed}};
  return j;
}

using AnyDiagram = std::variant<FundamentalDiagram<Greenshields>, FundamentalDiagram<CustomFamily>>;

inline AnyDiagram make_diagram(const ModelConfig &m) {
  if (m.family == "greenshields") {
    return FundamentalDiagram<Greenshields>(Greenshields(m.rho_max, m.w_min, m.w_max));
  }
  if (m.family == "quadratic-decay") {
    return FundamentalDiagram<CustomFamily>(families::quadratic_decay(m.rho_max, m.w_min, m.w_max));
  }
  if (m.family == "cubic-speed") {
    return FundamentalDiagram<CustomFamily>(families::cubic_speed(m.rho_max, m.w_min, m.w_max));
  }
  if (m.family == "attribute-free") {
    return FundamentalDiagram<CustomFamily>(families::attribute_free(m.rho_max, m.w_min, m.w_max));
  }
  throw ConfigError({ConfigIssue{"model.family", 0, 0, "unknown family '" + m.family + "'"}});
}

/// Initial profile of one road, linear profiles sampled with eps_0.
inline RoadProfile road_profile(const RoadConfig &rc, double eps_0) {
  const double a = rc.incoming ? -rc.length : 0.0;
  const double b = rc.incoming ? 0.0 : rc.length;
  if (rc.profile == "linear" && rc.points.size() > 1) {
    const auto pts = rc.points;
    auto f = [pts](double x) {
      if (x <= pts.front()[0]) {
        return RoadState{pts.front()[1], pts.front()[2]};
      }
      for (std::size_t k = 1; k < pts.size(); ++k) {
        if (x <= pts[k][0]) {
          const double t = (x - pts[k - 1][0]) / (pts[k][0] - pts[k - 1][0]);
          return RoadState{pts[k - 1][1] + t * (pts[k][1] - pts[k - 1][1]),
                           pts[k - 1][2] + t * (pts[k][2] - pts[k - 1][2])};
        }
      }
      return RoadState{pts.back()[1], pts.back()[2]};
    };
    return sample_profile(f, a, b, eps_0);
  }
  RoadProfile p;
  p.length = rc.length;
  for (const auto &pt : rc.points) {
    p.x.push_back(pt[0]);
    p.states.push_back({pt[1], pt[2]});
  }
  return p;
}

inline Network make_network(const ScenarioConfig &cfg) {
  Network net;
  net.junction = cfg.junction;
  for (const auto &r : cfg.roads) {
    net.roads.push_back(road_profile(r, cfg.run.eps_0));
  }
  return net;
}

inline RunOptions run_options(const ScenarioConfig &cfg) {
  RunOptions o;
  o.t_end = cfg.run.t_end;
  o.eps_fan = cfg.run.eps_fan;
  o.max_events = cfg.run.max_events;
  o.max_fronts = cfg.run.max_fronts;
  o.snapshot_times = cfg.run.snapshots;
  return o;
}

/// Junction-adjacent initial states: last piece of each incoming road,
/// first piece of each outgoing road.
inline std::vector<RoadState> junction_states(const ScenarioConfig &cfg) {
  std::vector<RoadState> out;
  for (const auto &r : cfg.roads) {
    const auto &p = r.incoming ? r.points.back() : r.points.front();
    out.push_back({p[1], p[2]});
  }
  return out;
}

} // namespace gsom::io
