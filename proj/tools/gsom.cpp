#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "gsom/diagnostics.hpp"
#include "gsom/io/config.hpp"
#include "gsom/io/csv.hpp"
#include "gsom/junction.hpp"
#include "gsom/properties.hpp"
#include "gsom/riemann.hpp"
#include "gsom/scenarios.hpp"
#include "gsom/validate.hpp"
#include "gsom/wft.hpp"

namespace {

using nlohmann::json;

/// Failure with an exit status and a JSON body on stderr.
struct Failure {
  int status = 1;
  std::string type;
  std::string message;
  json issues = json::array();
};

[[noreturn]] void fail(int status, std::string type, std::string message) {
  throw Failure{status, std::move(type), std::move(message), json::array()};
}

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_fan;
  std::optional<double> eps_0;
  std::optional<double> t_end;
  std::string mode;
  std::string suite;
  std::vector<double> left;
  std::vector<double> right;
  int count = 100;
};

gsom::io::ScenarioConfig load_config(const Options &o, bool required) {
  gsom::io::ScenarioConfig cfg;
  if (o.config.empty()) {
    if (required) {
      fail(2, "usage", "--config is required for this subcommand");
    }
  } else {
    cfg = gsom::io::load(o.config);
  }
  if (o.seed) {
    cfg.run.seed = *o.seed;
  }
  if (o.eps_fan) {
    if (!(*o.eps_fan > 0.0)) {
      fail(2, "usage", "--eps-fan must be positive");
    }
    cfg.run.eps_fan = *o.eps_fan;
  }
  if (o.eps_0) {
    if (!(*o.eps_0 > 0.0)) {
      fail(2, "usage", "--eps-0 must be positive");
    }
    cfg.run.eps_0 = *o.eps_0;
  }
  if (o.t_end) {
    if (!(*o.t_end > 0.0)) {
      fail(2, "usage", "--t-end must be positive");
    }
    cfg.run.t_end = *o.t_end;
  }
  if (!o.mode.empty()) {
    cfg.junction.mode =
        o.mode == "strict" ? gsom::PriorityMode::strict : gsom::PriorityMode::adaptive;
  }
  return cfg;
}

/// Output file when --out is set, stdout otherwise.
class Sink {
public:
  explicit Sink(const std::string &path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) {
        fail(3, "io", "cannot write " + path);
      }
    }
  }
  std::ostream &os() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }
  bool to_file() const { return file_.is_open(); }

private:
  std::ofstream file_;
};

std::ofstream open_in(const std::filesystem::path &dir, const std::string &name) {
  std::ofstream f(dir / name);
  if (!f) {
    fail(3, "io", "cannot write " + (dir / name).string());
  }
  return f;
}

template <typename Fn> auto with_diagram(const gsom::io::ModelConfig &m, Fn &&fn) {
  return std::visit(std::forward<Fn>(fn), gsom::io::make_diagram(m));
}

int cmd_riemann(const Options &o) {
  const auto cfg = load_config(o, false);
  if (o.left.size() != 2 || o.right.size() != 2) {
    fail(2, "usage", "riemann needs --left RHO W and --right RHO W");
  }
  return with_diagram(cfg.model, [&](const auto &fd) {
    const auto sol = gsom::solve_riemann(fd, {o.left[0], o.left[1]}, {o.right[0], o.right[1]});
    gsom::io::write_waves(std::cout, sol);
    std::cout.precision(17);
    std::cout << "\nmiddle_rho,middle_w,vacuum_left\n"
              << sol.middle.rho << "," << sol.middle.w << "," << (sol.vacuum_left ? 1 : 0)
              << "\n";
    return 0;
  });
}

int cmd_junction(const Options &o) {
  const auto cfg = load_config(o, true);
  return with_diagram(cfg.model, [&](const auto &fd) {
    const auto states = gsom::io::junction_states(cfg);
    const auto sol = gsom::aprsom_solve(fd, states, cfg.junction);
    std::cout << "mode " << gsom::to_string(cfg.junction.mode) << "\n";
    gsom::io::write_junction(std::cout, sol, cfg.junction.n);
    std::cout.precision(17);
    std::cout << "\nh_bar " << gsom::theta_hbar(fd, states, cfg.junction) << "\n";
    return 0;
  });
}

int cmd_run(const Options &o) {
  const auto cfg = load_config(o, true);
  if (o.out.empty()) {
    fail(2, "usage", "run needs --out DIR");
  }
  const std::filesystem::path dir(o.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    fail(3, "io", "cannot create " + dir.string() + ": " + ec.message());
  }
  return with_diagram(cfg.model, [&](const auto &fd) {
    const auto net = gsom::io::make_network(cfg);
    const auto opt = gsom::io::run_options(cfg);
    const auto traj = gsom::run_wft(fd, net, opt);

    auto snap = open_in(dir, "snapshots.csv");
    gsom::io::write_snapshot_header(snap);
    gsom::io::write_snapshot(snap, fd, gsom::sample_initial(fd, net));
    for (const auto &s : traj.snapshots) {
      gsom::io::write_snapshot(snap, fd, s);
    }
    gsom::io::write_snapshot(snap, fd, traj.final_state);
    auto ev = open_in(dir, "events.csv");
    gsom::io::write_events(ev, traj);
    auto gen = open_in(dir, "genealogy.json");
    gen << gsom::io::genealogy_json(traj).dump(1) << "\n";
    auto conf = open_in(dir, "config.json");
    conf << gsom::io::to_json(cfg).dump(1) << "\n";

    std::cout.precision(17);
    std::cout << "events " << traj.events.size() << "\n"
              << "junction_events " << traj.junction_events.size() << "\n"
              << "fronts " << traj.fronts.size() << "\n"
              << "max_live_fronts " << traj.max_live_fronts << "\n"
              << "mass_initial " << traj.mass.initial << "\n"
              << "mass_final " << traj.mass.final << "\n"
              << "mass_residual " << traj.mass.residual() << "\n"
              << "truncated " << (traj.truncated ? "yes" : "no") << "\n";
    if (traj.truncated) {
      fail(5, "truncated", traj.truncation);
    }
    return 0;
  });
}

int cmd_diagnose(const Options &o) {
  const auto cfg = load_config(o, true);
  return with_diagram(cfg.model, [&](const auto &fd) {
    const auto net = gsom::io::make_network(cfg);
    const auto series = gsom::tv_series(fd, net, gsom::io::run_options(cfg));
    Sink sink(o.out);
    gsom::io::write_tv_series(sink.os(), series);
    return 0;
  });
}

int cmd_returning(const Options &o) {
  const auto cfg = load_config(o, o.suite.empty());
  if (!o.suite.empty() && o.suite != "outgoing" && o.suite != "incoming") {
    fail(2, "usage", "returning --suite must be outgoing or incoming");
  }
  return with_diagram(cfg.model, [&](const auto &fd) {
    const double cs = gsom::c_star(fd.model()).value;
    Sink sink(o.out);
    gsom::io::write_returning_header(sink.os());
    std::size_t total = 0, failed = 0;
    auto emit = [&](const std::vector<gsom::ReturningWaveRecord> &recs, int run) {
      gsom::io::write_returning(sink.os(), recs, run);
      total += recs.size();
      for (const auto &r : recs) {
        failed += r.pass() ? 0 : 1;
      }
    };
    if (o.suite.empty()) {
      const auto net = gsom::io::make_network(cfg);
      const auto traj = gsom::run_wft(fd, net, gsom::io::run_options(cfg));
      emit(gsom::classify_returning(fd, traj, cfg.junction.n, cs), 0);
    } else {
      std::mt19937_64 rng(cfg.run.seed);
      for (int k = 0; k < o.count; ++k) {
        const auto mode = o.mode == "strict"     ? gsom::PriorityMode::strict
                          : o.mode == "adaptive" ? gsom::PriorityMode::adaptive
                          : k % 2                ? gsom::PriorityMode::strict
                                                 : gsom::PriorityMode::adaptive;
        const auto net = o.suite == "outgoing"
                             ? gsom::scenarios::outgoing_returning(rng, 1 + k % 2, mode)
                             : gsom::scenarios::incoming_returning(rng, 1 + k % 2, mode);
        gsom::RunOptions opt;
        opt.t_end = o.t_end.value_or(6.0);
        opt.eps_fan = o.eps_fan.value_or(0.05);
        const auto traj = gsom::run_wft(fd, net, opt);
        emit(gsom::classify_returning(fd, traj, net.junction.n, cs), k);
      }
    }
    if (sink.to_file()) {
      std::cout << "records " << total << "\nfailing " << failed << "\n";
    }
    return 0;
  });
}

int cmd_properties(const Options &o) {
  if (o.suite != "appendix-a") {
    fail(2, "usage", "properties needs --suite appendix-a");
  }
  const auto cfg = load_config(o, false);
  return with_diagram(cfg.model, [&](const auto &fd) {
    const auto rep = gsom::appendix_a_suite(fd, cfg.run.seed);
    Sink sink(o.out);
    sink.os() << rep.text() << "overall " << (rep.pass() ? "PASS" : "FAIL") << "\n";
    return rep.pass() ? 0 : 1;
  });
}

int cmd_validate_model(const Options &o) {
  const auto cfg = load_config(o, false);
  return with_diagram(cfg.model, [&](const auto &fd) {
    const auto rep = gsom::validate_family(
        fd.model(), gsom::GridSpec{cfg.model.grid_rho, cfg.model.grid_w});
    std::cout.precision(17);
    std::cout << "family " << fd.model().name() << "\n";
    std::cout << "check,pass,worst_violation,rho,w\n";
    for (const auto &c : rep.checks) {
      std::cout << c.name << "," << (c.pass ? 1 : 0) << "," << c.worst_violation << ","
                << c.worst_rho << "," << c.worst_w << "\n";
    }
    const auto cs = gsom::c_star(fd.model());
    std::cout << "\nc_star " << cs.value << "\nc_star_analytic " << (cs.analytic ? 1 : 0)
              << "\nc_star_grid " << cs.grid << "\nc_star_grid_refined " << cs.grid_refined
              << "\nc_star_resolution " << cs.resolution << "\n";
    if (!rep.all_pass()) {
      fail(1, "validation", "model hypotheses fail on the sampling grid");
    }
    return 0;
  });
}

void report(const Failure &f) {
  json j = {{"error", {{"type", f.type}, {"message", f.message}}}};
  if (!f.issues.empty()) {
    j["error"]["issues"] = f.issues;
  }
  std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"gsom: junction Riemann solvers, wave-front tracking and diagnostics"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "scenario file (YAML)");
  app.add_option("--out", o.out, "output file, or directory for run");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--eps-fan", o.eps_fan, "rarefaction fragment size");
  app.add_option("--eps-0", o.eps_0, "initial data sampling step");
  app.add_option("--t-end", o.t_end, "final time");
  app.add_option("--mode", o.mode, "priority mode")->check(CLI::IsMember({"strict", "adaptive"}));
  app.add_option("--suite", o.suite, "built-in suite");

  auto *riemann = app.add_subcommand("riemann", "waves of a road Riemann problem");
  riemann->add_option("--left", o.left, "left state RHO W")->expected(2);
  riemann->add_option("--right", o.right, "right state RHO W")->expected(2);
  auto *junction = app.add_subcommand("junction", "junction solution and transcript");
  auto *run = app.add_subcommand("run", "wave-front tracking run");
  auto *diagnose = app.add_subcommand("diagnose", "functionals after every event");
  auto *returning = app.add_subcommand("returning", "returning-wave records");
  returning->add_option("--count", o.count, "runs in a built-in suite");
  auto *properties = app.add_subcommand("properties", "perturbation harness report");
  auto *validate = app.add_subcommand("validate-model", "model hypotheses and C*");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    report({2, "usage", e.what(), json::array()});
    return 2;
  }

  try {
    if (*riemann) {
      return cmd_riemann(o);
    }
    if (*junction) {
      return cmd_junction(o);
    }
    if (*run) {
      return cmd_run(o);
    }
    if (*diagnose) {
      return cmd_diagnose(o);
    }
    if (*returning) {
      return cmd_returning(o);
    }
    if (*properties) {
      return cmd_properties(o);
    }
    if (*validate) {
      return cmd_validate_model(o);
    }
  } catch (const Failure &f) {
    report(f);
    return f.status;
  } catch (const gsom::io::ConfigError &e) {
    Failure f{3, "config", "invalid configuration", json::array()};
    for (const auto &i : e.issues()) {
      f.issues.push_back(
          {{"path", i.path}, {"line", i.line}, {"column", i.column}, {"message", i.message}});
    }
    report(f);
    return 3;
  } catch (const gsom::DomainError &e) {
    report({4, "domain", e.what(), json::array()});
    return 4;
  } catch (const gsom::SpecError &e) {
    report({3, "spec", e.what(), json::array()});
    return 3;
  } catch (const gsom::PreconditionError &e) {
    report({4, "precondition", e.what(), json::array()});
    return 4;
  } catch (const std::exception &e) {
    report({1, "internal", e.what(), json::array()});
    return 1;
  }
  return 2;
}
