#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gsom/fundamental_diagram.hpp"
#include "gsom/validate.hpp"

using Catch::Approx;
using gsom::Branch;

namespace {

gsom::FundamentalDiagram<gsom::Greenshields> reference() {
  return gsom::FundamentalDiagram<gsom::Greenshields>(gsom::Greenshields(1.0, 0.5, 2.0));
}

// Plain bisection on a sign change; independent of the library root finder.
template <typename F> double oracle_bisect(F f, double lo, double hi) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((f(lo) > 0) == (f(mid) > 0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("flux and velocity of the reference family", "[fundamental-diagram]") {
  const auto fd = reference();
  CHECK(fd.flux(0.0, 1.0) == 0.0);
  CHECK(fd.flux(0.5, 1.0) == Approx(0.25).margin(1e-15));
  CHECK(fd.flux(0.25, 2.0) == Approx(0.375).margin(1e-15));
  CHECK(fd.velocity(0.0, 1.0) == 1.0);
  CHECK(fd.velocity(1.0, 1.0) == 0.0);
  CHECK(fd.velocity(0.4, 2.0) == Approx(1.2).margin(1e-15));
  CHECK(fd.flux(1.0, 1.7) == 0.0);
}

TEST_CASE("out of range states raise domain errors", "[fundamental-diagram]") {
  const auto fd = reference();
  CHECK_THROWS_AS(fd.flux(-0.1, 1.0), gsom::DomainError);
  CHECK_THROWS_AS(fd.flux(1.2, 1.0), gsom::DomainError);
  CHECK_THROWS_AS(fd.velocity(0.3, 2.5), gsom::DomainError);
  CHECK_THROWS_AS(fd.velocity(0.3, 0.1), gsom::DomainError);
  CHECK_THROWS_AS(fd.flux(std::nan(""), 1.0), gsom::DomainError);
}

TEST_CASE("critical density", "[fundamental-diagram]") {
  const auto fd = reference();
  CHECK(fd.critical_density(1.0) == 0.5);
  CHECK(fd.critical_density(2.0) == 0.5);

  const gsom::FundamentalDiagram<gsom::CustomFamily> qd(
      gsom::families::quadratic_decay(1.0, 0.5, 2.0));
  // Grid maximisation oracle at 1e-6 resolution, then the exact vertex.
  double best = 0.0, arg = 0.0;
  for (int k = 0; k <= 1000000; ++k) {
    const double r = k * 1e-6;
    const double q = r * (1 - r) * (1 - r);
    if (q > best) {
      best = q;
      arg = r;
    }
  }
  CHECK(qd.critical_density(1.0) == Approx(arg).margin(2e-6));
  CHECK(qd.critical_density(1.3) == Approx(1.0 / 3.0).margin(1e-9));
  CHECK(qd.max_flux(1.0) == Approx(4.0 / 27.0).margin(1e-12));
}

TEST_CASE("companion density", "[fundamental-diagram]") {
  const auto fd = reference();
  CHECK(fd.companion_density(0.25, 1.0) == Approx(0.75).margin(1e-12));
  CHECK(fd.companion_density(0.5, 1.0) == 0.5);
  CHECK(fd.companion_density(0.1, 2.0) == Approx(0.9).margin(1e-12));
  CHECK(fd.companion_density(0.0, 1.0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("demand and supply", "[fundamental-diagram]") {
  const auto fd = reference();
  CHECK(fd.demand(0.25, 1.0) == Approx(0.1875).margin(1e-15));
  CHECK(fd.demand(0.75, 1.0) == Approx(0.25).margin(1e-15));
  CHECK(fd.demand(0.5, 2.0) == Approx(0.5).margin(1e-15));
  CHECK(fd.supply(0.25, 1.0) == Approx(0.25).margin(1e-15));
  CHECK(fd.supply(0.75, 1.0) == Approx(0.1875).margin(1e-15));
  CHECK(fd.supply(1.0, 1.0) == 0.0);
}

TEST_CASE("rho dagger", "[fundamental-diagram]") {
  const auto fd = reference();
  CHECK(fd.rho_dagger(1.0, 0.4) == Approx(0.6).margin(1e-12));
  CHECK(fd.rho_dagger(1.0, 1.5) == 0.0);
  CHECK(fd.rho_dagger(2.0, 1.0) == Approx(0.5).margin(1e-12));
  CHECK(fd.rho_dagger(1.0, 1.0) == 0.0);
  CHECK(fd.rho_dagger(1.0, 0.0) == 1.0);
  CHECK_THROWS_AS(fd.rho_dagger(1.0, -0.1), gsom::DomainError);

  const gsom::FundamentalDiagram<gsom::CustomFamily> qd(
      gsom::families::quadratic_decay(1.0, 0.5, 2.0));
  // V = w (1 - rho)^2 = v  =>  rho = 1 - sqrt(v / w)
  CHECK(qd.rho_dagger(1.5, 0.6) == Approx(1.0 - std::sqrt(0.4)).margin(1e-11));
}

TEST_CASE("flux inversion on a branch", "[fundamental-diagram]") {
  const auto fd = reference();
  CHECK(fd.invert_flux_on_branch(0.1875, 1.0, Branch::congested) ==
        Approx(0.75).margin(1e-12));
  CHECK(fd.invert_flux_on_branch(0.25, 1.0, Branch::free_flow) == 0.5);
  const double oracle =
      oracle_bisect([](double r) { return 2.0 * r * (1.0 - r) - 0.12; }, 0.0, 0.5);
  CHECK(oracle == Approx(0.06411010564593267).margin(1e-12));
  CHECK(fd.invert_flux_on_branch(0.12, 2.0, Branch::free_flow) ==
        Approx(oracle).margin(1e-10));
  CHECK_THROWS_AS(fd.invert_flux_on_branch(0.3, 1.0, Branch::free_flow),
                  gsom::InfeasibleFlux);

  // Root-finding path of a family without closed forms.
  const gsom::FundamentalDiagram<gsom::CustomFamily> qd(
      gsom::families::quadratic_decay(1.0, 0.5, 2.0));
  const double q = 0.1;
  const double rf = qd.invert_flux_on_branch(q, 1.0, Branch::free_flow);
  const double rc = qd.invert_flux_on_branch(q, 1.0, Branch::congested);
  CHECK(rf < 1.0 / 3.0);
  CHECK(rc > 1.0 / 3.0);
  CHECK(qd.flux(rf, 1.0) == Approx(q).margin(1e-11));
  CHECK(qd.flux(rc, 1.0) == Approx(q).margin(1e-11));
}

TEST_CASE("sampled identities of the scalar constructions", "[fundamental-diagram]") {
  const auto fd = reference();
  const gsom::FundamentalDiagram<gsom::CustomFamily> qd(
      gsom::families::quadratic_decay(1.0, 0.5, 2.0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ur(0.0, 1.0), uw(0.5, 2.0);
  for (int k = 0; k < 2000; ++k) {
    const double r = ur(rng);
    const double w = uw(rng);
    for (int fam = 0; fam < 2; ++fam) {
      auto run = [&](const auto &d) {
        CHECK(d.demand(r, w) + d.supply(r, w) ==
              Approx(d.flux(r, w) + d.max_flux(w)).margin(1e-14));
        const double c = d.companion_density(r, w);
        CHECK(d.flux(c, w) == Approx(d.flux(r, w)).margin(1e-11));
        // Twice the root tolerance away from the flat top; conditioning
        // limits the round trip close to sigma.
        const double tol =
            std::abs(r - d.critical_density(w)) > 0.05 ? 2.5e-12 : 1e-6;
        CHECK(d.companion_density(c, w) == Approx(r).margin(tol));
        if (r > 1e-3 && r < 0.999) {
          CHECK(d.rho_dagger(w, d.velocity(r, w)) == Approx(r).margin(1e-10));
          CHECK(d.f(r, w) < 0.0);
        }
        const double r2 = std::min(1.0, r + 0.01);
        CHECK(d.demand(r2, w) >= d.demand(r, w) - 1e-15);
        CHECK(d.supply(r2, w) <= d.supply(r, w) + 1e-15);
      };
      if (fam == 0) {
        run(fd);
      } else {
        run(qd);
      }
    }
  }
}

TEST_CASE("equal velocity orders densities by attribute", "[fundamental-diagram]") {
  const auto fd = reference();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(0.01, 0.99), uw(0.5, 2.0);
  for (int k = 0; k < 2000; ++k) {
    const double w_plus = uw(rng);
    const double w_star = uw(rng);
    const double rho_plus = ur(rng);
    const double v = fd.velocity(rho_plus, w_plus);
    if (v > fd.max_velocity(w_star)) {
      continue;
    }
    const double rho_star = fd.rho_dagger(w_star, v);
    if (w_star < w_plus - 1e-12) {
      CHECK(rho_star < rho_plus);
    } else if (w_star > w_plus + 1e-12) {
      CHECK(rho_star > rho_plus);
    }
  }
}

TEST_CASE("hypothesis validation", "[fundamental-diagram]") {
  const auto rep = gsom::validate_family(gsom::Greenshields(1.0, 0.5, 2.0), {200, 50});
  CHECK(rep.all_pass());
  CHECK(rep.worst_violation() < 1e-6);
  CHECK(rep.checks.size() == 6);

  const auto cubic =
      gsom::validate_family(gsom::families::cubic_speed(1.0, 0.5, 2.0), {200, 50});
  REQUIRE(cubic.find("H2") != nullptr);
  CHECK_FALSE(cubic.find("H2")->pass);
  CHECK(cubic.find("H2")->worst_rho == 0.0);
  CHECK(cubic.find("V1")->pass);
  CHECK(cubic.find("H1")->pass);

  const auto negative = gsom::validate_family(gsom::Greenshields(1.0, -1.0, 2.0), {200, 50});
  CHECK_FALSE(negative.find("V1")->pass);
  CHECK(negative.find("V1")->worst_w == -1.0);

  const auto flat =
      gsom::validate_family(gsom::families::attribute_free(1.0, 0.5, 2.0), {200, 50});
  CHECK(flat.all_pass());
}
