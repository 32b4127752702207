#include <catch_amalgamated.hpp>

#include <random>

#include "gsom/riemann.hpp"

using Catch::Approx;
using gsom::RoadState;
using gsom::WaveFamily;
using gsom::WaveKind;

namespace {

const gsom::FundamentalDiagram<gsom::Greenshields> kFd(gsom::Greenshields(1.0, 0.5, 2.0));

} // namespace

TEST_CASE("middle state", "[road-riemann]") {
  auto us = gsom::middle_state(kFd, {0.2, 1.0}, {0.5, 0.8});
  CHECK(us.rho == Approx(0.6).margin(1e-12));
  CHECK(us.w == 1.0);

  us = gsom::middle_state(kFd, {0.3, 1.0}, {0.3, 1.0});
  CHECK(us.rho == Approx(0.3).margin(1e-12));

  // V+ = 1.5 exceeds the top speed 1 at w = 1: sign scan finds no root.
  bool sign_change = false;
  for (int k = 0; k < 1000; ++k) {
    const double a = kFd.velocity(k / 1000.0, 1.0) - 1.5;
    const double b = kFd.velocity((k + 1) / 1000.0, 1.0) - 1.5;
    sign_change = sign_change || (a > 0) != (b > 0);
  }
  CHECK_FALSE(sign_change);
  us = gsom::middle_state(kFd, {0.2, 1.0}, {0.25, 2.0});
  CHECK(us.rho == 0.0);
  CHECK(us.w == 1.0);
}

TEST_CASE("shock followed by contact", "[road-riemann]") {
  const auto sol = gsom::solve_riemann(kFd, {0.2, 1.0}, {0.5, 0.8});
  REQUIRE(sol.waves.size() == 2);
  const auto &s = sol.waves[0];
  CHECK(s.family == WaveFamily::rho);
  CHECK(s.kind == WaveKind::shock);
  CHECK(s.left.rho == 0.2);
  CHECK(s.right.rho == Approx(0.6).margin(1e-12));
  CHECK(s.speed_lo == Approx((0.24 - 0.16) / 0.4).margin(1e-12));
  CHECK(s.speed_lo == s.speed_hi);
  const auto &c = sol.waves[1];
  CHECK(c.family == WaveFamily::w);
  CHECK(c.kind == WaveKind::contact);
  CHECK(c.speed_lo == Approx(0.4).margin(1e-12));
  CHECK_FALSE(c.vacuum);
}

TEST_CASE("constant data produces no waves", "[road-riemann]") {
  const auto sol = gsom::solve_riemann(kFd, {0.8, 1.0}, {0.8, 1.0});
  CHECK(sol.waves.empty());
  CHECK(sol.middle == RoadState{0.8, 1.0});
}

TEST_CASE("single rarefaction", "[road-riemann]") {
  const auto sol = gsom::solve_riemann(kFd, {0.7, 1.0}, {0.3, 1.0});
  REQUIRE(sol.waves.size() == 1);
  const auto &r = sol.waves[0];
  CHECK(r.kind == WaveKind::rarefaction);
  CHECK(r.speed_lo == Approx(-0.4).margin(1e-12));
  CHECK(r.speed_hi == Approx(0.4).margin(1e-12));
}

TEST_CASE("vacuum middle state", "[road-riemann]") {
  const auto sol = gsom::solve_riemann(kFd, {0.2, 1.0}, {0.25, 2.0});
  REQUIRE(sol.waves.size() == 2);
  CHECK(sol.middle.rho == 0.0);
  CHECK(sol.waves[0].kind == WaveKind::rarefaction);
  CHECK(sol.waves[0].speed_lo == Approx(0.6).margin(1e-12));
  CHECK(sol.waves[0].speed_hi == Approx(1.0).margin(1e-12));
  CHECK(sol.waves[1].vacuum);
  CHECK(sol.waves[1].speed_lo == Approx(1.5).margin(1e-12));
}

TEST_CASE("vacuum on the left is label transport", "[road-riemann]") {
  const auto sol = gsom::solve_riemann(kFd, {0.0, 1.0}, {0.4, 1.5});
  CHECK(sol.vacuum_left);
  REQUIRE(sol.waves.size() == 1);
  CHECK(sol.waves[0].family == WaveFamily::w);
  CHECK(sol.waves[0].vacuum);
  CHECK(sol.waves[0].speed_lo == Approx(0.9).margin(1e-12));

  const auto empty = gsom::solve_riemann(kFd, {0.0, 1.0}, {0.0, 2.0});
  REQUIRE(empty.waves.size() == 1);
  CHECK(empty.waves[0].speed_lo == Approx(2.0).margin(1e-12));
}

TEST_CASE("w-wave catching a shock", "[road-riemann]") {
  // V(0.5, 1.6) = V(0.2, 1) = 0.8; shock 0.2 -> 0.6 at w = 1 moves at 0.2.
  const auto a = gsom::solve_riemann(kFd, {0.5, 1.6}, {0.2, 1.0});
  const auto b = gsom::solve_riemann(kFd, {0.2, 1.0}, {0.6, 1.0});
  REQUIRE(a.waves.size() == 1);
  REQUIRE(b.waves.size() == 1);
  CHECK(a.waves[0].family == WaveFamily::w);
  CHECK(a.waves[0].speed_lo == Approx(0.8).margin(1e-12));
  CHECK(b.waves[0].speed_lo == Approx(0.2).margin(1e-12));

  const auto out = gsom::interact(kFd, a.waves[0], b.waves[0]);
  const auto direct = gsom::solve_riemann(kFd, {0.5, 1.6}, {0.6, 1.0});
  REQUIRE(out.waves.size() == 2);
  CHECK(out.middle.rho == Approx(0.75).margin(1e-12));
  CHECK(out.waves[0].kind == WaveKind::shock);
  CHECK(out.waves[0].speed_lo == Approx(-0.4).margin(1e-12));
  CHECK(out.waves[1].speed_lo == Approx(0.4).margin(1e-12));
  CHECK(out.middle.rho == direct.middle.rho);

  // Flux variation split: the daughter rho-wave's jump equals the mother's
  // jump plus the two contact corrections.
  const double lhs = kFd.flux(0.75, 1.6) - kFd.flux(0.5, 1.6);
  const double rhs = (0.75 - 0.6) * kFd.velocity(0.75, 1.6) +
                     (kFd.flux(0.6, 1.0) - kFd.flux(0.2, 1.0)) +
                     (0.2 - 0.5) * kFd.velocity(0.5, 1.6);
  CHECK(lhs == Approx(rhs).margin(1e-12));
}

TEST_CASE("two shocks merge additively", "[road-riemann]") {
  const auto a = gsom::solve_riemann(kFd, {0.1, 1.0}, {0.3, 1.0});
  const auto b = gsom::solve_riemann(kFd, {0.3, 1.0}, {0.8, 1.0});
  CHECK(a.waves[0].speed_lo == Approx(0.6).margin(1e-12));
  CHECK(b.waves[0].speed_lo == Approx(-0.1).margin(1e-12));
  const auto out = gsom::interact(kFd, a.waves[0], b.waves[0]);
  REQUIRE(out.waves.size() == 1);
  CHECK(out.waves[0].kind == WaveKind::shock);
  CHECK(out.waves[0].speed_lo == Approx(0.1).margin(1e-12));
  const double dq = kFd.flux(0.8, 1.0) - kFd.flux(0.1, 1.0);
  const double parts = (kFd.flux(0.3, 1.0) - kFd.flux(0.1, 1.0)) +
                       (kFd.flux(0.8, 1.0) - kFd.flux(0.3, 1.0));
  CHECK(dq == Approx(0.07).margin(1e-12));
  CHECK(dq == Approx(parts).margin(1e-15));
}

TEST_CASE("rho-wave behind a faster w-wave is rejected", "[road-riemann]") {
  const auto r = gsom::solve_riemann(kFd, {0.1, 1.0}, {0.2, 1.0});
  // V(7/15, 1.5) = V(0.2, 1) = 0.8: a pure contact moving at 0.8.
  const auto c = gsom::solve_riemann(kFd, {0.2, 1.0}, {7.0 / 15.0, 1.5});
  REQUIRE(r.waves.size() == 1);
  REQUIRE(c.waves.size() == 1);
  CHECK(r.waves[0].speed_lo == Approx(0.7).margin(1e-12));
  CHECK_THROWS_AS(gsom::interact(kFd, r.waves[0], c.waves[0]), gsom::PreconditionError);
  // A shock moving left followed by a contact moving right never meet.
  const auto s1 = gsom::solve_riemann(kFd, {0.6, 1.0}, {0.9, 1.0});
  const auto s2 = gsom::solve_riemann(kFd, {0.9, 1.0}, {0.95, 2.0});
  REQUIRE(s1.waves.size() == 1);
  REQUIRE(s2.waves.size() == 1);
  CHECK_THROWS_AS(gsom::interact(kFd, s1.waves[0], s2.waves[0]), gsom::PreconditionError);
  // Non-adjacent waves.
  CHECK_THROWS_AS(gsom::interact(kFd, s2.waves[0], s1.waves[0]), gsom::PreconditionError);
}

TEST_CASE("random pairs satisfy invariants and Lax conditions", "[road-riemann]") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ur(0.0, 1.0), uw(0.5, 2.0);
  for (int k = 0; k < 20000; ++k) {
    const RoadState um{ur(rng), uw(rng)};
    const RoadState up{ur(rng), uw(rng)};
    const auto sol = gsom::solve_riemann(kFd, um, up);
    RoadState cur = um;
    double last_speed = -1e300;
    int rho_waves = 0;
    for (const auto &wv : sol.waves) {
      CHECK(wv.left == cur);
      CHECK(wv.speed_lo >= last_speed - 1e-12);
      last_speed = wv.speed_hi;
      if (wv.family == WaveFamily::rho) {
        ++rho_waves;
        CHECK(std::abs(wv.left.w - wv.right.w) <= 1e-9);
        if (wv.kind == WaveKind::shock) {
          CHECK(kFd.lambda1(wv.left) > wv.speed_lo);
          CHECK(wv.speed_lo > kFd.lambda1(wv.right));
        } else {
          CHECK(wv.speed_lo < wv.speed_hi);
          CHECK(wv.left.rho > wv.right.rho);
        }
      } else {
        CHECK(wv.speed_lo >= 0.0);
        if (!wv.vacuum) {
          CHECK(std::abs(kFd.velocity(wv.left) - kFd.velocity(wv.right)) <= 1e-9);
        }
      }
      cur = wv.right;
    }
    CHECK(rho_waves <= 1);
    CHECK(kFd.same_state(cur, sol.waves.empty() ? um : up));
  }
}

TEST_CASE("middle density is monotone in the right density", "[road-riemann]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ur(0.0, 1.0), uw(0.5, 2.0);
  for (int k = 0; k < 5000; ++k) {
    const RoadState um{ur(rng), uw(rng)};
    const double w = uw(rng);
    double a = ur(rng), b = ur(rng);
    if (a > b) {
      std::swap(a, b);
    }
    const auto ma = gsom::middle_state(kFd, um, {a, w});
    const auto mb = gsom::middle_state(kFd, um, {b, w});
    CHECK(ma.rho <= mb.rho);
  }
}
