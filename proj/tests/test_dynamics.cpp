#include <doctest.h>

#include <cmath>

#include "hetsim/dynamics.hpp"

using namespace hetsim;

TEST_CASE("commands are clipped on construction") {
  const HoloCommand h({3.0, -2.0}, 1.0);
  CHECK(h.force == Vec2{1.0, -1.0});
  const DiffCommand d(10.0, -0.5, 1.0);
  CHECK(d.lin == 1.0);
  CHECK(d.ang == -0.5);
}

TEST_CASE("holonomic update examples") {
  const WorldConfig c;
  {
    const auto s = step_holonomic(AgentState::holonomic({0, 0}), HoloCommand({0, 0}, 1), c);
    CHECK(s.pos == Vec2{0, 0});
    CHECK(s.vel == Vec2{0, 0});
  }
  {
    const auto s =
        step_holonomic(AgentState::holonomic({0, 0}, {1, 0}), HoloCommand({1, 0}, 1), c);
    CHECK(s.pos.x == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s.pos.y == 0.0);
    CHECK(s.vel.x == doctest::Approx(1.075).epsilon(1e-15));
    CHECK(s.vel.y == 0.0);
  }
  {
    const auto s =
        step_holonomic(AgentState::holonomic({0, 0}, {2, 0}), HoloCommand({0, 0}, 1), c);
    CHECK(s.pos.x == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.vel.x == doctest::Approx(1.95).epsilon(1e-15));
  }
}

TEST_CASE("holonomic velocity is clamped per axis after the update") {
  WorldConfig c;
  c.c_d = 0.0;
  const auto s =
      step_holonomic(AgentState::holonomic({0, 0}, {9.95, -9.95}), HoloCommand({1, -1}, 1), c);
  CHECK(s.pos.x == doctest::Approx(0.995));
  CHECK(s.vel.x == 10.0);
  CHECK(s.vel.y == -10.0);
}

TEST_CASE("diff-drive examples") {
  const WorldConfig c;
  {
    const auto s = step_diff_drive(AgentState::diff_drive({0, 0}, 0), DiffCommand(1, 0, 1), c);
    CHECK(s.pos.x == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(std::abs(s.pos.y) < 1e-15);
    CHECK(s.heading == 0.0);
  }
  {
    const auto s = step_diff_drive(AgentState::diff_drive({0, 0}, 0), DiffCommand(0, 1, 1), c);
    CHECK(s.pos == Vec2{0, 0});
    CHECK(s.heading == doctest::Approx(0.1).epsilon(1e-14));
  }
  {
    const auto s = step_diff_drive(AgentState::diff_drive({0, 0}, 0), DiffCommand(1, 1, 1), c);
    CHECK(std::abs(s.pos.x - std::sin(0.1)) < 1e-9);
    CHECK(std::abs(s.pos.y - (1 - std::cos(0.1))) < 1e-9);
    CHECK(std::abs(s.pos.x - 0.0998334) < 1e-7);
    CHECK(std::abs(s.pos.y - 0.0049958) < 1e-7);
    CHECK(s.speed == 1.0);
    CHECK(s.omega == 1.0);
  }
}

TEST_CASE("diff-drive heading stays wrapped") {
  const WorldConfig c;
  auto s = AgentState::diff_drive({5, 5}, M_PI - 0.01);
  s = step_diff_drive(s, DiffCommand(0, 1, 1), c);
  CHECK(s.heading > -M_PI);
  CHECK(s.heading <= M_PI);
  CHECK(s.heading == doctest::Approx(-M_PI + 0.09).epsilon(1e-12));
}

TEST_CASE("RK4 error shrinks sixteenfold when the substep halves") {
  const double T = 2.0;
  auto err = [&](int n) {
    const Pose p = integrate_unicycle({{0, 0}, 0}, 1.0, 1.0, T, n);
    return std::hypot(p.pos.x - std::sin(T), p.pos.y - (1 - std::cos(T)));
  };
  for (int n : {2, 4, 8}) {
    const double ratio = err(n) / err(2 * n);
    CHECK(ratio >= 12.8);
    CHECK(ratio <= 19.2);
  }
}

TEST_CASE("substep positions end at the full-step pose") {
  const auto pts = unicycle_substep_positions({{1, 2}, 0.3}, 0.8, -0.4, 0.1);
  const Pose end = integrate_unicycle({{1, 2}, 0.3}, 0.8, -0.4, 0.1, kDiffDriveSubsteps);
  CHECK(pts.back() == end.pos);
  const auto straight = unicycle_substep_positions({{2, 0}, 0}, 1.0, 0.0, 0.1);
  for (int k = 0; k < kDiffDriveSubsteps; ++k)
    CHECK(straight[k].x == doctest::Approx(2.0 + 0.02 * (k + 1)).epsilon(1e-14));
}

TEST_CASE("workspace clamp zeroes the offending component") {
  const WorldConfig c;
  const auto h = clamp_to_workspace(AgentState::holonomic({-0.2, 5}, {-1, 2}), c);
  CHECK(h.pos == Vec2{0, 5});
  CHECK(h.vel == Vec2{0, 2});
  const auto d = clamp_to_workspace(AgentState::diff_drive({10.3, 5}, 0, 1.0, 0.2), c);
  CHECK(d.pos == Vec2{10, 5});
  CHECK(d.speed == 0.0);
  const auto inside = AgentState::holonomic({3, 3}, {1, 1});
  CHECK(clamp_to_workspace(inside, c) == inside);
}
