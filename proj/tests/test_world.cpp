#include <doctest.h>

#include <cmath>

#include "hetsim/world.hpp"

using namespace hetsim;

TEST_CASE("default config carries the reference scenario values") {
  const WorldConfig c;
  CHECK(c.n_h == 2);
  CHECK(c.n_d == 1);
  CHECK(c.n_t == 3);
  CHECK(c.d == 10.0);
  CHECK(c.r_h == 0.5);
  CHECK(c.r_d == 0.5);
  CHECK(c.r_h_l == 3.0);
  CHECK(c.r_d_l == 1.5);
  CHECK(c.n_l == 16);
  CHECK(c.rho_cov == 1.5);
  CHECK(c.d_safe == 0.05);
  CHECK(c.r_c == 4.5);
  CHECK(c.d_c == 16);
  CHECK(c.m_mass == 1.0);
  CHECK(c.dt == 0.1);
  CHECK(c.c_d == 0.25);
  CHECK(c.u_max == 1.0);
  CHECK(c.v_max == 10.0);
  CHECK(c.w_dist == 1.0);
  CHECK(c.w_goal == 1.0);
  CHECK(c.w_coll == 1.0);
  CHECK(c.w_comm == 0.1);
  CHECK(c.r_goal == 10.0);
  CHECK(c.r_coll == -8.0);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config parser round-trips the formatted defaults") {
  const WorldConfig c;
  const WorldConfig back = parse_config(format_config(c));
  CHECK(format_config(back) == format_config(c));
}

TEST_CASE("config parser reads values, comments and quoted strings") {
  const WorldConfig c = parse_config(
      "# scenario\n"
      "n_h = 3   # more drones\n"
      "d = 12.5\n"
      "preset = \"R2\"\n"
      "distance_sign = \"literal\"\n"
      "safety_filter = false\n"
      "fallback = \"drift\"\n");
  CHECK(c.n_h == 3);
  CHECK(c.d == 12.5);
  CHECK(c.preset == RewardPreset::R2);
  CHECK(c.distance_sign == DistanceSign::Literal);
  CHECK_FALSE(c.safety_filter);
  CHECK(c.fallback == FallbackMode::Drift);
}

TEST_CASE("config parser rejects bad input") {
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_h = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_h = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just text\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("preset = \"R9\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dt = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_l = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("u_max = 20\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.toml"), ConfigError);
}

TEST_CASE("preset names") {
  CHECK(parse_preset("R1") == RewardPreset::R1);
  CHECK(parse_preset("R4") == RewardPreset::R4);
  CHECK(to_string(RewardPreset::R3) == "R3");
  CHECK_THROWS_AS(parse_preset("R9"), ConfigError);
}

TEST_CASE("init_episode is deterministic per seed") {
  const WorldConfig c;
  CHECK(init_episode(c, 42) == init_episode(c, 42));
  CHECK_FALSE(init_episode(c, 42) == init_episode(c, 43));
}

TEST_CASE("init_episode honours team layout and spawn constraints") {
  const WorldConfig c;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const EpisodeState s = init_episode(c, seed);
    REQUIRE(s.agents.size() == 3);
    REQUIRE(s.targets.size() == 3);
    CHECK(s.agents[0].kind == AgentKind::Holonomic);
    CHECK(s.agents[1].kind == AgentKind::Holonomic);
    CHECK(s.agents[2].kind == AgentKind::DiffDrive);
    CHECK(s.step == 0);
    CHECK_FALSE(s.done);
    for (const auto& t : s.targets) {
      CHECK(t.pos.x >= 0.0);
      CHECK(t.pos.x <= c.d);
      CHECK(t.pos.y >= 0.0);
      CHECK(t.pos.y <= c.d);
      CHECK_FALSE(t.covered);
    }
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const auto& a = s.agents[i];
      CHECK(a.pos.x >= 0.0);
      CHECK(a.pos.x <= c.d);
      CHECK(a.pos.y >= 0.0);
      CHECK(a.pos.y <= c.d);
      CHECK(a.vel == Vec2{});
      CHECK(a.speed == 0.0);
      CHECK(a.heading > -M_PI);
      CHECK(a.heading <= M_PI);
      for (const auto& t : s.targets) CHECK(distance(a.pos, t.pos) > c.rho_cov);
      for (std::size_t j = i + 1; j < s.agents.size(); ++j)
        CHECK(distance(a.pos, s.agents[j].pos) >=
              body_radius(a.kind, c) + body_radius(s.agents[j].kind, c));
    }
    REQUIRE(s.prev_messages.size() == 3);
    for (const auto& m : s.prev_messages) {
      CHECK(m.size() == 16);
      for (double x : m) CHECK(x == 0.0);
    }
  }
}

TEST_CASE("init_episode fails when bodies cannot fit") {
  WorldConfig c;
  c.d = 0.1;
  CHECK_THROWS_AS(init_episode(c, 1), ConfigError);
}

namespace {
EpisodeState one_agent_one_target(Vec2 agent, Vec2 target) {
  EpisodeState s;
  s.agents = {AgentState::holonomic(agent)};
  Target t;
  t.pos = target;
  s.targets = {t};
  return s;
}
}  // namespace

TEST_CASE("coverage threshold is inclusive") {
  const WorldConfig c;
  {
    auto s = one_agent_one_target({0, 0}, {0, 1.4});
    const auto ev = check_coverage(s, c);
    CHECK(ev.size() == 1);
    CHECK(s.targets[0].covered);
  }
  {
    auto s = one_agent_one_target({0, 0}, {0, 1.5});
    check_coverage(s, c);
    CHECK(s.targets[0].covered);
  }
  {
    auto s = one_agent_one_target({0, 0}, {0, 1.5000001});
    CHECK(check_coverage(s, c).empty());
    CHECK_FALSE(s.targets[0].covered);
  }
}

TEST_CASE("coverage credits the closest agent and stays covered") {
  const WorldConfig c;
  EpisodeState s;
  s.step = 4;
  s.agents = {AgentState::holonomic({0, 0}), AgentState::holonomic({0, 2})};
  Target t;
  t.pos = {0, 1.2};
  s.targets = {t};
  const auto ev = check_coverage(s, c);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].agent == 1);
  CHECK(ev[0].step == 4);
  CHECK(s.targets[0].covered_by == 1);
  CHECK(s.targets[0].covered_at == 4);
  s.agents[0].pos = {50, 50};
  s.agents[1].pos = {50, 50};
  CHECK(check_coverage(s, c).empty());
  CHECK(s.targets[0].covered);
  CHECK(s.targets[0].covered_at == 4);
}

TEST_CASE("coverage ties go to the lowest index") {
  const WorldConfig c;
  EpisodeState s;
  s.agents = {AgentState::holonomic({-1, 0}), AgentState::holonomic({1, 0})};
  Target t;
  s.targets = {t};
  const auto ev = check_coverage(s, c);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].agent == 0);
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
  CHECK(AgentState::diff_drive({0, 0}, 7.0).heading == doctest::Approx(7.0 - 2 * M_PI));
}
