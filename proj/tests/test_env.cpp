#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hetsim/env.hpp"

using namespace hetsim;

namespace {

std::vector<Action> zero_actions(const EpisodeState& s, const WorldConfig& c) {
  std::vector<Action> a;
  const std::vector<double> msg(c.d_c, 0.0);
  for (const auto& ag : s.agents) a.push_back(Action::from_raw(ag.kind, {0, 0}, msg, c));
  return a;
}

std::vector<Action> random_actions(const EpisodeState& s, const WorldConfig& c, Rng& rng) {
  std::vector<Action> a;
  for (const auto& ag : s.agents) {
    std::vector<double> msg(c.d_c);
    for (double& m : msg) m = rng.uniform(-1, 1);
    a.push_back(Action::from_raw(
        ag.kind, {rng.uniform(-c.u_max, c.u_max), rng.uniform(-c.u_max, c.u_max)}, msg, c));
  }
  return a;
}

}  // namespace

TEST_CASE("raw actions are clipped") {
  const WorldConfig c;
  const std::vector<double> msg{2.0, -3.0, 0.5};
  const Action a = Action::from_raw(AgentKind::Holonomic, {5, -5}, msg, c);
  CHECK(std::get<HoloCommand>(a.move).force == Vec2{1, -1});
  REQUIRE(a.msg.size() == 16);
  CHECK(a.msg[0] == 1.0);
  CHECK(a.msg[1] == -1.0);
  CHECK(a.msg[2] == 0.5);
  const Action d = Action::from_raw(AgentKind::DiffDrive, {5, -0.3}, msg, c);
  CHECK(std::get<DiffCommand>(d.move).lin == 1.0);
  CHECK(std::get<DiffCommand>(d.move).ang == -0.3);
}

TEST_CASE("zero actions keep a resting team in place") {
  const WorldConfig c;
  EpisodeState s = init_episode(c, 42);
  const auto before = s.agents;
  const auto out = step(s, zero_actions(s, c), c);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(s.agents[i].pos == before[i].pos);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(out.terms[i].dist == 0.0);
    CHECK(out.terms[i].goal == 0.0);
    CHECK(out.terms[i].coll == 0.0);
  }
  CHECK(s.step == 1);
}

TEST_CASE("reward breakdown recombines to the scalar") {
  const WorldConfig c;
  Rng rng(2);
  for (auto preset : {RewardPreset::R1, RewardPreset::R2, RewardPreset::R3, RewardPreset::R4}) {
    EpisodeState s = init_episode(c, 9);
    for (int t = 0; t < 50 && !s.done; ++t) {
      const auto out = step(s, random_actions(s, c, rng), c, preset);
      for (std::size_t i = 0; i < out.rewards.size(); ++i)
        CHECK(std::abs(out.rewards[i] -
                       total_reward(out.terms[i], RewardWeights::from(c), preset)) < 1e-12);
    }
  }
}

TEST_CASE("a target one metre away is covered on the first step") {
  WorldConfig c;
  c.n_h = 1;
  c.n_d = 0;
  c.n_t = 1;
  EpisodeState s = init_episode(c, 1);
  s.agents[0].pos = {5, 5};
  s.targets[0].pos = {6, 5};
  const std::vector<double> msg(c.d_c, 0.0);
  const std::vector<Action> a{Action::from_raw(AgentKind::Holonomic, {1, 0}, msg, c)};
  const auto out = step(s, a, c);
  CHECK(s.targets[0].covered);
  CHECK(s.targets[0].covered_at == 1);
  CHECK(out.terms[0].goal == 10.0);
  CHECK(out.done);
  bool saw = false;
  for (const auto& e : out.events) saw = saw || e.kind == EventKind::Coverage;
  CHECK(saw);
}

TEST_CASE("head-on holonomic agents never overlap with the filter on") {
  WorldConfig c;
  c.n_h = 2;
  c.n_d = 0;
  c.n_t = 1;
  EpisodeState s = init_episode(c, 1);
  s.agents[0] = AgentState::holonomic({3.5, 5});
  s.agents[1] = AgentState::holonomic({6.5, 5});
  s.targets[0].pos = {0.2, 0.2};
  const std::vector<double> msg(c.d_c, 0.0);
  int overlaps = 0;
  for (int t = 0; t < 100 && !s.done; ++t) {
    const std::vector<Action> a{Action::from_raw(AgentKind::Holonomic, {1, 0}, msg, c),
                                Action::from_raw(AgentKind::Holonomic, {-1, 0}, msg, c)};
    const auto out = step(s, a, c);
    for (const auto& e : out.events) overlaps += e.kind == EventKind::Collision;
    CHECK(distance(s.agents[0].pos, s.agents[1].pos) >= 1.0);
  }
  CHECK(overlaps == 0);
}

TEST_CASE("done latches and further steps are rejected") {
  WorldConfig c;
  c.max_steps = 3;
  EpisodeState s = init_episode(c, 5);
  for (int t = 0; t < 3; ++t) step(s, zero_actions(s, c), c);
  CHECK(s.done);
  const EpisodeState frozen = s;
  CHECK_THROWS_AS(step(s, zero_actions(s, c), c), StepError);
  CHECK(s == frozen);
}

TEST_CASE("malformed action lists are rejected") {
  const WorldConfig c;
  EpisodeState s = init_episode(c, 5);
  auto a = zero_actions(s, c);
  a.pop_back();
  CHECK_THROWS_AS(step(s, a, c), StepError);
  a = zero_actions(s, c);
  std::swap(a[0], a[2]);
  CHECK_THROWS_AS(step(s, a, c), StepError);
  a = zero_actions(s, c);
  a[1].msg.resize(3);
  CHECK_THROWS_AS(step(s, a, c), StepError);
  CHECK(s.step == 0);
}

TEST_CASE("observations carry only the previous step's messages") {
  WorldConfig c;
  c.r_c = 100.0;  // everyone hears everyone
  EpisodeState s = init_episode(c, 8);
  auto a = zero_actions(s, c);
  a[1].msg[3] = 0.8;
  a[2].msg[3] = 0.4;
  const auto out = step(s, a, c);
  // Agent 0 hears the mean of agents 1 and 2 from the step just taken.
  CHECK(out.observations[0].msg[3] == doctest::Approx(0.6));
  const auto out2 = step(s, zero_actions(s, c), c);
  CHECK(out2.observations[0].msg[3] == 0.0);
  // A fresh episode starts from silence.
  for (const auto& o : observe(init_episode(c, 8), c))
    for (double m : o.msg) CHECK(m == 0.0);
}

TEST_CASE("identical seeds and actions give identical trajectories") {
  const WorldConfig c;
  EpisodeState a = init_episode(c, 77), b = init_episode(c, 77);
  Rng ra(1), rb(1);
  for (int t = 0; t < 100 && !a.done; ++t) {
    step(a, random_actions(a, c, ra), c);
    step(b, random_actions(b, c, rb), c);
    REQUIRE(a == b);
  }
}

TEST_CASE("coverage is monotone and metrics are consistent") {
  const WorldConfig c;
  const GreedyPolicy greedy;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EpisodeMetrics m = run_episode(c, seed, greedy, 100);
    REQUIRE(m.targets_acquired_by_step.size() == 100);
    for (std::size_t k = 1; k < m.targets_acquired_by_step.size(); ++k)
      CHECK(m.targets_acquired_by_step[k] >= m.targets_acquired_by_step[k - 1]);
    CHECK(m.targets_final == m.targets_acquired_by_step.back());
    CHECK(m.targets_final <= 3);
    int discoveries = 0;
    for (int d : m.per_agent_discoveries) discoveries += d;
    CHECK(discoveries == m.targets_final);
    if (m.targets_final > 0) CHECK(m.steps_to_first >= 1);
    if (m.targets_final == 3) CHECK(m.steps_to_all >= m.steps_to_first);
  }
}

TEST_CASE("batches are independent of the worker count") {
  const WorldConfig c;
  const RandomPolicy random;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 24; ++s) seeds.push_back(100 + s);
  const auto serial = run_batch(c, seeds, random, 100, 1, true);
  const auto parallel = run_batch(c, seeds, random, 100, 8, true);
  std::ostringstream a, b;
  write_metrics_csv(a, serial, 3);
  write_metrics_csv(b, parallel, 3);
  CHECK(a.str() == b.str());
  for (std::size_t k = 0; k < serial.size(); ++k) CHECK(serial[k].trajectory == parallel[k].trajectory);
  CHECK(run_batch(c, std::span<const std::uint64_t>{}, random, 100, 4).empty());
}

TEST_CASE("metrics CSV layout") {
  CHECK(metrics_csv_header(3) ==
        "seed,targets_final,steps_to_first,steps_to_all,collisions,interventions,"
        "infeasible_fallbacks,agent0_disc,agent1_disc,agent2_disc");
  std::ostringstream out;
  write_metrics_csv(out, {}, 3);
  CHECK(out.str() == metrics_csv_header(3) + "\n");
}

TEST_CASE("trajectory lines are one JSON object per step") {
  const WorldConfig c;
  const auto m = run_episode(c, 3, GreedyPolicy{}, 10, true);
  int lines = 0;
  std::istringstream in(m.trajectory);
  for (std::string line; std::getline(in, line);) {
    CHECK(line.front() == '{');
    CHECK(line.back() == '}');
    ++lines;
  }
  CHECK(lines == m.env_steps);
}
