#include "hetsim/env.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace hetsim {

Action Action::from_raw(AgentKind kind, Vec2 move, std::span<const double> msg,
                        const WorldConfig& config) {
  Action a;
  if (kind == AgentKind::Holonomic) {
    a.move = HoloCommand(move, config.u_max);
  } else {
    a.move = DiffCommand(move.x, move.y, config.u_max);
  }
  a.msg.resize(config.d_c, 0.0);
  const std::size_t n = std::min<std::size_t>(msg.size(), config.d_c);
  for (std::size_t k = 0; k < n; ++k) a.msg[k] = std::clamp(msg[k], -1.0, 1.0);
  return a;
}

std::vector<Observation> observe(const EpisodeState& state, const WorldConfig& config) {
  return observe_all(state, config);
}

StepOutput step(EpisodeState& state, std::span<const Action> actions, const WorldConfig& config,
                RewardPreset preset) {
  const std::size_t n = state.agents.size();
  if (state.done) throw StepError("episode is done; reset before stepping again");
  if (actions.size() != n)
    throw StepError("expected " + std::to_string(n) + " actions, got " +
                    std::to_string(actions.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const bool holo = state.agents[i].kind == AgentKind::Holonomic;
    if (holo != std::holds_alternative<HoloCommand>(actions[i].move))
      throw StepError("action " + std::to_string(i) + " does not match the agent kind");
    if (static_cast<int>(actions[i].msg.size()) != config.d_c)
      throw StepError("action " + std::to_string(i) + " message has length " +
                      std::to_string(actions[i].msg.size()) + ", expected " +
                      std::to_string(config.d_c));
  }

  StepOutput out;
  const std::vector<AgentState> snapshot = state.agents;
  const std::vector<Target> targets_prev = state.targets;
  const int next_step = state.step + 1;

  // Safety filters, all against the same time-t snapshot.
  std::vector<SafeCommand> safe(n);
  out.alphas.assign(n, 1.0);
  std::vector<AgentState> others;
  others.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!config.safety_filter) {
      safe[i] = std::holds_alternative<HoloCommand>(actions[i].move)
                    ? SafeCommand(std::get<HoloCommand>(actions[i].move))
                    : SafeCommand(std::get<DiffCommand>(actions[i].move));
      continue;
    }
    others.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(snapshot[j]);
    const AgentState& ego = snapshot[i];
    const double radius = body_radius(ego.kind, config);
    const FilterResult r =
        ego.kind == AgentKind::Holonomic
            ? filter_holonomic(ego, radius, std::get<HoloCommand>(actions[i].move), others, config)
            : filter_diff_drive(ego, radius, std::get<DiffCommand>(actions[i].move), others,
                                config);
    safe[i] = r.safe_cmd;
    out.alphas[i] = r.alpha;
    if (r.intervened)
      out.events.push_back({EventKind::FilterIntervention, next_step, static_cast<int>(i), -1, -1,
                            r.alpha});
    if (r.infeasible_fallback)
      out.events.push_back({EventKind::InfeasibleFallback, next_step, static_cast<int>(i), -1,
                            -1, r.alpha});
  }

  // Integration and workspace clamp.
  for (std::size_t i = 0; i < n; ++i) {
    AgentState next = snapshot[i].kind == AgentKind::Holonomic
                          ? step_holonomic(snapshot[i], std::get<HoloCommand>(safe[i]), config)
                          : step_diff_drive(snapshot[i], std::get<DiffCommand>(safe[i]), config);
    state.agents[i] = clamp_to_workspace(next, config);
  }
  state.step = next_step;

  const std::vector<CoverageEvent> coverage = check_coverage(state, config);
  for (const CoverageEvent& c : coverage)
    out.events.push_back({EventKind::Coverage, c.step, c.agent, -1, c.target, 1.0});

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double contact =
          body_radius(state.agents[i].kind, config) + body_radius(state.agents[j].kind, config);
      if (distance(state.agents[i].pos, state.agents[j].pos) < contact)
        out.events.push_back({EventKind::Collision, next_step, static_cast<int>(i),
                              static_cast<int>(j), -1, 1.0});
    }
  }

  // Rewards.
  std::vector<std::vector<double>> messages(n);
  for (std::size_t i = 0; i < n; ++i) messages[i] = actions[i].msg;
  const RewardWeights weights = RewardWeights::from(config);
  out.terms.resize(n);
  out.rewards.resize(n);
  double comm_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int idx = static_cast<int>(i);
    RewardTerms& t = out.terms[i];
    t.dist = distance_term(state.agents[i].pos, snapshot[i].pos, state.targets, targets_prev,
                           config.distance_sign);
    t.goal = goal_term(coverage, idx, config.r_goal);
    t.coll = collision_term(idx, state.agents, config);
    t.comm = comm_term(idx, messages);
    comm_sum += t.comm;
    out.rewards[i] = total_reward(t, weights, preset);
  }
  out.comm_dissimilarity = n > 0 ? comm_sum / static_cast<double>(n) : 0.0;

  // Messages emitted now are what neighbours observe at t+1.
  state.prev_messages = std::move(messages);
  out.observations = observe_all(state, config);

  const bool all_covered =
      !state.targets.empty() &&
      std::all_of(state.targets.begin(), state.targets.end(), [](const Target& t) { return t.covered; });
  out.done = all_covered || state.step >= config.max_steps;
  state.done = out.done;
  return out;
}

namespace {

constexpr std::uint64_t kPolicyStream = 0x706f6c6963790000ULL;

const char* kind_name(AgentKind k) { return k == AgentKind::Holonomic ? "holonomic" : "diff_drive"; }

}  // namespace

std::string trajectory_line(std::uint64_t seed, const EpisodeState& state, const StepOutput& out) {
  using nlohmann::json;
  json line;
  line["seed"] = seed;
  line["step"] = state.step;
  json agents = json::array();
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    const AgentState& a = state.agents[i];
    json j;
    j["kind"] = kind_name(a.kind);
    j["pos"] = {a.pos.x, a.pos.y};
    if (a.kind == AgentKind::Holonomic) {
      j["vel"] = {a.vel.x, a.vel.y};
    } else {
      j["heading"] = a.heading;
      j["speed"] = a.speed;
      j["omega"] = a.omega;
    }
    j["alpha"] = out.alphas[i];
    j["reward"] = out.rewards[i];
    const RewardTerms& t = out.terms[i];
    j["terms"] = {{"dist", t.dist}, {"goal", t.goal}, {"coll", t.coll}, {"comm", t.comm}};
    agents.push_back(std::move(j));
  }
  line["agents"] = std::move(agents);
  json coverage = json::array();
  json collisions = json::array();
  for (const Event& e : out.events) {
    if (e.kind == EventKind::Coverage) coverage.push_back({{"target", e.target}, {"agent", e.agent}});
    if (e.kind == EventKind::Collision) collisions.push_back({e.agent, e.other});
  }
  line["coverage"] = std::move(coverage);
  line["collisions"] = std::move(collisions);
  line["done"] = out.done;
  return line.dump();
}

EpisodeMetrics run_episode(const WorldConfig& config, std::uint64_t seed, const Policy& policy,
                           int steps, bool record_trajectory) {
  EpisodeMetrics m;
  m.seed = seed;
  m.per_agent_discoveries.assign(config.n_agents(), 0);
  EpisodeState state = init_episode(config, seed);
  Rng policy_rng(splitmix64(seed ^ kPolicyStream));

  CommGraph graph;
  std::vector<Observation> obs = observe_all(state, config, &graph);
  std::vector<Action> actions(state.agents.size());
  double comm_total = 0.0;
  int covered = 0;

  for (int t = 0; t < steps && !state.done; ++t) {
    const PolicyContext ctx{state, config, obs, graph};
    const std::vector<PolicyOutput> outputs = policy.act(ctx, policy_rng);
    for (std::size_t i = 0; i < actions.size(); ++i)
      actions[i] = Action::from_raw(state.agents[i].kind, outputs[i].move, outputs[i].msg, config);

    StepOutput out = step(state, actions, config);
    ++m.env_steps;
    comm_total += out.comm_dissimilarity;
    for (const Event& e : out.events) {
      switch (e.kind) {
        case EventKind::Coverage:
          ++covered;
          ++m.per_agent_discoveries[e.agent];
          break;
        case EventKind::Collision: ++m.collision_count; break;
        case EventKind::FilterIntervention: ++m.filter_intervention_count; break;
        case EventKind::InfeasibleFallback: ++m.infeasible_fallback_count; break;
      }
    }
    m.targets_acquired_by_step.push_back(covered);
    if (covered > 0 && m.steps_to_first < 0) m.steps_to_first = state.step;
    if (config.n_t > 0 && covered == config.n_t && m.steps_to_all < 0) m.steps_to_all = state.step;
    if (record_trajectory) {
      m.trajectory += trajectory_line(seed, state, out);
      m.trajectory += '\n';
    }
    obs = std::move(out.observations);
    graph = build_graph(state.agents, config);
  }
  m.targets_final = covered;
  while (static_cast<int>(m.targets_acquired_by_step.size()) < steps)
    m.targets_acquired_by_step.push_back(covered);
  m.mean_comm_dissimilarity = m.env_steps > 0 ? comm_total / m.env_steps : 0.0;
  return m;
}

std::vector<EpisodeMetrics> run_batch(std::span<const EpisodeJob> jobs, const Policy& policy,
                                      int steps, int parallelism, bool record_trajectory) {
  std::vector<EpisodeMetrics> results(jobs.size());
  if (jobs.empty()) return results;
  const int workers = std::clamp<int>(parallelism, 1, static_cast<int>(jobs.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size() && !failed; k = next++) {
      try {
        results[k] = run_episode(jobs[k].config, jobs[k].seed, policy, steps, record_trajectory);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<EpisodeMetrics> run_batch(const WorldConfig& config,
                                      std::span<const std::uint64_t> seeds, const Policy& policy,
                                      int steps, int parallelism, bool record_trajectory) {
  std::vector<EpisodeJob> jobs;
  jobs.reserve(seeds.size());
  for (std::uint64_t s : seeds) jobs.push_back({config, s});
  return run_batch(jobs, policy, steps, parallelism, record_trajectory);
}

std::string metrics_csv_header(int n_agents) {
  std::string h =
      "seed,targets_final,steps_to_first,steps_to_all,collisions,interventions,"
      "infeasible_fallbacks";
  for (int i = 0; i < n_agents; ++i) h += ",agent" + std::to_string(i) + "_disc";
  return h;
}

void write_metrics_csv(std::ostream& out, std::span<const EpisodeMetrics> metrics, int n_agents) {
  out << metrics_csv_header(n_agents) << '\n';
  for (const EpisodeMetrics& m : metrics) {
    out << m.seed << ',' << m.targets_final << ',' << m.steps_to_first << ',' << m.steps_to_all
        << ',' << m.collision_count << ',' << m.filter_intervention_count << ','
        << m.infeasible_fallback_count;
    for (int i = 0; i < n_agents; ++i) out << ',' << m.per_agent_discoveries[i];
    out << '\n';
  }
}

}  // namespace hetsim
