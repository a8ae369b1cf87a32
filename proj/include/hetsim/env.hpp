#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hetsim/commgraph.hpp"
#include "hetsim/dynamics.hpp"
#include "hetsim/policy.hpp"
#include "hetsim/reward.hpp"
#include "hetsim/safety.hpp"
#include "hetsim/world.hpp"

namespace hetsim {

class StepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Action {
  std::variant<HoloCommand, DiffCommand> move;
  std::vector<double> msg;  // d_c entries in [-1, 1]

  // Builds a kind-matching action from a raw move pair, clipping the move
  // to [-u_max, u_max] and the message to [-1, 1].
  static Action from_raw(AgentKind kind, Vec2 move, std::span<const double> msg,
                         const WorldConfig& config);
};

enum class EventKind { Coverage, Collision, FilterIntervention, InfeasibleFallback };

struct Event {
  EventKind kind;
  int step = 0;    // step index after the transition
  int agent = -1;  // covering agent, first agent of a pair, or filtered agent
  int other = -1;  // second agent of a collision pair
  int target = -1;
  double alpha = 1.0;
};

struct StepOutput {
  std::vector<Observation> observations;
  std::vector<double> rewards;
  std::vector<RewardTerms> terms;  // unmasked
  std::vector<double> alphas;
  bool done = false;
  std::vector<Event> events;
  double comm_dissimilarity = 0.0;  // mean comm term over agents
};

// Observations of a freshly initialised (or current) episode state.
std::vector<Observation> observe(const EpisodeState& state, const WorldConfig& config);

// Advances the episode by one transition:
//   filters against the time-t snapshot, integration, workspace clamp,
//   coverage, rewards from the (t, t+1) pair, then observations at t+1
//   carrying the messages emitted in this step.
StepOutput step(EpisodeState& state, std::span<const Action> actions, const WorldConfig& config,
                RewardPreset preset);
inline StepOutput step(EpisodeState& state, std::span<const Action> actions,
                       const WorldConfig& config) {
  return step(state, actions, config, config.preset);
}

struct EpisodeMetrics {
  std::uint64_t seed = 0;
  std::vector<int> targets_acquired_by_step;  // cumulative, one entry per step
  int targets_final = 0;
  int steps_to_first = -1;  // -1 when never reached
  int steps_to_all = -1;
  std::vector<int> per_agent_discoveries;
  int collision_count = 0;  // overlapping pairs summed over steps
  int filter_intervention_count = 0;
  int infeasible_fallback_count = 0;
  double mean_comm_dissimilarity = 0.0;
  int env_steps = 0;
  std::string trajectory;  // JSONL, filled only when recording
};

struct EpisodeJob {
  WorldConfig config;
  std::uint64_t seed = 0;
};

// Runs one episode for at most `steps` transitions (stopping early when
// done). The cumulative acquisition series is padded to `steps` entries.
EpisodeMetrics run_episode(const WorldConfig& config, std::uint64_t seed, const Policy& policy,
                           int steps, bool record_trajectory = false);

// Episodes run in parallel across `parallelism` workers; results are in job
// order and identical to serial execution.
std::vector<EpisodeMetrics> run_batch(std::span<const EpisodeJob> jobs, const Policy& policy,
                                      int steps, int parallelism,
                                      bool record_trajectory = false);
std::vector<EpisodeMetrics> run_batch(const WorldConfig& config,
                                      std::span<const std::uint64_t> seeds,
                                      const Policy& policy, int steps, int parallelism,
                                      bool record_trajectory = false);

std::string metrics_csv_header(int n_agents);
void write_metrics_csv(std::ostream& out, std::span<const EpisodeMetrics> metrics, int n_agents);

// One JSON object per step.
std::string trajectory_line(std::uint64_t seed, const EpisodeState& state,
                            const StepOutput& out);

}  // namespace hetsim
