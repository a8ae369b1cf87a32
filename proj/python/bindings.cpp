#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "hetsim/env.hpp"
#include "hetsim/policy.hpp"

namespace py = pybind11;
using namespace hetsim;

namespace {

constexpr const char* kApiVersion = "1.0.0";

// Engine-owned episode plus the scenario it runs under.
struct EnvHandle {
  WorldConfig config;
  RewardPreset preset = RewardPreset::R4;
  std::optional<EpisodeState> state;
  bool closed = false;

  void require_open() const {
    if (closed) throw std::runtime_error("environment handle is closed");
  }
  EpisodeState& require_state() {
    require_open();
    if (!state) throw std::runtime_error("environment has not been reset");
    return *state;
  }
};

WorldConfig config_from(const std::optional<std::string>& path) {
  return path ? load_config(*path) : WorldConfig{};
}

int action_width(const WorldConfig& c) { return 2 + c.d_c; }

py::list observations_to_py(const std::vector<Observation>& obs) {
  py::list out;
  for (const auto& o : obs) out.append(py::cast(o.flatten()));
  return out;
}

// Accepts a flat array of n * (2 + d_c) values or an (n, 2 + d_c) array.
std::vector<Action> actions_from(const EpisodeState& state, const WorldConfig& config,
                                 const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  const std::size_t n = state.agents.size();
  const std::size_t width = action_width(config);
  const std::string expect = "expected actions of width " + std::to_string(width) +
                             " per agent (2 move + " + std::to_string(config.d_c) +
                             " message) for " + std::to_string(n) + " agents";
  if (arr.ndim() == 2) {
    if (static_cast<std::size_t>(arr.shape(0)) != n ||
        static_cast<std::size_t>(arr.shape(1)) != width)
      throw py::value_error(expect + ", got shape (" + std::to_string(arr.shape(0)) + ", " +
                            std::to_string(arr.shape(1)) + ")");
  } else if (arr.ndim() == 1) {
    if (static_cast<std::size_t>(arr.shape(0)) != n * width)
      throw py::value_error(expect + " (flat length " + std::to_string(n * width) + "), got " +
                            std::to_string(arr.shape(0)) + " values");
  } else {
    throw py::value_error(expect + ", got an array with " + std::to_string(arr.ndim()) +
                          " dimensions");
  }
  const double* data = arr.data();
  std::vector<Action> actions;
  actions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = data + i * width;
    actions.push_back(Action::from_raw(state.agents[i].kind, {row[0], row[1]},
                                       std::span<const double>(row + 2, config.d_c), config));
  }
  return actions;
}

const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::Coverage:
      return "coverage";
    case EventKind::Collision:
      return "collision";
    case EventKind::FilterIntervention:
      return "filter_intervention";
    case EventKind::InfeasibleFallback:
      return "infeasible_fallback";
  }
  return "unknown";
}

py::dict info_from(const StepOutput& out, const EpisodeState& state) {
  py::list terms;
  for (const auto& t : out.terms) terms.append(py::make_tuple(t.dist, t.goal, t.coll, t.comm));
  py::list events;
  for (const auto& e : out.events) {
    py::dict d;
    d["kind"] = event_name(e.kind);
    d["step"] = e.step;
    d["agent"] = e.agent;
    d["other"] = e.other;
    d["target"] = e.target;
    d["alpha"] = e.alpha;
    events.append(d);
  }
  py::list positions;
  for (const auto& a : state.agents) positions.append(py::make_tuple(a.pos.x, a.pos.y));
  py::dict info;
  info["step"] = state.step;
  info["terms"] = terms;
  info["alphas"] = out.alphas;
  info["events"] = events;
  info["comm_dissimilarity"] = out.comm_dissimilarity;
  info["positions"] = positions;
  return info;
}

py::tuple do_step(EnvHandle& env,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>& actions) {
  EpisodeState& state = env.require_state();
  const std::vector<Action> acts = actions_from(state, env.config, actions);
  const StepOutput out = step(state, acts, env.config, env.preset);
  return py::make_tuple(observations_to_py(out.observations), py::cast(out.rewards), out.done,
                        info_from(out, state));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native engine of the hetsim simulator";
  m.attr("API_VERSION") = kApiVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<StepError>(m, "StepError", PyExc_RuntimeError);
  py::register_exception<WeightsError>(m, "WeightsError", PyExc_ValueError);

  py::enum_<RewardPreset>(m, "Preset")
      .value("R1", RewardPreset::R1)
      .value("R2", RewardPreset::R2)
      .value("R3", RewardPreset::R3)
      .value("R4", RewardPreset::R4);

  m.def("preset", &parse_preset, py::arg("name"), "Reward preset from its name R1..R4");

  py::class_<EnvHandle>(m, "Env")
      .def_property_readonly("closed", [](const EnvHandle& e) { return e.closed; })
      .def_property_readonly("n_agents", [](const EnvHandle& e) { return e.config.n_agents(); })
      .def_property_readonly("action_width", [](const EnvHandle& e) { return action_width(e.config); })
      .def_property_readonly("observation_widths",
                             [](const EnvHandle& e) {
                               std::vector<int> w;
                               for (int i = 0; i < e.config.n_agents(); ++i)
                                 w.push_back(observation_width(
                                     i < e.config.n_h ? AgentKind::Holonomic : AgentKind::DiffDrive,
                                     e.config));
                               return w;
                             })
      .def_property(
          "preset", [](const EnvHandle& e) { return e.preset; },
          [](EnvHandle& e, RewardPreset p) {
            e.require_open();
            e.preset = p;
          })
      .def("config_text", [](const EnvHandle& e) { return format_config(e.config); });

  m.def(
      "make_env",
      [](std::optional<std::string> config_path, std::optional<RewardPreset> preset) {
        EnvHandle env;
        env.config = config_from(config_path);
        env.preset = preset.value_or(env.config.preset);
        return env;
      },
      py::arg("config_path") = py::none(), py::arg("preset") = py::none(),
      "Environment handle for a scenario file (defaults when omitted)");

  m.def(
      "reset",
      [](EnvHandle& env, std::uint64_t seed) {
        env.require_open();
        env.state = init_episode(env.config, seed);
        return observations_to_py(observe(*env.state, env.config));
      },
      py::arg("env"), py::arg("seed"), "Start a new episode; returns flattened observations");

  m.def("step", &do_step, py::arg("env"), py::arg("actions"),
        "Advance one step; returns (observations, rewards, done, info)");

  m.def(
      "close",
      [](EnvHandle& env) {
        env.require_open();
        env.state.reset();
        env.closed = true;
      },
      py::arg("env"));

  m.def(
      "native_rollout",
      [](std::optional<std::string> config_path, std::uint64_t seed,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& actions,
         std::optional<RewardPreset> preset) {
        // Drives the engine entirely in native code for equivalence checks.
        const WorldConfig config = config_from(config_path);
        const RewardPreset p = preset.value_or(config.preset);
        EpisodeState state = init_episode(config, seed);
        const std::size_t row = static_cast<std::size_t>(config.n_agents()) * action_width(config);
        if (actions.ndim() != 2 || static_cast<std::size_t>(actions.shape(1)) != row)
          throw py::value_error("expected a (steps, " + std::to_string(row) + ") action array");
        std::vector<std::vector<double>> rewards;
        std::vector<std::vector<double>> positions;
        for (py::ssize_t t = 0; t < actions.shape(0) && !state.done; ++t) {
          const double* base = actions.data() + t * row;
          std::vector<Action> acts;
          for (int i = 0; i < config.n_agents(); ++i) {
            const double* a = base + static_cast<std::size_t>(i) * action_width(config);
            acts.push_back(Action::from_raw(state.agents[i].kind, {a[0], a[1]},
                                            std::span<const double>(a + 2, config.d_c), config));
          }
          const StepOutput out = step(state, acts, config, p);
          rewards.push_back(out.rewards);
          std::vector<double> pos;
          for (const auto& ag : state.agents) {
            pos.push_back(ag.pos.x);
            pos.push_back(ag.pos.y);
          }
          positions.push_back(pos);
        }
        return py::make_tuple(rewards, positions);
      },
      py::arg("config_path"), py::arg("seed"), py::arg("actions"), py::arg("preset") = py::none(),
      "Native rollout of a fixed action sequence; returns (rewards, positions) per step");

  m.def(
      "run_batch",
      [](std::optional<std::string> config_path, std::vector<std::uint64_t> seeds,
         const std::string& policy, int steps, int jobs) {
        const WorldConfig config = config_from(config_path);
        const auto pol = make_policy(policy);
        std::vector<EpisodeMetrics> metrics;
        {
          py::gil_scoped_release release;
          metrics = run_batch(config, seeds, *pol, steps, jobs);
        }
        py::list out;
        for (const auto& em : metrics) {
          py::dict d;
          d["seed"] = em.seed;
          d["targets_final"] = em.targets_final;
          d["targets_acquired_by_step"] = em.targets_acquired_by_step;
          d["steps_to_first"] = em.steps_to_first;
          d["steps_to_all"] = em.steps_to_all;
          d["per_agent_discoveries"] = em.per_agent_discoveries;
          d["collisions"] = em.collision_count;
          d["interventions"] = em.filter_intervention_count;
          d["infeasible_fallbacks"] = em.infeasible_fallback_count;
          d["mean_comm_dissimilarity"] = em.mean_comm_dissimilarity;
          d["env_steps"] = em.env_steps;
          out.append(d);
        }
        return out;
      },
      py::arg("config_path") = py::none(), py::arg("seeds"), py::arg("policy") = "greedy",
      py::arg("steps") = 100, py::arg("jobs") = 1,
      "Batch of scripted-policy episodes; returns one metrics dict per seed");
}
