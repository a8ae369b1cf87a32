// hetsim - scenario runner and filter verification harness.
//
//   hetsim run [--config FILE] [--episodes N] [--steps N] [--seed S]
//              [--preset R1|R2|R3|R4] [--policy greedy|random|weights:PATH]
//              [--filter on|off] [--metrics CSV] [--traj JSONL] [--curve CSV]
//              [--jobs N]
//   hetsim fuzz-filter [--instances N] [--seed S] [--tolerance T] [--report CSV]
//   hetsim config      print the default scenario file

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

#include "CLI11.hpp"
#include "hetsim/env.hpp"
#include "hetsim/fuzz.hpp"

namespace {

struct RunManifest {
  std::string config_path;
  std::string preset;
  int episodes = 200;
  int steps = 100;
  std::uint64_t seed = 1;
  std::string policy = "greedy";
  std::string filter;
  std::string metrics_path = "metrics.csv";
  std::string traj_path;
  std::string curve_path;
  int jobs = 1;
};

int cmd_run(const RunManifest& m) {
  using namespace hetsim;
  WorldConfig config = m.config_path.empty() ? WorldConfig{} : load_config(m.config_path);
  if (!m.preset.empty()) config.preset = parse_preset(m.preset);
  if (!m.filter.empty()) config.safety_filter = m.filter == "on";
  config.validate();
  const auto policy = make_policy(m.policy);

  std::vector<std::uint64_t> seeds(m.episodes);
  std::iota(seeds.begin(), seeds.end(), m.seed);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<EpisodeMetrics> metrics =
      run_batch(config, seeds, *policy, m.steps, m.jobs, !m.traj_path.empty());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream out(m.metrics_path);
    if (!out) throw std::runtime_error("cannot write metrics file '" + m.metrics_path + "'");
    write_metrics_csv(out, metrics, config.n_agents());
  }
  if (!m.traj_path.empty()) {
    std::ofstream out(m.traj_path);
    if (!out) throw std::runtime_error("cannot write trajectory file '" + m.traj_path + "'");
    for (const EpisodeMetrics& e : metrics) out << e.trajectory;
  }
  if (!m.curve_path.empty()) {
    std::ofstream out(m.curve_path);
    if (!out) throw std::runtime_error("cannot write curve file '" + m.curve_path + "'");
    out << "step,mean_targets,std_targets\n";
    for (int t = 0; t < m.steps; ++t) {
      double s = 0.0, s2 = 0.0;
      for (const auto& e : metrics) {
        s += e.targets_acquired_by_step[t];
        s2 += double(e.targets_acquired_by_step[t]) * e.targets_acquired_by_step[t];
      }
      const double n = std::max<std::size_t>(metrics.size(), 1);
      const double mean = s / n;
      out << t + 1 << ',' << mean << ',' << std::sqrt(std::max(0.0, s2 / n - mean * mean)) << '\n';
    }
  }

  long env_steps = 0, collisions = 0, interventions = 0, fallbacks = 0;
  double targets = 0.0;
  std::map<int, int> histogram;
  for (const auto& e : metrics) {
    env_steps += e.env_steps;
    collisions += e.collision_count;
    interventions += e.filter_intervention_count;
    fallbacks += e.infeasible_fallback_count;
    targets += e.targets_final;
    ++histogram[e.targets_final];
  }
  const double n = std::max<std::size_t>(metrics.size(), 1);
  const double agent_steps = std::max(1.0, double(env_steps) * config.n_agents());
  std::printf("episodes          %zu (%s, preset %s, filter %s)\n", metrics.size(),
              policy->name().c_str(), to_string(config.preset).c_str(),
              config.safety_filter ? "on" : "off");
  std::printf("mean targets      %.3f / %d\n", targets / n, config.n_t);
  std::printf("collisions        %ld\n", collisions);
  std::printf("intervention rate %.4f (%ld infeasible fallbacks)\n", interventions / agent_steps,
              fallbacks);
  std::printf("final-count pmf  ");
  for (int k = 0; k <= config.n_t; ++k)
    std::printf(" %d:%.3f", k, histogram.contains(k) ? histogram[k] / n : 0.0);
  std::printf("\nthroughput        %.0f env-steps/s (%ld steps in %.3f s)\n",
              secs > 0 ? env_steps / secs : 0.0, env_steps, secs);
  return 0;
}

int cmd_fuzz(int instances, std::uint64_t seed, double tolerance, const std::string& report_path) {
  using namespace hetsim;
  const WorldConfig config;
  const FuzzReport report = fuzz_filter(instances, seed, tolerance, config);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write report '" + report_path + "'");
    write_fuzz_report(out, report);
  }
  std::printf("instances                %zu\n", report.rows.size());
  std::printf("boundary instances       %d (clearance <= %g)\n", report.boundary_instances,
              tolerance);
  std::printf("disagreements            %d\n", report.disagreements);
  std::printf("boundary disagreements   %d\n", report.boundary_disagreements);
  std::printf("max disagreement clear.  %.3g\n", report.max_disagreement_clearance);
  std::printf("diff-drive substep gaps  %d\n", report.substep_gaps);
  for (const FuzzRow& r : report.rows) {
    if (r.agree() || r.clearance <= tolerance) continue;
    std::printf("  mismatch seed=%llu analytic=%g oracle=%g clearance=%.3g\n",
                static_cast<unsigned long long>(r.instance_seed), r.analytic_alpha,
                r.oracle_alpha, r.clearance);
  }
  return report.disagreements == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous multi-agent coverage simulator"};
  app.require_subcommand(1);

  RunManifest manifest;
  auto* run = app.add_subcommand("run", "Run a batch of episodes and write metrics");
  run->add_option("--config", manifest.config_path, "Scenario file (key = value)")
      ->check(CLI::ExistingFile);
  run->add_option("--episodes", manifest.episodes, "Number of episodes")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--steps", manifest.steps, "Steps per episode")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", manifest.seed, "Seed of the first episode");
  run->add_option("--preset", manifest.preset, "Reward preset")
      ->check(CLI::IsMember({"R1", "R2", "R3", "R4"}));
  run->add_option("--policy", manifest.policy, "greedy | random | weights:<path>");
  run->add_option("--filter", manifest.filter, "Safety filter")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--metrics", manifest.metrics_path, "Per-episode metrics CSV");
  run->add_option("--traj", manifest.traj_path, "Per-step JSONL trajectory dump");
  run->add_option("--curve", manifest.curve_path, "Mean cumulative acquisition per step (CSV)");
  run->add_option("--jobs", manifest.jobs, "Worker threads")->check(CLI::PositiveNumber);

  int instances = 10000;
  std::uint64_t fuzz_seed = 1;
  double tolerance = 1e-6;
  std::string report_path;
  auto* fuzz = app.add_subcommand("fuzz-filter", "Compare analytic filters with the oracle");
  fuzz->add_option("--instances", instances, "Random instances")->check(CLI::PositiveNumber);
  fuzz->add_option("--seed", fuzz_seed, "Base seed");
  fuzz->add_option("--tolerance", tolerance, "Clearance below which mismatches are ignored")
      ->check(CLI::NonNegativeNumber);
  fuzz->add_option("--report", report_path, "Per-instance CSV report");

  auto* config = app.add_subcommand("config", "Print the default scenario file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(manifest);
    if (*fuzz) return cmd_fuzz(instances, fuzz_seed, tolerance, report_path);
    if (*config) {
      std::cout << hetsim::format_config(hetsim::WorldConfig{});
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
