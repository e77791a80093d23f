#pragma once

// Experiment drivers behind the CLI: config resolution with an explicit
// defaults table, the simulate/train/eval commands and the sweep harness.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tnpar/metrics.hpp"
#include "tnpar/simulator.hpp"
#include "tnpar/training.hpp"

namespace tnpar {

// Union of simulation and training settings plus file paths. Parsed from a
// flat JSON object; unknown keys are rejected.
struct ExperimentConfig {
  SimConfig sim;
  TrainConfig train;
  std::string events_path, topology_path, truth_path;
  std::vector<std::uint64_t> seeds = {0};
  std::string sweep_parameter;
  std::vector<double> sweep_values;

  void set_seed(std::uint64_t seed) {
    sim.seed = seed;
    train.seed = seed;
  }
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig resolve_experiment_config(const std::string& json_text);
std::string experiment_config_json(const ExperimentConfig& config);

// FNV-1a hash of the resolved config and seed; stable across runs.
std::string run_id(const ExperimentConfig& config, std::uint64_t seed);

struct SimulateOutputs {
  std::string events, topology, truth, sim_config;
  size_t event_count = 0;
};
SimulateOutputs run_simulate(const ExperimentConfig& config, const std::string& out_dir);

struct TrainOutputs {
  std::string graph, checkpoint, log;
  CausalGraph extracted;
};
TrainOutputs run_train(const ExperimentConfig& config, const std::string& events_path,
                       const std::string& topology_path, const std::string& out_dir);

MetricReport run_eval(const std::string& pred_graph_path, const std::string& truth_graph_path,
                      const std::string& out_dir, const std::string& id);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string id;
  bool ok = false;
  std::string error;
  MetricReport report;
};
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace tnpar
