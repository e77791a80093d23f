// Command-line front end: simulate / train / eval / sweep.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tnpar/experiment.hpp"

using namespace tnpar;

int main(int argc, char** argv) {
  CLI::App app{"Granger causal discovery from topological event sequences"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::string mode, events_path, topology_path, pred_path, truth_path, run_label;
  std::int64_t seed = -1;
  double threshold = -1.0;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "experiment config JSON");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--mode", mode, "full | no_topology | merged | no_constraints");
    cmd->add_option("--threshold", threshold, "posterior extraction threshold");
  };

  auto* sim_cmd = app.add_subcommand("simulate", "generate events, topology and ground truth");
  add_common(sim_cmd, true);

  auto* train_cmd = app.add_subcommand("train", "fit the model and emit the posterior graph");
  add_common(train_cmd, true);
  train_cmd->add_option("--events", events_path, "events CSV (defaults to config)");
  train_cmd->add_option("--topology", topology_path, "topology CSV (defaults to config)");

  auto* eval_cmd = app.add_subcommand("eval", "score a predicted graph against ground truth");
  add_common(eval_cmd, false);
  eval_cmd->add_option("--pred", pred_path, "predicted graph JSON")->required();
  eval_cmd->add_option("--truth", truth_path, "ground-truth graph JSON")->required();
  eval_cmd->add_option("--id", run_label, "run id for the CSV row");

  auto* sweep_cmd = app.add_subcommand("sweep", "simulate/train/eval over a parameter grid");
  add_common(sweep_cmd, true);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig config;
    if (!config_path.empty()) config = load_experiment_config(config_path);
    if (seed >= 0) config.set_seed(static_cast<std::uint64_t>(seed));
    if (!mode.empty()) config.train.mode = parse_mode(mode);
    if (threshold > 0.0) config.train.threshold = threshold;

    if (sim_cmd->parsed()) {
      SimulateOutputs out = run_simulate(config, out_dir);
      std::cout << "wrote " << out.events << " (" << out.event_count << " events), "
                << out.topology << ", " << out.truth << ", " << out.sim_config << "\n";
    } else if (train_cmd->parsed()) {
      if (events_path.empty()) events_path = config.events_path;
      if (topology_path.empty()) topology_path = config.topology_path;
      if (events_path.empty() || topology_path.empty())
        throw std::invalid_argument("train: events and topology paths required "
                                    "(--events/--topology or config keys)");
      TrainOutputs out = run_train(config, events_path, topology_path, out_dir);
      std::cout << "wrote " << out.graph << " (" << out.extracted.edges.size()
                << " edges), " << out.checkpoint << ", " << out.log << "\n";
    } else if (eval_cmd->parsed()) {
      std::string id = run_label.empty() ? run_id(config, config.train.seed) : run_label;
      MetricReport r = run_eval(pred_path, truth_path, out_dir, id);
      std::cout << "precision=" << r.precision << " recall=" << r.recall << " f1=" << r.f1
                << " shd=" << r.shd << " sid=" << r.sid
                << (r.dag_repair_applied ? " (dag repair applied)" : "") << "\n";
    } else if (sweep_cmd->parsed()) {
      auto rows = run_sweep(config, out_dir);
      size_t failed = 0;
      for (const auto& r : rows)
        if (!r.ok) ++failed;
      std::cout << "sweep finished: " << rows.size() << " runs, " << failed
                << " failed; see " << out_dir << "/sweep.csv\n";
      if (failed == rows.size()) return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
