#include "tnpar/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tnpar/svg_plot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace tnpar {

namespace {

json defaults_table() {
  ExperimentConfig d;
  json j;
  j["node_count"] = d.sim.node_count;
  j["type_count"] = d.sim.type_count;
  j["mu_min"] = d.sim.mu_min;
  j["mu_max"] = d.sim.mu_max;
  j["alpha_min"] = d.sim.alpha_min;
  j["alpha_max"] = d.sim.alpha_max;
  j["delta"] = d.sim.delta;
  j["horizon"] = d.sim.horizon;
  j["k_active"] = d.sim.k_active;
  j["causal_edge_density"] = d.sim.causal_edge_density;
  j["topology_extra_edge_fraction"] = d.sim.topology_extra_edge_fraction;
  j["max_lag"] = d.sim.max_lag;
  j["epochs"] = d.train.epochs;
  j["batch_size"] = d.train.batch_size;
  j["learning_rate"] = d.train.learning_rate;
  j["lambda_c"] = d.train.lambda_c;
  j["lambda_s"] = d.train.lambda_s;
  j["prior_p"] = d.train.prior_p;
  j["beta"] = d.train.beta;
  j["tau"] = d.train.tau;
  j["threshold"] = d.train.threshold;
  j["omega"] = d.train.omega;
  j["k_max"] = d.train.k_max;
  j["hidden"] = d.train.hidden;
  j["mode"] = mode_name(d.train.mode);
  j["seed"] = 0;
  j["seeds"] = json::array({0});
  j["events"] = "";
  j["topology"] = "";
  j["truth"] = "";
  j["sweep_parameter"] = "";
  j["sweep_values"] = json::array();
  return j;
}

ExperimentConfig from_resolved(const json& j) {
  ExperimentConfig c;
  c.sim.node_count = j.at("node_count");
  c.sim.type_count = j.at("type_count");
  c.sim.mu_min = j.at("mu_min");
  c.sim.mu_max = j.at("mu_max");
  c.sim.alpha_min = j.at("alpha_min");
  c.sim.alpha_max = j.at("alpha_max");
  c.sim.delta = j.at("delta");
  c.sim.horizon = j.at("horizon");
  c.sim.k_active = j.at("k_active");
  c.sim.causal_edge_density = j.at("causal_edge_density");
  c.sim.topology_extra_edge_fraction = j.at("topology_extra_edge_fraction");
  c.sim.max_lag = j.at("max_lag");
  c.sim.seed = j.at("seed");
  c.train.epochs = j.at("epochs");
  c.train.batch_size = j.at("batch_size");
  c.train.learning_rate = j.at("learning_rate");
  c.train.lambda_c = j.at("lambda_c");
  c.train.lambda_s = j.at("lambda_s");
  c.train.prior_p = j.at("prior_p");
  c.train.beta = j.at("beta");
  c.train.tau = j.at("tau");
  c.train.threshold = j.at("threshold");
  c.train.omega = j.at("omega");
  c.train.k_max = j.at("k_max");
  c.train.hidden = j.at("hidden").get<std::vector<int>>();
  c.train.mode = parse_mode(j.at("mode"));
  c.train.seed = j.at("seed");
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.events_path = j.at("events");
  c.topology_path = j.at("topology");
  c.truth_path = j.at("truth");
  c.sweep_parameter = j.at("sweep_parameter");
  c.sweep_values = j.at("sweep_values").get<std::vector<double>>();
  if (c.seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void echo_config(const ExperimentConfig& config, const std::string& out_dir) {
  write_text((fs::path(out_dir) / "resolved_config.json").string(),
             experiment_config_json(config) + "\n");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ExperimentConfig resolve_experiment_config(const std::string& json_text) {
  json user = json::parse(json_text);
  if (!user.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  json resolved = defaults_table();
  for (const auto& [key, value] : user.items()) {
    if (!resolved.contains(key)) throw std::invalid_argument("config: unknown key \"" + key + "\"");
    resolved[key] = value;
  }
  return from_resolved(resolved);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return resolve_experiment_config(ss.str());
}

std::string experiment_config_json(const ExperimentConfig& c) {
  json j = defaults_table();
  j["node_count"] = c.sim.node_count;
  j["type_count"] = c.sim.type_count;
  j["mu_min"] = c.sim.mu_min;
  j["mu_max"] = c.sim.mu_max;
  j["alpha_min"] = c.sim.alpha_min;
  j["alpha_max"] = c.sim.alpha_max;
  j["delta"] = c.sim.delta;
  j["horizon"] = c.sim.horizon;
  j["k_active"] = c.sim.k_active;
  j["causal_edge_density"] = c.sim.causal_edge_density;
  j["topology_extra_edge_fraction"] = c.sim.topology_extra_edge_fraction;
  j["max_lag"] = c.sim.max_lag;
  j["epochs"] = c.train.epochs;
  j["batch_size"] = c.train.batch_size;
  j["learning_rate"] = c.train.learning_rate;
  j["lambda_c"] = c.train.lambda_c;
  j["lambda_s"] = c.train.lambda_s;
  j["prior_p"] = c.train.prior_p;
  j["beta"] = c.train.beta;
  j["tau"] = c.train.tau;
  j["threshold"] = c.train.threshold;
  j["omega"] = c.train.omega;
  j["k_max"] = c.train.k_max;
  j["hidden"] = c.train.hidden;
  j["mode"] = mode_name(c.train.mode);
  j["seed"] = c.sim.seed;
  j["seeds"] = c.seeds;
  j["events"] = c.events_path;
  j["topology"] = c.topology_path;
  j["truth"] = c.truth_path;
  j["sweep_parameter"] = c.sweep_parameter;
  j["sweep_values"] = c.sweep_values;
  return j.dump(2);
}

std::string run_id(const ExperimentConfig& config, std::uint64_t seed) {
  std::ostringstream key;
  key << experiment_config_json(config) << ":" << seed;
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(key.str());
  return hex.str();
}

SimulateOutputs run_simulate(const ExperimentConfig& config, const std::string& out_dir) {
  config.sim.validate();
  fs::create_directories(out_dir);
  echo_config(config, out_dir);

  SimRng rng(config.sim.seed);
  TopologyNetwork topology = sample_topology(config.sim, rng);
  CausalGraph truth = sample_causal_dag(config.sim, rng);
  std::vector<EventRecord> events = generate_events(topology, truth, config.sim, rng);

  SimulateOutputs out;
  out.events = (fs::path(out_dir) / "events.csv").string();
  out.topology = (fs::path(out_dir) / "topology.csv").string();
  out.truth = (fs::path(out_dir) / "truth_graph.json").string();
  out.sim_config = (fs::path(out_dir) / "simconfig.json").string();
  out.event_count = events.size();
  save_events_csv(events, out.events);
  save_topology_csv(topology, out.topology);
  save_graph_json(truth, out.truth);
  save_sim_config_json(config.sim, out.sim_config);
  return out;
}

TrainOutputs run_train(const ExperimentConfig& config, const std::string& events_path,
                       const std::string& topology_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  echo_config(config, out_dir);

  std::vector<EventRecord> events = load_events_csv(events_path);
  TopologyNetwork topology = load_topology_csv(topology_path);
  if (topology.node_count < config.sim.node_count) topology.node_count = config.sim.node_count;
  double horizon = config.sim.horizon;
  for (const EventRecord& e : events) horizon = std::max(horizon, e.timestamp);
  CountTensor tensor =
      discretize(events, config.sim.delta, horizon, config.sim.type_count, topology.node_count);

  TrainResult result = train(tensor, topology, config.train);

  TrainOutputs out;
  out.graph = (fs::path(out_dir) / "graph.json").string();
  out.checkpoint = (fs::path(out_dir) / "checkpoint.json").string();
  out.log = (fs::path(out_dir) / "train_log.csv").string();
  out.extracted = result.graph;
  save_graph_json(result.graph, out.graph, &result.posterior);
  save_checkpoint_json(result, config.train, out.checkpoint);
  save_train_log_csv(result.log, out.log);
  return out;
}

MetricReport run_eval(const std::string& pred_graph_path, const std::string& truth_graph_path,
                      const std::string& out_dir, const std::string& id) {
  fs::create_directories(out_dir);
  GraphFile pred = load_graph_json(pred_graph_path);
  GraphFile truth = load_graph_json(truth_graph_path);
  MetricReport report = evaluate(pred.graph, truth.graph,
                                 pred.has_posterior ? &pred.posterior : nullptr);
  save_metrics_json(report, (fs::path(out_dir) / "metrics.json").string());

  fs::path csv = fs::path(out_dir) / "metrics.csv";
  bool fresh = !fs::exists(csv);
  std::ofstream out(csv, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  if (fresh) out << metrics_csv_header() << "\n";
  out << metrics_csv_row(id, report) << "\n";
  return report;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const std::string& out_dir) {
  if (config.sweep_parameter.empty() || config.sweep_values.empty())
    throw std::invalid_argument("sweep: config must set sweep_parameter and sweep_values");
  fs::create_directories(out_dir);
  echo_config(config, out_dir);

  std::vector<SweepRow> rows;
  for (double value : config.sweep_values) {
    for (std::uint64_t seed : config.seeds) {
      // re-resolve with the swept key overridden, so validation and the run id
      // both see the final value
      json patch = json::parse(experiment_config_json(config));
      if (!patch.contains(config.sweep_parameter))
        throw std::invalid_argument("sweep: unknown parameter " + config.sweep_parameter);
      if (patch[config.sweep_parameter].is_number_integer())
        patch[config.sweep_parameter] = static_cast<long long>(std::llround(value));
      else
        patch[config.sweep_parameter] = value;
      SweepRow row;
      row.value = value;
      row.seed = seed;
      try {
        ExperimentConfig run_cfg = resolve_experiment_config(patch.dump());
        run_cfg.set_seed(seed);
        row.id = run_id(run_cfg, seed);
        fs::path run_dir = fs::path(out_dir) / "runs" / row.id;
        SimulateOutputs sim = run_simulate(run_cfg, run_dir.string());
        TrainOutputs tr = run_train(run_cfg, sim.events, sim.topology, run_dir.string());
        row.report = run_eval(tr.graph, sim.truth, run_dir.string(), row.id);
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(row);
    }
  }

  // per-run rows plus mean/stddev aggregates per swept value
  std::ofstream csv(fs::path(out_dir) / "sweep.csv");
  if (!csv) throw std::runtime_error("cannot write sweep.csv");
  csv << std::setprecision(17);
  csv << "kind,value,seed,run_id,status,precision,recall,f1,shd,sid\n";
  for (const SweepRow& r : rows) {
    csv << "run," << r.value << "," << r.seed << "," << r.id << ","
        << (r.ok ? "ok" : "error");
    if (r.ok)
      csv << "," << r.report.precision << "," << r.report.recall << "," << r.report.f1 << ","
          << r.report.shd << "," << r.report.sid;
    else
      csv << ",,,,,";
    csv << "\n";
  }

  struct Agg {
    std::vector<double> precision, recall, f1, shd, sid;
  };
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  };
  auto stddev = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
  };

  const char* metric_names[] = {"precision", "recall", "f1", "shd", "sid"};
  std::vector<PlotSeries> plots(5);
  for (int m = 0; m < 5; ++m) plots[m].name = metric_names[m];

  for (double value : config.sweep_values) {
    Agg a;
    for (const SweepRow& r : rows) {
      if (!r.ok || r.value != value) continue;
      a.precision.push_back(r.report.precision);
      a.recall.push_back(r.report.recall);
      a.f1.push_back(r.report.f1);
      a.shd.push_back(r.report.shd);
      a.sid.push_back(r.report.sid);
    }
    const std::vector<double>* cols[] = {&a.precision, &a.recall, &a.f1, &a.shd, &a.sid};
    csv << "aggregate," << value << ",,,mean";
    for (auto* c : cols) csv << "," << mean(*c);
    csv << "\naggregate," << value << ",,,stddev";
    for (auto* c : cols) csv << "," << stddev(*c);
    csv << "\n";
    for (int m = 0; m < 5; ++m) {
      plots[m].x.push_back(value);
      plots[m].y.push_back(mean(*cols[m]));
      plots[m].yerr.push_back(stddev(*cols[m]));
    }
  }

  for (int m = 0; m < 5; ++m) {
    std::vector<PlotSeries> one{plots[m]};
    write_line_plot_svg((fs::path(out_dir) / ("sweep_" + std::string(metric_names[m]) + ".svg")).string(),
                        std::string(metric_names[m]) + " vs " + config.sweep_parameter,
                        config.sweep_parameter, metric_names[m], one);
  }
  return rows;
}

}  // namespace tnpar
