#include "tnpar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace tnpar {

namespace {
constexpr size_t kEventCap = 5'000'000;  // cascade explosion guard
}

void SimConfig::validate() const {
  auto fail = [](const std::string& f) {
    throw std::invalid_argument("sim config: invalid field " + f);
  };
  if (node_count < 1) fail("node_count");
  if (type_count < 1) fail("type_count");
  if (mu_min < 0 || mu_max < mu_min) fail("mu_min/mu_max");
  if (alpha_min < 0 || alpha_max < alpha_min) fail("alpha_min/alpha_max");
  if (delta <= 0) fail("delta");
  if (horizon <= 0) fail("horizon");
  if (k_active < 0) fail("k_active");
  if (causal_edge_density < 0 || causal_edge_density > 1) fail("causal_edge_density");
  if (topology_extra_edge_fraction < 0 || topology_extra_edge_fraction > 1)
    fail("topology_extra_edge_fraction");
  if (max_lag < 1) fail("max_lag");
}

TopologyNetwork sample_topology(const SimConfig& config, SimRng& rng) {
  const int n = config.node_count;
  TopologyNetwork t;
  t.node_count = n;
  if (n == 1) return t;
  if (n == 2) {
    t.add_edge(0, 1);
    return t;
  }
  // Uniform spanning tree of the complete graph via a random Pruefer sequence.
  std::uniform_int_distribution<int> node_dist(0, n - 1);
  std::vector<int> pruefer(n - 2);
  for (int& p : pruefer) p = node_dist(rng);
  std::vector<int> degree(n, 1);
  for (int p : pruefer) ++degree[p];
  std::set<int> leaves;
  for (int i = 0; i < n; ++i)
    if (degree[i] == 1) leaves.insert(i);
  for (int p : pruefer) {
    int leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    t.add_edge(leaf, p);
    if (--degree[p] == 1) leaves.insert(p);
  }
  int u = *leaves.begin();
  int v = *std::next(leaves.begin());
  t.add_edge(u, v);

  int extra = static_cast<int>(std::llround(config.topology_extra_edge_fraction * (n - 1)));
  long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  extra = static_cast<int>(std::min<long long>(extra, max_edges - (n - 1)));
  int attempts = 0;
  while (extra > 0 && attempts < 100000) {
    ++attempts;
    int a = node_dist(rng), b = node_dist(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (t.edges.count({a, b})) continue;
    t.add_edge(a, b);
    --extra;
  }
  return t;
}

CausalGraph sample_causal_dag(const SimConfig& config, SimRng& rng) {
  const int v = config.type_count;
  CausalGraph g;
  g.type_count = v;
  std::vector<int> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < v; ++i)
    for (int j = i + 1; j < v; ++j)
      if (unit(rng) < config.causal_edge_density) g.edges.insert({order[i], order[j]});
  return g;
}

GeneratedEvents generate_events_traced(const TopologyNetwork& topology, const CausalGraph& dag,
                                       const SimConfig& config, SimRng& rng) {
  config.validate();
  const int bins = static_cast<int>(std::ceil(config.horizon / config.delta));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> mu(config.type_count);
  for (double& m : mu) m = config.mu_min + (config.mu_max - config.mu_min) * unit(rng);
  std::map<std::pair<int, int>, double> alpha;
  for (const auto& e : dag.edges)
    alpha[e] = config.alpha_min + (config.alpha_max - config.alpha_min) * unit(rng);

  // Nodes within k_active hops (including self) per node.
  auto hops = all_pairs_hops(topology);
  std::vector<std::vector<int>> reach(config.node_count);
  for (int a = 0; a < config.node_count; ++a)
    for (int b = 0; b < config.node_count; ++b)
      if (hops[a][b] >= 0 && hops[a][b] <= config.k_active) reach[a].push_back(b);

  std::vector<std::vector<std::pair<int, double>>> out_edges(config.type_count);
  for (const auto& [e, a] : alpha) out_edges[e.first].push_back({e.second, a});

  struct PendingEvent {
    int bin, type, node, parent;
  };
  std::vector<PendingEvent> queue;

  // Root events: homogeneous Poisson per (type, node), one draw per bin.
  for (int v = 0; v < config.type_count; ++v) {
    std::poisson_distribution<int> root_count(mu[v] * config.delta);
    for (int n = 0; n < config.node_count; ++n)
      for (int t = 1; t <= bins; ++t) {
        int c = mu[v] > 0 ? root_count(rng) : 0;
        for (int i = 0; i < c; ++i) queue.push_back({t, v, n, -1});
      }
  }

  // Branching cascade: each event excites child events of effect types on all
  // nodes within k_active hops, delayed by a truncated geometric lag.
  const double trunc_mass = 1.0 - std::pow(0.5, config.max_lag);
  for (size_t head = 0; head < queue.size(); ++head) {
    PendingEvent ev = queue[head];
    for (const auto& [effect, a] : out_edges[ev.type]) {
      std::poisson_distribution<int> child_count(a);
      for (int n2 : reach[ev.node]) {
        int c = child_count(rng);
        for (int i = 0; i < c; ++i) {
          double u = unit(rng);
          int lag = static_cast<int>(std::ceil(-std::log2(1.0 - u * trunc_mass)));
          lag = std::clamp(lag, 1, config.max_lag);
          int child_bin = ev.bin + lag;
          if (child_bin > bins) continue;
          queue.push_back({child_bin, effect, n2, static_cast<int>(head)});
        }
      }
    }
    if (queue.size() > kEventCap)
      throw std::runtime_error("generate_events: cascade exceeded event cap; "
                               "reduce alpha or causal_edge_density");
  }

  // Sort by time, then type, then node; remap parent indices through the sort.
  std::vector<int> perm(queue.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
    const auto& x = queue[a];
    const auto& y = queue[b];
    if (x.bin != y.bin) return x.bin < y.bin;
    if (x.type != y.type) return x.type < y.type;
    return x.node < y.node;
  });
  std::vector<int> inverse(queue.size());
  for (size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = static_cast<int>(i);

  GeneratedEvents out;
  out.events.reserve(queue.size());
  out.parent.reserve(queue.size());
  for (int src : perm) {
    const PendingEvent& ev = queue[src];
    // bin midpoint so that discretize() round-trips to the generating bin
    out.events.push_back({ev.type, ev.node, (ev.bin - 0.5) * config.delta});
    out.parent.push_back(ev.parent < 0 ? -1 : inverse[ev.parent]);
  }
  return out;
}

std::vector<EventRecord> generate_events(const TopologyNetwork& topology, const CausalGraph& dag,
                                         const SimConfig& config, SimRng& rng) {
  return generate_events_traced(topology, dag, config, rng).events;
}

void save_sim_config_json(const SimConfig& c, const std::string& path) {
  nlohmann::ordered_json j;
  j["node_count"] = c.node_count;
  j["type_count"] = c.type_count;
  j["mu_min"] = c.mu_min;
  j["mu_max"] = c.mu_max;
  j["alpha_min"] = c.alpha_min;
  j["alpha_max"] = c.alpha_max;
  j["delta"] = c.delta;
  j["horizon"] = c.horizon;
  j["k_active"] = c.k_active;
  j["causal_edge_density"] = c.causal_edge_density;
  j["topology_extra_edge_fraction"] = c.topology_extra_edge_fraction;
  j["max_lag"] = c.max_lag;
  j["seed"] = c.seed;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sim config: " + path);
  out << j.dump(2) << "\n";
}

SimConfig load_sim_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sim config: " + path);
  nlohmann::json j;
  in >> j;
  SimConfig c;
  c.node_count = j.at("node_count");
  c.type_count = j.at("type_count");
  c.mu_min = j.at("mu_min");
  c.mu_max = j.at("mu_max");
  c.alpha_min = j.at("alpha_min");
  c.alpha_max = j.at("alpha_max");
  c.delta = j.at("delta");
  c.horizon = j.at("horizon");
  c.k_active = j.at("k_active");
  c.causal_edge_density = j.at("causal_edge_density");
  c.topology_extra_edge_fraction = j.at("topology_extra_edge_fraction");
  c.max_lag = j.at("max_lag");
  c.seed = j.at("seed");
  c.validate();
  return c;
}

}  // namespace tnpar
