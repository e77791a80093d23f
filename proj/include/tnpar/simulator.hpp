#pragma once

// Synthetic topological event sequences with known causal structure: a random
// connected topology, a random causal DAG over event types, Poisson root
// events and a bin-discrete branching cascade along causal edges.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tnpar/graph.hpp"
#include "tnpar/ingest.hpp"

namespace tnpar {

struct SimConfig {
  int node_count = 40;
  int type_count = 20;
  double mu_min = 3e-5, mu_max = 5e-5;      // root intensity range, events/sec per type
  double alpha_min = 0.02, alpha_max = 0.03;  // expected children per cause event per edge
  double delta = 2.0;                        // bin width, seconds
  double horizon = 40000.0;                  // T, seconds
  int k_active = 1;            // max geodesic distance at which causal edges act
  double causal_edge_density = 0.3;
  double topology_extra_edge_fraction = 0.2; // extra edges as a fraction of tree size
  int max_lag = 3;                           // generation delay bound, bins
  std::uint64_t seed = 0;

  void validate() const;
};

using SimRng = std::mt19937_64;

TopologyNetwork sample_topology(const SimConfig& config, SimRng& rng);
CausalGraph sample_causal_dag(const SimConfig& config, SimRng& rng);

// Events plus the cascade lineage: parent[i] is the index of the event that
// spawned events[i], or -1 for a root.
struct GeneratedEvents {
  std::vector<EventRecord> events;
  std::vector<int> parent;
};

GeneratedEvents generate_events_traced(const TopologyNetwork& topology, const CausalGraph& dag,
                                       const SimConfig& config, SimRng& rng);
std::vector<EventRecord> generate_events(const TopologyNetwork& topology, const CausalGraph& dag,
                                         const SimConfig& config, SimRng& rng);

void save_sim_config_json(const SimConfig& config, const std::string& path);
SimConfig load_sim_config_json(const std::string& path);

}  // namespace tnpar
