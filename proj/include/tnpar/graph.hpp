#pragma once

// Graph data types shared across the pipeline: the undirected topology of
// physical nodes, its geodesic-distance masks, the directed causal graph over
// event types, and the (K+1)-slice causal tensor.

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tnpar {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), d(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return d[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return d[static_cast<size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

// Undirected node graph; edges stored with a < b.
struct TopologyNetwork {
  int node_count = 0;
  std::set<std::pair<int, int>> edges;

  void add_edge(int a, int b);
};

// B_{0:K}: masks[k](i,j) = 1 iff shortest-path distance between i and j is k.
struct DistanceMasks {
  int node_count = 0;
  int k_max = 0;
  std::vector<Mat> masks;  // size k_max+1
};

// Directed graph over event types; self-loops allowed in general.
struct CausalGraph {
  int type_count = 0;
  std::set<std::pair<int, int>> edges;  // ordered (from, to)

  bool has_edge(int i, int j) const { return edges.count({i, j}) > 0; }
};

// A_{0:K}: slice k holds per-distance causal strengths over type pairs.
struct CausalTensor {
  int type_count = 0;
  int k_max = 0;
  std::vector<Mat> values;  // size k_max+1, each type_count x type_count

  CausalTensor() = default;
  CausalTensor(int types, int k)
      : type_count(types), k_max(k), values(k + 1, Mat(types, types)) {}

  double& at(int k, int i, int j) { return values[k](i, j); }
  double at(int k, int i, int j) const { return values[k](i, j); }
  int slice_count() const { return k_max + 1; }
  size_t entry_count() const {
    return static_cast<size_t>(slice_count()) * type_count * type_count;
  }
};

// BFS shortest-path hop counts from every node; -1 for unreachable pairs.
std::vector<std::vector<int>> all_pairs_hops(const TopologyNetwork& topology);

DistanceMasks geodesic_masks(const TopologyNetwork& topology, int k_max);

// tr((I + g/n)^n) - n; zero exactly on DAG adjacency patterns.
// Expects a zero diagonal (self-excitation is handled upstream).
double acyclicity_h(const Mat& g);

// Gradient of acyclicity_h w.r.t. g: ((I + g/n)^(n-1))^T.
Mat acyclicity_h_grad(const Mat& g);

// G[i][j] = sum_k a[k][i][j], diagonal forced to zero.
Mat aggregate_g(const CausalTensor& a);

struct ExtractedGraph {
  CausalGraph graph;
  CausalTensor hard;  // per-k thresholded tensor
};

// Edge i->j present iff max_k posterior[k][i][j] >= threshold.
ExtractedGraph extract_graph(const CausalTensor& posterior, double threshold);

bool is_dag(const CausalGraph& g);

// --- file formats ---

// CSV with header node_a,node_b, one undirected edge per line.
TopologyNetwork load_topology_csv(const std::string& path);
void save_topology_csv(const TopologyNetwork& topology, const std::string& path);

// JSON {"type_count": n, "edges": [[i,j],...], "posterior": optional nested arrays}.
struct GraphFile {
  CausalGraph graph;
  bool has_posterior = false;
  CausalTensor posterior;
};
GraphFile load_graph_json(const std::string& path);
void save_graph_json(const CausalGraph& graph, const std::string& path,
                     const CausalTensor* posterior = nullptr);

}  // namespace tnpar
