#include "tnpar/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tnpar {

void TopologyNetwork::add_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("topology: self-loop edge rejected");
  if (a < 0 || b < 0 || a >= node_count || b >= node_count)
    throw std::invalid_argument("topology: node index out of range");
  if (a > b) std::swap(a, b);
  edges.insert({a, b});
}

std::vector<std::vector<int>> all_pairs_hops(const TopologyNetwork& topology) {
  const int n = topology.node_count;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : topology.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::deque<int> queue{s};
    dist[s][s] = 0;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (dist[s][v] < 0) {
          dist[s][v] = dist[s][u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return dist;
}

DistanceMasks geodesic_masks(const TopologyNetwork& topology, int k_max) {
  if (k_max < 0) throw std::invalid_argument("geodesic_masks: k_max must be >= 0");
  const int n = topology.node_count;
  DistanceMasks out;
  out.node_count = n;
  out.k_max = k_max;
  out.masks.assign(k_max + 1, Mat(n, n));
  auto dist = all_pairs_hops(topology);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int d = dist[i][j];
      if (d >= 0 && d <= k_max) out.masks[d](i, j) = 1.0;
    }
  return out;
}

static Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// (I + g/n)^p by iterated multiplication; n <= 64 at desk scale.
static Mat scaled_power(const Mat& g, int p) {
  const int n = g.rows;
  Mat m = Mat::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) += g(i, j) / n;
  Mat acc = Mat::identity(n);
  for (int i = 0; i < p; ++i) acc = matmul(acc, m);
  return acc;
}

double acyclicity_h(const Mat& g) {
  if (g.rows != g.cols) throw std::invalid_argument("acyclicity_h: matrix must be square");
  const int n = g.rows;
  Mat p = scaled_power(g, n);
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += p(i, i);
  return tr - n;
}

Mat acyclicity_h_grad(const Mat& g) {
  if (g.rows != g.cols) throw std::invalid_argument("acyclicity_h_grad: matrix must be square");
  const int n = g.rows;
  Mat p = scaled_power(g, n - 1);
  Mat grad(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grad(i, j) = p(j, i);
  return grad;
}

Mat aggregate_g(const CausalTensor& a) {
  const int v = a.type_count;
  Mat g(v, v);
  for (int k = 0; k <= a.k_max; ++k)
    for (int i = 0; i < v; ++i)
      for (int j = 0; j < v; ++j) g(i, j) += a.at(k, i, j);
  for (int i = 0; i < v; ++i) g(i, i) = 0.0;
  return g;
}

ExtractedGraph extract_graph(const CausalTensor& posterior, double threshold) {
  ExtractedGraph out;
  out.graph.type_count = posterior.type_count;
  out.hard = CausalTensor(posterior.type_count, posterior.k_max);
  for (int k = 0; k <= posterior.k_max; ++k)
    for (int i = 0; i < posterior.type_count; ++i)
      for (int j = 0; j < posterior.type_count; ++j)
        if (posterior.at(k, i, j) >= threshold) {
          out.hard.at(k, i, j) = 1.0;
          out.graph.edges.insert({i, j});
        }
  return out;
}

bool is_dag(const CausalGraph& g) {
  const int n = g.type_count;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : g.edges)
    if (i != j) adj[i].push_back(j);
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(n, 0);
  std::vector<std::pair<int, size_t>> stack;
  for (int s = 0; s < n; ++s) {
    if (state[s] != 0) continue;
    stack.push_back({s, 0});
    state[s] = 1;
    while (!stack.empty()) {
      auto& [u, idx] = stack.back();
      if (idx < adj[u].size()) {
        int v = adj[u][idx++];
        if (state[v] == 1) return false;
        if (state[v] == 0) {
          state[v] = 1;
          stack.push_back({v, 0});
        }
      } else {
        state[u] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

TopologyNetwork load_topology_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("node_a,node_b", 0) != 0)
    throw std::runtime_error("topology file missing node_a,node_b header: " + path);
  std::vector<std::pair<int, int>> pairs;
  int max_node = -1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int a, b;
    char comma;
    if (!(ss >> a >> comma >> b) || comma != ',')
      throw std::runtime_error(path + ": malformed row at line " + std::to_string(lineno));
    pairs.push_back({a, b});
    max_node = std::max({max_node, a, b});
  }
  TopologyNetwork t;
  t.node_count = max_node + 1;
  for (auto [a, b] : pairs) t.add_edge(a, b);
  return t;
}

void save_topology_csv(const TopologyNetwork& topology, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write topology file: " + path);
  out << "node_a,node_b\n";
  for (const auto& [a, b] : topology.edges) out << a << "," << b << "\n";
}

GraphFile load_graph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  nlohmann::json j;
  in >> j;
  GraphFile out;
  out.graph.type_count = j.at("type_count").get<int>();
  for (const auto& e : j.at("edges")) {
    int a = e.at(0).get<int>();
    int b = e.at(1).get<int>();
    if (a < 0 || b < 0 || a >= out.graph.type_count || b >= out.graph.type_count)
      throw std::runtime_error("graph file edge index out of range: " + path);
    out.graph.edges.insert({a, b});
  }
  if (j.contains("posterior")) {
    const auto& p = j["posterior"];
    int slices = static_cast<int>(p.size());
    out.posterior = CausalTensor(out.graph.type_count, slices - 1);
    for (int k = 0; k < slices; ++k)
      for (int i = 0; i < out.graph.type_count; ++i)
        for (int jj = 0; jj < out.graph.type_count; ++jj)
          out.posterior.at(k, i, jj) = p[k][i][jj].get<double>();
    out.has_posterior = true;
  }
  return out;
}

void save_graph_json(const CausalGraph& graph, const std::string& path,
                     const CausalTensor* posterior) {
  nlohmann::ordered_json j;
  j["type_count"] = graph.type_count;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : graph.edges) edges.push_back({a, b});
  j["edges"] = edges;
  if (posterior) {
    auto p = nlohmann::ordered_json::array();
    for (int k = 0; k <= posterior->k_max; ++k) {
      auto slice = nlohmann::ordered_json::array();
      for (int i = 0; i < posterior->type_count; ++i) {
        auto row = nlohmann::ordered_json::array();
        for (int jj = 0; jj < posterior->type_count; ++jj) row.push_back(posterior->at(k, i, jj));
        slice.push_back(row);
      }
      p.push_back(slice);
    }
    j["posterior"] = p;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tnpar
