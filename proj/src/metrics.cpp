#include "tnpar/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tnpar {

namespace {

CausalGraph strip_self_loops(const CausalGraph& g) {
  CausalGraph out;
  out.type_count = g.type_count;
  for (const auto& [i, j] : g.edges)
    if (i != j) out.edges.insert({i, j});
  return out;
}

std::vector<std::vector<int>> children_of(const CausalGraph& g) {
  std::vector<std::vector<int>> out(g.type_count);
  for (const auto& [i, j] : g.edges) out[i].push_back(j);
  return out;
}

std::vector<std::vector<int>> parents_of(const CausalGraph& g) {
  std::vector<std::vector<int>> out(g.type_count);
  for (const auto& [i, j] : g.edges) out[j].push_back(i);
  return out;
}

// Proper descendants of every node.
std::vector<std::vector<bool>> descendant_table(const CausalGraph& g) {
  auto children = children_of(g);
  std::vector<std::vector<bool>> desc(g.type_count, std::vector<bool>(g.type_count, false));
  for (int s = 0; s < g.type_count; ++s) {
    std::deque<int> queue{s};
    std::vector<bool> seen(g.type_count, false);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int c : children[u])
        if (!seen[c]) {
          seen[c] = true;
          desc[s][c] = true;
          queue.push_back(c);
        }
    }
  }
  return desc;
}

// d-separation of x and y given z via the reachability procedure over
// (node, direction) states.
bool d_separated(const CausalGraph& g, int x, int y, const std::vector<bool>& z) {
  auto children = children_of(g);
  auto parents = parents_of(g);
  const int n = g.type_count;

  // z together with its ancestors
  std::vector<bool> anc_z(n, false);
  std::deque<int> queue;
  for (int i = 0; i < n; ++i)
    if (z[i]) {
      anc_z[i] = true;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int p : parents[u])
      if (!anc_z[p]) {
        anc_z[p] = true;
        queue.push_back(p);
      }
  }

  enum { kFromChild = 0, kFromParent = 1 };
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<int, int>> frontier{{x, kFromChild}};
  while (!frontier.empty()) {
    auto [u, dir] = frontier.front();
    frontier.pop_front();
    if (visited[u][dir]) continue;
    visited[u][dir] = true;
    if (u == y) return false;
    if (dir == kFromChild) {
      if (!z[u]) {
        for (int p : parents[u]) frontier.push_back({p, kFromChild});
        for (int c : children[u]) frontier.push_back({c, kFromParent});
      }
    } else {
      if (!z[u])
        for (int c : children[u]) frontier.push_back({c, kFromParent});
      if (anc_z[u])
        for (int p : parents[u]) frontier.push_back({p, kFromChild});
    }
  }
  return true;
}

}  // namespace

Prf prf(const CausalGraph& pred_in, const CausalGraph& truth_in) {
  if (pred_in.type_count != truth_in.type_count)
    throw std::invalid_argument("prf: type_count mismatch");
  CausalGraph pred = strip_self_loops(pred_in);
  CausalGraph truth = strip_self_loops(truth_in);
  if (pred.edges.empty() && truth.edges.empty()) return {1.0, 1.0, 1.0};
  size_t hits = 0;
  for (const auto& e : pred.edges) hits += truth.edges.count(e);
  double p = pred.edges.empty() ? 0.0 : static_cast<double>(hits) / pred.edges.size();
  double r = truth.edges.empty() ? 0.0 : static_cast<double>(hits) / truth.edges.size();
  double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return {p, r, f1};
}

int shd(const CausalGraph& pred_in, const CausalGraph& truth_in) {
  if (pred_in.type_count != truth_in.type_count)
    throw std::invalid_argument("shd: type_count mismatch");
  CausalGraph pred = strip_self_loops(pred_in);
  CausalGraph truth = strip_self_loops(truth_in);
  int d = 0;
  // unordered pairs: flip counts once, spurious/missing once each
  for (int i = 0; i < pred.type_count; ++i)
    for (int j = i + 1; j < pred.type_count; ++j) {
      bool pf = pred.has_edge(i, j), pb = pred.has_edge(j, i);
      bool tf = truth.has_edge(i, j), tb = truth.has_edge(j, i);
      d += std::abs(static_cast<int>(pf) + static_cast<int>(pb) -
                    static_cast<int>(tf) - static_cast<int>(tb));
      if (pf + pb == tf + tb && (pf != tf || pb != tb)) d += pf + pb;  // reorientations
    }
  return d;
}

int sid(const CausalGraph& pred_in, const CausalGraph& truth_in) {
  if (pred_in.type_count != truth_in.type_count)
    throw std::invalid_argument("sid: type_count mismatch");
  CausalGraph pred = strip_self_loops(pred_in);
  CausalGraph truth = strip_self_loops(truth_in);
  if (!is_dag(truth)) throw std::invalid_argument("sid: truth must be a DAG");
  if (!is_dag(pred)) throw std::invalid_argument("sid: pred must be a DAG (use dag_repair)");

  const int n = truth.type_count;
  auto pred_parents = parents_of(pred);
  auto desc = descendant_table(truth);

  int mistakes = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<bool> z(n, false);
    for (int p : pred_parents[i]) z[p] = true;
    // truth with i's outgoing edges removed; remaining i-j connections are
    // exactly the backdoor paths
    CausalGraph backdoor = truth;
    for (auto it = backdoor.edges.begin(); it != backdoor.edges.end();)
      it = it->first == i ? backdoor.edges.erase(it) : std::next(it);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (z[j]) {
        // adjusting for j forces a zero estimated effect of i on j
        if (desc[i][j]) ++mistakes;
        continue;
      }
      bool z_has_descendant = false;
      for (int p : pred_parents[i])
        if (desc[i][p]) z_has_descendant = true;
      if (z_has_descendant || !d_separated(backdoor, i, j, z)) ++mistakes;
    }
  }
  return mistakes;
}

CausalGraph dag_repair(const CausalGraph& pred, const CausalTensor& posterior) {
  CausalGraph g = strip_self_loops(pred);
  auto max_over_k = [&](int i, int j) {
    double m = 0.0;
    for (int k = 0; k <= posterior.k_max; ++k) m = std::max(m, posterior.at(k, i, j));
    return m;
  };
  while (!is_dag(g)) {
    // locate one cycle via DFS with an explicit stack trail
    auto children = children_of(g);
    std::vector<int> state(g.type_count, 0);
    std::vector<int> trail;
    std::vector<std::pair<int, int>> cycle;  // edges of the found cycle

    std::function<bool(int)> dfs = [&](int u) -> bool {
      state[u] = 1;
      trail.push_back(u);
      for (int v : children[u]) {
        if (state[v] == 1) {
          auto it = std::find(trail.begin(), trail.end(), v);
          for (auto p = it; p + 1 != trail.end(); ++p) cycle.push_back({*p, *(p + 1)});
          cycle.push_back({trail.back(), v});
          return true;
        }
        if (state[v] == 0 && dfs(v)) return true;
      }
      state[u] = 2;
      trail.pop_back();
      return false;
    };
    for (int s = 0; s < g.type_count && cycle.empty(); ++s)
      if (state[s] == 0) dfs(s);

    std::pair<int, int> weakest = cycle.front();
    double weakest_p = max_over_k(weakest.first, weakest.second);
    for (const auto& e : cycle) {
      double p = max_over_k(e.first, e.second);
      if (p < weakest_p || (p == weakest_p && e < weakest)) {
        weakest = e;
        weakest_p = p;
      }
    }
    g.edges.erase(weakest);
  }
  return g;
}

MetricReport evaluate(const CausalGraph& pred, const CausalGraph& truth,
                      const CausalTensor* posterior) {
  MetricReport report;
  Prf scores = prf(pred, truth);
  report.precision = scores.precision;
  report.recall = scores.recall;
  report.f1 = scores.f1;
  report.shd = shd(pred, truth);
  CausalGraph for_sid = strip_self_loops(pred);
  if (!is_dag(for_sid)) {
    CausalTensor fallback(pred.type_count, 0);
    if (!posterior)
      for (const auto& [i, j] : for_sid.edges) fallback.at(0, i, j) = 1.0;
    for_sid = dag_repair(for_sid, posterior ? *posterior : fallback);
    report.dag_repair_applied = true;
  }
  report.sid = sid(for_sid, truth);
  return report;
}

void save_metrics_json(const MetricReport& report, const std::string& path) {
  nlohmann::ordered_json j;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["shd"] = report.shd;
  j["sid"] = report.sid;
  j["dag_repair_applied"] = report.dag_repair_applied;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics file: " + path);
  out << j.dump(2) << "\n";
}

std::string metrics_csv_header() {
  return "run_id,precision,recall,f1,shd,sid,dag_repair_applied";
}

std::string metrics_csv_row(const std::string& run_id, const MetricReport& report) {
  std::ostringstream row;
  row << std::setprecision(17) << run_id << "," << report.precision << "," << report.recall
      << "," << report.f1 << "," << report.shd << "," << report.sid << ","
      << (report.dag_repair_applied ? 1 : 0);
  return row.str();
}

}  // namespace tnpar
