#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

#include "tnpar/metrics.hpp"

using namespace tnpar;

namespace {

CausalGraph graph_of(int n, std::initializer_list<std::pair<int, int>> edges) {
  CausalGraph g;
  g.type_count = n;
  for (auto e : edges) g.edges.insert(e);
  return g;
}

// All digraphs on 3 labelled nodes, as 6-bit off-diagonal patterns.
CausalGraph graph_from_bits(int bits) {
  CausalGraph g;
  g.type_count = 3;
  int b = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && ((bits >> b++) & 1)) g.edges.insert({i, j});
  return g;
}

// Edit-distance oracle: BFS over the 64 off-diagonal patterns with the ops
// insert, delete and flip, each costing 1.
int shd_bfs_oracle(int from_bits, int to_bits) {
  auto bit_of = [](int i, int j) {
    int b = 0;
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) {
        if (a == c) continue;
        if (a == i && c == j) return b;
        ++b;
      }
    return -1;
  };
  std::vector<int> dist(64, -1);
  std::deque<int> queue{from_bits};
  dist[from_bits] = 0;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    if (cur == to_bits) return dist[cur];
    std::vector<int> nexts;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        int fwd = bit_of(i, j), rev = bit_of(j, i);
        nexts.push_back(cur ^ (1 << fwd));  // insert or delete
        if ((cur >> fwd) & 1) {
          int flipped = (cur & ~(1 << fwd)) | (1 << rev);
          nexts.push_back(flipped);
        }
      }
    for (int nx : nexts)
      if (dist[nx] < 0) {
        dist[nx] = dist[cur] + 1;
        queue.push_back(nx);
      }
  }
  return dist[to_bits];
}

// Path-enumeration SID oracle: checks validity of pred's parent sets via the
// generalized backdoor criterion with explicit path enumeration.
struct PathOracle {
  const CausalGraph& truth;
  std::vector<std::vector<bool>> desc;

  explicit PathOracle(const CausalGraph& t) : truth(t) {
    const int n = t.type_count;
    desc.assign(n, std::vector<bool>(n, false));
    for (int s = 0; s < n; ++s) {
      std::deque<int> queue{s};
      std::vector<bool> seen(n, false);
      while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (const auto& [a, b] : t.edges)
          if (a == u && !seen[b]) {
            seen[b] = true;
            desc[s][b] = true;
            queue.push_back(b);
          }
      }
    }
  }

  // every undirected simple path from x to y starting with an edge into x
  // must be blocked by z
  bool backdoors_blocked(int x, int y, const std::vector<bool>& z) const {
    const int n = truth.type_count;
    // path state: sequence of nodes plus edge directions (true = forward along
    // the arrow)
    struct State {
      std::vector<int> nodes;
      std::vector<bool> fwd;  // fwd[i]: edge nodes[i]->nodes[i+1] points forward
    };
    std::deque<State> frontier;
    for (int p = 0; p < n; ++p)
      if (truth.has_edge(p, x)) frontier.push_back({{x, p}, {false}});
    while (!frontier.empty()) {
      State s = frontier.front();
      frontier.pop_front();
      int tail = s.nodes.back();
      if (tail == y) {
        if (!path_blocked(s, z)) return false;
        continue;
      }
      for (int next = 0; next < n; ++next) {
        if (std::find(s.nodes.begin(), s.nodes.end(), next) != s.nodes.end()) continue;
        if (truth.has_edge(tail, next)) {
          State s2 = s;
          s2.nodes.push_back(next);
          s2.fwd.push_back(true);
          frontier.push_back(s2);
        }
        if (truth.has_edge(next, tail)) {
          State s2 = s;
          s2.nodes.push_back(next);
          s2.fwd.push_back(false);
          frontier.push_back(s2);
        }
      }
    }
    return true;
  }

  bool path_blocked(const auto& s, const std::vector<bool>& z) const {
    for (size_t m = 1; m + 1 < s.nodes.size(); ++m) {
      int node = s.nodes[m];
      bool collider = s.fwd[m - 1] && !s.fwd[m];  // both arrows into node
      if (!collider && z[node]) return true;
      if (collider) {
        bool opened = z[node];
        for (int d = 0; d < truth.type_count; ++d)
          if (desc[node][d] && z[d]) opened = true;
        if (!opened) return true;
      }
    }
    return false;
  }

  int sid(const CausalGraph& pred) const {
    const int n = truth.type_count;
    int mistakes = 0;
    for (int i = 0; i < n; ++i) {
      std::vector<bool> z(n, false);
      for (const auto& [a, b] : pred.edges)
        if (b == i) z[a] = true;
      bool z_has_desc = false;
      for (int d = 0; d < n; ++d)
        if (z[d] && desc[i][d]) z_has_desc = true;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (z[j]) {
          if (desc[i][j]) ++mistakes;
        } else if (z_has_desc || !backdoors_blocked(i, j, z)) {
          ++mistakes;
        }
      }
    }
    return mistakes;
  }
};

}  // namespace

TEST_CASE("prf: pinned cases") {
  CausalGraph truth = graph_of(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  Prf r = prf(truth, truth);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);

  CausalGraph half = graph_of(4, {{0, 1}, {1, 2}});
  r = prf(half, truth);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 0.5);

  // P=0.5, R=1 -> F1 = 2/3
  CausalGraph truth1 = graph_of(3, {{0, 1}});
  CausalGraph over = graph_of(3, {{0, 1}, {2, 0}});
  r = prf(over, truth1);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));

  r = prf(graph_of(3, {}), truth1);
  CHECK(r.precision == 0.0);
  CHECK(r.f1 == 0.0);

  // self-loops are ignored
  CausalGraph loops = graph_of(3, {{0, 1}, {1, 1}});
  r = prf(loops, truth1);
  CHECK(r.precision == 1.0);

  CausalGraph wrong_n = graph_of(2, {});
  CHECK_THROWS_AS(prf(wrong_n, truth1), std::invalid_argument);
}

TEST_CASE("shd: pinned cases") {
  CausalGraph a = graph_of(3, {{0, 1}, {1, 2}});
  CHECK(shd(a, a) == 0);
  CHECK(shd(graph_of(2, {{0, 1}}), graph_of(2, {{1, 0}})) == 1);  // one flip
  CHECK(shd(graph_of(3, {{0, 1}, {2, 1}}), graph_of(3, {{0, 1}, {0, 2}})) == 2);
}

TEST_CASE("shd: symmetry, identity, triangle inequality on random graphs") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> coin(0, 1);
  auto random_graph = [&]() {
    CausalGraph g;
    g.type_count = 5;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j && coin(rng)) g.edges.insert({i, j});
    return g;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    CausalGraph a = random_graph(), b = random_graph(), c = random_graph();
    CHECK(shd(a, b) == shd(b, a));
    CHECK(shd(a, a) == 0);
    CHECK(shd(a, c) <= shd(a, b) + shd(b, c));
  }
}

TEST_CASE("metrics invariant under consistent label permutation") {
  CausalGraph truth = graph_of(4, {{0, 1}, {1, 2}, {0, 3}});
  CausalGraph pred = graph_of(4, {{0, 1}, {2, 1}, {3, 0}});
  std::vector<int> perm{2, 0, 3, 1};
  auto apply = [&](const CausalGraph& g) {
    CausalGraph out;
    out.type_count = g.type_count;
    for (const auto& [i, j] : g.edges) out.edges.insert({perm[i], perm[j]});
    return out;
  };
  Prf r1 = prf(pred, truth), r2 = prf(apply(pred), apply(truth));
  CHECK(r1.precision == r2.precision);
  CHECK(r1.recall == r2.recall);
  CHECK(shd(pred, truth) == shd(apply(pred), apply(truth)));
  CHECK(sid(dag_repair(pred, CausalTensor(4, 0)), truth) ==
        sid(dag_repair(apply(pred), CausalTensor(4, 0)), apply(truth)));
}

TEST_CASE("sid: pinned fixtures") {
  CausalGraph t01 = graph_of(2, {{0, 1}});
  CHECK(sid(t01, t01) == 0);
  CHECK(sid(graph_of(2, {{1, 0}}), t01) == 2);  // reversal
  CHECK(sid(graph_of(2, {}), t01) == 1);        // missing edge
  CHECK_THROWS_AS(sid(t01, graph_of(2, {{0, 1}, {1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(sid(graph_of(2, {{0, 1}, {1, 0}}), t01), std::invalid_argument);
}

TEST_CASE("sid: zero on identical random DAGs up to |V|=8") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 2; n <= 8; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      CausalGraph g;
      g.type_count = n;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (u(rng) < 0.4) g.edges.insert({order[i], order[j]});
      CHECK(sid(g, g) == 0);
    }
}

TEST_CASE("shd and sid match exhaustive oracles on all 3-node DAG pairs") {
  std::vector<int> dag_bits;
  for (int bits = 0; bits < 64; ++bits)
    if (is_dag(graph_from_bits(bits))) dag_bits.push_back(bits);
  CHECK(dag_bits.size() == 25);  // labelled DAGs on 3 nodes

  for (int tb : dag_bits) {
    CausalGraph truth = graph_from_bits(tb);
    PathOracle oracle(truth);
    for (int pb : dag_bits) {
      CausalGraph pred = graph_from_bits(pb);
      CHECK(shd(pred, truth) == shd_bfs_oracle(pb, tb));
      CHECK(sid(pred, truth) == oracle.sid(pred));
    }
  }
}

TEST_CASE("dag_repair: keeps the strongest cycle edge, output acyclic") {
  CausalTensor post(2, 1);
  post.at(0, 0, 1) = 0.9;
  post.at(1, 1, 0) = 0.6;
  CausalGraph cyc = graph_of(2, {{0, 1}, {1, 0}});
  CausalGraph fixed = dag_repair(cyc, post);
  CHECK(fixed.edges == std::set<std::pair<int, int>>{{0, 1}});

  CausalGraph acyclic = graph_of(3, {{0, 1}, {1, 2}});
  CHECK(dag_repair(acyclic, CausalTensor(3, 1)).edges == acyclic.edges);

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    CausalGraph g;
    g.type_count = 6;
    CausalTensor p(6, 1);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j && u(rng) < 0.4) {
          g.edges.insert({i, j});
          p.at(0, i, j) = u(rng);
        }
    CHECK(is_dag(dag_repair(g, p)));
  }
}

TEST_CASE("evaluate: full report with repair flag") {
  CausalGraph truth = graph_of(3, {{0, 1}, {1, 2}});
  CausalGraph pred = graph_of(3, {{0, 1}, {1, 2}, {2, 1}});
  CausalTensor post(3, 0);
  post.at(0, 0, 1) = 0.9;
  post.at(0, 1, 2) = 0.9;
  post.at(0, 2, 1) = 0.6;
  MetricReport r = evaluate(pred, truth, &post);
  CHECK(r.dag_repair_applied);
  CHECK(r.recall == 1.0);
  CHECK(r.sid == 0);  // repair drops the weak reverse edge
  CHECK(r.shd == 1);

  MetricReport clean = evaluate(truth, truth);
  CHECK(!clean.dag_repair_applied);
  CHECK(clean.f1 == 1.0);
  CHECK(clean.shd == 0);
  CHECK(clean.sid == 0);
}
