#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "rawgnn/walker.hpp"
#include "support/chisq.hpp"
#include "support/test_util.hpp"

using namespace rawgnn;
using namespace rawgnn::testutil;

namespace {

Graph make_graph(std::int32_t n, std::vector<std::pair<std::int32_t, std::int32_t>> edges) {
  return Graph::build(n, edges, Array({static_cast<std::size_t>(n), 1}));
}

Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
Graph path3() { return make_graph(3, {{0, 1}, {1, 2}}); }
// center 0, leaves 1..4
Graph star4() { return make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}); }
Graph line(std::int32_t n) {
  std::vector<std::pair<std::int32_t, std::int32_t>> e;
  for (std::int32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

}  // namespace

TEST_CASE("transition weights follow the d_tr rule") {
  Graph tri = triangle();
  // triangle, arrived at s=1 from t=0, DFS preset p=10 q=0.1:
  // neighbor 0 (= t, d=0) -> 1/p = 0.1; neighbor 2 (adjacent to t, d=1) -> 1
  auto w = transition_weights(tri, 0, 1, 10.0, 0.1);
  auto nb = tri.neighbors(1);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0] == 0);
  CHECK(w[0] == doctest::Approx(0.1));
  CHECK(nb[1] == 2);
  CHECK(w[1] == doctest::Approx(1.0));

  // path t-s-r, BFS preset p=0.1 q=10: return weight 10, far weight 0.1
  Graph p3 = path3();
  auto w2 = transition_weights(p3, 0, 1, 0.1, 10.0);
  auto nb2 = p3.neighbors(1);
  REQUIRE(nb2.size() == 2);
  CHECK(w2[0] == doctest::Approx(10.0));   // neighbor 0 = t
  CHECK(w2[1] == doctest::Approx(0.1));    // neighbor 2, two hops from t

  // p = q = 1 degenerates to the unbiased walk
  auto w3 = transition_weights(tri, 0, 1, 1.0, 1.0);
  for (double x : w3) CHECK(x == doctest::Approx(1.0));

  // uniform first step when there is no predecessor
  auto w4 = transition_weights(p3, -1, 1, 0.1, 10.0);
  for (double x : w4) CHECK(x == doctest::Approx(1.0));

  Graph iso = make_graph(2, {});
  CHECK_THROWS_AS(transition_weights(iso, -1, 0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(transition_weights(p3, 2, 0, 1.0, 1.0), std::invalid_argument);  // t !~ s
}

TEST_CASE("sample_walk: first step uniform on a path graph, K=2") {
  Graph p3 = path3();
  WalkStrategy ws{"custom", 1.0, 1.0, 2, 1};
  std::map<std::int32_t, int> counts;
  RngStream rng(11, 0);
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    Path path = sample_walk(p3, 1, ws, rng);
    REQUIRE(path.nodes.size() == 2);
    CHECK(path.nodes[1] == 1);  // target last
    counts[path.nodes[0]]++;
  }
  CHECK(counts.size() == 2);
  CHECK(std::abs(counts[0] - trials / 2) < trials / 20);
  CHECK(std::abs(counts[2] - trials / 2) < trials / 20);
}

TEST_CASE("isolated node: self-repeat fallback") {
  Graph g = make_graph(3, {{1, 2}});
  WalkStrategy ws{"custom", 1.0, 1.0, 4, 1};
  RngStream rng(3, 3);
  Path path = sample_walk(g, 0, ws, rng);
  CHECK(path.nodes == std::vector<std::int32_t>{0, 0, 0, 0});
  auto nbhd = sample_neighborhood(g, 0, ws, rng);
  REQUIRE(nbhd.size() == 1);
  CHECK(nbhd[0].nodes == std::vector<std::int32_t>{0, 0, 0, 0});
}

// Walk outward from a leaf of the 4-leaf star with p=0.1, q=10: the second
// transition returns to the start leaf with probability
// (1/p) / ((1/p) + 3/q) = 10/10.3, checked by Monte-Carlo frequency.
TEST_CASE("star graph second-step return probability ~ 0.9709") {
  Graph star = star4();
  WalkStrategy ws{"bfs", 0.1, 10.0, 3, 1};
  RngStream rng(17, 0);
  const int trials = 100000;
  int returned = 0;
  for (int i = 0; i < trials; ++i) {
    Path path = sample_walk(star, 1, ws, rng);
    REQUIRE(path.nodes.size() == 3);
    CHECK(path.nodes[2] == 1);   // target
    CHECK(path.nodes[1] == 0);   // leaf's only neighbor is the center
    if (path.nodes[0] == 1) ++returned;
  }
  const double expected = 10.0 / 10.3;
  CHECK(std::abs(static_cast<double>(returned) / trials - expected) < 0.005);
}

TEST_CASE("sample_neighborhood returns R paths, deterministic under one stream") {
  Graph tri = triangle();
  WalkStrategy ws = WalkStrategy::dfs(4, 6);
  RngStream a(5, 9);
  auto n1 = sample_neighborhood(tri, 2, ws, a);
  CHECK(n1.size() == 6);
  for (const Path& p : n1) {
    CHECK(p.nodes.size() == 4);
    CHECK(p.nodes.back() == 2);
    CHECK(p.strategy == "dfs");
  }
  RngStream b(5, 9);
  auto n2 = sample_neighborhood(tri, 2, ws, b);
  for (std::size_t i = 0; i < 6; ++i) CHECK(n1[i].nodes == n2[i].nodes);
  RngStream c(5, 10);
  auto n3 = sample_neighborhood(tri, 2, ws, c);
  bool any_diff = false;
  for (std::size_t i = 0; i < 6; ++i) any_diff |= n1[i].nodes != n3[i].nodes;
  CHECK(any_diff);
}

TEST_CASE("path contract on a random graph: length K, target last, edges valid") {
  RngStream gen(123, 0);
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  const std::int32_t n = 30;
  for (int e = 0; e < 70; ++e)
    edges.emplace_back(static_cast<std::int32_t>(gen.next_index(n)),
                       static_cast<std::int32_t>(gen.next_index(n)));
  Graph g = make_graph(n, edges);
  for (const char* name : {"bfs", "dfs"}) {
    WalkStrategy ws = name == std::string("bfs") ? WalkStrategy::bfs(5, 3)
                                                 : WalkStrategy::dfs(5, 3);
    NeighborhoodSet ns = sample_all_neighborhoods(g, ws, 77, 1);
    REQUIRE(ns.nodes.size() == static_cast<std::size_t>(n) * 3 * 5);
    for (std::int32_t i = 0; i < n; ++i)
      for (int r = 0; r < 3; ++r) {
        CHECK(ns.at(i, r, 4) == i);
        for (int k = 0; k + 1 < 5; ++k) {
          const std::int32_t a = ns.at(i, r, k), b = ns.at(i, r, k + 1);
          const bool ok = g.has_edge(a, b) || (a == b && g.degree(a) == 0);
          CHECK(ok);
        }
      }
  }
}

TEST_CASE("sample_all_neighborhoods is deterministic in (seed, tag)") {
  Graph g = line(12);
  WalkStrategy ws = WalkStrategy::bfs(4, 2);
  NeighborhoodSet a = sample_all_neighborhoods(g, ws, 42, 7);
  NeighborhoodSet b = sample_all_neighborhoods(g, ws, 42, 7);
  CHECK(a.nodes == b.nodes);
  NeighborhoodSet c = sample_all_neighborhoods(g, ws, 42, 8);
  CHECK(a.nodes != c.nodes);
}

// Conditional second-step distribution against normalized Eq-style weights,
// chi-square at significance 0.01 (triangle with a tail, both presets).
TEST_CASE("second-step frequencies match normalized transition weights") {
  Graph g = make_graph(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
  const std::int32_t target = 0;
  for (const bool dfs : {false, true}) {
    WalkStrategy ws = dfs ? WalkStrategy::dfs(3, 1) : WalkStrategy::bfs(3, 1);
    RngStream rng(2025, dfs ? 1 : 0);
    const int trials = 100000;
    // bucket third nodes by the visited middle node s
    std::map<std::int32_t, std::map<std::int32_t, std::int64_t>> counts;
    for (int i = 0; i < trials; ++i) {
      Path p = sample_walk(g, target, ws, rng);
      counts[p.nodes[1]][p.nodes[0]] += 1;
    }
    for (const auto& [s, obs_map] : counts) {
      std::int64_t total = 0;
      for (const auto& [_, c] : obs_map) total += c;
      if (total < 5000) continue;
      auto nb = g.neighbors(s);
      auto w = transition_weights(g, target, s, ws.p, ws.q);
      double wsum = 0.0;
      for (double x : w) wsum += x;
      std::vector<double> probs;
      std::vector<std::int64_t> obs;
      for (std::size_t j = 0; j < nb.size(); ++j) {
        probs.push_back(w[j] / wsum);
        auto it = obs_map.find(nb[j]);
        obs.push_back(it == obs_map.end() ? 0 : it->second);
      }
      const double stat = chi_square_statistic(obs, probs, total);
      const double pval = chi_square_pvalue(stat, static_cast<int>(nb.size()) - 1);
      CHECK(pval >= 0.01);
    }
  }
}

TEST_CASE("BFS walks stay near the target, DFS walks push outward") {
  Graph g = line(20);
  const std::int32_t target = 10;
  const int trials = 10000;
  auto mean_start_distance = [&](const WalkStrategy& ws, std::uint64_t stream) {
    RngStream rng(99, stream);
    double total = 0.0;
    for (int i = 0; i < trials; ++i) {
      Path p = sample_walk(g, target, ws, rng);
      total += std::abs(p.nodes.front() - target);
    }
    return total / trials;
  };
  const double bfs = mean_start_distance(WalkStrategy::bfs(5, 1), 0);
  const double dfs = mean_start_distance(WalkStrategy::dfs(5, 1), 1);
  CHECK(dfs > bfs);
  CHECK(dfs - bfs > 0.5);  // clear separation, not a borderline fluke
}

TEST_CASE("walk corpus dump format") {
  Graph tri = triangle();
  WalkStrategy ws = WalkStrategy::bfs(3, 2);
  NeighborhoodSet ns = sample_all_neighborhoods(tri, ws, 1, 1);
  std::ostringstream os;
  dump_walks(os, ns);
  std::istringstream is(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    ++lines;
    std::istringstream ls(line);
    std::string strategy, target, seq;
    ls >> strategy >> target >> seq;
    CHECK(strategy == "bfs");
    CHECK(std::count(seq.begin(), seq.end(), ',') == 2);  // K=3 nodes
  }
  CHECK(lines == 3 * 2);
}

TEST_CASE("strategy validation") {
  CHECK_THROWS_AS(WalkStrategy({"x", 0.0, 1.0, 3, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(WalkStrategy({"x", 1.0, -1.0, 3, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(WalkStrategy({"x", 1.0, 1.0, 1, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(WalkStrategy({"x", 1.0, 1.0, 3, 0}).validate(), std::invalid_argument);
}
