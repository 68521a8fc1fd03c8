#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rawgnn/graph.hpp"
#include "rawgnn/rng.hpp"

namespace rawgnn {

// Second-order walk parameterization. Small p / large q keeps walks near the
// start (BFS-like); large p / small q pushes them outward (DFS-like).
struct WalkStrategy {
  std::string name = "custom";  // bfs | dfs | custom
  double p = 1.0;               // return parameter
  double q = 1.0;               // in-out parameter
  int length = 4;               // K, nodes per path
  int walks_per_node = 6;       // R

  static WalkStrategy bfs(int length = 4, int walks_per_node = 6) {
    return {"bfs", 0.1, 10.0, length, walks_per_node};
  }
  static WalkStrategy dfs(int length = 4, int walks_per_node = 6) {
    return {"dfs", 10.0, 0.1, length, walks_per_node};
  }

  void validate() const;
};

// Ordered node sequence of length K whose last element is the target.
// Consecutive nodes are adjacent except along the self-repeat fallback for
// isolated nodes.
struct Path {
  std::vector<std::int32_t> nodes;
  std::int32_t target = -1;
  std::string strategy;
};

// Unnormalized transition weights for every neighbor of s, given the walk
// arrived from t: 1/p to return to t, 1 to a common neighbor of t, 1/q
// otherwise. t = -1 (no predecessor) gives uniform weights.
std::vector<double> transition_weights(const Graph& g, std::int32_t t, std::int32_t s, double p,
                                       double q);

// One biased step: samples the next node from transition_weights.
std::int32_t walk_step(const Graph& g, std::int32_t t, std::int32_t s, double p, double q,
                       RngStream& rng);

// Walks K nodes outward from target (uniform first step, then biased), and
// returns the sequence reversed so the target sits last. Isolated nodes
// yield [target, ..., target].
Path sample_walk(const Graph& g, std::int32_t target, const WalkStrategy& ws, RngStream& rng);

// R independent paths for one target.
std::vector<Path> sample_neighborhood(const Graph& g, std::int32_t target,
                                      const WalkStrategy& ws, RngStream& rng);

// All walks for one strategy and epoch, flattened: node i, walk r, position k
// lives at [(i*R + r)*K + k]. Sampling is parallel over nodes; each node uses
// stream (seed, mix(tag, node)), so results do not depend on thread count.
struct NeighborhoodSet {
  std::string strategy;
  int R = 0;
  int K = 0;
  std::int32_t num_nodes = 0;
  std::vector<std::int32_t> nodes;

  std::int32_t at(std::int32_t node, int walk, int pos) const {
    return nodes[(static_cast<std::size_t>(node) * static_cast<std::size_t>(R) +
                  static_cast<std::size_t>(walk)) *
                     static_cast<std::size_t>(K) +
                 static_cast<std::size_t>(pos)];
  }
};

NeighborhoodSet sample_all_neighborhoods(const Graph& g, const WalkStrategy& ws,
                                         std::uint64_t seed, std::uint64_t stream_tag);

// Debug corpus: one "strategy<TAB>target<TAB>v1,v2,...,vK" line per path.
void dump_walks(std::ostream& out, const NeighborhoodSet& ns);

}  // namespace rawgnn
