#include "rawgnn/walker.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace rawgnn {

void WalkStrategy::validate() const {
  if (!(p > 0.0)) throw std::invalid_argument("WalkStrategy: p must be > 0");
  if (!(q > 0.0)) throw std::invalid_argument("WalkStrategy: q must be > 0");
  if (length < 2) throw std::invalid_argument("WalkStrategy: length K must be >= 2");
  if (walks_per_node < 1) throw std::invalid_argument("WalkStrategy: R must be >= 1");
}

std::vector<double> transition_weights(const Graph& g, std::int32_t t, std::int32_t s, double p,
                                       double q) {
  auto nb = g.neighbors(s);
  if (nb.empty())
    throw std::invalid_argument("transition_weights: node " + std::to_string(s) +
                                " has no neighbors");
  std::vector<double> w(nb.size());
  if (t < 0) {  // no predecessor: uniform first step
    std::fill(w.begin(), w.end(), 1.0);
    return w;
  }
  if (!g.has_edge(t, s))
    throw std::invalid_argument("transition_weights: t=" + std::to_string(t) +
                                " is not adjacent to s=" + std::to_string(s));
  for (std::size_t i = 0; i < nb.size(); ++i) {
    const std::int32_t r = nb[i];
    if (r == t)
      w[i] = 1.0 / p;  // d_tr = 0
    else if (g.has_edge(t, r))
      w[i] = 1.0;  // d_tr = 1
    else
      w[i] = 1.0 / q;  // d_tr = 2
  }
  return w;
}

std::int32_t walk_step(const Graph& g, std::int32_t t, std::int32_t s, double p, double q,
                       RngStream& rng) {
  auto nb = g.neighbors(s);
  if (t < 0) return nb[rng.next_index(nb.size())];
  const std::vector<double> w = transition_weights(g, t, s, p, q);
  return nb[rng.next_weighted(w)];
}

Path sample_walk(const Graph& g, std::int32_t target, const WalkStrategy& ws, RngStream& rng) {
  ws.validate();
  if (target < 0 || target >= g.num_nodes())
    throw std::out_of_range("sample_walk: target " + std::to_string(target) + " out of range");
  std::vector<std::int32_t> seq;
  seq.reserve(static_cast<std::size_t>(ws.length));
  seq.push_back(target);
  std::int32_t prev = -1;
  while (seq.size() < static_cast<std::size_t>(ws.length)) {
    const std::int32_t cur = seq.back();
    if (g.degree(cur) == 0) {  // isolated or dead end: repeat until length K
      seq.push_back(cur);
      continue;
    }
    const std::int32_t next = walk_step(g, prev, cur, ws.p, ws.q, rng);
    prev = cur;
    seq.push_back(next);
  }
  std::reverse(seq.begin(), seq.end());
  return Path{std::move(seq), target, ws.name};
}

std::vector<Path> sample_neighborhood(const Graph& g, std::int32_t target,
                                      const WalkStrategy& ws, RngStream& rng) {
  std::vector<Path> out;
  out.reserve(static_cast<std::size_t>(ws.walks_per_node));
  for (int r = 0; r < ws.walks_per_node; ++r) out.push_back(sample_walk(g, target, ws, rng));
  return out;
}

NeighborhoodSet sample_all_neighborhoods(const Graph& g, const WalkStrategy& ws,
                                         std::uint64_t seed, std::uint64_t stream_tag) {
  ws.validate();
  NeighborhoodSet ns;
  ns.strategy = ws.name;
  ns.R = ws.walks_per_node;
  ns.K = ws.length;
  ns.num_nodes = g.num_nodes();
  const std::size_t per_node = static_cast<std::size_t>(ws.walks_per_node) *
                               static_cast<std::size_t>(ws.length);
  ns.nodes.resize(static_cast<std::size_t>(g.num_nodes()) * per_node);
  const std::int64_t n = g.num_nodes();
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    RngStream rng(seed, mix_stream(stream_tag, static_cast<std::uint64_t>(i)));
    std::int32_t* dst = ns.nodes.data() + static_cast<std::size_t>(i) * per_node;
    for (int r = 0; r < ws.walks_per_node; ++r) {
      const Path path = sample_walk(g, static_cast<std::int32_t>(i), ws, rng);
      std::copy(path.nodes.begin(), path.nodes.end(), dst + static_cast<std::size_t>(r) * ws.length);
    }
  }
  return ns;
}

void dump_walks(std::ostream& out, const NeighborhoodSet& ns) {
  for (std::int32_t i = 0; i < ns.num_nodes; ++i)
    for (int r = 0; r < ns.R; ++r) {
      out << ns.strategy << "\t" << i << "\t";
      for (int k = 0; k < ns.K; ++k) out << (k ? "," : "") << ns.at(i, r, k);
      out << "\n";
    }
}

}  // namespace rawgnn
