#include "rawgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rawgnn {

Graph Graph::build(std::int32_t num_nodes,
                   const std::vector<std::pair<std::int32_t, std::int32_t>>& edges,
                   Array features) {
  if (num_nodes < 0) throw std::invalid_argument("Graph: negative node count");
  if (features.ndim() != 2 || features.dim(0) != static_cast<std::size_t>(num_nodes))
    throw std::invalid_argument("Graph: feature matrix must be (n, f), got " +
                                features.shape_str() + " for n=" + std::to_string(num_nodes));
  for (std::size_t i = 0; i < features.numel(); ++i)
    if (!std::isfinite(features[i]))
      throw std::invalid_argument("Graph: non-finite feature value at flat index " +
                                  std::to_string(i));

  std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(num_nodes));
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= num_nodes || b < 0 || b >= num_nodes)
      throw std::out_of_range("Graph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                              ") out of range for n=" + std::to_string(num_nodes));
    if (a == b) continue;  // self-loops dropped
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }

  Graph g;
  g.n_ = num_nodes;
  g.features_ = std::move(features);
  g.offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  std::int64_t total = 0;
  for (std::int32_t i = 0; i < num_nodes; ++i) {
    total += static_cast<std::int64_t>(adj[static_cast<std::size_t>(i)].size());
    g.offsets_[static_cast<std::size_t>(i) + 1] = total;
  }
  g.adj_.reserve(static_cast<std::size_t>(total));
  for (auto& nb : adj) g.adj_.insert(g.adj_.end(), nb.begin(), nb.end());
  g.num_edges_ = total / 2;
  return g;
}

std::span<const std::int32_t> Graph::neighbors(std::int32_t i) const {
  if (i < 0 || i >= n_)
    throw std::out_of_range("Graph::neighbors: node " + std::to_string(i) +
                            " out of range for n=" + std::to_string(n_));
  const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i)]);
  const auto e = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i) + 1]);
  return {adj_.data() + b, e - b};
}

std::int32_t Graph::degree(std::int32_t i) const {
  return static_cast<std::int32_t>(neighbors(i).size());
}

bool Graph::has_edge(std::int32_t i, std::int32_t j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<std::pair<std::int32_t, std::int32_t>> Graph::edge_list() const {
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  out.reserve(static_cast<std::size_t>(num_edges_));
  for (std::int32_t i = 0; i < n_; ++i)
    for (std::int32_t j : neighbors(i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

std::span<const std::int32_t> neighbors(const Graph& g, std::int32_t i) {
  return g.neighbors(i);
}

LabelSet LabelSet::build(std::int32_t num_nodes,
                         const std::vector<std::pair<std::int32_t, std::int32_t>>& pairs) {
  LabelSet ls;
  ls.labels_.assign(static_cast<std::size_t>(num_nodes), kUnlabeled);
  for (const auto& [node, cls] : pairs) {
    if (node < 0 || node >= num_nodes)
      throw std::out_of_range("LabelSet: node " + std::to_string(node) + " out of range");
    if (cls < 0) throw std::invalid_argument("LabelSet: negative class for node " +
                                             std::to_string(node));
    ls.labels_[static_cast<std::size_t>(node)] = cls;
    ls.num_classes_ = std::max(ls.num_classes_, cls + 1);
  }
  for (std::int32_t i = 0; i < num_nodes; ++i)
    if (ls.labels_[static_cast<std::size_t>(i)] != kUnlabeled) ls.labeled_.push_back(i);
  return ls;
}

bool LabelSet::is_labeled(std::int32_t i) const {
  return labels_.at(static_cast<std::size_t>(i)) != kUnlabeled;
}

std::int32_t LabelSet::label(std::int32_t i) const {
  if (!protected_.empty() && protected_.at(static_cast<std::size_t>(i)))
    throw std::logic_error("LabelSet: audited read of protected label for node " +
                           std::to_string(i));
  const std::int32_t l = labels_.at(static_cast<std::size_t>(i));
  if (l == kUnlabeled)
    throw std::logic_error("LabelSet: node " + std::to_string(i) + " is unlabeled");
  return l;
}

void LabelSet::protect(const std::vector<std::int32_t>& nodes) {
  protected_.assign(labels_.size(), false);
  for (std::int32_t i : nodes) protected_.at(static_cast<std::size_t>(i)) = true;
}

void LabelSet::unprotect() { protected_.clear(); }

bool LabelSet::is_protected(std::int32_t i) const {
  return !protected_.empty() && protected_.at(static_cast<std::size_t>(i));
}

}  // namespace rawgnn
