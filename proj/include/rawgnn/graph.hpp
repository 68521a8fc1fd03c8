#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rawgnn/array.hpp"

namespace rawgnn {

// Immutable undirected attributed graph in CSR form. Neighbor lists are
// sorted, deduplicated and carry no self-loops; every edge appears in both
// endpoint lists. Safe for concurrent reads.
class Graph {
 public:
  // Symmetrizes the edge list, drops duplicates and self-loops, validates
  // feature rows (finite, n rows).
  static Graph build(std::int32_t num_nodes,
                     const std::vector<std::pair<std::int32_t, std::int32_t>>& edges,
                     Array features);

  std::int32_t num_nodes() const { return n_; }
  std::int64_t num_edges() const { return num_edges_; }  // each undirected edge once
  std::size_t feature_dim() const { return features_.ndim() == 2 ? features_.dim(1) : 0; }

  std::span<const std::int32_t> neighbors(std::int32_t i) const;
  std::int32_t degree(std::int32_t i) const;
  bool has_edge(std::int32_t i, std::int32_t j) const;  // binary search

  const Array& features() const { return features_; }

  // Each undirected edge once, as (i, j) with i < j.
  std::vector<std::pair<std::int32_t, std::int32_t>> edge_list() const;

 private:
  std::int32_t n_ = 0;
  std::int64_t num_edges_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<std::int32_t> adj_;
  Array features_;
};

// Sorted neighbor list of node i (spec op; range-checked).
std::span<const std::int32_t> neighbors(const Graph& g, std::int32_t i);

// Per-node class labels over {0..num_classes-1}, with possibly unlabeled
// nodes. A protection mask supports test-leak auditing: reading a protected
// node's label throws until unprotect() is called.
class LabelSet {
 public:
  static constexpr std::int32_t kUnlabeled = -1;

  LabelSet() = default;
  // pairs: (node, class); nodes absent stay unlabeled.
  static LabelSet build(std::int32_t num_nodes,
                        const std::vector<std::pair<std::int32_t, std::int32_t>>& pairs);

  std::int32_t num_nodes() const { return static_cast<std::int32_t>(labels_.size()); }
  std::int32_t num_classes() const { return num_classes_; }
  bool is_labeled(std::int32_t i) const;
  std::int32_t label(std::int32_t i) const;  // throws on unlabeled or protected reads
  const std::vector<std::int32_t>& labeled_nodes() const { return labeled_; }

  void protect(const std::vector<std::int32_t>& nodes);
  void unprotect();
  bool is_protected(std::int32_t i) const;

 private:
  std::vector<std::int32_t> labels_;
  std::vector<std::int32_t> labeled_;
  std::int32_t num_classes_ = 0;
  std::vector<bool> protected_;
};

}  // namespace rawgnn
