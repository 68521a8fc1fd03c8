#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rawgnn/graph.hpp"

namespace rawgnn {

struct Dataset {
  Graph graph;
  LabelSet labels;
};

// Edge file: one "src<TAB>dst" pair per line, 0-based ids, '#' comments.
std::vector<std::pair<std::int32_t, std::int32_t>> load_edge_list(const std::string& path);

// Feature file: header "n f" (optionally followed by --sparse), then either
// n dense rows or "i j v" triplets.
Array load_features(const std::string& path);

// Label file: one "node<TAB>class" per line; absent nodes are unlabeled.
std::vector<std::pair<std::int32_t, std::int32_t>> load_label_pairs(const std::string& path);

// Loads and validates the full dataset; the graph is symmetrized and
// deduplicated, self-loops dropped.
Dataset load_dataset(const std::string& edge_path, const std::string& feature_path,
                     const std::string& label_path);

// Conventional layout: <dir>/edges.tsv, <dir>/features.txt, <dir>/labels.tsv.
Dataset load_dataset_dir(const std::string& dir);
bool dataset_dir_exists(const std::string& dir);

void save_edges(const std::string& path, const Graph& g);
void save_features(const std::string& path, const Array& features, bool sparse);
void save_labels(const std::string& path, const LabelSet& ls);

}  // namespace rawgnn
