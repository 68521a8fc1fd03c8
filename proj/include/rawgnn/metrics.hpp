#pragma once

#include <cstdint>
#include <vector>

#include "rawgnn/array.hpp"
#include "rawgnn/graph.hpp"

namespace rawgnn {

enum class SimilarityKind { label_equality, cosine };

// Mean endpoint similarity over each undirected edge counted once.
// label_equality: 1 when labels match, 0 otherwise (requires labeled
// endpoints). cosine: cosine of feature rows, clamped to [0,1]; zero rows
// contribute 0.
double edge_homophily(const Graph& g, const LabelSet& ls, SimilarityKind kind);

double label_edge_homophily(const Graph& g, const LabelSet& ls);
double cosine_edge_homophily(const Graph& g);

// Argmax class per row; exact ties resolve to the lowest class index.
std::vector<std::int32_t> predict_classes(const Array& probs);

// Fraction of mask nodes whose prediction matches the label.
double accuracy(const std::vector<std::int32_t>& preds, const LabelSet& ls,
                const std::vector<std::int32_t>& mask);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd aggregate_runs(const std::vector<double>& values);

}  // namespace rawgnn
