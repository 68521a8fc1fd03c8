#include "rawgnn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace rawgnn {

double label_edge_homophily(const Graph& g, const LabelSet& ls) {
  const auto edges = g.edge_list();
  if (edges.empty()) throw std::invalid_argument("edge_homophily: graph has no edges");
  double same = 0.0;
  for (const auto& [a, b] : edges)
    if (ls.label(a) == ls.label(b)) same += 1.0;
  return same / static_cast<double>(edges.size());
}

double cosine_edge_homophily(const Graph& g) {
  const auto edges = g.edge_list();
  if (edges.empty()) throw std::invalid_argument("edge_homophily: graph has no edges");
  const Array& x = g.features();
  const std::size_t f = g.feature_dim();
  std::vector<double> norms(static_cast<std::size_t>(g.num_nodes()), 0.0);
  for (std::int32_t i = 0; i < g.num_nodes(); ++i) {
    double s = 0.0;
    const double* xi = x.data() + static_cast<std::size_t>(i) * f;
    for (std::size_t j = 0; j < f; ++j) s += xi[j] * xi[j];
    norms[static_cast<std::size_t>(i)] = std::sqrt(s);
  }
  double total = 0.0;
  for (const auto& [a, b] : edges) {
    const double na = norms[static_cast<std::size_t>(a)];
    const double nb = norms[static_cast<std::size_t>(b)];
    if (na == 0.0 || nb == 0.0) continue;  // zero rows contribute similarity 0
    const double* xa = x.data() + static_cast<std::size_t>(a) * f;
    const double* xb = x.data() + static_cast<std::size_t>(b) * f;
    double dot = 0.0;
    for (std::size_t j = 0; j < f; ++j) dot += xa[j] * xb[j];
    const double c = dot / (na * nb);
    total += std::max(0.0, std::min(1.0, c));  // clamp into the declared [0,1] codomain
  }
  return total / static_cast<double>(edges.size());
}

double edge_homophily(const Graph& g, const LabelSet& ls, SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::label_equality:
      return label_edge_homophily(g, ls);
    case SimilarityKind::cosine:
      return cosine_edge_homophily(g);
  }
  throw std::invalid_argument("edge_homophily: unknown similarity kind");
}

std::vector<std::int32_t> predict_classes(const Array& probs) {
  if (probs.ndim() != 2) throw std::invalid_argument("predict_classes: expected (n, C)");
  const std::size_t n = probs.dim(0), c = probs.dim(1);
  std::vector<std::int32_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs.data() + i * c;
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (row[j] > row[best]) best = j;  // strict: ties keep the lowest index
    out[i] = static_cast<std::int32_t>(best);
  }
  return out;
}

double accuracy(const std::vector<std::int32_t>& preds, const LabelSet& ls,
                const std::vector<std::int32_t>& mask) {
  if (mask.empty()) throw std::invalid_argument("accuracy: empty mask");
  double correct = 0.0;
  for (std::int32_t i : mask) {
    if (static_cast<std::size_t>(i) >= preds.size())
      throw std::out_of_range("accuracy: prediction missing for node " + std::to_string(i));
    if (preds[static_cast<std::size_t>(i)] == ls.label(i)) correct += 1.0;
  }
  return correct / static_cast<double>(mask.size());
}

MeanStd aggregate_runs(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("aggregate_runs: empty input");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

}  // namespace rawgnn
