#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rawgnn/graph.hpp"
#include "rawgnn/params.hpp"
#include "rawgnn/tape.hpp"
#include "rawgnn/walker.hpp"

namespace rawgnn {

struct ModelConfig {
  std::size_t input_dim = 0;    // f
  std::size_t hidden_dim = 32;  // d_L
  std::size_t heads = 2;        // H
  std::size_t num_classes = 0;  // |C|
  std::vector<WalkStrategy> strategies;  // ordered channel list
  double dropout = 0.5;
  double leaky_slope = 0.2;
  bool share_parameters = false;  // one GRU/attention set for all strategies

  std::size_t d_final() const { return heads * hidden_dim * strategies.size(); }
  void validate() const;
};

// Bound GRU parameter handles on a tape: input projections (f x d),
// recurrent matrices (d x d) and gate biases (d).
struct GruParams {
  Tensor wz, wr, wh;
  Tensor uz, ur, uh;
  Tensor bz, br, bh;
};

// The network: per-strategy GRU path encoders, per-strategy multi-head
// attention over path embeddings, concatenation across strategies, linear
// classifier. Owns the parameters; forward passes bind them onto a tape.
class Model {
 public:
  explicit Model(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  void init(std::uint64_t seed) { params_.init_all(seed); }

  struct Bound {
    std::vector<GruParams> gru;            // one per strategy
    std::vector<std::vector<Tensor>> att;  // [strategy][head] -> (d) vector
    Tensor classifier;                     // (d_final, num_classes)
    std::vector<std::pair<std::string, Tensor>> named;  // for grad harvesting
  };
  // trainable=false binds constant leaves: evaluation then records no
  // backward state at all.
  Bound bind(Tape& tape, bool trainable = true) const;

  std::string strategy_key(std::size_t idx) const;

 private:
  ModelConfig cfg_;
  ParamStore params_;
};

// One GRU step: z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
// hcand = tanh(Wh x + Uh (r*h) + bh), out = (1-z)*h + z*hcand.
// x is (B, f) or (f); h is (B, d) or (d); output rank matches the inputs.
Tensor gru_cell(const Tensor& x, const Tensor& h, const GruParams& p);

// Runs gru_cell over the path's node features in order (target last) with a
// zero initial state; returns the final hidden state (d).
Tensor encode_path(Tape& tape, const std::vector<std::int32_t>& path_nodes,
                   const Tensor& features, const GruParams& p);

// Batched attention combination: path_embs is (G*R, d) with each node's R
// path embeddings contiguous; returns (G, H*d) with head outputs
// concatenated. Attention logits are LeakyReLU(a . h_P), normalized with
// softmax over each node's paths; head outputs pass through ELU.
// alphas_out, when given, receives each head's (G, R) attention weights.
Tensor intra_strategy_combine(const Tensor& path_embs, std::size_t walks_per_node,
                              const std::vector<Tensor>& head_attention, double leaky_slope,
                              std::vector<Array>* alphas_out = nullptr);

// Single-node variant over a list of (d) path embeddings; returns (H*d).
Tensor intra_strategy_combine(const std::vector<Tensor>& path_embs,
                              const std::vector<Tensor>& head_attention, double leaky_slope);

// Concatenation in the configured strategy order; (G, H*d) inputs give
// (G, d_final), rank-1 inputs give (d_final).
Tensor inter_strategy_combine(const std::vector<Tensor>& per_strategy);

// softmax(h . W) row-wise.
Tensor classify(const Tensor& h, const Tensor& w);

// Mean cross-entropy over the mask: -(1/|mask|) sum log(probs[i, y_i]),
// probabilities clamped at 1e-12.
Tensor loss(const Tensor& probs, const LabelSet& ls, const std::vector<std::int32_t>& mask);

struct ForwardResult {
  Tensor probs;       // (n, |C|)
  Tensor embeddings;  // (n, d_final), before the classifier dropout
};

// Full pass over all nodes: encode every path, combine per strategy,
// concatenate, classify. neighborhoods must hold one set per configured
// strategy, in order, covering every node. bound_out, when given, receives
// the bound parameter handles (for gradient harvesting after backward).
ForwardResult forward(const Graph& g, const std::vector<NeighborhoodSet>& neighborhoods,
                      const Model& model, Tape& tape, bool training, RngStream& dropout_rng,
                      Model::Bound* bound_out = nullptr);

}  // namespace rawgnn
