#include "rawgnn/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace rawgnn {

void ModelConfig::validate() const {
  if (input_dim < 1) throw std::invalid_argument("ModelConfig: input_dim must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("ModelConfig: hidden_dim must be >= 1");
  if (heads < 1) throw std::invalid_argument("ModelConfig: heads must be >= 1");
  if (num_classes < 1) throw std::invalid_argument("ModelConfig: num_classes must be >= 1");
  if (strategies.empty()) throw std::invalid_argument("ModelConfig: no strategies configured");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("ModelConfig: dropout must be in [0,1)");
  std::set<std::string> names;
  for (const auto& s : strategies) {
    s.validate();
    if (!names.insert(s.name).second)
      throw std::invalid_argument("ModelConfig: duplicate strategy name " + s.name);
  }
}

std::string Model::strategy_key(std::size_t idx) const {
  return cfg_.share_parameters ? std::string("shared") : cfg_.strategies.at(idx).name;
}

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t f = cfg_.input_dim, d = cfg_.hidden_dim;
  std::set<std::string> done;
  for (std::size_t s = 0; s < cfg_.strategies.size(); ++s) {
    const std::string key = strategy_key(s);
    if (!done.insert(key).second) continue;  // shared parameters registered once
    const std::string gp = "gru/" + key + "/";
    params_.add(gp + "wz", {f, d}, InitSpec::glorot(f, d));
    params_.add(gp + "wr", {f, d}, InitSpec::glorot(f, d));
    params_.add(gp + "wh", {f, d}, InitSpec::glorot(f, d));
    params_.add(gp + "uz", {d, d}, InitSpec::glorot(d, d));
    params_.add(gp + "ur", {d, d}, InitSpec::glorot(d, d));
    params_.add(gp + "uh", {d, d}, InitSpec::glorot(d, d));
    params_.add(gp + "bz", {d}, InitSpec::zeros());
    params_.add(gp + "br", {d}, InitSpec::zeros());
    params_.add(gp + "bh", {d}, InitSpec::zeros());
    const double att_bound = std::sqrt(3.0 / static_cast<double>(d));
    for (std::size_t h = 0; h < cfg_.heads; ++h)
      params_.add("att/" + key + "/h" + std::to_string(h), {d}, InitSpec::uniform(att_bound));
  }
  params_.add("classifier/w", {cfg_.d_final(), cfg_.num_classes},
              InitSpec::glorot(cfg_.d_final(), cfg_.num_classes));
}

Model::Bound Model::bind(Tape& tape, bool trainable) const {
  Bound b;
  auto bind_one = [&](const std::string& name) {
    Tensor t = tape.leaf(params_.value(name), trainable);
    b.named.emplace_back(name, t);
    return t;
  };
  std::map<std::string, GruParams> gru_cache;
  std::map<std::string, std::vector<Tensor>> att_cache;
  for (std::size_t s = 0; s < cfg_.strategies.size(); ++s) {
    const std::string key = strategy_key(s);
    if (!gru_cache.count(key)) {
      const std::string gp = "gru/" + key + "/";
      GruParams p;
      p.wz = bind_one(gp + "wz");
      p.wr = bind_one(gp + "wr");
      p.wh = bind_one(gp + "wh");
      p.uz = bind_one(gp + "uz");
      p.ur = bind_one(gp + "ur");
      p.uh = bind_one(gp + "uh");
      p.bz = bind_one(gp + "bz");
      p.br = bind_one(gp + "br");
      p.bh = bind_one(gp + "bh");
      gru_cache[key] = p;
      std::vector<Tensor> att;
      for (std::size_t h = 0; h < cfg_.heads; ++h)
        att.push_back(bind_one("att/" + key + "/h" + std::to_string(h)));
      att_cache[key] = std::move(att);
    }
    b.gru.push_back(gru_cache[key]);
    b.att.push_back(att_cache[key]);
  }
  b.classifier = bind_one("classifier/w");
  return b;
}

namespace {

// Promotes a rank-1 tensor to a single-row matrix.
Tensor as_matrix(const Tensor& t) {
  if (t.value().ndim() == 1) return reshape(t, {1, t.value().dim(0)});
  return t;
}

}  // namespace

Tensor gru_cell(const Tensor& x, const Tensor& h, const GruParams& p) {
  const bool vector_in = x.value().ndim() == 1;
  if (vector_in != (h.value().ndim() == 1))
    throw std::invalid_argument("gru_cell: x and h must have matching rank");
  Tensor xm = as_matrix(x), hm = as_matrix(h);
  Tensor pz = matmul(xm, p.wz);
  Tensor pr = matmul(xm, p.wr);
  Tensor ph = matmul(xm, p.wh);
  Tensor out = gru_step(pz, pr, ph, {}, hm, p.uz, p.ur, p.uh, p.bz, p.br, p.bh);
  if (vector_in) return reshape(out, {out.value().dim(1)});
  return out;
}

Tensor encode_path(Tape& tape, const std::vector<std::int32_t>& path_nodes,
                   const Tensor& features, const GruParams& p) {
  if (path_nodes.empty()) throw std::invalid_argument("encode_path: empty path");
  const std::size_t d = p.uz.value().dim(0);
  Tensor h = tape.leaf(Array({1, d}), false);
  for (std::int32_t node : path_nodes) {
    Tensor x = gather_rows(features, {node});
    h = gru_cell(x, h, p);
  }
  return reshape(h, {d});
}

Tensor intra_strategy_combine(const Tensor& path_embs, std::size_t walks_per_node,
                              const std::vector<Tensor>& head_attention, double leaky_slope,
                              std::vector<Array>* alphas_out) {
  if (head_attention.empty())
    throw std::invalid_argument("intra_strategy_combine: no attention heads");
  if (path_embs.value().ndim() != 2)
    throw std::invalid_argument("intra_strategy_combine: path embeddings must be (G*R, d)");
  const std::size_t total = path_embs.value().dim(0);
  if (walks_per_node == 0 || total % walks_per_node != 0)
    throw std::invalid_argument("intra_strategy_combine: rows not divisible by R");
  const std::size_t groups = total / walks_per_node;
  std::vector<Tensor> heads_out;
  heads_out.reserve(head_attention.size());
  if (alphas_out) alphas_out->clear();
  for (const Tensor& a : head_attention) {
    Tensor e = leaky_relu(matvec(path_embs, a), leaky_slope);
    Tensor alpha = softmax(reshape(e, {groups, walks_per_node}));
    if (alphas_out) alphas_out->push_back(alpha.value());
    heads_out.push_back(elu(group_weighted_sum(path_embs, alpha)));
  }
  return concat(heads_out, 1);
}

Tensor intra_strategy_combine(const std::vector<Tensor>& path_embs,
                              const std::vector<Tensor>& head_attention, double leaky_slope) {
  if (path_embs.empty())
    throw std::invalid_argument("intra_strategy_combine: empty neighborhood");
  std::vector<Tensor> rows;
  rows.reserve(path_embs.size());
  for (const Tensor& h : path_embs) rows.push_back(as_matrix(h));
  Tensor stacked = rows.size() == 1 ? rows[0] : concat(rows, 0);
  Tensor out = intra_strategy_combine(stacked, path_embs.size(), head_attention, leaky_slope);
  return reshape(out, {out.value().dim(1)});
}

Tensor inter_strategy_combine(const std::vector<Tensor>& per_strategy) {
  if (per_strategy.empty())
    throw std::invalid_argument("inter_strategy_combine: missing strategy embeddings");
  const std::size_t rank = per_strategy[0].value().ndim();
  for (const Tensor& t : per_strategy)
    if (t.value().ndim() != rank)
      throw std::invalid_argument("inter_strategy_combine: mixed ranks");
  if (per_strategy.size() == 1) return per_strategy[0];
  return concat(per_strategy, rank == 1 ? 0 : 1);
}

Tensor classify(const Tensor& h, const Tensor& w) {
  if (h.value().ndim() == 1) {
    Tensor logits = matmul(as_matrix(h), w);
    return reshape(softmax(logits), {logits.value().dim(1)});
  }
  return softmax(matmul(h, w));
}

Tensor loss(const Tensor& probs, const LabelSet& ls, const std::vector<std::int32_t>& mask) {
  if (mask.empty()) throw std::invalid_argument("loss: empty mask");
  std::vector<std::int32_t> classes;
  classes.reserve(mask.size());
  for (std::int32_t i : mask) classes.push_back(ls.label(i));
  return masked_nll(probs, mask, classes);
}

ForwardResult forward(const Graph& g, const std::vector<NeighborhoodSet>& neighborhoods,
                      const Model& model, Tape& tape, bool training, RngStream& dropout_rng,
                      Model::Bound* bound_out) {
  const ModelConfig& cfg = model.config();
  cfg.validate();
  if (cfg.input_dim != g.feature_dim())
    throw std::invalid_argument("forward: config input_dim " + std::to_string(cfg.input_dim) +
                                " != graph feature dim " + std::to_string(g.feature_dim()));
  if (neighborhoods.size() != cfg.strategies.size())
    throw std::invalid_argument("forward: expected " + std::to_string(cfg.strategies.size()) +
                                " neighborhood sets, got " +
                                std::to_string(neighborhoods.size()));
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  for (std::size_t s = 0; s < neighborhoods.size(); ++s) {
    const NeighborhoodSet& ns = neighborhoods[s];
    const WalkStrategy& ws = cfg.strategies[s];
    if (ns.strategy != ws.name || ns.R != ws.walks_per_node || ns.K != ws.length)
      throw std::invalid_argument("forward: neighborhood set " + std::to_string(s) +
                                  " does not match strategy " + ws.name);
    if (ns.num_nodes != g.num_nodes() ||
        ns.nodes.size() != n * static_cast<std::size_t>(ns.R) * static_cast<std::size_t>(ns.K))
      throw std::invalid_argument("forward: neighborhood set " + std::to_string(s) +
                                  " does not cover every node");
  }

  Model::Bound bp = model.bind(tape, /*trainable=*/training);
  if (bound_out) *bound_out = bp;
  Tensor x = tape.leaf(g.features(), false);
  Tensor xd = dropout(x, cfg.dropout, training, dropout_rng);

  std::vector<Tensor> per_strategy;
  per_strategy.reserve(cfg.strategies.size());
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
    const NeighborhoodSet& ns = neighborhoods[s];
    const std::size_t batch = n * static_cast<std::size_t>(ns.R);
    // project features once per strategy, then gather projected rows per step
    Tensor pz = matmul(xd, bp.gru[s].wz);
    Tensor pr = matmul(xd, bp.gru[s].wr);
    Tensor ph = matmul(xd, bp.gru[s].wh);
    Tensor h = tape.leaf(Array({batch, cfg.hidden_dim}), false);
    for (int k = 0; k < ns.K; ++k) {
      std::vector<std::int32_t> idx(batch);
      for (std::size_t b = 0; b < batch; ++b)
        idx[b] = ns.nodes[b * static_cast<std::size_t>(ns.K) + static_cast<std::size_t>(k)];
      h = gru_step(pz, pr, ph, std::move(idx), h, bp.gru[s].uz, bp.gru[s].ur, bp.gru[s].uh,
                   bp.gru[s].bz, bp.gru[s].br, bp.gru[s].bh);
    }
    per_strategy.push_back(intra_strategy_combine(h, static_cast<std::size_t>(ns.R), bp.att[s],
                                                  cfg.leaky_slope));
  }

  Tensor emb = inter_strategy_combine(per_strategy);
  Tensor emb_d = dropout(emb, cfg.dropout, training, dropout_rng);
  Tensor probs = classify(emb_d, bp.classifier);
  return {probs, emb};
}

}  // namespace rawgnn
