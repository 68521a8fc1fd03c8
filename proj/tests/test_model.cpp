#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rawgnn/model.hpp"
#include "support/test_util.hpp"

using namespace rawgnn;
using namespace rawgnn::testutil;

namespace {

GruParams zero_gru(Tape& tape, std::size_t f, std::size_t d) {
  GruParams p;
  p.wz = tape.leaf(Array({f, d}));
  p.wr = tape.leaf(Array({f, d}));
  p.wh = tape.leaf(Array({f, d}));
  p.uz = tape.leaf(Array({d, d}));
  p.ur = tape.leaf(Array({d, d}));
  p.uh = tape.leaf(Array({d, d}));
  p.bz = tape.leaf(Array({d}));
  p.br = tape.leaf(Array({d}));
  p.bh = tape.leaf(Array({d}));
  return p;
}

Graph toy_graph(std::size_t f, std::uint64_t seed) {
  RngStream rng(seed, 0);
  // 6 nodes: two triangles joined by one edge
  std::vector<std::pair<std::int32_t, std::int32_t>> edges = {{0, 1}, {1, 2}, {0, 2},
                                                              {3, 4}, {4, 5}, {3, 5},
                                                              {2, 3}};
  Array features = random_array({6, f}, rng, -1.0, 1.0);
  return Graph::build(6, edges, features);
}

ModelConfig toy_config(std::size_t f) {
  ModelConfig cfg;
  cfg.input_dim = f;
  cfg.hidden_dim = 4;
  cfg.heads = 2;
  cfg.num_classes = 2;
  cfg.strategies = {WalkStrategy::bfs(3, 2), WalkStrategy::dfs(3, 2)};
  cfg.dropout = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("gru_cell with zero parameters") {
  Tape tape;
  GruParams p = zero_gru(tape, 3, 4);
  Tensor x = tape.leaf(Array({3}, {1.0, -2.0, 0.5}));
  {
    Tensor h = tape.leaf(Array({4}));
    Tensor out = gru_cell(x, h, p);
    REQUIRE(out.value().shape() == std::vector<std::size_t>{4});
    for (int i = 0; i < 4; ++i) CHECK(out.value()[i] == doctest::Approx(0.0));
  }
  {
    // zero params, h = v: z = sigmoid(0) = 0.5 and hcand = 0, so out = 0.5*v
    Tensor h = tape.leaf(Array({4}, {1.0, 2.0, -3.0, 4.0}));
    Tensor out = gru_cell(x, h, p);
    for (int i = 0; i < 4; ++i)
      CHECK(out.value()[i] == doctest::Approx(0.5 * h.value()[i]).epsilon(1e-12));
  }
}

TEST_CASE("gru_cell gradient through the model-facing wrapper") {
  ParamStore ps;
  RngStream rng(55, 0);
  const std::size_t f = 3, d = 4;
  for (const char* n : {"wz", "wr", "wh"}) {
    ps.add(n, {f, d}, InitSpec::uniform(1));
    ps.value(n) = random_array({f, d}, rng, -0.7, 0.7);
  }
  for (const char* n : {"uz", "ur", "uh"}) {
    ps.add(n, {d, d}, InitSpec::uniform(1));
    ps.value(n) = random_array({d, d}, rng, -0.7, 0.7);
  }
  for (const char* n : {"bz", "br", "bh"}) {
    ps.add(n, {d}, InitSpec::uniform(1));
    ps.value(n) = random_array({d}, rng, -0.5, 0.5);
  }
  ps.add("x", {2, f}, InitSpec::uniform(1));
  ps.value("x") = random_array({2, f}, rng, -1.0, 1.0);
  ps.add("h", {2, d}, InitSpec::uniform(1));
  ps.value("h") = random_array({2, d}, rng, -1.0, 1.0);

  auto f_eval = [](ParamStore& p) {
    Tape tape;
    GruParams gp;
    std::map<std::string, Tensor> lv;
    for (const auto& name : p.names()) lv[name] = tape.leaf(p.value(name), true);
    gp.wz = lv["wz"]; gp.wr = lv["wr"]; gp.wh = lv["wh"];
    gp.uz = lv["uz"]; gp.ur = lv["ur"]; gp.uh = lv["uh"];
    gp.bz = lv["bz"]; gp.br = lv["br"]; gp.bh = lv["bh"];
    Tensor out = gru_cell(lv["x"], lv["h"], gp);
    Tensor l = sum(mul(out, out));
    const double v = l.scalar();
    tape.backward(l);
    for (auto& [name, t] : lv)
      p.set_grad(name, t.has_grad() ? t.grad() : Array(p.value(name).shape()));
    return v;
  };
  CHECK(grad_check(f_eval, ps) < 1e-4);
}

TEST_CASE("encode_path: K=1 equals one gru_cell step; order matters; zeros give zero") {
  RngStream rng(66, 0);
  const std::size_t f = 3, d = 4;
  Graph g = toy_graph(f, 1);
  auto bind_random_gru = [&](Tape& tape, RngStream& r) {
    GruParams p;
    p.wz = tape.leaf(random_array({f, d}, r));
    p.wr = tape.leaf(random_array({f, d}, r));
    p.wh = tape.leaf(random_array({f, d}, r));
    p.uz = tape.leaf(random_array({d, d}, r));
    p.ur = tape.leaf(random_array({d, d}, r));
    p.uh = tape.leaf(random_array({d, d}, r));
    p.bz = tape.leaf(random_array({d}, r));
    p.br = tape.leaf(random_array({d}, r));
    p.bh = tape.leaf(random_array({d}, r));
    return p;
  };
  {
    Tape tape;
    RngStream r1(9, 9);
    GruParams p = bind_random_gru(tape, r1);
    Tensor features = tape.leaf(g.features());
    Tensor via_path = encode_path(tape, {2}, features, p);
    Tensor x2 = reshape(gather_rows(features, {2}), {f});
    Tensor h0 = tape.leaf(Array({d}));
    Tensor direct = gru_cell(x2, h0, p);
    CHECK(max_abs_diff(via_path.value(), direct.value()) < 1e-14);
  }
  {
    Tape tape;
    RngStream r1(9, 9);
    GruParams p = bind_random_gru(tape, r1);
    Tensor features = tape.leaf(g.features());
    Tensor ab = encode_path(tape, {0, 1}, features, p);
    Tensor ba = encode_path(tape, {1, 0}, features, p);
    CHECK(max_abs_diff(ab.value(), ba.value()) > 1e-6);  // order sensitivity witness
  }
  {
    Tape tape;
    RngStream r1(9, 9);
    GruParams p = bind_random_gru(tape, r1);
    Tensor zero_features = tape.leaf(Array({6, f}));
    // zero features and zero biases: every gate input is 0, hidden stays 0
    GruParams zp = zero_gru(tape, f, d);
    zp.wz = p.wz; zp.wr = p.wr; zp.wh = p.wh;
    zp.uz = p.uz; zp.ur = p.ur; zp.uh = p.uh;
    Tensor h = encode_path(tape, {0, 1, 2}, zero_features, zp);
    for (std::size_t i = 0; i < d; ++i) CHECK(h.value()[i] == doctest::Approx(0.0));
  }
}

TEST_CASE("intra_strategy_combine: singleton softmax, uniform weights, alpha normalization") {
  RngStream rng(77, 0);
  const std::size_t d = 5;
  {
    // single path: alpha = 1, head output = elu(h_P)
    Tape tape;
    Tensor hp = tape.leaf(random_array({d}, rng, -2.0, 2.0));
    Tensor a0 = tape.leaf(random_array({d}, rng));
    Tensor a1 = tape.leaf(random_array({d}, rng));
    Tensor out = intra_strategy_combine(std::vector<Tensor>{hp}, {a0, a1}, 0.2);
    REQUIRE(out.value().shape() == std::vector<std::size_t>{2 * d});
    Tensor expect = elu(hp);
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(out.value()[i] == doctest::Approx(expect.value()[i]).epsilon(1e-12));
      CHECK(out.value()[d + i] == doctest::Approx(expect.value()[i]).epsilon(1e-12));
    }
  }
  {
    // identical path embeddings -> equal logits -> alpha = 1/R
    Tape tape;
    const std::size_t R = 6;
    Array one_row = random_array({d}, rng, -1.0, 1.0);
    Array tiled({R, d});
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < d; ++c) tiled.at2(r, c) = one_row[c];
    Tensor hp = tape.leaf(tiled);
    Tensor a0 = tape.leaf(random_array({d}, rng));
    std::vector<Array> alphas;
    intra_strategy_combine(hp, R, {a0}, 0.2, &alphas);
    REQUIRE(alphas.size() == 1);
    for (std::size_t r = 0; r < R; ++r)
      CHECK(alphas[0].at2(0, r) == doctest::Approx(1.0 / R).epsilon(1e-12));
  }
  {
    // random case: weights sum to 1 per node per head within 1e-12
    Tape tape;
    const std::size_t G = 7, R = 4;
    Tensor hp = tape.leaf(random_array({G * R, d}, rng, -3.0, 3.0));
    std::vector<Tensor> att = {tape.leaf(random_array({d}, rng)),
                               tape.leaf(random_array({d}, rng))};
    std::vector<Array> alphas;
    Tensor out = intra_strategy_combine(hp, R, att, 0.2, &alphas);
    CHECK(out.value().shape() == std::vector<std::size_t>{G, 2 * d});
    REQUIRE(alphas.size() == 2);
    for (const Array& al : alphas)
      for (std::size_t gi = 0; gi < G; ++gi) {
        double s = 0.0;
        for (std::size_t r = 0; r < R; ++r) s += al.at2(gi, r);
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
  }
  {
    Tape tape;
    Tensor a0 = tape.leaf(random_array({d}, rng));
    CHECK_THROWS_AS(intra_strategy_combine(std::vector<Tensor>{}, {a0}, 0.2),
                    std::invalid_argument);
  }
}

TEST_CASE("inter_strategy_combine: d_final identity, single-strategy identity, order") {
  Tape tape;
  RngStream rng(88, 0);
  // H=2, d_L=32, |S|=2 -> d_final = 128
  Tensor s1 = tape.leaf(random_array({3, 64}, rng));
  Tensor s2 = tape.leaf(random_array({3, 64}, rng));
  Tensor cat = inter_strategy_combine({s1, s2});
  CHECK(cat.value().shape() == std::vector<std::size_t>{3, 128});

  Tensor only = inter_strategy_combine({s1});
  CHECK(bit_equal(only.value(), s1.value()));

  Tensor swapped = inter_strategy_combine({s2, s1});
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 64; ++c) {
      CHECK(cat.value().at2(r, c) == swapped.value().at2(r, 64 + c));
      CHECK(cat.value().at2(r, 64 + c) == swapped.value().at2(r, c));
    }
}

TEST_CASE("classify: zero weights give uniform, rows sum to 1, shift invariance") {
  Tape tape;
  RngStream rng(99, 0);
  Tensor h = tape.leaf(random_array({4, 6}, rng));
  Tensor w0 = tape.leaf(Array({6, 5}));
  Tensor probs = classify(h, w0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(probs.value().at2(i, c) == doctest::Approx(0.2).epsilon(1e-12));

  Tensor w = tape.leaf(random_array({6, 5}, rng, -2.0, 2.0));
  Tensor p2 = classify(h, w);
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) s += p2.value().at2(i, c);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }

  // adding a constant to every logit leaves softmax unchanged
  Tensor logits = tape.leaf(random_array({8}, rng, -4.0, 4.0));
  Tensor shifted = scalar_affine(logits, 1.0, 3.7);
  CHECK(max_abs_diff(softmax(logits).value(), softmax(shifted).value()) <= 1e-12);
}

TEST_CASE("loss examples: uniform ln7, perfect zero, hand-computed mean") {
  LabelSet ls = LabelSet::build(3, {{0, 0}, {1, 1}, {2, 1}});
  {
    Tape tape;
    Tensor probs = tape.leaf(Array::full({3, 7}, 1.0 / 7.0));
    LabelSet ls7 = LabelSet::build(3, {{0, 0}, {1, 3}, {2, 6}});
    Tensor l = loss(probs, ls7, {0, 1, 2});
    CHECK(l.scalar() == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  }
  {
    Tape tape;
    Array p({2, 2});
    p.at2(0, 0) = 1.0;
    p.at2(1, 1) = 1.0;
    Tensor probs = tape.leaf(p);
    LabelSet ls2 = LabelSet::build(2, {{0, 0}, {1, 1}});
    Tensor l = loss(probs, ls2, {0, 1});
    CHECK(l.scalar() == doctest::Approx(0.0).epsilon(1e-12));
  }
  {
    // two nodes with true-class probabilities 0.5 and 0.25
    Tape tape;
    Array p({2, 2});
    p.at2(0, 0) = 0.5;
    p.at2(0, 1) = 0.5;
    p.at2(1, 0) = 0.75;
    p.at2(1, 1) = 0.25;
    Tensor probs = tape.leaf(p);
    LabelSet ls2 = LabelSet::build(2, {{0, 0}, {1, 1}});
    Tensor l = loss(probs, ls2, {0, 1});
    CHECK(l.scalar() == doctest::Approx((std::log(2.0) + std::log(4.0)) / 2).epsilon(1e-12));
  }
  {
    Tape tape;
    Tensor probs = tape.leaf(Array::full({3, 2}, 0.5));
    CHECK_THROWS_AS(loss(probs, ls, {}), std::invalid_argument);
  }
}

TEST_CASE("forward: shapes, probability rows, determinism, d_final") {
  const std::size_t f = 3;
  Graph g = toy_graph(f, 2);
  ModelConfig cfg = toy_config(f);
  Model model(cfg);
  model.init(31);
  std::vector<NeighborhoodSet> nbhds;
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s)
    nbhds.push_back(sample_all_neighborhoods(g, cfg.strategies[s], 5, s));

  RngStream drop1(1, 1);
  Tape t1;
  ForwardResult r1 = forward(g, nbhds, model, t1, false, drop1);
  CHECK(r1.probs.value().shape() == std::vector<std::size_t>{6, 2});
  CHECK(r1.embeddings.value().shape() == std::vector<std::size_t>{6, cfg.d_final()});
  CHECK(cfg.d_final() == 2 * 4 * 2);
  for (std::size_t i = 0; i < 6; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < 2; ++c) s += r1.probs.value().at2(i, c);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }

  RngStream drop2(1, 1);
  Tape t2;
  ForwardResult r2 = forward(g, nbhds, model, t2, false, drop2);
  CHECK(bit_equal(r1.probs.value(), r2.probs.value()));

  // mismatched neighborhood sets are rejected
  std::vector<NeighborhoodSet> wrong = nbhds;
  wrong.pop_back();
  Tape t3;
  CHECK_THROWS_AS(forward(g, wrong, model, t3, false, drop1), std::invalid_argument);
}

TEST_CASE("full-model gradient check on a toy graph (K=3, R=2)") {
  const std::size_t f = 3;
  Graph g = toy_graph(f, 3);
  LabelSet ls = LabelSet::build(6, {{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 1}});
  ModelConfig cfg = toy_config(f);
  Model model(cfg);
  model.init(41);
  std::vector<NeighborhoodSet> nbhds;
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s)
    nbhds.push_back(sample_all_neighborhoods(g, cfg.strategies[s], 7, s));

  auto f_eval = [&](ParamStore& ps) {
    (void)ps;  // ps is the model's own store
    Tape tape;
    RngStream drop(1, 1);
    Model::Bound bound;
    ForwardResult fw = forward(g, nbhds, model, tape, true, drop, &bound);
    Tensor l = loss(fw.probs, ls, {0, 1, 2, 3, 4, 5});
    const double v = l.scalar();
    tape.backward(l);
    for (const auto& [name, t] : bound.named)
      model.params().set_grad(name, t.has_grad() ? t.grad()
                                                 : Array(model.params().value(name).shape()));
    return v;
  };
  const double err = grad_check(f_eval, model.params());
  CHECK(err < 1e-4);
}

TEST_CASE("one strategy with K=2 reduces to a one-hop attention aggregator") {
  const std::size_t f = 3;
  Graph g = toy_graph(f, 4);
  ModelConfig cfg = toy_config(f);
  cfg.strategies = {WalkStrategy::bfs(2, 3)};
  Model model(cfg);
  model.init(11);
  auto ns = sample_all_neighborhoods(g, cfg.strategies[0], 3, 0);
  // every sampled path is a single hop into the target
  for (std::int32_t i = 0; i < 6; ++i)
    for (int r = 0; r < 3; ++r) {
      CHECK(ns.at(i, r, 1) == i);
      CHECK(g.has_edge(ns.at(i, r, 0), i));
    }
  Tape tape;
  RngStream drop(1, 1);
  ForwardResult fw = forward(g, {ns}, model, tape, false, drop);
  CHECK(fw.embeddings.value().shape() == std::vector<std::size_t>{6, cfg.d_final()});
  CHECK(cfg.d_final() == cfg.heads * cfg.hidden_dim);
}

TEST_CASE("model config validation and d_final identity") {
  RngStream rng(123, 9);
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig cfg;
    cfg.input_dim = 1 + rng.next_index(8);
    cfg.hidden_dim = 1 + rng.next_index(16);
    cfg.heads = 1 + rng.next_index(4);
    cfg.num_classes = 2 + rng.next_index(5);
    cfg.strategies = {WalkStrategy::bfs(3, 2)};
    if (rng.next_index(2) == 1) cfg.strategies.push_back(WalkStrategy::dfs(3, 2));
    cfg.dropout = 0.3;
    cfg.validate();
    CHECK(cfg.d_final() == cfg.heads * cfg.hidden_dim * cfg.strategies.size());
  }
  ModelConfig bad;
  bad.input_dim = 2;
  bad.hidden_dim = 4;
  bad.heads = 1;
  bad.num_classes = 2;
  bad.strategies = {WalkStrategy::bfs(3, 2), WalkStrategy::bfs(3, 2)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // duplicate names
}

TEST_CASE("shared parameters: both strategies bind the same tensors") {
  ModelConfig cfg = toy_config(3);
  cfg.share_parameters = true;
  Model model(cfg);
  CHECK(model.params().has("gru/shared/wz"));
  CHECK_FALSE(model.params().has("gru/bfs/wz"));
  Tape tape;
  Model::Bound b = model.bind(tape);
  CHECK(b.gru[0].wz.id() == b.gru[1].wz.id());
  CHECK(b.att[0][0].id() == b.att[1][0].id());
}
