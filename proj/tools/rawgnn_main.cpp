#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rawgnn/dataset_io.hpp"
#include "rawgnn/kernels.hpp"
#include "rawgnn/metrics.hpp"
#include "rawgnn/trainer.hpp"
#include "rawgnn/walker.hpp"

using namespace rawgnn;

namespace {

const std::vector<std::string> kSpecKeys = {
    "name",        "data_dir",     "edges",          "features",       "labels",
    "strategies",  "bfs_p",        "bfs_q",          "dfs_p",          "dfs_q",
    "custom_p",    "custom_q",     "path_length",    "walks_per_node", "hidden_dim",
    "heads",       "lr",           "weight_decay",   "dropout",        "leaky_slope",
    "share_parameters", "max_epochs", "patience",    "seed",           "n_splits",
    "train_ratio", "val_ratio",    "eval_resamples", "threads",        "backend"};

// Registers one --flag per config key on the subcommand; flags override the
// config file. The master seed can also come from RAWGNN_MASTER_SEED
// (precedence: --seed flag, then the env var, then the config file).
void add_override_flags(CLI::App* sub, std::map<std::string, std::string>& values) {
  for (const auto& key : kSpecKeys)
    sub->add_option("--" + key, values[key], "override config key '" + key + "'");
}

ExperimentSpec resolve_spec(const std::string& config_path, CLI::App* sub,
                            const std::map<std::string, std::string>& overrides) {
  ExperimentSpec spec =
      config_path.empty() ? ExperimentSpec{} : load_experiment_config(config_path);
  const char* env_seed = std::getenv("RAWGNN_MASTER_SEED");
  if (env_seed != nullptr) apply_config_key(spec, "seed", env_seed);
  for (const auto& key : kSpecKeys)
    if (sub->count("--" + key) > 0) apply_config_key(spec, key, overrides.at(key));
  spec.validate();
  return spec;
}

Dataset load_from_spec(const ExperimentSpec& spec) {
  if (spec.edge_path.empty() || spec.feature_path.empty() || spec.label_path.empty())
    throw std::runtime_error("dataset paths missing: set data_dir or edges/features/labels");
  return load_dataset(spec.edge_path, spec.feature_path, spec.label_path);
}

int cmd_stats(const std::string& dir, const std::string& name) {
  Dataset ds = load_dataset_dir(dir);
  std::string display = name;
  if (display.empty()) {
    display = dir;
    while (!display.empty() && display.back() == '/') display.pop_back();
    const auto slash = display.find_last_of('/');
    if (slash != std::string::npos) display = display.substr(slash + 1);
  }
  const double lhr = edge_homophily(ds.graph, ds.labels, SimilarityKind::label_equality);
  const double fhr = edge_homophily(ds.graph, ds.labels, SimilarityKind::cosine);
  std::printf("%s %d %lld %zu %d %.2f %.2f\n", display.c_str(), ds.graph.num_nodes(),
              static_cast<long long>(ds.graph.num_edges()), ds.graph.feature_dim(),
              ds.labels.num_classes(), lhr, fhr);
  return 0;
}

int cmd_train(const ExperimentSpec& spec, int split_index, const std::string& ckpt_out,
              const std::string& result_out) {
  apply_runtime_options(spec);
  Dataset ds = load_from_spec(spec);
  if (split_index < 0 || split_index >= spec.n_splits)
    throw std::runtime_error("--split must be in [0, n_splits)");
  SplitSet ss = make_splits(ds.labels, spec.train_ratio, spec.val_ratio, spec.n_splits,
                            spec.seed);
  const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(split_index);
  TrainOutcome out = train_one_split(ds.graph, ds.labels,
                                     ss.splits[static_cast<std::size_t>(split_index)], spec,
                                     seed);
  out.result.split_index = split_index;

  RunResult rr;
  rr.spec = spec;
  rr.splits.push_back(out.result);
  rr.completed_splits = out.result.failed ? 0 : 1;
  if (!out.result.failed) rr.test_accuracy = aggregate_runs({out.result.test_accuracy});
  std::cout << run_result_table(rr);
  if (out.result.failed) {
    std::cerr << "split " << split_index << " failed: " << out.result.error << "\n";
    return 1;
  }
  if (!ckpt_out.empty()) {
    ModelConfig cfg = spec.make_model_config(ds.graph.feature_dim(),
                                             static_cast<std::size_t>(ds.labels.num_classes()));
    Model model(cfg);
    model.params().restore_values(out.best_params);
    save_model_checkpoint(ckpt_out, model.params(), spec, cfg.input_dim, cfg.num_classes);
    std::cout << "checkpoint written to " << ckpt_out << "\n";
  }
  if (!result_out.empty()) {
    save_run_result(result_out, rr);
    std::cout << "result written to " << result_out << "\n";
  }
  return 0;
}

int cmd_experiment(const ExperimentSpec& spec, const std::string& result_out) {
  apply_runtime_options(spec);
  Dataset ds = load_from_spec(spec);
  RunResult rr = run_experiment(ds.graph, ds.labels, spec);
  std::cout << run_result_table(rr);
  if (!result_out.empty()) {
    save_run_result(result_out, rr);
    std::cout << "result written to " << result_out << "\n";
  }
  return rr.completed_splits == 0 ? 1 : 0;
}

int cmd_export(const std::string& ckpt, const std::string& dir, const std::string& out,
               std::uint64_t seed, bool seed_given) {
  LoadedModel lm = load_model_checkpoint(ckpt);
  Dataset ds = load_dataset_dir(dir);
  export_embeddings(out, lm.model, ds.graph, seed_given ? seed : lm.spec.seed);
  std::cout << "embeddings written to " << out << "\n";
  return 0;
}

int cmd_dump_walks(const std::string& dir, const std::string& strategy, double p, double q,
                   bool p_given, bool q_given, int length, int walks, std::uint64_t seed,
                   const std::string& out_path) {
  Dataset ds = load_dataset_dir(dir);
  WalkStrategy ws;
  if (strategy == "bfs") ws = WalkStrategy::bfs(length, walks);
  else if (strategy == "dfs") ws = WalkStrategy::dfs(length, walks);
  else ws = WalkStrategy{strategy, 1.0, 1.0, length, walks};
  if (p_given) ws.p = p;
  if (q_given) ws.q = q;
  ws.validate();
  NeighborhoodSet ns = sample_all_neighborhoods(ds.graph, ws, seed, 0);
  if (out_path.empty()) {
    dump_walks(std::cout, ns);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    dump_walks(out, ns);
    std::cout << "walk corpus written to " << out_path << "\n";
  }
  return 0;
}

using Builder = std::function<Tensor(Tape&, std::map<std::string, Tensor>&)>;

double eval_builder(ParamStore& ps, const Builder& build) {
  Tape tape;
  std::map<std::string, Tensor> lv;
  for (const auto& name : ps.names()) lv[name] = tape.leaf(ps.value(name), true);
  Tensor l = build(tape, lv);
  const double v = l.scalar();
  tape.backward(l);
  for (auto& [name, t] : lv)
    ps.set_grad(name, t.has_grad() ? t.grad() : Array(ps.value(name).shape()));
  return v;
}

// The gradient oracle suite: finite-difference checks for every op family
// plus the full network on a small graph.
int cmd_grad_check() {
  int failures = 0;
  auto report = [&](const std::string& name, double err, double tol) {
    const bool ok = err < tol;
    std::printf("%-32s max_rel_err=%.3e  tol=%.0e  %s\n", name.c_str(), err, tol,
                ok ? "PASS" : "FAIL");
    if (!ok) ++failures;
  };
  auto fill = [](ParamStore& ps, std::uint64_t stream) {
    RngStream rng(321, stream);
    for (const auto& name : ps.names())
      for (std::size_t i = 0; i < ps.value(name).numel(); ++i)
        ps.value(name)[i] = rng.uniform(-0.8, 0.8);
  };
  auto check = [&](const std::string& name, ParamStore& ps, const Builder& build,
                   double tol = 1e-4) {
    report(name, grad_check([&](ParamStore& p) { return eval_builder(p, build); }, ps), tol);
  };

  {
    ParamStore ps;
    ps.add("x", {4, 3}, InitSpec::zeros());
    ps.add("w", {3, 2}, InitSpec::zeros());
    ps.add("b", {2}, InitSpec::zeros());
    fill(ps, 1);
    check("matmul+bias+sigmoid", ps, [](Tape&, auto& lv) {
      return sum(sigmoid(add(matmul(lv.at("x"), lv.at("w")), lv.at("b"))));
    });
  }
  {
    ParamStore ps;
    ps.add("a", {5, 4}, InitSpec::zeros());
    ps.add("b", {5, 4}, InitSpec::zeros());
    fill(ps, 2);
    check("mul/tanh/elu/exp/mean", ps, [](Tape&, auto& lv) {
      return mean(elu(mul(tanh(lv.at("a")), exp(lv.at("b")))));
    });
  }
  {
    ParamStore ps;
    ps.add("x", {4, 5}, InitSpec::zeros());
    fill(ps, 3);
    check("softmax+cross-entropy", ps, [](Tape&, auto& lv) {
      return masked_nll(softmax(lv.at("x")), {0, 1, 3}, {2, 0, 4});
    });
  }
  {
    ParamStore ps;
    ps.add("m", {6, 3}, InitSpec::zeros());
    ps.add("v", {3}, InitSpec::zeros());
    fill(ps, 4);
    check("gather/concat/matvec/leaky", ps, [](Tape&, auto& lv) {
      Tensor g = gather_rows(lv.at("m"), {5, 0, 3, 3});
      Tensor two = concat({g, gather_rows(lv.at("m"), {1, 2, 2, 4})}, 0);
      return sum(leaky_relu(matvec(two, lv.at("v")), 0.2));
    });
  }
  {
    ParamStore ps;
    ps.add("h", {8, 4}, InitSpec::zeros());
    ps.add("a", {4}, InitSpec::zeros());
    fill(ps, 5);
    check("attention head (gws+softmax)", ps, [](Tape&, auto& lv) {
      Tensor e = leaky_relu(matvec(lv.at("h"), lv.at("a")), 0.2);
      Tensor alpha = softmax(reshape(e, {4, 2}));
      return sum(elu(group_weighted_sum(lv.at("h"), alpha)));
    });
  }
  {
    ParamStore ps;
    for (const char* n : {"pz", "pr", "ph", "h"}) ps.add(n, {5, 4}, InitSpec::zeros());
    for (const char* n : {"uz", "ur", "uh"}) ps.add(n, {4, 4}, InitSpec::zeros());
    for (const char* n : {"bz", "br", "bh"}) ps.add(n, {4}, InitSpec::zeros());
    fill(ps, 6);
    check("gru_step", ps, [](Tape&, auto& lv) {
      Tensor o = gru_step(lv.at("pz"), lv.at("pr"), lv.at("ph"), {}, lv.at("h"), lv.at("uz"),
                          lv.at("ur"), lv.at("uh"), lv.at("bz"), lv.at("br"), lv.at("bh"));
      return sum(mul(o, o));
    });
  }
  {
    // full model on a 6-node toy graph
    RngStream rng(9, 9);
    std::vector<std::pair<std::int32_t, std::int32_t>> edges = {{0, 1}, {1, 2}, {0, 2},
                                                                {3, 4}, {4, 5}, {3, 5},
                                                                {2, 3}};
    Array features({6, 3});
    for (std::size_t i = 0; i < features.numel(); ++i) features[i] = rng.uniform(-1.0, 1.0);
    Graph g = Graph::build(6, edges, features);
    LabelSet ls = LabelSet::build(6, {{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 1}});
    ModelConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden_dim = 4;
    cfg.heads = 2;
    cfg.num_classes = 2;
    cfg.strategies = {WalkStrategy::bfs(3, 2), WalkStrategy::dfs(3, 2)};
    cfg.dropout = 0.0;
    Model model(cfg);
    model.init(41);
    std::vector<NeighborhoodSet> nbhds;
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s)
      nbhds.push_back(sample_all_neighborhoods(g, cfg.strategies[s], 7, s));
    auto f_eval = [&](ParamStore&) {
      Tape tape;
      RngStream drop(1, 1);
      Model::Bound bound;
      ForwardResult fw = forward(g, nbhds, model, tape, true, drop, &bound);
      Tensor l = loss(fw.probs, ls, {0, 1, 2, 3, 4, 5});
      const double v = l.scalar();
      tape.backward(l);
      for (const auto& [name, t] : bound.named)
        model.params().set_grad(name, t.has_grad()
                                          ? t.grad()
                                          : Array(model.params().value(name).shape()));
      return v;
    };
    report("full model (6-node toy graph)", grad_check(f_eval, model.params()), 1e-4);
  }

  std::printf("%s\n", failures == 0 ? "all gradient checks passed" : "GRADIENT CHECKS FAILED");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-walk aggregation GNN: dataset stats, training, embedding export"};
  app.require_subcommand(1);

  auto* stats = app.add_subcommand("stats", "print 'name n |E| f |C| LHR FHR' for a dataset");
  std::string stats_dir, stats_name;
  stats->add_option("dataset", stats_dir, "dataset directory (edges.tsv/features.txt/labels.tsv)")
      ->required();
  stats->add_option("--name", stats_name, "display name (defaults to the directory name)");

  auto* train = app.add_subcommand("train", "train a single split");
  std::string train_config, train_ckpt, train_result;
  int train_split = 0;
  std::map<std::string, std::string> train_over;
  train->add_option("config", train_config, "flat key=value config file");
  train->add_option("--split", train_split, "split index (default 0)");
  train->add_option("--out", train_ckpt, "write the best checkpoint here");
  train->add_option("--result", train_result, "write a result JSON here");
  add_override_flags(train, train_over);

  auto* exp = app.add_subcommand("experiment", "train all splits and aggregate mean/std");
  std::string exp_config, exp_result;
  std::map<std::string, std::string> exp_over;
  exp->add_option("config", exp_config, "flat key=value config file");
  exp->add_option("--out", exp_result, "write the aggregate result JSON here");
  add_override_flags(exp, exp_over);

  auto* exporte = app.add_subcommand("export-embeddings",
                                     "write final node embeddings from a checkpoint");
  std::string e_ckpt, e_dir, e_out;
  std::uint64_t e_seed = 0;
  exporte->add_option("checkpoint", e_ckpt)->required();
  exporte->add_option("dataset", e_dir, "dataset directory")->required();
  exporte->add_option("out", e_out)->required();
  auto* e_seed_opt = exporte->add_option("--seed", e_seed, "walk sampling seed");

  app.add_subcommand("grad-check", "run the gradient oracle suite");

  auto* dump = app.add_subcommand("dump-walks", "write a walk corpus for inspection");
  std::string d_dir, d_strategy = "bfs", d_out;
  double d_p = 0.0, d_q = 0.0;
  int d_len = 4, d_walks = 6;
  std::uint64_t d_seed = 1;
  dump->add_option("dataset", d_dir)->required();
  dump->add_option("--strategy", d_strategy, "bfs, dfs or a custom tag");
  auto* d_p_opt = dump->add_option("--p", d_p, "return parameter");
  auto* d_q_opt = dump->add_option("--q", d_q, "in-out parameter");
  dump->add_option("--length", d_len, "nodes per path (K)");
  dump->add_option("--walks", d_walks, "walks per node (R)");
  dump->add_option("--seed", d_seed);
  dump->add_option("--out", d_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) return cmd_stats(stats_dir, stats_name);
    if (train->parsed())
      return cmd_train(resolve_spec(train_config, train, train_over), train_split, train_ckpt,
                       train_result);
    if (exp->parsed()) return cmd_experiment(resolve_spec(exp_config, exp, exp_over), exp_result);
    if (exporte->parsed())
      return cmd_export(e_ckpt, e_dir, e_out, e_seed, e_seed_opt->count() > 0);
    if (app.get_subcommand("grad-check")->parsed()) return cmd_grad_check();
    if (dump->parsed())
      return cmd_dump_walks(d_dir, d_strategy, d_p, d_q, d_p_opt->count() > 0,
                            d_q_opt->count() > 0, d_len, d_walks, d_seed, d_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
