#include "rawgnn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rawgnn/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rawgnn {

namespace {

// Stream purpose tags; combined with epoch/strategy/node via mix_stream.
constexpr std::uint64_t kTagTrainWalk = 0x7261777757414c4bULL;
constexpr std::uint64_t kTagEvalWalk = 0x6576616c57414c4bULL;
constexpr std::uint64_t kTagTestWalk = 0x7465737457414c4bULL;
constexpr std::uint64_t kTagExportWalk = 0x6578706f57414c4bULL;
constexpr std::uint64_t kTagDropout = 0x64726f706f757421ULL;

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentSpec::set_data_dir(const std::string& dir) {
  edge_path = dir + "/edges.tsv";
  feature_path = dir + "/features.txt";
  label_path = dir + "/labels.tsv";
}

std::vector<WalkStrategy> ExperimentSpec::make_strategies() const {
  std::vector<WalkStrategy> out;
  for (const auto& name : strategies) {
    auto it = pq.find(name);
    if (it == pq.end())
      throw std::invalid_argument("ExperimentSpec: no (p,q) configured for strategy " + name);
    out.push_back(WalkStrategy{name, it->second.first, it->second.second, path_length,
                               walks_per_node});
  }
  return out;
}

ModelConfig ExperimentSpec::make_model_config(std::size_t input_dim,
                                              std::size_t num_classes) const {
  ModelConfig cfg;
  cfg.input_dim = input_dim;
  cfg.hidden_dim = hidden_dim;
  cfg.heads = heads;
  cfg.num_classes = num_classes;
  cfg.strategies = make_strategies();
  cfg.dropout = dropout;
  cfg.leaky_slope = leaky_slope;
  cfg.share_parameters = share_parameters;
  return cfg;
}

void ExperimentSpec::validate() const {
  if (strategies.empty()) throw std::invalid_argument("ExperimentSpec: empty strategy list");
  for (const auto& ws : make_strategies()) ws.validate();
  if (hidden_dim < 1 || heads < 1) throw std::invalid_argument("ExperimentSpec: dims must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("ExperimentSpec: lr must be > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("ExperimentSpec: negative weight decay");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("ExperimentSpec: dropout must be in [0,1)");
  if (max_epochs < 1 || patience < 1)
    throw std::invalid_argument("ExperimentSpec: max_epochs and patience must be >= 1");
  if (n_splits < 1) throw std::invalid_argument("ExperimentSpec: n_splits must be >= 1");
  if (train_ratio <= 0.0 || val_ratio <= 0.0 || train_ratio + val_ratio >= 1.0)
    throw std::invalid_argument("ExperimentSpec: bad split ratios");
  if (eval_resamples < 1) throw std::invalid_argument("ExperimentSpec: eval_resamples >= 1");
  if (threads < 0) throw std::invalid_argument("ExperimentSpec: negative thread count");
  if (!backend.empty() && backend != "serial" && backend != "openmp")
    throw std::invalid_argument("ExperimentSpec: backend must be serial or openmp");
}

void apply_config_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  try {
    if (key == "name") spec.name = value;
    else if (key == "data_dir") spec.set_data_dir(value);
    else if (key == "edges") spec.edge_path = value;
    else if (key == "features") spec.feature_path = value;
    else if (key == "labels") spec.label_path = value;
    else if (key == "strategies") {
      spec.strategies.clear();
      std::istringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) if (!tok.empty()) spec.strategies.push_back(tok);
    } else if (key == "bfs_p") spec.pq["bfs"].first = std::stod(value);
    else if (key == "bfs_q") spec.pq["bfs"].second = std::stod(value);
    else if (key == "dfs_p") spec.pq["dfs"].first = std::stod(value);
    else if (key == "dfs_q") spec.pq["dfs"].second = std::stod(value);
    else if (key == "custom_p") spec.pq["custom"].first = std::stod(value);
    else if (key == "custom_q") spec.pq["custom"].second = std::stod(value);
    else if (key == "path_length") spec.path_length = std::stoi(value);
    else if (key == "walks_per_node") spec.walks_per_node = std::stoi(value);
    else if (key == "hidden_dim") spec.hidden_dim = static_cast<std::size_t>(std::stoul(value));
    else if (key == "heads") spec.heads = static_cast<std::size_t>(std::stoul(value));
    else if (key == "lr") spec.lr = std::stod(value);
    else if (key == "weight_decay") spec.weight_decay = std::stod(value);
    else if (key == "dropout") spec.dropout = std::stod(value);
    else if (key == "leaky_slope") spec.leaky_slope = std::stod(value);
    else if (key == "share_parameters") spec.share_parameters = parse_bool(value, key);
    else if (key == "max_epochs") spec.max_epochs = std::stoi(value);
    else if (key == "patience") spec.patience = std::stoi(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else if (key == "n_splits") spec.n_splits = std::stoi(value);
    else if (key == "train_ratio") spec.train_ratio = std::stod(value);
    else if (key == "val_ratio") spec.val_ratio = std::stod(value);
    else if (key == "eval_resamples") spec.eval_resamples = std::stoi(value);
    else if (key == "threads") spec.threads = std::stoi(value);
    else if (key == "backend") spec.backend = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
  }
}

ExperimentSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  ExperimentSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    try {
      apply_config_key(spec, key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return spec;
}

std::map<std::string, std::string> spec_to_map(const ExperimentSpec& spec) {
  std::map<std::string, std::string> m;
  m["name"] = spec.name;
  m["edges"] = spec.edge_path;
  m["features"] = spec.feature_path;
  m["labels"] = spec.label_path;
  std::string strat;
  for (const auto& s : spec.strategies) strat += (strat.empty() ? "" : ",") + s;
  m["strategies"] = strat;
  for (const auto& name : spec.strategies) {
    const auto& [p, q] = spec.pq.at(name);
    m[name + "_p"] = fmt_double(p);
    m[name + "_q"] = fmt_double(q);
  }
  m["path_length"] = std::to_string(spec.path_length);
  m["walks_per_node"] = std::to_string(spec.walks_per_node);
  m["hidden_dim"] = std::to_string(spec.hidden_dim);
  m["heads"] = std::to_string(spec.heads);
  m["lr"] = fmt_double(spec.lr);
  m["weight_decay"] = fmt_double(spec.weight_decay);
  m["dropout"] = fmt_double(spec.dropout);
  m["leaky_slope"] = fmt_double(spec.leaky_slope);
  m["share_parameters"] = spec.share_parameters ? "true" : "false";
  m["max_epochs"] = std::to_string(spec.max_epochs);
  m["patience"] = std::to_string(spec.patience);
  m["seed"] = std::to_string(spec.seed);
  m["n_splits"] = std::to_string(spec.n_splits);
  m["train_ratio"] = fmt_double(spec.train_ratio);
  m["val_ratio"] = fmt_double(spec.val_ratio);
  m["eval_resamples"] = std::to_string(spec.eval_resamples);
  return m;
}

void apply_runtime_options(const ExperimentSpec& spec) {
#ifdef _OPENMP
  if (spec.threads > 0) omp_set_num_threads(spec.threads);
#endif
  if (spec.backend == "serial") kernels::set_backend(kernels::Backend::serial);
  else if (spec.backend == "openmp") kernels::set_backend(kernels::Backend::openmp);
}

bool EarlyStopper::record(int epoch, double val_acc) {
  improved_ = val_acc > best_acc_;
  if (improved_) {
    best_acc_ = val_acc;
    best_epoch_ = epoch;
  }
  return epoch - best_epoch_ >= patience_;
}

namespace {

std::vector<NeighborhoodSet> sample_epoch_neighborhoods(
    const Graph& g, const std::vector<WalkStrategy>& strategies, std::uint64_t seed,
    std::uint64_t purpose, std::uint64_t round) {
  std::vector<NeighborhoodSet> out;
  out.reserve(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s)
    out.push_back(sample_all_neighborhoods(
        g, strategies[s], seed, mix_stream(purpose, round, static_cast<std::uint64_t>(s))));
  return out;
}

// Dropout-off forward; optionally averaged over eval_resamples walk samples.
Array evaluate_probs(const Graph& g, const Model& model, const ExperimentSpec& spec,
                     std::uint64_t seed, std::uint64_t purpose, std::uint64_t round) {
  const auto strategies = model.config().strategies;
  Array acc;
  for (int e = 0; e < spec.eval_resamples; ++e) {
    auto nbhds = sample_epoch_neighborhoods(
        g, strategies, seed, purpose, mix_stream(round, static_cast<std::uint64_t>(e)));
    Tape tape;
    tape.set_release_memory(false);
    RngStream unused(seed, 0);
    ForwardResult fw = forward(g, nbhds, model, tape, /*training=*/false, unused);
    if (e == 0)
      acc = fw.probs.value();
    else
      kernels::vaxpy(acc.numel(), 1.0, fw.probs.value().data(), acc.data());
  }
  if (spec.eval_resamples > 1)
    kernels::vscale(acc.numel(), 1.0 / spec.eval_resamples, acc.data(), acc.data());
  return acc;
}

}  // namespace

TrainOutcome train_one_split(const Graph& g, LabelSet& ls, const Split& split,
                             const ExperimentSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (split.train.empty() || split.val.empty() || split.test.empty())
    throw std::invalid_argument("train_one_split: empty split mask");
  const auto t0 = std::chrono::steady_clock::now();

  ModelConfig cfg = spec.make_model_config(g.feature_dim(),
                                           static_cast<std::size_t>(ls.num_classes()));
  Model model(cfg);
  model.init(seed);
  AdamState adam;
  adam.lr = spec.lr;
  adam.weight_decay = spec.weight_decay;
  adam.reset(model.params());

  TrainOutcome out;
  out.result.seed = seed;
  EarlyStopper stopper(spec.patience);
  out.best_params = model.params().snapshot_values();

  ls.protect(split.test);
  try {
    for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
      auto nbhds = sample_epoch_neighborhoods(g, cfg.strategies, seed, kTagTrainWalk,
                                              static_cast<std::uint64_t>(epoch));
      Tape tape;
      tape.set_release_memory(true);
      RngStream drop_rng(seed, mix_stream(kTagDropout, static_cast<std::uint64_t>(epoch)));
      Model::Bound bound;
      ForwardResult fw = forward(g, nbhds, model, tape, /*training=*/true, drop_rng, &bound);
      Tensor l = loss(fw.probs, ls, split.train);
      const double train_loss = l.scalar();
      if (!std::isfinite(train_loss))
        throw std::runtime_error("diverged: non-finite training loss at epoch " +
                                 std::to_string(epoch));
      tape.backward(l);
      for (const auto& [name, t] : bound.named)
        model.params().set_grad(name, t.has_grad() ? t.grad()
                                                   : Array(model.params().value(name).shape()));
      adam_step(model.params(), adam);

      const Array val_probs = evaluate_probs(g, model, spec, seed, kTagEvalWalk,
                                             static_cast<std::uint64_t>(epoch));
      const double val_acc = accuracy(predict_classes(val_probs), ls, split.val);
      out.result.history.push_back({train_loss, val_acc});
      out.result.epochs_run = epoch;

      const bool stop = stopper.record(epoch, val_acc);
      if (stopper.improved()) out.best_params = model.params().snapshot_values();
      if (stop) break;
    }
  } catch (const std::exception& e) {
    out.result.failed = true;
    out.result.error = e.what();
  }
  ls.unprotect();

  out.result.best_epoch = stopper.best_epoch();
  out.result.best_val_accuracy = stopper.best_acc() < 0.0 ? 0.0 : stopper.best_acc();
  if (!out.result.failed) {
    model.params().restore_values(out.best_params);
    const Array test_probs = evaluate_probs(g, model, spec, seed, kTagTestWalk, 0);
    out.result.test_accuracy = accuracy(predict_classes(test_probs), ls, split.test);
  }
  out.result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunResult run_experiment(const Graph& g, LabelSet& ls, const ExperimentSpec& spec) {
  spec.validate();
  RunResult rr;
  rr.spec = spec;
  SplitSet splits = make_splits(ls, spec.train_ratio, spec.val_ratio, spec.n_splits, spec.seed);
  std::vector<double> accs;
  for (int k = 0; k < spec.n_splits; ++k) {
    const std::uint64_t split_seed = spec.seed + static_cast<std::uint64_t>(k);
    TrainOutcome to = train_one_split(g, ls, splits.splits[static_cast<std::size_t>(k)], spec,
                                      split_seed);
    to.result.split_index = k;
    if (!to.result.failed) accs.push_back(to.result.test_accuracy);
    rr.splits.push_back(std::move(to.result));
  }
  rr.completed_splits = static_cast<int>(accs.size());
  if (!accs.empty()) rr.test_accuracy = aggregate_runs(accs);
  return rr;
}

RunResult run_experiment(const ExperimentSpec& spec) {
  Dataset ds = load_dataset(spec.edge_path, spec.feature_path, spec.label_path);
  return run_experiment(ds.graph, ds.labels, spec);
}

std::string run_result_to_json(const RunResult& rr) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : spec_to_map(rr.spec)) cfg[k] = v;
  j["config"] = cfg;
  j["splits"] = nlohmann::ordered_json::array();
  for (const auto& sr : rr.splits) {
    nlohmann::ordered_json s;
    s["split"] = sr.split_index;
    s["seed"] = sr.seed;
    s["failed"] = sr.failed;
    if (sr.failed) s["error"] = sr.error;
    s["test_accuracy"] = sr.test_accuracy;
    s["best_val_accuracy"] = sr.best_val_accuracy;
    s["best_epoch"] = sr.best_epoch;
    s["epochs_run"] = sr.epochs_run;
    nlohmann::ordered_json hist;
    hist["train_loss"] = nlohmann::ordered_json::array();
    hist["val_accuracy"] = nlohmann::ordered_json::array();
    for (const auto& er : sr.history) {
      hist["train_loss"].push_back(er.train_loss);
      hist["val_accuracy"].push_back(er.val_accuracy);
    }
    s["history"] = hist;
    j["splits"].push_back(s);
  }
  j["completed_splits"] = rr.completed_splits;
  j["mean_test_accuracy"] = rr.test_accuracy.mean;
  j["std_test_accuracy"] = rr.test_accuracy.std;
  return j.dump(2) + "\n";
}

void save_run_result(const std::string& path, const RunResult& rr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_run_result: cannot open " + path);
  out << run_result_to_json(rr);
  if (!out) throw std::runtime_error("save_run_result: write failed for " + path);
}

std::string run_result_table(const RunResult& rr) {
  std::ostringstream os;
  char buf[160];
  os << "dataset: " << rr.spec.name << "  (K=" << rr.spec.path_length
     << ", R=" << rr.spec.walks_per_node << ", seed=" << rr.spec.seed << ")\n";
  os << "split  test_acc  best_val  best_epoch  epochs  wall_s\n";
  for (const auto& sr : rr.splits) {
    if (sr.failed) {
      std::snprintf(buf, sizeof(buf), "%5d  FAILED: %s\n", sr.split_index, sr.error.c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "%5d  %8.4f  %8.4f  %10d  %6d  %6.1f\n", sr.split_index,
                    sr.test_accuracy, sr.best_val_accuracy, sr.best_epoch, sr.epochs_run,
                    sr.wall_seconds);
    }
    os << buf;
  }
  if (rr.completed_splits > 0) {
    std::snprintf(buf, sizeof(buf), "mean +- std over %d splits: %.2f +- %.2f (accuracy %%)\n",
                  rr.completed_splits, 100.0 * rr.test_accuracy.mean,
                  100.0 * rr.test_accuracy.std);
    os << buf;
  }
  if (rr.completed_splits < static_cast<int>(rr.splits.size()))
    os << "warning: " << (rr.splits.size() - static_cast<std::size_t>(rr.completed_splits))
       << " split(s) failed; aggregate covers completed splits only\n";
  return os.str();
}

void save_model_checkpoint(const std::string& path, const ParamStore& ps,
                           const ExperimentSpec& spec, std::size_t input_dim,
                           std::size_t num_classes) {
  std::map<std::string, std::string> meta = spec_to_map(spec);
  meta["input_dim"] = std::to_string(input_dim);
  meta["num_classes"] = std::to_string(num_classes);
  save_checkpoint(path, ps, meta);
}

LoadedModel load_model_checkpoint(const std::string& path) {
  ParamStore loaded;
  std::map<std::string, std::string> meta = load_checkpoint(path, loaded);
  ExperimentSpec spec;
  for (const auto& [k, v] : meta) {
    if (k == "edges") spec.edge_path = v;
    else if (k == "features") spec.feature_path = v;
    else if (k == "labels") spec.label_path = v;
    else if (k == "name") spec.name = v;
    else if (k == "input_dim" || k == "num_classes") continue;
    else if (k.size() > 2 && (k.ends_with("_p") || k.ends_with("_q"))) {
      const std::string strat = k.substr(0, k.size() - 2);
      if (k.ends_with("_p")) spec.pq[strat].first = std::stod(v);
      else spec.pq[strat].second = std::stod(v);
    } else {
      apply_config_key(spec, k, v);
    }
  }
  const std::size_t input_dim = std::stoul(meta.at("input_dim"));
  const std::size_t num_classes = std::stoul(meta.at("num_classes"));
  LoadedModel lm{Model(spec.make_model_config(input_dim, num_classes)), spec};
  // overwrite the freshly-registered parameters with the stored values
  for (const auto& name : lm.model.params().names()) {
    if (!loaded.has(name))
      throw std::runtime_error("load_model_checkpoint: missing parameter " + name);
    if (!loaded.value(name).same_shape(lm.model.params().value(name)))
      throw std::runtime_error("load_model_checkpoint: shape mismatch for " + name);
    lm.model.params().value(name) = loaded.value(name);
  }
  return lm;
}

void export_embeddings(const std::string& path, const Model& model, const Graph& g,
                       std::uint64_t seed) {
  const ModelConfig& cfg = model.config();
  if (cfg.input_dim != g.feature_dim())
    throw std::invalid_argument("export_embeddings: checkpoint input dim " +
                                std::to_string(cfg.input_dim) + " != graph feature dim " +
                                std::to_string(g.feature_dim()));
  auto nbhds = sample_epoch_neighborhoods(g, cfg.strategies, seed, kTagExportWalk, 0);
  Tape tape;
  RngStream unused(seed, 0);
  ForwardResult fw = forward(g, nbhds, model, tape, /*training=*/false, unused);
  const Array& emb = fw.embeddings.value();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_embeddings: cannot open " + path);
  std::string strat;
  for (const auto& s : cfg.strategies) strat += (strat.empty() ? "" : ",") + s.name;
  out << "# d_final=" << cfg.d_final() << " strategies=" << strat << "\n";
  char buf[40];
  for (std::int32_t i = 0; i < g.num_nodes(); ++i) {
    out << i;
    for (std::size_t c = 0; c < cfg.d_final(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", emb.at2(static_cast<std::size_t>(i), c));
      out << " " << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("export_embeddings: write failed for " + path);
}

}  // namespace rawgnn
