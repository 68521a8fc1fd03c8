#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rawgnn/dataset_io.hpp"
#include "rawgnn/metrics.hpp"
#include "rawgnn/model.hpp"
#include "rawgnn/splits.hpp"

namespace rawgnn {

// Full description of one experiment: dataset, sampling strategies, model
// hyperparameters, optimization and split protocol.
struct ExperimentSpec {
  std::string name = "dataset";
  std::string edge_path, feature_path, label_path;

  std::vector<std::string> strategies = {"bfs", "dfs"};
  std::map<std::string, std::pair<double, double>> pq = {
      {"bfs", {0.1, 10.0}}, {"dfs", {10.0, 0.1}}, {"custom", {1.0, 1.0}}};
  int path_length = 4;     // K
  int walks_per_node = 6;  // R

  std::size_t hidden_dim = 32;
  std::size_t heads = 2;
  double lr = 0.05;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  double leaky_slope = 0.2;
  bool share_parameters = false;

  int max_epochs = 500;
  int patience = 100;
  std::uint64_t seed = 1;
  int n_splits = 10;
  double train_ratio = 0.48;
  double val_ratio = 0.32;
  int eval_resamples = 1;  // >1 averages predictions over fresh walk samples

  int threads = 0;             // 0 keeps the OpenMP default
  std::string backend = "";    // "", "serial" or "openmp"

  void set_data_dir(const std::string& dir);
  std::vector<WalkStrategy> make_strategies() const;
  ModelConfig make_model_config(std::size_t input_dim, std::size_t num_classes) const;
  void validate() const;
};

// Flat key=value file; '#' comments. Unknown keys are errors.
ExperimentSpec load_experiment_config(const std::string& path);
void apply_config_key(ExperimentSpec& spec, const std::string& key, const std::string& value);
// Serialized snapshot used in result files and checkpoint metadata.
std::map<std::string, std::string> spec_to_map(const ExperimentSpec& spec);

// Applies threads/backend settings process-wide.
void apply_runtime_options(const ExperimentSpec& spec);

// Validation-accuracy early stopping: stop once `patience` epochs pass
// without strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Records a 1-based epoch; returns true when training should stop.
  bool record(int epoch, double val_acc);
  bool improved() const { return improved_; }
  int best_epoch() const { return best_epoch_; }
  double best_acc() const { return best_acc_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_acc_ = -1.0;
  bool improved_ = false;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct SplitResult {
  int split_index = 0;
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
  double best_val_accuracy = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  bool failed = false;
  std::string error;
  std::vector<EpochRecord> history;
  double wall_seconds = 0.0;  // reported on stdout, not in the result file
};

struct TrainOutcome {
  SplitResult result;
  std::map<std::string, Array> best_params;  // best-validation checkpoint
};

struct RunResult {
  ExperimentSpec spec;
  std::vector<SplitResult> splits;
  MeanStd test_accuracy;  // over completed splits
  int completed_splits = 0;
};

// One split: per epoch, resample neighborhoods, forward, cross-entropy on
// the train mask, backward, Adam step, then validate on fresh walks with
// dropout off. Keeps the best-validation checkpoint; test labels stay
// protected until the final evaluation.
TrainOutcome train_one_split(const Graph& g, LabelSet& ls, const Split& split,
                             const ExperimentSpec& spec, std::uint64_t seed);

RunResult run_experiment(const Graph& g, LabelSet& ls, const ExperimentSpec& spec);
RunResult run_experiment(const ExperimentSpec& spec);  // loads the dataset itself

// Deterministic JSON serialization (no timing data).
std::string run_result_to_json(const RunResult& rr);
void save_run_result(const std::string& path, const RunResult& rr);
// Human-readable per-split table with timings.
std::string run_result_table(const RunResult& rr);

// Model checkpoint with experiment metadata, reloadable without the config.
void save_model_checkpoint(const std::string& path, const ParamStore& ps,
                           const ExperimentSpec& spec, std::size_t input_dim,
                           std::size_t num_classes);
struct LoadedModel {
  Model model;
  ExperimentSpec spec;
};
LoadedModel load_model_checkpoint(const std::string& path);

// Writes "node_id v1 ... v_dfinal" rows (header records d_final and strategy
// order), computed with a fresh fixed-seed neighborhood sample, dropout off.
void export_embeddings(const std::string& path, const Model& model, const Graph& g,
                       std::uint64_t seed);

}  // namespace rawgnn
