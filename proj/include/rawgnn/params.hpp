#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rawgnn/array.hpp"

namespace rawgnn {

struct InitSpec {
  enum class Kind { zeros, glorot_uniform, uniform_pm };
  Kind kind = Kind::zeros;
  // glorot: bound = sqrt(6/(fan_in+fan_out)); uniform_pm: bound given directly.
  double bound = 0.0;

  static InitSpec zeros() { return {Kind::zeros, 0.0}; }
  static InitSpec glorot(std::size_t fan_in, std::size_t fan_out);
  static InitSpec uniform(double bound) { return {Kind::uniform_pm, bound}; }
};

// Named trainable parameters. Iteration order is the sorted name order, so
// everything derived from it is deterministic.
class ParamStore {
 public:
  struct Param {
    Array value;
    std::optional<Array> grad;
    InitSpec init;
  };

  void add(const std::string& name, std::vector<std::size_t> shape, InitSpec init);
  bool has(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t size() const { return params_.size(); }
  std::size_t total_coords() const;

  Array& value(const std::string& name);
  const Array& value(const std::string& name) const;
  void set_grad(const std::string& name, Array grad);
  const Array* grad(const std::string& name) const;
  void clear_grads();

  std::vector<std::string> names() const;
  std::map<std::string, Param>& entries() { return params_; }
  const std::map<std::string, Param>& entries() const { return params_; }

  // Draws every parameter from its init spec. Each parameter uses a stream
  // derived from (seed, name hash), so results do not depend on insert order.
  void init_all(std::uint64_t seed);

  // Deep copy of values only (used for best-checkpoint snapshots).
  std::map<std::string, Array> snapshot_values() const;
  void restore_values(const std::map<std::string, Array>& values);

 private:
  std::map<std::string, Param> params_;
};

struct AdamState {
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::int64_t step_count = 0;
  std::map<std::string, std::pair<Array, Array>> moments;  // name -> (m, v)

  void reset(const ParamStore& ps);
};

// Standard Adam with bias correction; weight decay enters through the
// gradient. Clears gradients afterwards. Throws if any parameter lacks one.
void adam_step(ParamStore& ps, AdamState& st);

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t max_coords = 10000;  // above this, a fixed random subsample
  std::uint64_t subsample_seed = 0x5eed;
  // Return true to exclude a coordinate (e.g. near an activation kink).
  std::function<bool(const std::string& name, std::size_t index, double value)> exclude;
};

// Compares the gradients produced by f (which must populate ps grads and
// return the loss) against central finite differences. Returns the max
// relative error over the checked coordinates. f must be deterministic.
double grad_check(const std::function<double(ParamStore&)>& f, ParamStore& ps,
                  const GradCheckOptions& opts = {});

// Text checkpoint with hexfloat values: bit-exact round trip.
void save_checkpoint(const std::string& path, const ParamStore& ps,
                     const std::map<std::string, std::string>& meta = {});
std::map<std::string, std::string> load_checkpoint(const std::string& path, ParamStore& ps);

}  // namespace rawgnn
