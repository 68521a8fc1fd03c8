#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rawgnn/graph.hpp"

namespace rawgnn {

struct Split {
  std::vector<std::int32_t> train;
  std::vector<std::int32_t> val;
  std::vector<std::int32_t> test;
};

struct SplitSet {
  std::uint64_t seed = 0;
  double train_ratio = 0.48;
  double val_ratio = 0.32;
  std::vector<Split> splits;
};

// Random partitions of the labeled node set into train/val/test. Train and
// val sizes use round-half-up on ratio*|V_L|; the remainder goes to test.
// Deterministic: split k shuffles with stream (seed, k).
SplitSet make_splits(const LabelSet& ls, double train_ratio, double val_ratio, int n_splits,
                     std::uint64_t seed);

void save_splits(const std::string& path, const SplitSet& ss);
SplitSet load_splits(const std::string& path);

}  // namespace rawgnn
