#include "rawgnn/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rawgnn/rng.hpp"

namespace rawgnn {

SplitSet make_splits(const LabelSet& ls, double train_ratio, double val_ratio, int n_splits,
                     std::uint64_t seed) {
  if (train_ratio <= 0.0 || val_ratio <= 0.0 || train_ratio + val_ratio >= 1.0)
    throw std::invalid_argument("make_splits: ratios must be positive with sum < 1");
  if (n_splits < 1) throw std::invalid_argument("make_splits: n_splits must be >= 1");
  const auto& labeled = ls.labeled_nodes();
  const std::size_t nl = labeled.size();
  const auto round_half_up = [](double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
  };
  const std::size_t n_train = round_half_up(train_ratio * static_cast<double>(nl));
  const std::size_t n_val = round_half_up(val_ratio * static_cast<double>(nl));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= nl)
    throw std::invalid_argument("make_splits: too few labeled nodes (" + std::to_string(nl) +
                                ") to fill train/val/test");

  SplitSet ss;
  ss.seed = seed;
  ss.train_ratio = train_ratio;
  ss.val_ratio = val_ratio;
  for (int k = 0; k < n_splits; ++k) {
    std::vector<std::int32_t> order = labeled;
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    rng.shuffle(order);
    Split sp;
    sp.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    sp.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    sp.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    std::sort(sp.train.begin(), sp.train.end());
    std::sort(sp.val.begin(), sp.val.end());
    std::sort(sp.test.begin(), sp.test.end());
    ss.splits.push_back(std::move(sp));
  }
  return ss;
}

namespace {
constexpr const char* kSplitsTag = "rawgnn-splits v1";

void write_list(std::ostream& out, const char* name, const std::vector<std::int32_t>& v) {
  out << name;
  for (std::int32_t i : v) out << " " << i;
  out << "\n";
}

std::vector<std::int32_t> read_list(const std::string& line, const std::string& expect,
                                    const std::string& path) {
  std::istringstream ls(line);
  std::string tag;
  ls >> tag;
  if (tag != expect)
    throw std::runtime_error(path + ": expected '" + expect + "' section, got '" + tag + "'");
  std::vector<std::int32_t> v;
  std::int32_t x;
  while (ls >> x) v.push_back(x);
  return v;
}
}  // namespace

void save_splits(const std::string& path, const SplitSet& ss) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_splits: cannot open " + path);
  out << kSplitsTag << "\n";
  out << "seed " << ss.seed << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "ratios %.17g %.17g\n", ss.train_ratio, ss.val_ratio);
  out << buf;
  out << "n_splits " << ss.splits.size() << "\n";
  for (std::size_t k = 0; k < ss.splits.size(); ++k) {
    out << "split " << k << "\n";
    write_list(out, "train", ss.splits[k].train);
    write_list(out, "val", ss.splits[k].val);
    write_list(out, "test", ss.splits[k].test);
  }
  if (!out) throw std::runtime_error("save_splits: write failed for " + path);
}

SplitSet load_splits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_splits: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kSplitsTag)
    throw std::runtime_error(path + ": not a rawgnn splits file");
  SplitSet ss;
  std::size_t n_splits = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated");
  {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag >> ss.seed;
    if (tag != "seed") throw std::runtime_error(path + ": missing seed line");
  }
  if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated");
  {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag >> ss.train_ratio >> ss.val_ratio;
    if (tag != "ratios") throw std::runtime_error(path + ": missing ratios line");
  }
  if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated");
  {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag >> n_splits;
    if (tag != "n_splits") throw std::runtime_error(path + ": missing n_splits line");
  }
  for (std::size_t k = 0; k < n_splits; ++k) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated split header");
    Split sp;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated train list");
    sp.train = read_list(line, "train", path);
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated val list");
    sp.val = read_list(line, "val", path);
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated test list");
    sp.test = read_list(line, "test", path);
    ss.splits.push_back(std::move(sp));
  }
  return ss;
}

}  // namespace rawgnn
