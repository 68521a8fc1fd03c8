#include "rawgnn/dataset_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rawgnn {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t lineno,
                             const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
}

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::vector<std::pair<std::int32_t, std::int32_t>> load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::int64_t a, b;
    if (!(ls >> a >> b)) parse_fail(path, lineno, "expected 'src<TAB>dst', got '" + line + "'");
    std::string extra;
    if (ls >> extra) parse_fail(path, lineno, "trailing token '" + extra + "'");
    if (a < 0 || b < 0) parse_fail(path, lineno, "negative node id");
    if (a > INT32_MAX || b > INT32_MAX) parse_fail(path, lineno, "node id too large");
    edges.emplace_back(static_cast<std::int32_t>(a), static_cast<std::int32_t>(b));
  }
  return edges;
}

Array load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_features: cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  // header: "n f" or "n f --sparse"
  std::size_t n = 0, f = 0;
  bool sparse = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    std::istringstream ls(line);
    if (!(ls >> n >> f)) parse_fail(path, lineno, "expected header 'n f'");
    std::string flag;
    if (ls >> flag) {
      if (flag == "--sparse")
        sparse = true;
      else
        parse_fail(path, lineno, "unknown header flag '" + flag + "'");
    }
    break;
  }
  if (n == 0 && f == 0) parse_fail(path, lineno, "missing feature header");

  Array features({n, f});
  if (sparse) {
    while (std::getline(in, line)) {
      ++lineno;
      if (blank_or_comment(line)) continue;
      std::istringstream ls(line);
      std::size_t i, j;
      double v;
      if (!(ls >> i >> j >> v)) parse_fail(path, lineno, "expected 'i j v' triplet");
      if (i >= n || j >= f) parse_fail(path, lineno, "triplet index out of range");
      features.at2(i, j) = v;
    }
  } else {
    std::size_t row = 0;
    while (row < n) {
      if (!std::getline(in, line))
        parse_fail(path, lineno, "expected " + std::to_string(n) + " feature rows, got " +
                                     std::to_string(row));
      ++lineno;
      if (blank_or_comment(line)) continue;
      std::istringstream ls(line);
      for (std::size_t j = 0; j < f; ++j) {
        double v;
        if (!(ls >> v))
          parse_fail(path, lineno,
                     "row has fewer than f=" + std::to_string(f) + " values (column " +
                         std::to_string(j) + ")");
        features.at2(row, j) = v;
      }
      double extra;
      if (ls >> extra) parse_fail(path, lineno, "row has more than f values");
      ++row;
    }
  }
  return features;
}

std::vector<std::pair<std::int32_t, std::int32_t>> load_label_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_label_pairs: cannot open " + path);
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::int64_t node, cls;
    if (!(ls >> node >> cls))
      parse_fail(path, lineno, "expected 'node<TAB>class', got '" + line + "'");
    if (node < 0 || cls < 0) parse_fail(path, lineno, "negative node or class id");
    pairs.emplace_back(static_cast<std::int32_t>(node), static_cast<std::int32_t>(cls));
  }
  return pairs;
}

Dataset load_dataset(const std::string& edge_path, const std::string& feature_path,
                     const std::string& label_path) {
  Array features = load_features(feature_path);
  const auto n = static_cast<std::int32_t>(features.dim(0));
  auto edges = load_edge_list(edge_path);
  for (const auto& [a, b] : edges)
    if (a >= n || b >= n)
      throw std::runtime_error(edge_path + ": edge (" + std::to_string(a) + "," +
                               std::to_string(b) + ") references node >= n=" +
                               std::to_string(n) + " from " + feature_path);
  auto pairs = load_label_pairs(label_path);
  for (const auto& [node, _] : pairs)
    if (node >= n)
      throw std::runtime_error(label_path + ": node " + std::to_string(node) +
                               " >= n=" + std::to_string(n) + " from " + feature_path);
  Dataset ds{Graph::build(n, edges, std::move(features)), LabelSet::build(n, pairs)};
  return ds;
}

Dataset load_dataset_dir(const std::string& dir) {
  return load_dataset(dir + "/edges.tsv", dir + "/features.txt", dir + "/labels.tsv");
}

bool dataset_dir_exists(const std::string& dir) {
  namespace fs = std::filesystem;
  return fs::exists(dir + "/edges.tsv") && fs::exists(dir + "/features.txt") &&
         fs::exists(dir + "/labels.tsv");
}

void save_edges(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_edges: cannot open " + path);
  for (const auto& [a, b] : g.edge_list()) out << a << "\t" << b << "\n";
  if (!out) throw std::runtime_error("save_edges: write failed for " + path);
}

void save_features(const std::string& path, const Array& features, bool sparse) {
  if (features.ndim() != 2)
    throw std::invalid_argument("save_features: expected rank-2 features");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_features: cannot open " + path);
  const std::size_t n = features.dim(0), f = features.dim(1);
  char buf[40];
  if (sparse) {
    out << n << " " << f << " --sparse\n";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j)
        if (features.at2(i, j) != 0.0) {
          std::snprintf(buf, sizeof(buf), "%.17g", features.at2(i, j));
          out << i << " " << j << " " << buf << "\n";
        }
  } else {
    out << n << " " << f << "\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < f; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", features.at2(i, j));
        out << (j ? " " : "") << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("save_features: write failed for " + path);
}

void save_labels(const std::string& path, const LabelSet& ls) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_labels: cannot open " + path);
  for (std::int32_t i : ls.labeled_nodes()) out << i << "\t" << ls.label(i) << "\n";
  if (!out) throw std::runtime_error("save_labels: write failed for " + path);
}

}  // namespace rawgnn
