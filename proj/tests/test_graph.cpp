#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rawgnn/dataset_io.hpp"
#include "rawgnn/splits.hpp"
#include "support/test_util.hpp"

using namespace rawgnn;
using namespace rawgnn::testutil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rawgnn_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

Graph path_graph(std::int32_t n, std::size_t f = 2) {
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::int32_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::build(n, edges, Array({static_cast<std::size_t>(n), f}));
}

}  // namespace

TEST_CASE("loader dedups, symmetrizes and drops self-loops") {
  TempDir td;
  write_file(td.file("edges.tsv"), "0\t1\n1\t0\n1\t1\n1\t2\n");
  write_file(td.file("features.txt"), "3 2\n1 0\n0 1\n1 1\n");
  write_file(td.file("labels.tsv"), "0\t0\n1\t1\n2\t1\n");
  Dataset ds = load_dataset_dir(td.path.string());
  CHECK(ds.graph.num_nodes() == 3);
  CHECK(ds.graph.num_edges() == 2);  // {0-1, 1-2}
  CHECK(ds.graph.has_edge(0, 1));
  CHECK(ds.graph.has_edge(1, 2));
  CHECK_FALSE(ds.graph.has_edge(1, 1));
  CHECK_FALSE(ds.graph.has_edge(0, 2));
  CHECK(ds.labels.num_classes() == 2);
}

TEST_CASE("neighbors: path, isolated node, star") {
  Graph p = path_graph(3);
  auto nb = neighbors(p, 1);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0] == 0);
  CHECK(nb[1] == 2);

  Graph iso = Graph::build(2, {}, Array({2, 1}));
  CHECK(neighbors(iso, 0).empty());

  Graph star = Graph::build(4, {{0, 1}, {0, 2}, {0, 3}}, Array({4, 1}));
  auto c = neighbors(star, 0);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == 1);
  CHECK(c[1] == 2);
  CHECK(c[2] == 3);

  CHECK_THROWS_AS(neighbors(p, 3), std::out_of_range);
  CHECK_THROWS_AS(neighbors(p, -1), std::out_of_range);
}

TEST_CASE("adjacency symmetry on a random graph") {
  RngStream rng(2024, 0);
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  const std::int32_t n = 40;
  for (int e = 0; e < 120; ++e)
    edges.emplace_back(static_cast<std::int32_t>(rng.next_index(n)),
                       static_cast<std::int32_t>(rng.next_index(n)));
  Graph g = Graph::build(n, edges, Array({40, 1}));
  std::int64_t directed = 0;
  for (std::int32_t i = 0; i < n; ++i) {
    auto nb = g.neighbors(i);
    directed += static_cast<std::int64_t>(nb.size());
    for (std::size_t k = 0; k < nb.size(); ++k) {
      CHECK(g.has_edge(nb[k], i));  // symmetric
      if (k > 0) CHECK(nb[k] > nb[k - 1]);  // sorted, no duplicates
      CHECK(nb[k] != i);                    // no self-loops
    }
  }
  CHECK(directed == 2 * g.num_edges());
}

TEST_CASE("reload idempotence: save then load gives an identical graph") {
  TempDir td;
  RngStream rng(7, 1);
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (int e = 0; e < 30; ++e)
    edges.emplace_back(static_cast<std::int32_t>(rng.next_index(12)),
                       static_cast<std::int32_t>(rng.next_index(12)));
  Array features = random_array({12, 5}, rng, -2.0, 2.0);
  Graph g = Graph::build(12, edges, features);
  LabelSet ls = LabelSet::build(12, {{0, 1}, {3, 0}, {5, 2}, {11, 1}});

  save_edges(td.file("edges.tsv"), g);
  save_features(td.file("features.txt"), g.features(), /*sparse=*/false);
  save_labels(td.file("labels.tsv"), ls);
  Dataset ds = load_dataset_dir(td.path.string());

  CHECK(ds.graph.num_nodes() == g.num_nodes());
  CHECK(ds.graph.num_edges() == g.num_edges());
  CHECK(ds.graph.edge_list() == g.edge_list());
  CHECK(bit_equal(ds.graph.features(), g.features()));
  CHECK(ds.labels.labeled_nodes() == ls.labeled_nodes());
  for (std::int32_t i : ls.labeled_nodes()) CHECK(ds.labels.label(i) == ls.label(i));

  // sparse feature round trip
  save_features(td.file("features.txt"), g.features(), /*sparse=*/true);
  Dataset ds2 = load_dataset_dir(td.path.string());
  CHECK(bit_equal(ds2.graph.features(), g.features()));
}

TEST_CASE("loader errors carry file and line") {
  TempDir td;
  write_file(td.file("edges.tsv"), "0\t1\nnot_a_number\t2\n");
  write_file(td.file("features.txt"), "3 2\n1 0\n0 1\n1 1\n");
  write_file(td.file("labels.tsv"), "0\t0\n");
  CHECK_THROWS_WITH_AS(load_dataset_dir(td.path.string()),
                       doctest::Contains("edges.tsv:2"), std::runtime_error);

  write_file(td.file("edges.tsv"), "0\t1\n");
  write_file(td.file("features.txt"), "3 2\n1 0\n0 1 7\n1 1\n");
  CHECK_THROWS_WITH_AS(load_dataset_dir(td.path.string()),
                       doctest::Contains("features.txt:3"), std::runtime_error);

  write_file(td.file("features.txt"), "3 2\n1 0\n0 1\n1 1\n");
  write_file(td.file("edges.tsv"), "0\t5\n");  // node out of range
  CHECK_THROWS_AS(load_dataset_dir(td.path.string()), std::runtime_error);

  write_file(td.file("edges.tsv"), "0\t1\n");
  write_file(td.file("labels.tsv"), "9\t1\n");  // label node out of range
  CHECK_THROWS_AS(load_dataset_dir(td.path.string()), std::runtime_error);
}

TEST_CASE("non-finite features are rejected") {
  Array f({2, 1});
  f[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Graph::build(2, {{0, 1}}, f), std::invalid_argument);
}

namespace {
LabelSet fully_labeled(std::int32_t n, std::int32_t classes) {
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  for (std::int32_t i = 0; i < n; ++i) pairs.emplace_back(i, i % classes);
  return LabelSet::build(n, pairs);
}
}  // namespace

TEST_CASE("make_splits: sizes, rounding rule, partition, determinism") {
  LabelSet ls = fully_labeled(100, 4);
  SplitSet ss = make_splits(ls, 0.48, 0.32, 10, 123);
  REQUIRE(ss.splits.size() == 10);
  for (const Split& sp : ss.splits) {
    CHECK(sp.train.size() == 48);
    CHECK(sp.val.size() == 32);
    CHECK(sp.test.size() == 20);
    // masks partition the labeled set
    std::vector<std::int32_t> all;
    all.insert(all.end(), sp.train.begin(), sp.train.end());
    all.insert(all.end(), sp.val.begin(), sp.val.end());
    all.insert(all.end(), sp.test.begin(), sp.test.end());
    std::sort(all.begin(), all.end());
    CHECK(all == ls.labeled_nodes());
  }

  // 10 labeled nodes: round-half-up gives 5/3, remainder 2 to test
  LabelSet small = fully_labeled(10, 2);
  SplitSet s2 = make_splits(small, 0.48, 0.32, 1, 5);
  CHECK(s2.splits[0].train.size() == 5);
  CHECK(s2.splits[0].val.size() == 3);
  CHECK(s2.splits[0].test.size() == 2);

  SplitSet a = make_splits(ls, 0.48, 0.32, 3, 99);
  SplitSet b = make_splits(ls, 0.48, 0.32, 3, 99);
  for (int k = 0; k < 3; ++k) {
    CHECK(a.splits[k].train == b.splits[k].train);
    CHECK(a.splits[k].val == b.splits[k].val);
    CHECK(a.splits[k].test == b.splits[k].test);
  }
  SplitSet c = make_splits(ls, 0.48, 0.32, 3, 100);
  CHECK(a.splits[0].train != c.splits[0].train);

  CHECK_THROWS_AS(make_splits(fully_labeled(2, 2), 0.48, 0.32, 1, 1), std::invalid_argument);
}

TEST_CASE("split file round trip") {
  TempDir td;
  LabelSet ls = fully_labeled(25, 3);
  SplitSet ss = make_splits(ls, 0.48, 0.32, 4, 77);
  save_splits(td.file("splits.txt"), ss);
  SplitSet back = load_splits(td.file("splits.txt"));
  CHECK(back.seed == ss.seed);
  CHECK(back.train_ratio == ss.train_ratio);
  CHECK(back.val_ratio == ss.val_ratio);
  REQUIRE(back.splits.size() == ss.splits.size());
  for (std::size_t k = 0; k < ss.splits.size(); ++k) {
    CHECK(back.splits[k].train == ss.splits[k].train);
    CHECK(back.splits[k].val == ss.splits[k].val);
    CHECK(back.splits[k].test == ss.splits[k].test);
  }
}

TEST_CASE("LabelSet: classes, unlabeled nodes, audit protection") {
  LabelSet ls = LabelSet::build(5, {{0, 2}, {2, 0}, {4, 1}});
  CHECK(ls.num_classes() == 3);  // 1 + max label
  CHECK(ls.is_labeled(0));
  CHECK_FALSE(ls.is_labeled(1));
  CHECK(ls.labeled_nodes() == std::vector<std::int32_t>{0, 2, 4});
  CHECK_THROWS_AS(ls.label(1), std::logic_error);

  ls.protect({4});
  CHECK(ls.label(0) == 2);  // unprotected reads fine
  CHECK_THROWS_AS(ls.label(4), std::logic_error);
  ls.unprotect();
  CHECK(ls.label(4) == 1);
}
