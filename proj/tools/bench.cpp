#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rawgnn/kernels.hpp"
#include "rawgnn/rng.hpp"
#include "rawgnn/tape.hpp"
#include "rawgnn/walker.hpp"

using namespace rawgnn;
namespace k = rawgnn::kernels;

namespace {

double time_best_ms(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

Array random_array(std::vector<std::size_t> shape, RngStream& rng) {
  Array a(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] = rng.uniform(-1.0, 1.0);
  return a;
}

struct Row {
  std::string name;
  double serial_ms;
  double omp_ms;
};

void run_both(std::vector<Row>& rows, const std::string& name, int reps,
              const std::function<void()>& fn) {
  Row row{name, 0, 0};
  k::set_backend(k::Backend::serial);
  row.serial_ms = time_best_ms(reps, fn);
  k::set_backend(k::Backend::openmp);
  row.omp_ms = time_best_ms(reps, fn);
  rows.push_back(row);
}

}  // namespace

// Compares the serial reference kernels with the OpenMP ones on the shapes a
// Cora-scale training epoch produces (n=2708, f=1433, d=32, n*R=16248).
int main(int argc, char** argv) {
  int reps = 5;
  if (argc > 1) reps = std::atoi(argv[1]);
  std::printf("threads=%d (set OMP_NUM_THREADS to change), best of %d reps\n",
              k::max_threads(), reps);

  RngStream rng(1, 1);
  std::vector<Row> rows;

  {
    const std::size_t m = 2708, kk = 1433, n = 32;
    Array a = random_array({m, kk}, rng), b = random_array({kk, n}, rng), c({m, n});
    run_both(rows, "matmul 2708x1433 @ 1433x32", reps,
             [&] { k::matmul_nn(m, kk, n, a.data(), b.data(), c.data(), false); });
  }
  {
    const std::size_t m = 16248, kk = 32, n = 32;
    Array a = random_array({m, kk}, rng), b = random_array({kk, n}, rng), c({m, n});
    run_both(rows, "matmul 16248x32 @ 32x32", reps,
             [&] { k::matmul_nn(m, kk, n, a.data(), b.data(), c.data(), false); });
  }
  {
    const std::size_t rows_n = 2708, d = 32, batch = 16248;
    Array src = random_array({rows_n, d}, rng);
    Array dst({batch, d});
    std::vector<std::int32_t> idx(batch);
    for (auto& i : idx) i = static_cast<std::int32_t>(rng.next_index(rows_n));
    run_both(rows, "gather_rows 16248x32", reps,
             [&] { k::gather_rows(d, idx.data(), batch, src.data(), dst.data()); });
    Array back({rows_n, d});
    run_both(rows, "scatter_add_rows 16248x32", reps,
             [&] { k::scatter_add_rows(d, idx.data(), batch, dst.data(), back.data(), rows_n); });
  }
  {
    const std::size_t r = 2708, c = 6;
    Array x = random_array({r, c}, rng), y({r, c});
    run_both(rows, "softmax_rows 2708x6", reps,
             [&] { k::softmax_rows(r, c, x.data(), y.data()); });
  }
  {
    // one fused GRU step, forward + backward, through the tape
    const std::size_t n = 2708, d = 32, batch = 16248;
    Array pz = random_array({n, d}, rng), pr = random_array({n, d}, rng),
          ph = random_array({n, d}, rng), h0 = random_array({batch, d}, rng);
    Array uz = random_array({d, d}, rng), ur = random_array({d, d}, rng),
          uh = random_array({d, d}, rng);
    Array bz = random_array({d}, rng), br = random_array({d}, rng), bh = random_array({d}, rng);
    std::vector<std::int32_t> idx(batch);
    for (auto& i : idx) i = static_cast<std::int32_t>(rng.next_index(n));
    run_both(rows, "gru_step fwd+bwd B=16248 d=32", reps, [&] {
      Tape tape;
      Tensor o = gru_step(tape.leaf(pz, true), tape.leaf(pr, true), tape.leaf(ph, true), idx,
                          tape.leaf(h0, true), tape.leaf(uz, true), tape.leaf(ur, true),
                          tape.leaf(uh, true), tape.leaf(bz, true), tape.leaf(br, true),
                          tape.leaf(bh, true));
      tape.backward(sum(o));
    });
  }
  {
    // walk sampling over a 20k-node random graph (parallel over nodes)
    RngStream gen(7, 7);
    const std::int32_t n = 20000;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    edges.reserve(static_cast<std::size_t>(n) * 5);
    for (std::int32_t i = 0; i < n; ++i)
      for (int e = 0; e < 5; ++e)
        edges.emplace_back(i, static_cast<std::int32_t>(gen.next_index(n)));
    Graph g = Graph::build(n, edges, Array({static_cast<std::size_t>(n), 1}));
    WalkStrategy ws = WalkStrategy::dfs(7, 6);
    rows.push_back({"sample walks n=20k R=6 K=7", 0, 0});
    rows.back().serial_ms = rows.back().omp_ms =
        time_best_ms(reps, [&] { sample_all_neighborhoods(g, ws, 3, 3); });
  }

  std::printf("\n%-32s %12s %12s %9s\n", "kernel", "serial ms", "openmp ms", "speedup");
  for (const Row& r : rows)
    std::printf("%-32s %12.2f %12.2f %8.2fx\n", r.name.c_str(), r.serial_ms, r.omp_ms,
                r.serial_ms / r.omp_ms);
  k::set_backend(k::Backend::openmp);
  return 0;
}
