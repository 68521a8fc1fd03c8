#include "rawgnn/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>

#include "rawgnn/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rawgnn::kernels {

namespace {

std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::openmp
#else
    Backend::serial
#endif
};

// Large enough that thread spawn overhead stays below the loop body cost.
constexpr std::size_t kParGrain = 4096;

}  // namespace

void set_backend(Backend b) { g_backend.store(b); }
Backend backend() { return g_backend.load(); }

bool openmp_compiled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---------------------------------------------------------------------------
// Serial reference implementations: textbook loops, no restructuring.
// ---------------------------------------------------------------------------
namespace serial {

void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = accumulate ? C[i * n + j] : 0.0;
      for (std::size_t l = 0; l < k; ++l) sum += A[i * k + l] * B[l * n + j];
      C[i * n + j] = sum;
    }
  }
}

// C[m x n] = A[m x k] * B[n x k]^T
void matmul_nt(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = accumulate ? C[i * n + j] : 0.0;
      for (std::size_t l = 0; l < k; ++l) sum += A[i * k + l] * B[j * k + l];
      C[i * n + j] = sum;
    }
  }
}

// C[k x n] = A[m x k]^T * B[m x n]
void matmul_tn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = accumulate ? C[i * n + j] : 0.0;
      for (std::size_t l = 0; l < m; ++l) sum += A[l * k + i] * B[l * n + j];
      C[i * n + j] = sum;
    }
  }
}

void gather_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                 double* dst) {
  for (std::size_t r = 0; r < b; ++r)
    std::memcpy(dst + r * d, src + static_cast<std::size_t>(idx[r]) * d, d * sizeof(double));
}

void scatter_add_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                      double* dst, std::size_t) {
  for (std::size_t r = 0; r < b; ++r) {
    double* out = dst + static_cast<std::size_t>(idx[r]) * d;
    const double* in = src + r * d;
    for (std::size_t c = 0; c < d; ++c) out[c] += in[c];
  }
}

void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xi = x + i * cols;
    double* yi = y + i * cols;
    double mx = xi[0];
    for (std::size_t j = 1; j < cols; ++j)
      if (xi[j] > mx) mx = xi[j];
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      yi[j] = std::exp(xi[j] - mx);
      sum += yi[j];
    }
    for (std::size_t j = 0; j < cols; ++j) yi[j] /= sum;
  }
}

void col_sum(std::size_t rows, std::size_t cols, const double* x, double* out, bool accumulate) {
  for (std::size_t j = 0; j < cols; ++j) {
    double sum = accumulate ? out[j] : 0.0;
    for (std::size_t i = 0; i < rows; ++i) sum += x[i * cols + j];
    out[j] = sum;
  }
}

void add_rowvec(std::size_t rows, std::size_t cols, double* x, const double* v) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) x[i * cols + j] += v[j];
}

void group_weighted_sum(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                        const double* w, double* out) {
  for (std::size_t g = 0; g < groups; ++g) {
    double* og = out + g * d;
    for (std::size_t c = 0; c < d; ++c) og[c] = 0.0;
    for (std::size_t p = 0; p < r; ++p) {
      const double wp = w[g * r + p];
      const double* hp = H + (g * r + p) * d;
      for (std::size_t c = 0; c < d; ++c) og[c] += wp * hp[c];
    }
  }
}

void group_weighted_sum_grad_h(std::size_t groups, std::size_t r, std::size_t d, const double* w,
                               const double* dout, double* dH, bool accumulate) {
  for (std::size_t g = 0; g < groups; ++g) {
    const double* dg = dout + g * d;
    for (std::size_t p = 0; p < r; ++p) {
      const double wp = w[g * r + p];
      double* dh = dH + (g * r + p) * d;
      for (std::size_t c = 0; c < d; ++c) dh[c] = (accumulate ? dh[c] : 0.0) + wp * dg[c];
    }
  }
}

void group_weighted_sum_grad_w(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                               const double* dout, double* dw, bool accumulate) {
  for (std::size_t g = 0; g < groups; ++g) {
    const double* dg = dout + g * d;
    for (std::size_t p = 0; p < r; ++p) {
      const double* hp = H + (g * r + p) * d;
      double sum = accumulate ? dw[g * r + p] : 0.0;
      for (std::size_t c = 0; c < d; ++c) sum += hp[c] * dg[c];
      dw[g * r + p] = sum;
    }
  }
}

void vsigmoid(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void vtanh(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vleaky_relu(std::size_t n, double slope, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
}

void velu(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : std::expm1(x[i]);
}

void vlog(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::log(x[i]);
}

void vexp(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void vmul(std::size_t n, const double* a, const double* b, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void vadd(std::size_t n, const double* a, const double* b, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void vscale(std::size_t n, double c, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = c * x[i];
}

void vaxpy(std::size_t n, double c, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

void gru_out(std::size_t n, const double* z, const double* hc, const double* h, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 - z[i]) * h[i] + z[i] * hc[i];
}

void gru_bwd_stage1(std::size_t n, const double* dout, const double* z, const double* hc,
                    const double* h, double* dah, double* daz, double* dh_acc) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dhc = dout[i] * z[i];
    dah[i] = dhc * (1.0 - hc[i] * hc[i]);
    const double dz = dout[i] * (hc[i] - h[i]);
    daz[i] = dz * z[i] * (1.0 - z[i]);
    dh_acc[i] = dout[i] * (1.0 - z[i]);
  }
}

void gru_bwd_stage2(std::size_t n, const double* drh, const double* h, const double* r,
                    double* dar, double* dh_acc) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = drh[i] * h[i];
    dar[i] = dr * r[i] * (1.0 - r[i]);
    dh_acc[i] += drh[i] * r[i];
  }
}

void dropout_forward(std::size_t n, std::uint64_t base, double keep, const double* x, double* y,
                     double* mask) {
  const double scale = 1.0 / keep;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(splitmix64(base + i) >> 11) * 0x1.0p-53;
    mask[i] = u < keep ? scale : 0.0;
    y[i] = x[i] * mask[i];
  }
}

bool all_finite(std::size_t n, const double* x) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP implementations. Parallelism is always over independent output
// elements and the per-element accumulation order matches the serial
// reference, so both backends produce bit-identical results.
// ---------------------------------------------------------------------------
namespace omp {

void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  const std::int64_t mm = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k >= kParGrain)
  for (std::int64_t i = 0; i < mm; ++i) {
    double* ci = C + i * n;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double a = A[i * k + l];
      const double* bl = B + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += a * bl[j];
    }
  }
}

void matmul_nt(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  const std::int64_t mm = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k >= kParGrain)
  for (std::int64_t i = 0; i < mm; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = accumulate ? C[i * n + j] : 0.0;
      const double* ai = A + i * k;
      const double* bj = B + j * k;
      for (std::size_t l = 0; l < k; ++l) sum += ai[l] * bj[l];
      C[i * n + j] = sum;
    }
  }
}

void matmul_tn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
#ifdef _OPENMP
#pragma omp parallel if (m * n * k >= kParGrain && n > 1)
  {
    const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t j0 = n * tid / nt;
    const std::size_t j1 = n * (tid + 1) / nt;
    if (!accumulate)
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = j0; j < j1; ++j) C[i * n + j] = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      const double* al = A + l * k;
      const double* bl = B + l * n;
      for (std::size_t i = 0; i < k; ++i) {
        const double a = al[i];
        double* ci = C + i * n;
        for (std::size_t j = j0; j < j1; ++j) ci[j] += a * bl[j];
      }
    }
  }
#else
  serial::matmul_tn(m, k, n, A, B, C, accumulate);
#endif
}

void gather_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                 double* dst) {
  const std::int64_t bb = static_cast<std::int64_t>(b);
#pragma omp parallel for schedule(static) if (b * d >= kParGrain)
  for (std::int64_t r = 0; r < bb; ++r)
    std::memcpy(dst + r * d, src + static_cast<std::size_t>(idx[r]) * d, d * sizeof(double));
}

// Each thread owns a contiguous destination-row range and scans the whole
// index list, so writes stay row-major and every destination element
// accumulates sources in the same ascending order as the serial version.
void scatter_add_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                      double* dst, std::size_t n_dst) {
#ifdef _OPENMP
#pragma omp parallel if (b * d >= kParGrain && n_dst > 1)
  {
    const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t lo = n_dst * tid / nt;
    const std::size_t hi = n_dst * (tid + 1) / nt;
    for (std::size_t r = 0; r < b; ++r) {
      const std::size_t row = static_cast<std::size_t>(idx[r]);
      if (row < lo || row >= hi) continue;
      double* out = dst + row * d;
      const double* in = src + r * d;
      for (std::size_t c = 0; c < d; ++c) out[c] += in[c];
    }
  }
#else
  serial::scatter_add_rows(d, idx, b, src, dst, n_dst);
#endif
}

void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y) {
  const std::int64_t rr = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kParGrain)
  for (std::int64_t i = 0; i < rr; ++i) serial::softmax_rows(1, cols, x + i * cols, y + i * cols);
}

void col_sum(std::size_t rows, std::size_t cols, const double* x, double* out, bool accumulate) {
  const std::int64_t cc = static_cast<std::int64_t>(cols);
#pragma omp parallel for schedule(static) if (rows * cols >= kParGrain && cols >= 8)
  for (std::int64_t j = 0; j < cc; ++j) {
    double sum = accumulate ? out[j] : 0.0;
    for (std::size_t i = 0; i < rows; ++i) sum += x[i * cols + j];
    out[j] = sum;
  }
}

void add_rowvec(std::size_t rows, std::size_t cols, double* x, const double* v) {
  const std::int64_t rr = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kParGrain)
  for (std::int64_t i = 0; i < rr; ++i)
    for (std::size_t j = 0; j < cols; ++j) x[i * cols + j] += v[j];
}

void group_weighted_sum(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                        const double* w, double* out) {
  const std::int64_t gg = static_cast<std::int64_t>(groups);
#pragma omp parallel for schedule(static) if (groups * r * d >= kParGrain)
  for (std::int64_t g = 0; g < gg; ++g)
    serial::group_weighted_sum(1, r, d, H + g * r * d, w + g * r, out + g * d);
}

void group_weighted_sum_grad_h(std::size_t groups, std::size_t r, std::size_t d, const double* w,
                               const double* dout, double* dH, bool accumulate) {
  const std::int64_t gg = static_cast<std::int64_t>(groups);
#pragma omp parallel for schedule(static) if (groups * r * d >= kParGrain)
  for (std::int64_t g = 0; g < gg; ++g)
    serial::group_weighted_sum_grad_h(1, r, d, w + g * r, dout + g * d, dH + g * r * d,
                                      accumulate);
}

void group_weighted_sum_grad_w(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                               const double* dout, double* dw, bool accumulate) {
  const std::int64_t gg = static_cast<std::int64_t>(groups);
#pragma omp parallel for schedule(static) if (groups * r * d >= kParGrain)
  for (std::int64_t g = 0; g < gg; ++g)
    serial::group_weighted_sum_grad_w(1, r, d, H + g * r * d, dout + g * d, dw + g * r,
                                      accumulate);
}

#define RAWGNN_OMP_MAP(expr)                                   \
  const std::int64_t nn = static_cast<std::int64_t>(n);        \
  _Pragma("omp parallel for schedule(static) if (n >= kParGrain)") \
  for (std::int64_t i = 0; i < nn; ++i) expr

void vsigmoid(std::size_t n, const double* x, double* y) {
  RAWGNN_OMP_MAP(y[i] = 1.0 / (1.0 + std::exp(-x[i])));
}
void vtanh(std::size_t n, const double* x, double* y) { RAWGNN_OMP_MAP(y[i] = std::tanh(x[i])); }
void vleaky_relu(std::size_t n, double slope, const double* x, double* y) {
  RAWGNN_OMP_MAP(y[i] = x[i] >= 0.0 ? x[i] : slope * x[i]);
}
void velu(std::size_t n, const double* x, double* y) {
  RAWGNN_OMP_MAP(y[i] = x[i] >= 0.0 ? x[i] : std::expm1(x[i]));
}
void vlog(std::size_t n, const double* x, double* y) { RAWGNN_OMP_MAP(y[i] = std::log(x[i])); }
void vexp(std::size_t n, const double* x, double* y) { RAWGNN_OMP_MAP(y[i] = std::exp(x[i])); }
void vmul(std::size_t n, const double* a, const double* b, double* y) {
  RAWGNN_OMP_MAP(y[i] = a[i] * b[i]);
}
void vadd(std::size_t n, const double* a, const double* b, double* y) {
  RAWGNN_OMP_MAP(y[i] = a[i] + b[i]);
}
void vscale(std::size_t n, double c, const double* x, double* y) {
  RAWGNN_OMP_MAP(y[i] = c * x[i]);
}
void vaxpy(std::size_t n, double c, const double* x, double* y) {
  RAWGNN_OMP_MAP(y[i] += c * x[i]);
}
void gru_out(std::size_t n, const double* z, const double* hc, const double* h, double* out) {
  RAWGNN_OMP_MAP(out[i] = (1.0 - z[i]) * h[i] + z[i] * hc[i]);
}

#undef RAWGNN_OMP_MAP

void gru_bwd_stage1(std::size_t n, const double* dout, const double* z, const double* hc,
                    const double* h, double* dah, double* daz, double* dh_acc) {
  const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParGrain)
  for (std::int64_t i = 0; i < nn; ++i) {
    const double dhc = dout[i] * z[i];
    dah[i] = dhc * (1.0 - hc[i] * hc[i]);
    const double dz = dout[i] * (hc[i] - h[i]);
    daz[i] = dz * z[i] * (1.0 - z[i]);
    dh_acc[i] = dout[i] * (1.0 - z[i]);
  }
}

void gru_bwd_stage2(std::size_t n, const double* drh, const double* h, const double* r,
                    double* dar, double* dh_acc) {
  const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParGrain)
  for (std::int64_t i = 0; i < nn; ++i) {
    const double dr = drh[i] * h[i];
    dar[i] = dr * r[i] * (1.0 - r[i]);
    dh_acc[i] += drh[i] * r[i];
  }
}

// Counter-based per-element draws keep the mask independent of threading.
void dropout_forward(std::size_t n, std::uint64_t base, double keep, const double* x, double* y,
                     double* mask) {
  const double scale = 1.0 / keep;
  const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParGrain)
  for (std::int64_t i = 0; i < nn; ++i) {
    const double u =
        static_cast<double>(splitmix64(base + static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53;
    mask[i] = u < keep ? scale : 0.0;
    y[i] = x[i] * mask[i];
  }
}

bool all_finite(std::size_t n, const double* x) {
  bool ok = true;
  const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) reduction(&& : ok) if (n >= kParGrain)
  for (std::int64_t i = 0; i < nn; ++i) ok = ok && std::isfinite(x[i]);
  return ok;
}

}  // namespace omp

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------
#define RAWGNN_DISPATCH(fn, ...)                        \
  do {                                                  \
    if (backend() == Backend::openmp)                   \
      omp::fn(__VA_ARGS__);                             \
    else                                                \
      serial::fn(__VA_ARGS__);                          \
  } while (0)

void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  RAWGNN_DISPATCH(matmul_nn, m, k, n, A, B, C, accumulate);
}
void matmul_nt(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  RAWGNN_DISPATCH(matmul_nt, m, k, n, A, B, C, accumulate);
}
void matmul_tn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate) {
  RAWGNN_DISPATCH(matmul_tn, m, k, n, A, B, C, accumulate);
}
void gather_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                 double* dst) {
  RAWGNN_DISPATCH(gather_rows, d, idx, b, src, dst);
}
void scatter_add_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                      double* dst, std::size_t n_dst) {
  RAWGNN_DISPATCH(scatter_add_rows, d, idx, b, src, dst, n_dst);
}
void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y) {
  RAWGNN_DISPATCH(softmax_rows, rows, cols, x, y);
}
void col_sum(std::size_t rows, std::size_t cols, const double* x, double* out, bool accumulate) {
  RAWGNN_DISPATCH(col_sum, rows, cols, x, out, accumulate);
}
void add_rowvec(std::size_t rows, std::size_t cols, double* x, const double* v) {
  RAWGNN_DISPATCH(add_rowvec, rows, cols, x, v);
}
void group_weighted_sum(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                        const double* w, double* out) {
  RAWGNN_DISPATCH(group_weighted_sum, groups, r, d, H, w, out);
}
void group_weighted_sum_grad_h(std::size_t groups, std::size_t r, std::size_t d, const double* w,
                               const double* dout, double* dH, bool accumulate) {
  RAWGNN_DISPATCH(group_weighted_sum_grad_h, groups, r, d, w, dout, dH, accumulate);
}
void group_weighted_sum_grad_w(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                               const double* dout, double* dw, bool accumulate) {
  RAWGNN_DISPATCH(group_weighted_sum_grad_w, groups, r, d, H, dout, dw, accumulate);
}
void vsigmoid(std::size_t n, const double* x, double* y) { RAWGNN_DISPATCH(vsigmoid, n, x, y); }
void vtanh(std::size_t n, const double* x, double* y) { RAWGNN_DISPATCH(vtanh, n, x, y); }
void vleaky_relu(std::size_t n, double slope, const double* x, double* y) {
  RAWGNN_DISPATCH(vleaky_relu, n, slope, x, y);
}
void velu(std::size_t n, const double* x, double* y) { RAWGNN_DISPATCH(velu, n, x, y); }
void vlog(std::size_t n, const double* x, double* y) { RAWGNN_DISPATCH(vlog, n, x, y); }
void vexp(std::size_t n, const double* x, double* y) { RAWGNN_DISPATCH(vexp, n, x, y); }
void vmul(std::size_t n, const double* a, const double* b, double* y) {
  RAWGNN_DISPATCH(vmul, n, a, b, y);
}
void vadd(std::size_t n, const double* a, const double* b, double* y) {
  RAWGNN_DISPATCH(vadd, n, a, b, y);
}
void vscale(std::size_t n, double c, const double* x, double* y) {
  RAWGNN_DISPATCH(vscale, n, c, x, y);
}
void vaxpy(std::size_t n, double c, const double* x, double* y) {
  RAWGNN_DISPATCH(vaxpy, n, c, x, y);
}
void gru_out(std::size_t n, const double* z, const double* hc, const double* h, double* out) {
  RAWGNN_DISPATCH(gru_out, n, z, hc, h, out);
}
void gru_bwd_stage1(std::size_t n, const double* dout, const double* z, const double* hc,
                    const double* h, double* dah, double* daz, double* dh_acc) {
  RAWGNN_DISPATCH(gru_bwd_stage1, n, dout, z, hc, h, dah, daz, dh_acc);
}
void gru_bwd_stage2(std::size_t n, const double* drh, const double* h, const double* r,
                    double* dar, double* dh_acc) {
  RAWGNN_DISPATCH(gru_bwd_stage2, n, drh, h, r, dar, dh_acc);
}
void dropout_forward(std::size_t n, std::uint64_t base, double keep, const double* x, double* y,
                     double* mask) {
  RAWGNN_DISPATCH(dropout_forward, n, base, keep, x, y, mask);
}
bool all_finite(std::size_t n, const double* x) {
  return backend() == Backend::openmp ? omp::all_finite(n, x) : serial::all_finite(n, x);
}

#undef RAWGNN_DISPATCH

}  // namespace rawgnn::kernels
