#pragma once

#include <cstddef>
#include <cstdint>

// Dense kernels behind the tensor ops. Every kernel exists twice: a plain
// serial reference under kernels::serial and an OpenMP variant under
// kernels::omp. Both accumulate in the same per-element order, so results
// are bit-identical and the dispatched functions are deterministic for any
// thread count. tools/rawgnn-bench compares the two backends.
namespace rawgnn::kernels {

enum class Backend { serial, openmp };

void set_backend(Backend b);
Backend backend();
bool openmp_compiled();
int max_threads();

namespace serial {
void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate);
void matmul_nt(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate);
void matmul_tn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate);
void gather_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                 double* dst);
void scatter_add_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                      double* dst, std::size_t n_dst);
void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y);
void col_sum(std::size_t rows, std::size_t cols, const double* x, double* out, bool accumulate);
void add_rowvec(std::size_t rows, std::size_t cols, double* x, const double* v);
void group_weighted_sum(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                        const double* w, double* out);
void group_weighted_sum_grad_h(std::size_t groups, std::size_t r, std::size_t d, const double* w,
                               const double* dout, double* dH, bool accumulate);
void group_weighted_sum_grad_w(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                               const double* dout, double* dw, bool accumulate);
void vsigmoid(std::size_t n, const double* x, double* y);
void vtanh(std::size_t n, const double* x, double* y);
void vleaky_relu(std::size_t n, double slope, const double* x, double* y);
void velu(std::size_t n, const double* x, double* y);
void vlog(std::size_t n, const double* x, double* y);
void vexp(std::size_t n, const double* x, double* y);
void vmul(std::size_t n, const double* a, const double* b, double* y);
void vadd(std::size_t n, const double* a, const double* b, double* y);
void vscale(std::size_t n, double c, const double* x, double* y);
void vaxpy(std::size_t n, double c, const double* x, double* y);  // y += c*x
void gru_out(std::size_t n, const double* z, const double* hc, const double* h, double* out);
void gru_bwd_stage1(std::size_t n, const double* dout, const double* z, const double* hc,
                    const double* h, double* dah, double* daz, double* dh_acc);
void gru_bwd_stage2(std::size_t n, const double* drh, const double* h, const double* r,
                    double* dar, double* dh_acc);
void dropout_forward(std::size_t n, std::uint64_t base, double keep, const double* x, double* y,
                     double* mask);
bool all_finite(std::size_t n, const double* x);
}  // namespace serial

namespace omp {
void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate);
void matmul_nt(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate);
void matmul_tn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate);
void gather_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                 double* dst);
void scatter_add_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                      double* dst, std::size_t n_dst);
void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y);
void col_sum(std::size_t rows, std::size_t cols, const double* x, double* out, bool accumulate);
void add_rowvec(std::size_t rows, std::size_t cols, double* x, const double* v);
void group_weighted_sum(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                        const double* w, double* out);
void group_weighted_sum_grad_h(std::size_t groups, std::size_t r, std::size_t d, const double* w,
                               const double* dout, double* dH, bool accumulate);
void group_weighted_sum_grad_w(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                               const double* dout, double* dw, bool accumulate);
void vsigmoid(std::size_t n, const double* x, double* y);
void vtanh(std::size_t n, const double* x, double* y);
void vleaky_relu(std::size_t n, double slope, const double* x, double* y);
void velu(std::size_t n, const double* x, double* y);
void vlog(std::size_t n, const double* x, double* y);
void vexp(std::size_t n, const double* x, double* y);
void vmul(std::size_t n, const double* a, const double* b, double* y);
void vadd(std::size_t n, const double* a, const double* b, double* y);
void vscale(std::size_t n, double c, const double* x, double* y);
void vaxpy(std::size_t n, double c, const double* x, double* y);
void gru_out(std::size_t n, const double* z, const double* hc, const double* h, double* out);
void gru_bwd_stage1(std::size_t n, const double* dout, const double* z, const double* hc,
                    const double* h, double* dah, double* daz, double* dh_acc);
void gru_bwd_stage2(std::size_t n, const double* drh, const double* h, const double* r,
                    double* dar, double* dh_acc);
void dropout_forward(std::size_t n, std::uint64_t base, double keep, const double* x, double* y,
                     double* mask);
bool all_finite(std::size_t n, const double* x);
}  // namespace omp

// Dispatched entry points (route to serial:: or omp:: per set_backend).
void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate = false);
void matmul_nt(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate = false);
void matmul_tn(std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
               double* C, bool accumulate = false);
void gather_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                 double* dst);
void scatter_add_rows(std::size_t d, const std::int32_t* idx, std::size_t b, const double* src,
                      double* dst, std::size_t n_dst);
void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y);
void col_sum(std::size_t rows, std::size_t cols, const double* x, double* out,
             bool accumulate = false);
void add_rowvec(std::size_t rows, std::size_t cols, double* x, const double* v);
void group_weighted_sum(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                        const double* w, double* out);
void group_weighted_sum_grad_h(std::size_t groups, std::size_t r, std::size_t d, const double* w,
                               const double* dout, double* dH, bool accumulate = true);
void group_weighted_sum_grad_w(std::size_t groups, std::size_t r, std::size_t d, const double* H,
                               const double* dout, double* dw, bool accumulate = true);
void vsigmoid(std::size_t n, const double* x, double* y);
void vtanh(std::size_t n, const double* x, double* y);
void vleaky_relu(std::size_t n, double slope, const double* x, double* y);
void velu(std::size_t n, const double* x, double* y);
void vlog(std::size_t n, const double* x, double* y);
void vexp(std::size_t n, const double* x, double* y);
void vmul(std::size_t n, const double* a, const double* b, double* y);
void vadd(std::size_t n, const double* a, const double* b, double* y);
void vscale(std::size_t n, double c, const double* x, double* y);
void vaxpy(std::size_t n, double c, const double* x, double* y);
void gru_out(std::size_t n, const double* z, const double* hc, const double* h, double* out);
void gru_bwd_stage1(std::size_t n, const double* dout, const double* z, const double* hc,
                    const double* h, double* dah, double* daz, double* dh_acc);
void gru_bwd_stage2(std::size_t n, const double* drh, const double* h, const double* r,
                    double* dar, double* dh_acc);
void dropout_forward(std::size_t n, std::uint64_t base, double keep, const double* x, double* y,
                     double* mask);
bool all_finite(std::size_t n, const double* x);

}  // namespace rawgnn::kernels
