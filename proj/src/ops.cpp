#include <cmath>
#include <cstring>

#include "rawgnn/kernels.hpp"
#include "rawgnn/tape.hpp"

namespace rawgnn {

namespace {

Tape& tape_of(const Tensor& t) {
  if (!t.valid()) throw std::logic_error("op: invalid tensor handle");
  return *t.tape();
}

void require_same_tape(const Tensor& a, const Tensor& b) {
  if (a.tape() != b.tape()) throw std::invalid_argument("op: tensors from different tapes");
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.value().ndim() != rank)
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) +
                                ", got shape " + t.value().shape_str());
}

// dst_grad += src, where dst is a parent node id.
void accum_grad(Tape& t, int pid, const Array& contribution) {
  if (!t.wants_grad(pid)) return;
  Array& g = t.grad_buffer(pid);
  kernels::vaxpy(g.numel(), 1.0, contribution.data(), g.data());
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(1);
  if (b.value().dim(0) != k)
    throw std::invalid_argument("matmul: inner dims " + a.value().shape_str() + " x " +
                                b.value().shape_str());
  Array out({m, n});
  kernels::matmul_nn(m, k, n, a.value().data(), b.value().data(), out.data(), false);
  Tape& t = tape_of(a);
  const int aid = a.id(), bid = b.id();
  return t.emit("matmul", std::move(out), {aid, bid}, [m, k, n, aid, bid](Tape& tp, TapeNode& nd) {
    const double* dC = nd.grad.data();
    if (tp.wants_grad(aid))
      kernels::matmul_nt(m, n, k, dC, tp.node(bid).value.data(), tp.grad_buffer(aid).data(),
                         true);
    if (tp.wants_grad(bid))
      kernels::matmul_tn(m, k, n, tp.node(aid).value.data(), dC, tp.grad_buffer(bid).data(),
                         true);
  });
}

Tensor matvec(const Tensor& m, const Tensor& v) {
  require_same_tape(m, v);
  require_rank(m, 2, "matvec");
  require_rank(v, 1, "matvec");
  const std::size_t rows = m.value().dim(0), d = m.value().dim(1);
  if (v.value().dim(0) != d)
    throw std::invalid_argument("matvec: dims " + m.value().shape_str() + " x " +
                                v.value().shape_str());
  Array out({rows});
  kernels::matmul_nn(rows, d, 1, m.value().data(), v.value().data(), out.data(), false);
  Tape& t = tape_of(m);
  const int mid = m.id(), vid = v.id();
  return t.emit("matvec", std::move(out), {mid, vid}, [rows, d, mid, vid](Tape& tp, TapeNode& nd) {
    const double* dout = nd.grad.data();
    if (tp.wants_grad(mid))
      kernels::matmul_nn(rows, 1, d, dout, tp.node(vid).value.data(),
                         tp.grad_buffer(mid).data(), true);
    if (tp.wants_grad(vid))
      kernels::matmul_tn(rows, d, 1, tp.node(mid).value.data(), dout,
                         tp.grad_buffer(vid).data(), true);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  const Array& av = a.value();
  const Array& bv = b.value();
  Tape& t = tape_of(a);
  const int aid = a.id(), bid = b.id();
  if (av.same_shape(bv)) {
    Array out(av.shape());
    kernels::vadd(av.numel(), av.data(), bv.data(), out.data());
    return t.emit("add", std::move(out), {aid, bid}, [aid, bid](Tape& tp, TapeNode& nd) {
      accum_grad(tp, aid, nd.grad);
      accum_grad(tp, bid, nd.grad);
    });
  }
  if (av.ndim() == 2 && bv.ndim() == 1 && bv.dim(0) == av.dim(1)) {
    const std::size_t rows = av.dim(0), cols = av.dim(1);
    Array out = av;
    kernels::add_rowvec(rows, cols, out.data(), bv.data());
    return t.emit("add", std::move(out), {aid, bid},
                  [rows, cols, aid, bid](Tape& tp, TapeNode& nd) {
                    accum_grad(tp, aid, nd.grad);
                    if (tp.wants_grad(bid))
                      kernels::col_sum(rows, cols, nd.grad.data(),
                                       tp.grad_buffer(bid).data(), true);
                  });
  }
  throw std::invalid_argument("add: incompatible shapes " + av.shape_str() + " + " +
                              bv.shape_str());
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  const Array& av = a.value();
  const Array& bv = b.value();
  if (!av.same_shape(bv))
    throw std::invalid_argument("mul: shape mismatch " + av.shape_str() + " vs " +
                                bv.shape_str());
  Array out(av.shape());
  kernels::vmul(av.numel(), av.data(), bv.data(), out.data());
  Tape& t = tape_of(a);
  const int aid = a.id(), bid = b.id();
  return t.emit("mul", std::move(out), {aid, bid}, [aid, bid](Tape& tp, TapeNode& nd) {
    const std::size_t n = nd.grad.numel();
    if (tp.wants_grad(aid)) {
      Array& g = tp.grad_buffer(aid);
      const double* bd = tp.node(bid).value.data();
      const double* dy = nd.grad.data();
      for (std::size_t i = 0; i < n; ++i) g[i] += dy[i] * bd[i];
    }
    if (tp.wants_grad(bid)) {
      Array& g = tp.grad_buffer(bid);
      const double* ad = tp.node(aid).value.data();
      const double* dy = nd.grad.data();
      for (std::size_t i = 0; i < n; ++i) g[i] += dy[i] * ad[i];
    }
  });
}

Tensor scalar_affine(const Tensor& x, double scale, double shift) {
  const Array& xv = x.value();
  Array out(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = scale * xv[i] + shift;
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit("scalar_affine", std::move(out), {xid}, [xid, scale](Tape& tp, TapeNode& nd) {
    if (tp.wants_grad(xid))
      kernels::vaxpy(nd.grad.numel(), scale, nd.grad.data(), tp.grad_buffer(xid).data());
  });
}

namespace {

// Unary op whose derivative is computable from the output value alone.
template <typename Fwd, typename DerivFromOut>
Tensor unary_from_output(const char* name, const Tensor& x, Fwd fwd, DerivFromOut deriv) {
  const Array& xv = x.value();
  Array out(xv.shape());
  fwd(xv.numel(), xv.data(), out.data());
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit(name, std::move(out), {xid}, [xid, deriv](Tape& tp, TapeNode& nd) {
    if (!tp.wants_grad(xid)) return;
    Array& g = tp.grad_buffer(xid);
    const double* y = nd.value.data();
    const double* dy = nd.grad.data();
    for (std::size_t i = 0; i < nd.grad.numel(); ++i) g[i] += dy[i] * deriv(y[i]);
  });
}

}  // namespace

Tensor sigmoid(const Tensor& x) {
  return unary_from_output("sigmoid", x, kernels::vsigmoid,
                           [](double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary_from_output("tanh", x, kernels::vtanh, [](double y) { return 1.0 - y * y; });
}

Tensor elu(const Tensor& x) {
  return unary_from_output("elu", x, kernels::velu,
                           [](double y) { return y >= 0.0 ? 1.0 : y + 1.0; });
}

Tensor exp(const Tensor& x) {
  return unary_from_output("exp", x, kernels::vexp, [](double y) { return y; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  const Array& xv = x.value();
  Array out(xv.shape());
  kernels::vleaky_relu(xv.numel(), slope, xv.data(), out.data());
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit("leaky_relu", std::move(out), {xid}, [xid, slope](Tape& tp, TapeNode& nd) {
    if (!tp.wants_grad(xid)) return;
    Array& g = tp.grad_buffer(xid);
    const double* xd = tp.node(xid).value.data();
    const double* dy = nd.grad.data();
    for (std::size_t i = 0; i < nd.grad.numel(); ++i)
      g[i] += dy[i] * (xd[i] >= 0.0 ? 1.0 : slope);
  });
}

Tensor log(const Tensor& x) {
  const Array& xv = x.value();
  Array out(xv.shape());
  kernels::vlog(xv.numel(), xv.data(), out.data());
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit("log", std::move(out), {xid}, [xid](Tape& tp, TapeNode& nd) {
    if (!tp.wants_grad(xid)) return;
    Array& g = tp.grad_buffer(xid);
    const double* xd = tp.node(xid).value.data();
    const double* dy = nd.grad.data();
    for (std::size_t i = 0; i < nd.grad.numel(); ++i) g[i] += dy[i] / xd[i];
  });
}

Tensor softmax(const Tensor& x) {
  const Array& xv = x.value();
  if (xv.ndim() != 1 && xv.ndim() != 2)
    throw std::invalid_argument("softmax: rank must be 1 or 2, got " + xv.shape_str());
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (cols == 0) throw std::invalid_argument("softmax: empty axis");
  Array out(xv.shape());
  kernels::softmax_rows(rows, cols, xv.data(), out.data());
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit("softmax", std::move(out), {xid}, [xid, rows, cols](Tape& tp, TapeNode& nd) {
    if (!tp.wants_grad(xid)) return;
    Array& g = tp.grad_buffer(xid);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* y = nd.value.data() + i * cols;
      const double* dy = nd.grad.data() + i * cols;
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) dot += dy[j] * y[j];
      double* gi = g.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) gi[j] += y[j] * (dy[j] - dot);
    }
  });
}

Tensor concat(const std::vector<Tensor>& xs, std::size_t axis) {
  if (xs.empty()) throw std::invalid_argument("concat: empty input list");
  Tape& t = tape_of(xs[0]);
  const std::size_t rank = xs[0].value().ndim();
  if (rank != 1 && rank != 2) throw std::invalid_argument("concat: rank must be 1 or 2");
  if (axis >= rank) throw std::invalid_argument("concat: axis out of range");
  std::vector<int> parents;
  std::size_t concat_dim = 0;
  for (const Tensor& x : xs) {
    require_same_tape(xs[0], x);
    if (x.value().ndim() != rank) throw std::invalid_argument("concat: rank mismatch");
    for (std::size_t d = 0; d < rank; ++d)
      if (d != axis && x.value().dim(d) != xs[0].value().dim(d))
        throw std::invalid_argument("concat: shape mismatch " + x.value().shape_str() +
                                    " vs " + xs[0].value().shape_str());
    concat_dim += x.value().dim(axis);
    parents.push_back(x.id());
  }

  std::vector<std::size_t> out_shape = xs[0].value().shape();
  out_shape[axis] = concat_dim;
  Array out(out_shape);
  const std::size_t out_rows = out.rows(), out_cols = out.cols();

  std::vector<std::size_t> col_offsets(xs.size(), 0);
  if (rank == 1 || axis == 0) {
    std::size_t off = 0;
    for (const Tensor& x : xs) {
      std::memcpy(out.data() + off, x.value().data(), x.value().numel() * sizeof(double));
      off += x.value().numel();
    }
  } else {
    std::size_t coff = 0;
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      const Array& v = xs[xi].value();
      col_offsets[xi] = coff;
      for (std::size_t r = 0; r < out_rows; ++r)
        std::memcpy(out.data() + r * out_cols + coff, v.data() + r * v.cols(),
                    v.cols() * sizeof(double));
      coff += v.cols();
    }
  }

  const bool row_major_blocks = (rank == 1 || axis == 0);
  return t.emit("concat", std::move(out), parents,
                [parents, row_major_blocks, out_rows, out_cols](Tape& tp, TapeNode& nd) {
                  std::size_t off = 0;
                  for (int pid : parents) {
                    const Array& pv = tp.node(pid).value;
                    if (row_major_blocks) {
                      if (tp.wants_grad(pid))
                        kernels::vaxpy(pv.numel(), 1.0, nd.grad.data() + off,
                                       tp.grad_buffer(pid).data());
                      off += pv.numel();
                    } else {
                      if (tp.wants_grad(pid)) {
                        Array& g = tp.grad_buffer(pid);
                        for (std::size_t r = 0; r < out_rows; ++r)
                          for (std::size_t c = 0; c < pv.cols(); ++c)
                            g[r * pv.cols() + c] += nd.grad[r * out_cols + off + c];
                      }
                      off += pv.cols();
                    }
                  }
                });
}

Tensor mean(const Tensor& x) {
  const Array& xv = x.value();
  if (xv.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < xv.numel(); ++i) s += xv[i];
  const double inv = 1.0 / static_cast<double>(xv.numel());
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit("mean", Array::scalar(s * inv), {xid}, [xid, inv](Tape& tp, TapeNode& nd) {
    if (!tp.wants_grad(xid)) return;
    Array& g = tp.grad_buffer(xid);
    const double d = nd.grad[0] * inv;
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += d;
  });
}

Tensor sum(const Tensor& x) {
  const Array& xv = x.value();
  double s = 0.0;
  for (std::size_t i = 0; i < xv.numel(); ++i) s += xv[i];
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit("sum", Array::scalar(s), {xid}, [xid](Tape& tp, TapeNode& nd) {
    if (!tp.wants_grad(xid)) return;
    Array& g = tp.grad_buffer(xid);
    const double d = nd.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += d;
  });
}

Tensor dropout(const Tensor& x, double rate, bool training, RngStream& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout: rate must be in [0,1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;  // identity
  const Array& xv = x.value();
  Array out(xv.shape());
  Array mask(xv.shape());
  const std::uint64_t base = rng.next_u64();
  kernels::dropout_forward(xv.numel(), base, 1.0 - rate, xv.data(), out.data(), mask.data());
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit(
      "dropout", std::move(out), {xid},
      [xid](Tape& tp, TapeNode& nd) {
        if (!tp.wants_grad(xid)) return;
        Array& g = tp.grad_buffer(xid);
        const double* m = nd.saved[0].data();
        const double* dy = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.numel(); ++i) g[i] += dy[i] * m[i];
      },
      {std::move(mask)});
}

Tensor gather_rows(const Tensor& m, std::vector<std::int32_t> idx) {
  require_rank(m, 2, "gather_rows");
  const std::size_t rows = m.value().dim(0), d = m.value().dim(1);
  for (std::int32_t i : idx)
    if (i < 0 || static_cast<std::size_t>(i) >= rows)
      throw std::out_of_range("gather_rows: row index " + std::to_string(i) + " out of [0," +
                              std::to_string(rows) + ")");
  Array out({idx.size(), d});
  kernels::gather_rows(d, idx.data(), idx.size(), m.value().data(), out.data());
  Tape& t = tape_of(m);
  const int mid = m.id();
  return t.emit("gather_rows", std::move(out), {mid},
                [mid, idx = std::move(idx), rows, d](Tape& tp, TapeNode& nd) {
                  if (!tp.wants_grad(mid)) return;
                  kernels::scatter_add_rows(d, idx.data(), idx.size(), nd.grad.data(),
                                            tp.grad_buffer(mid).data(), rows);
                });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  Array out(std::move(shape), x.value().vec());
  Tape& t = tape_of(x);
  const int xid = x.id();
  return t.emit("reshape", std::move(out), {xid}, [xid](Tape& tp, TapeNode& nd) {
    if (!tp.wants_grad(xid)) return;
    kernels::vaxpy(nd.grad.numel(), 1.0, nd.grad.data(), tp.grad_buffer(xid).data());
  });
}

Tensor group_weighted_sum(const Tensor& h, const Tensor& w) {
  require_same_tape(h, w);
  require_rank(h, 2, "group_weighted_sum");
  require_rank(w, 2, "group_weighted_sum");
  const std::size_t groups = w.value().dim(0), r = w.value().dim(1), d = h.value().dim(1);
  if (h.value().dim(0) != groups * r)
    throw std::invalid_argument("group_weighted_sum: h rows " + h.value().shape_str() +
                                " != groups*r from " + w.value().shape_str());
  Array out({groups, d});
  kernels::group_weighted_sum(groups, r, d, h.value().data(), w.value().data(), out.data());
  Tape& t = tape_of(h);
  const int hid = h.id(), wid = w.id();
  return t.emit("group_weighted_sum", std::move(out), {hid, wid},
                [groups, r, d, hid, wid](Tape& tp, TapeNode& nd) {
                  if (tp.wants_grad(hid))
                    kernels::group_weighted_sum_grad_h(groups, r, d, tp.node(wid).value.data(),
                                                       nd.grad.data(),
                                                       tp.grad_buffer(hid).data(), true);
                  if (tp.wants_grad(wid))
                    kernels::group_weighted_sum_grad_w(groups, r, d, tp.node(hid).value.data(),
                                                       nd.grad.data(),
                                                       tp.grad_buffer(wid).data(), true);
                });
}

Tensor masked_nll(const Tensor& probs, const std::vector<std::int32_t>& rows,
                  const std::vector<std::int32_t>& classes, double floor) {
  require_rank(probs, 2, "masked_nll");
  if (rows.empty()) throw std::invalid_argument("masked_nll: empty mask");
  if (rows.size() != classes.size())
    throw std::invalid_argument("masked_nll: rows/classes size mismatch");
  const std::size_t n = probs.value().dim(0), c = probs.value().dim(1);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b] < 0 || static_cast<std::size_t>(rows[b]) >= n)
      throw std::out_of_range("masked_nll: row out of range");
    if (classes[b] < 0 || static_cast<std::size_t>(classes[b]) >= c)
      throw std::out_of_range("masked_nll: class out of range");
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const double p = probs.value().at2(static_cast<std::size_t>(rows[b]),
                                       static_cast<std::size_t>(classes[b]));
    loss -= std::log(std::max(p, floor));
  }
  Tape& t = tape_of(probs);
  const int pid = probs.id();
  return t.emit("masked_nll", Array::scalar(loss * inv), {pid},
                [pid, rows, classes, floor, inv, c](Tape& tp, TapeNode& nd) {
                  if (!tp.wants_grad(pid)) return;
                  Array& g = tp.grad_buffer(pid);
                  const Array& pv = tp.node(pid).value;
                  const double go = nd.grad[0];
                  for (std::size_t b = 0; b < rows.size(); ++b) {
                    const std::size_t at =
                        static_cast<std::size_t>(rows[b]) * c + static_cast<std::size_t>(classes[b]);
                    if (pv[at] > floor) g[at] -= go * inv / pv[at];
                  }
                });
}

Tensor gru_step(const Tensor& pz, const Tensor& pr, const Tensor& ph,
                std::vector<std::int32_t> idx, const Tensor& h, const Tensor& uz,
                const Tensor& ur, const Tensor& uh, const Tensor& bz, const Tensor& br,
                const Tensor& bh) {
  for (const Tensor* t : {&pr, &ph, &h, &uz, &ur, &uh, &bz, &br, &bh}) require_same_tape(pz, *t);
  require_rank(h, 2, "gru_step");
  const std::size_t b = h.value().dim(0), d = h.value().dim(1);
  const bool gathered = !idx.empty();
  for (const Tensor* t : {&pz, &pr, &ph}) {
    require_rank(*t, 2, "gru_step");
    if (t->value().dim(1) != d) throw std::invalid_argument("gru_step: projection width != d");
    if (!gathered && t->value().dim(0) != b)
      throw std::invalid_argument("gru_step: projection rows != batch");
  }
  if (gathered) {
    if (idx.size() != b) throw std::invalid_argument("gru_step: idx size != batch");
    const std::size_t nsrc = pz.value().dim(0);
    for (std::int32_t i : idx)
      if (i < 0 || static_cast<std::size_t>(i) >= nsrc)
        throw std::out_of_range("gru_step: idx out of range");
  }
  for (const Tensor* t : {&uz, &ur, &uh}) {
    require_rank(*t, 2, "gru_step");
    if (t->value().dim(0) != d || t->value().dim(1) != d)
      throw std::invalid_argument("gru_step: recurrent matrix must be (d,d)");
  }
  for (const Tensor* t : {&bz, &br, &bh}) {
    require_rank(*t, 1, "gru_step");
    if (t->value().dim(0) != d) throw std::invalid_argument("gru_step: bias must be (d)");
  }

  const double* hd = h.value().data();
  auto assemble = [&](const Tensor& p, const Tensor& u, const Tensor& bias, Array& pre) {
    if (gathered)
      kernels::gather_rows(d, idx.data(), b, p.value().data(), pre.data());
    else
      std::memcpy(pre.data(), p.value().data(), b * d * sizeof(double));
    kernels::matmul_nn(b, d, d, hd, u.value().data(), pre.data(), true);
    kernels::add_rowvec(b, d, pre.data(), bias.value().data());
  };

  Array z({b, d}), r({b, d}), hc({b, d});
  {
    Array pre({b, d});
    assemble(pz, uz, bz, pre);
    kernels::vsigmoid(b * d, pre.data(), z.data());
    assemble(pr, ur, br, pre);
    kernels::vsigmoid(b * d, pre.data(), r.data());
    // candidate input is r (gated h), not h itself
    Array rh({b, d});
    kernels::vmul(b * d, r.data(), hd, rh.data());
    if (gathered)
      kernels::gather_rows(d, idx.data(), b, ph.value().data(), pre.data());
    else
      std::memcpy(pre.data(), ph.value().data(), b * d * sizeof(double));
    kernels::matmul_nn(b, d, d, rh.data(), uh.value().data(), pre.data(), true);
    kernels::add_rowvec(b, d, pre.data(), bh.value().data());
    kernels::vtanh(b * d, pre.data(), hc.data());
  }
  Array out({b, d});
  kernels::gru_out(b * d, z.data(), hc.data(), hd, out.data());

  Tape& t = tape_of(h);
  const int ids[10] = {pz.id(), pr.id(), ph.id(), h.id(),  uz.id(),
                       ur.id(), uh.id(), bz.id(), br.id(), bh.id()};
  std::vector<int> parents(ids, ids + 10);
  std::vector<Array> saved;
  saved.push_back(std::move(z));
  saved.push_back(std::move(r));
  saved.push_back(std::move(hc));

  auto vjp = [b, d, gathered, idx = std::move(idx), pzid = ids[0], prid = ids[1], phid = ids[2],
              hid = ids[3], uzid = ids[4], urid = ids[5], uhid = ids[6], bzid = ids[7],
              brid = ids[8], bhid = ids[9]](Tape& tp, TapeNode& nd) {
    const double* dout = nd.grad.data();
    const double* zd = nd.saved[0].data();
    const double* rd = nd.saved[1].data();
    const double* hcd = nd.saved[2].data();
    const double* hd = tp.node(hid).value.data();

    Array dah({b, d}), daz({b, d}), dh({b, d});
    kernels::gru_bwd_stage1(b * d, dout, zd, hcd, hd, dah.data(), daz.data(), dh.data());

    Array rh({b, d});
    kernels::vmul(b * d, rd, hd, rh.data());
    if (tp.wants_grad(uhid))
      kernels::matmul_tn(b, d, d, rh.data(), dah.data(), tp.grad_buffer(uhid).data(), true);
    Array drh({b, d});
    kernels::matmul_nt(b, d, d, dah.data(), tp.node(uhid).value.data(), drh.data(), false);
    Array dar({b, d});
    kernels::gru_bwd_stage2(b * d, drh.data(), hd, rd, dar.data(), dh.data());

    if (tp.wants_grad(uzid))
      kernels::matmul_tn(b, d, d, hd, daz.data(), tp.grad_buffer(uzid).data(), true);
    if (tp.wants_grad(urid))
      kernels::matmul_tn(b, d, d, hd, dar.data(), tp.grad_buffer(urid).data(), true);
    if (tp.wants_grad(bzid))
      kernels::col_sum(b, d, daz.data(), tp.grad_buffer(bzid).data(), true);
    if (tp.wants_grad(brid))
      kernels::col_sum(b, d, dar.data(), tp.grad_buffer(brid).data(), true);
    if (tp.wants_grad(bhid))
      kernels::col_sum(b, d, dah.data(), tp.grad_buffer(bhid).data(), true);

    if (tp.wants_grad(hid)) {
      kernels::matmul_nt(b, d, d, daz.data(), tp.node(uzid).value.data(), dh.data(), true);
      kernels::matmul_nt(b, d, d, dar.data(), tp.node(urid).value.data(), dh.data(), true);
      kernels::vaxpy(b * d, 1.0, dh.data(), tp.grad_buffer(hid).data());
    }

    auto to_input = [&](int pid, const Array& dpre) {
      if (!tp.wants_grad(pid)) return;
      if (gathered)
        kernels::scatter_add_rows(d, idx.data(), b, dpre.data(), tp.grad_buffer(pid).data(),
                                  tp.node(pid).value.dim(0));
      else
        kernels::vaxpy(b * d, 1.0, dpre.data(), tp.grad_buffer(pid).data());
    };
    to_input(pzid, daz);
    to_input(prid, dar);
    to_input(phid, dah);
  };

  return t.emit("gru_step", std::move(out), std::move(parents), std::move(vjp),
                std::move(saved));
}

}  // namespace rawgnn
