#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawgnn/array.hpp"
#include "rawgnn/rng.hpp"

namespace rawgnn {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; owns nothing.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  const Array& value() const;
  const Array& grad() const;
  bool has_grad() const;
  bool requires_grad() const;
  const std::vector<std::size_t>& shape() const { return value().shape(); }
  std::size_t numel() const { return value().numel(); }
  double scalar() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

struct TapeNode {
  Array value;
  Array grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::vector<int> parents;
  std::vector<Array> saved;
  std::function<void(Tape&, TapeNode&)> vjp;
};

// One recording of a forward computation. Ops append nodes; backward() walks
// them once in reverse and is then consumed. Confined to a single thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(Array value, bool requires_grad = false);

  // Records an op result. vjp may be empty for values that need no gradient.
  Tensor emit(const char* opname, Array value, std::vector<int> parents,
              std::function<void(Tape&, TapeNode&)> vjp, std::vector<Array> saved = {});

  void backward(const Tensor& loss);
  bool consumed() const { return consumed_; }

  std::size_t size() const { return nodes_.size(); }
  TapeNode& node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }
  const TapeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }

  bool wants_grad(int id) const { return node(id).requires_grad; }

  // Lazily-allocated gradient accumulation buffer for a node.
  Array& grad_buffer(int id);

  // Frees intermediate values/saved state as backward consumes them. Leaf
  // values and leaf gradients always survive.
  void set_release_memory(bool on) { release_memory_ = on; }
  void set_finite_checks(bool on) { finite_checks_ = on; }

 private:
  void check_finite(const Array& a, const char* opname) const;

  std::deque<TapeNode> nodes_;
  bool consumed_ = false;
  bool release_memory_ = false;
  bool finite_checks_ = true;
};

// --- Tensor ops (recorded on the owning tape) ------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matvec(const Tensor& m, const Tensor& v);
// Elementwise add of equal shapes, or matrix + row vector broadcast.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_affine(const Tensor& x, double scale, double shift);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor elu(const Tensor& x);
Tensor softmax(const Tensor& x);  // over the last axis
Tensor concat(const std::vector<Tensor>& xs, std::size_t axis);
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor dropout(const Tensor& x, double rate, bool training, RngStream& rng);
Tensor gather_rows(const Tensor& m, std::vector<std::int32_t> idx);
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);
// out[g] = sum_p w[g,p] * h[g*R + p], h is (G*R, d), w is (G, R).
Tensor group_weighted_sum(const Tensor& h, const Tensor& w);
// -(1/|rows|) * sum_b log(max(probs[rows[b], classes[b]], floor))
Tensor masked_nll(const Tensor& probs, const std::vector<std::int32_t>& rows,
                  const std::vector<std::int32_t>& classes, double floor = 1e-12);
// One fused GRU step over a batch. pz/pr/ph are input pre-projections: either
// (B, d) used directly (idx empty) or (N, d) tables gathered by idx (B rows).
Tensor gru_step(const Tensor& pz, const Tensor& pr, const Tensor& ph,
                std::vector<std::int32_t> idx, const Tensor& h, const Tensor& uz,
                const Tensor& ur, const Tensor& uh, const Tensor& bz, const Tensor& br,
                const Tensor& bh);

}  // namespace rawgnn
