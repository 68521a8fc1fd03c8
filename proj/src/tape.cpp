#include "rawgnn/tape.hpp"

#include "rawgnn/kernels.hpp"

namespace rawgnn {

const Array& Tensor::value() const {
  if (!valid()) throw std::logic_error("Tensor: invalid handle");
  return tape_->node(id_).value;
}

const Array& Tensor::grad() const {
  const TapeNode& n = tape_->node(id_);
  if (!n.has_grad) throw std::logic_error("Tensor: gradient not populated");
  return n.grad;
}

bool Tensor::has_grad() const { return valid() && tape_->node(id_).has_grad; }

bool Tensor::requires_grad() const { return valid() && tape_->node(id_).requires_grad; }

double Tensor::scalar() const {
  const Array& v = value();
  if (v.numel() != 1) throw std::invalid_argument("Tensor::scalar: numel " + v.shape_str());
  return v[0];
}

void Tape::check_finite(const Array& a, const char* opname) const {
  if (!finite_checks_) return;
  if (!kernels::all_finite(a.numel(), a.data()))
    throw std::runtime_error(std::string("tape: non-finite value produced by ") + opname);
}

Tensor Tape::leaf(Array value, bool requires_grad) {
  if (consumed_) throw std::logic_error("tape: recording already consumed by backward");
  check_finite(value, "leaf");
  TapeNode n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::emit(const char* opname, Array value, std::vector<int> parents,
                  std::function<void(Tape&, TapeNode&)> vjp, std::vector<Array> saved) {
  if (consumed_) throw std::logic_error("tape: recording already consumed by backward");
  check_finite(value, opname);
  TapeNode n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  for (int p : n.parents)
    if (node(p).requires_grad) n.requires_grad = true;
  if (n.requires_grad) {
    n.vjp = std::move(vjp);
    n.saved = std::move(saved);
  }
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Array& Tape::grad_buffer(int id) {
  TapeNode& n = node(id);
  if (!n.has_grad) {
    n.grad = Array(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw std::logic_error("tape: backward called twice on one recording");
  if (loss.tape() != this) throw std::invalid_argument("tape: loss recorded on another tape");
  if (loss.value().numel() != 1)
    throw std::invalid_argument("tape: backward requires a scalar loss, got shape " +
                                loss.value().shape_str());
  consumed_ = true;
  grad_buffer(loss.id())[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    TapeNode& n = node(id);
    if (n.has_grad && n.vjp) n.vjp(*this, n);
    const bool is_leaf = n.parents.empty() && !n.vjp;
    n.saved.clear();
    n.saved.shrink_to_fit();
    n.vjp = nullptr;
    if (release_memory_ && !is_leaf) {
      n.value = Array{};
      n.grad = Array{};
      n.has_grad = false;
    }
  }
}

}  // namespace rawgnn
