#include "rawgnn/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rawgnn/rng.hpp"

namespace rawgnn {

InitSpec InitSpec::glorot(std::size_t fan_in, std::size_t fan_out) {
  return {Kind::glorot_uniform,
          std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))};
}

void ParamStore::add(const std::string& name, std::vector<std::size_t> shape, InitSpec init) {
  if (params_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
  Param p;
  p.value = Array(std::move(shape));
  p.init = init;
  params_.emplace(name, std::move(p));
}

std::size_t ParamStore::total_coords() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.numel();
  return n;
}

Array& ParamStore::value(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
  return it->second.value;
}

const Array& ParamStore::value(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
  return it->second.value;
}

void ParamStore::set_grad(const std::string& name, Array grad) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
  if (!grad.same_shape(it->second.value))
    throw std::invalid_argument("ParamStore: grad shape " + grad.shape_str() +
                                " != value shape " + it->second.value.shape_str() + " for " +
                                name);
  it->second.grad = std::move(grad);
}

const Array* ParamStore::grad(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
  return it->second.grad ? &*it->second.grad : nullptr;
}

void ParamStore::clear_grads() {
  for (auto& [_, p] : params_) p.grad.reset();
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

void ParamStore::init_all(std::uint64_t seed) {
  for (auto& [name, p] : params_) {
    RngStream rng(seed, fnv1a64(name));
    switch (p.init.kind) {
      case InitSpec::Kind::zeros:
        for (double& x : p.value.vec()) x = 0.0;
        break;
      case InitSpec::Kind::glorot_uniform:
      case InitSpec::Kind::uniform_pm:
        for (double& x : p.value.vec()) x = rng.uniform(-p.init.bound, p.init.bound);
        break;
    }
  }
}

std::map<std::string, Array> ParamStore::snapshot_values() const {
  std::map<std::string, Array> out;
  for (const auto& [name, p] : params_) out.emplace(name, p.value);
  return out;
}

void ParamStore::restore_values(const std::map<std::string, Array>& values) {
  for (auto& [name, p] : params_) {
    auto it = values.find(name);
    if (it == values.end()) throw std::invalid_argument("ParamStore: snapshot missing " + name);
    p.value = it->second;
  }
}

void AdamState::reset(const ParamStore& ps) {
  step_count = 0;
  moments.clear();
  for (const auto& [name, p] : ps.entries())
    moments.emplace(name, std::make_pair(Array(p.value.shape()), Array(p.value.shape())));
}

void adam_step(ParamStore& ps, AdamState& st) {
  for (const auto& [name, p] : ps.entries())
    if (!p.grad) throw std::logic_error("adam_step: missing gradient for " + name);
  if (st.moments.empty()) st.reset(ps);
  st.step_count += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
  for (auto& [name, p] : ps.entries()) {
    auto& [m, v] = st.moments.at(name);
    const Array& g = *p.grad;
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      const double gi = g[i] + st.weight_decay * p.value[i];
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * gi;
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
    }
  }
  ps.clear_grads();
}

double grad_check(const std::function<double(ParamStore&)>& f, ParamStore& ps,
                  const GradCheckOptions& opts) {
  const double l0 = f(ps);
  std::map<std::string, Array> analytic;
  for (const auto& name : ps.names()) {
    const Array* g = ps.grad(name);
    if (!g) throw std::logic_error("grad_check: f did not populate gradient for " + name);
    analytic.emplace(name, *g);
  }
  const double l1 = f(ps);
  if (l0 != l1)
    throw std::runtime_error("grad_check: f is not deterministic (losses differ on repeat)");

  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& name : ps.names())
    for (std::size_t i = 0; i < ps.value(name).numel(); ++i) coords.emplace_back(name, i);
  if (coords.size() > opts.max_coords) {
    RngStream rng(opts.subsample_seed, 0);
    rng.shuffle(coords);
    coords.resize(opts.max_coords);
  }

  double max_rel = 0.0;
  for (const auto& [name, i] : coords) {
    double& x = ps.value(name)[i];
    const double x0 = x;
    if (opts.exclude && opts.exclude(name, i, x0)) continue;
    x = x0 + opts.eps;
    const double lp = f(ps);
    x = x0 - opts.eps;
    const double lm = f(ps);
    x = x0;
    const double fd = (lp - lm) / (2.0 * opts.eps);
    const double g = analytic.at(name)[i];
    const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-6});
    if (rel > max_rel) max_rel = rel;
  }
  ps.clear_grads();
  return max_rel;
}

namespace {
constexpr const char* kCheckpointTag = "rawgnn-checkpoint v1";
}

void save_checkpoint(const std::string& path, const ParamStore& ps,
                     const std::map<std::string, std::string>& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << kCheckpointTag << "\n";
  for (const auto& [k, v] : meta) out << "meta " << k << " " << v << "\n";
  char buf[40];
  for (const auto& [name, p] : ps.entries()) {
    out << "param " << name << " " << p.value.ndim();
    for (std::size_t d : p.value.shape()) out << " " << d;
    out << "\n";
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      std::snprintf(buf, sizeof(buf), "%a", p.value[i]);
      out << buf << (i + 1 == p.value.numel() ? "" : " ");
    }
    out << "\n";
  }
  out << "end\n";
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

std::map<std::string, std::string> load_checkpoint(const std::string& path, ParamStore& ps) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointTag)
    throw std::runtime_error("load_checkpoint: " + path + " is not a rawgnn checkpoint");
  std::map<std::string, std::string> meta;
  while (std::getline(in, line)) {
    if (line == "end") return meta;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      meta[key] = value;
    } else if (tag == "param") {
      std::string name;
      std::size_t rank = 0;
      ls >> name >> rank;
      std::vector<std::size_t> shape(rank);
      for (auto& d : shape) ls >> d;
      if (!ls) throw std::runtime_error("load_checkpoint: bad param header: " + line);
      if (!ps.has(name)) ps.add(name, shape, InitSpec::zeros());
      Array& value = ps.value(name);
      if (value.shape() != shape)
        throw std::runtime_error("load_checkpoint: shape mismatch for " + name);
      std::string values_line;
      if (!std::getline(in, values_line))
        throw std::runtime_error("load_checkpoint: missing values for " + name);
      std::istringstream vs(values_line);
      std::string tok;
      for (std::size_t i = 0; i < value.numel(); ++i) {
        if (!(vs >> tok))
          throw std::runtime_error("load_checkpoint: too few values for " + name);
        value[i] = std::strtod(tok.c_str(), nullptr);
      }
    } else {
      throw std::runtime_error("load_checkpoint: unexpected line: " + line);
    }
  }
  throw std::runtime_error("load_checkpoint: missing end marker in " + path);
}

}  // namespace rawgnn
