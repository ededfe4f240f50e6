// Copyright 2026 The TLE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tle/tensor.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "tle/random.h"

namespace tle {

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("non-positive dimension in " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

inline void debug_check_finite([[maybe_unused]] const Tensor& t) {
  assert(t.all_finite() && "non-finite tensor value");
}

ShapeError mismatch(const char* op, const Tensor& a, const Tensor& b) {
  return ShapeError(std::string(op) + ": incompatible shapes " +
                    shape_string(a.shape()) + " and " + shape_string(b.shape()));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  if (shape_.empty() || shape_.size() > 2)
    throw ShapeError("tensor rank must be 1 or 2, got " + shape_string(shape_));
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty() || shape_.size() > 2)
    throw ShapeError("tensor rank must be 1 or 2, got " + shape_string(shape_));
  if (data_.size() != shape_size(shape_))
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
}

Tensor Tensor::row(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Tensor({1, n}, std::move(v));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// ParameterSet

Parameter& ParameterSet::add(std::string name, Tensor init) {
  if (index_.count(name))
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  Tensor grad(init.shape());
  params_.push_back({std::move(name), std::move(init), std::move(grad)});
  return params_.back();
}

Parameter& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::out_of_range("no parameter named '" + name + "'");
  return params_[it->second];
}

const Parameter& ParameterSet::get(const std::string& name) const {
  return const_cast<ParameterSet*>(this)->get(name);
}

bool ParameterSet::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

std::size_t ParameterSet::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

double ParameterSet::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_)
    for (double g : p.grad.values()) s += g * g;
  return std::sqrt(s);
}

double ParameterSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& p : params_)
      for (double& g : p.grad.values()) g *= f;
  }
  return norm;
}

void ParameterSet::assign_values(const ParameterSet& other) {
  if (other.params_.size() != params_.size())
    throw std::invalid_argument("parameter sets differ in layout");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name != other.params_[i].name ||
        params_[i].value.shape() != other.params_[i].value.shape())
      throw std::invalid_argument("parameter '" + params_[i].name +
                                  "' differs in layout");
    params_[i].value = other.params_[i].value;
  }
}

bool ParameterSet::values_equal(const ParameterSet& other) const {
  if (other.params_.size() != params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name != other.params_[i].name ||
        params_[i].value.shape() != other.params_[i].value.shape() ||
        params_[i].value.vec() != other.params_[i].value.vec())
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Tape

const Tensor& Var::value() const { return tape_->value(id_); }

double Var::item() const {
  const Tensor& v = value();
  if (v.size() != 1)
    throw ShapeError("item() on non-scalar " + shape_string(v.shape()));
  return v[0];
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.owned;
}

Tensor& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(value(id).shape());
    n.has_grad = true;
  }
  return n.grad;
}

Var Tape::constant(Tensor value) {
  debug_check_finite(value);
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant_ref(const Tensor& value) {
  Node n;
  n.ref = &value;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end())
    return Var(this, it->second);
  Node n;
  n.ref = &p.value;
  n.param = &p;
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[&p] = id;
  return Var(this, id);
}

Var Tape::push(Tensor value, std::initializer_list<Var> inputs,
               BackwardFn backward) {
  debug_check_finite(value);
  Node n;
  n.owned = std::move(value);
  if (record_) {
    for (const Var& v : inputs)
      if (nodes_[v.id()].requires_grad) n.requires_grad = true;
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var output) {
  if (output.tape() != this) throw std::invalid_argument("foreign variable");
  if (value(output.id()).size() != 1)
    throw ShapeError("backward needs a scalar output, got " +
                     shape_string(value(output.id()).shape()));
  if (!record_) throw std::logic_error("backward on a non-recording tape");
  grad(output.id())[0] = 1.0;
  for (int id = output.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      auto dst = n.param->grad.values();
      const auto src = n.grad.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

// ---------------------------------------------------------------------------
// Operations

Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows() || B.shape().size() != 2)
    throw mismatch("matmul", A, B);
  const int m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C({m, n});
  for (int i = 0; i < m; ++i) {
    double* crow = C.data() + static_cast<std::size_t>(i) * n;
    const double* arow = A.data() + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = B.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  const int ai = a.id(), bi = b.id();
  return t.push(std::move(C), {a, b}, [ai, bi, m, k, n](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(ai)) {
      const Tensor& B = t.value(bi);
      Tensor& GA = t.grad(ai);
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          const double* grow = G.data() + static_cast<std::size_t>(i) * n;
          const double* brow = B.data() + static_cast<std::size_t>(p) * n;
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
          GA[static_cast<std::size_t>(i) * k + p] += s;
        }
    }
    if (t.requires_grad(bi)) {
      const Tensor& A = t.value(ai);
      Tensor& GB = t.grad(bi);
      for (int i = 0; i < m; ++i) {
        const double* grow = G.data() + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
          const double av = A[static_cast<std::size_t>(i) * k + p];
          if (av == 0.0) continue;
          double* gbrow = GB.data() + static_cast<std::size_t>(p) * n;
          for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
        }
      }
    }
  });
}

namespace {

enum class Broadcast { kSame, kRow, kColumn, kScalar };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.size() == 1) return Broadcast::kScalar;
  if (b.rows() == 1 && b.cols() == a.cols() && a.size() == b.size() * a.rows())
    return Broadcast::kRow;
  if (b.cols() == 1 && b.rows() == a.rows() && a.shape().size() == 2)
    return Broadcast::kColumn;
  throw mismatch(op, a, b);
}

inline std::size_t bindex(Broadcast kind, std::size_t i, int cols) {
  switch (kind) {
    case Broadcast::kSame: return i;
    case Broadcast::kRow: return i % cols;
    case Broadcast::kColumn: return i / cols;
    case Broadcast::kScalar: return 0;
  }
  return 0;
}

Var add_sub(Var a, Var b, double sign, const char* op) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const Broadcast kind = broadcast_kind(op, A, B);
  const int cols = A.cols();
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i)
    C[i] += sign * B[bindex(kind, i, cols)];
  const int ai = a.id(), bi = b.id();
  return t.push(std::move(C), {a, b}, [ai, bi, kind, cols, sign](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(ai)) {
      Tensor& GA = t.grad(ai);
      for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i];
    }
    if (t.requires_grad(bi)) {
      Tensor& GB = t.grad(bi);
      for (std::size_t i = 0; i < G.size(); ++i)
        GB[bindex(kind, i, cols)] += sign * G[i];
    }
  });
}

template <typename F, typename D>
Var unary(Var a, F f, D dfdx) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  Tensor C(A.shape());
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = f(A[i]);
  const int ai = a.id();
  // dfdx(x, y) receives the input and the cached output.
  return t.push(std::move(C), {a}, [ai, dfdx](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    const Tensor& X = t.value(ai);
    const Tensor& Y = t.value(self);
    Tensor& GA = t.grad(ai);
    for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * dfdx(X[i], Y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) { return add_sub(a, b, 1.0, "add"); }
Var sub(Var a, Var b) { return add_sub(a, b, -1.0, "sub"); }

Var mul(Var a, Var b) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) throw mismatch("mul", A, B);
  Tensor C(A.shape());
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * B[i];
  const int ai = a.id(), bi = b.id();
  return t.push(std::move(C), {a, b}, [ai, bi](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(ai)) {
      const Tensor& B = t.value(bi);
      Tensor& GA = t.grad(ai);
      for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * B[i];
    }
    if (t.requires_grad(bi)) {
      const Tensor& A = t.value(ai);
      Tensor& GB = t.grad(bi);
      for (std::size_t i = 0; i < G.size(); ++i) GB[i] += G[i] * A[i];
    }
  });
}

Var scale(Var a, double s) {
  return unary(
      a, [s](double x) { return s * x; },
      [s](double, double) { return s; });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var square(Var a) {
  return unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var gather_rows(Var table, std::span<const int> ids) {
  Tape& t = *table.tape();
  const Tensor& T = table.value();
  if (T.shape().size() != 2)
    throw ShapeError("gather_rows: table must be a matrix, got " +
                     shape_string(T.shape()));
  if (ids.empty()) throw ShapeError("gather_rows: no row indices");
  const int n = T.cols();
  const int m = static_cast<int>(ids.size());
  Tensor C({m, n});
  for (int r = 0; r < m; ++r) {
    if (ids[r] < 0 || ids[r] >= T.rows())
      throw ShapeError("gather_rows: row " + std::to_string(ids[r]) +
                       " outside table " + shape_string(T.shape()));
    std::copy_n(T.data() + static_cast<std::size_t>(ids[r]) * n, n,
                C.data() + static_cast<std::size_t>(r) * n);
  }
  const int ti = table.id();
  std::vector<int> rows(ids.begin(), ids.end());
  return t.push(std::move(C), {table}, [ti, rows, n](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    Tensor& GT = t.grad(ti);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int j = 0; j < n; ++j)
        GT[static_cast<std::size_t>(rows[r]) * n + j] += G[r * n + j];
  });
}

Var log_sum_exp(Var a) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  const int m = A.rows(), n = A.cols();
  Tensor C({m, 1});
  for (int i = 0; i < m; ++i) {
    const double* row = A.data() + static_cast<std::size_t>(i) * n;
    const double mx = *std::max_element(row, row + n);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::exp(row[j] - mx);
    C[i] = mx + std::log(s);
  }
  const int ai = a.id();
  return t.push(std::move(C), {a}, [ai, m, n](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    const Tensor& X = t.value(ai);
    const Tensor& Y = t.value(self);
    Tensor& GA = t.grad(ai);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        GA[k] += G[i] * std::exp(X[k] - Y[i]);
      }
  });
}

Var sum(Var a) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  const double s = std::accumulate(A.values().begin(), A.values().end(), 0.0);
  const int ai = a.id();
  return t.push(Tensor::scalar(s), {a}, [ai](Tape& t, int self) {
    const double g = t.grad(self)[0];
    for (double& x : t.grad(ai).values()) x += g;
  });
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(ParameterSet& params) {
  auto& items = params.items();
  if (m_.empty()) {
    for (const auto& p : items) {
      m_.emplace_back(p.value.shape());
      v_.emplace_back(p.value.shape());
    }
  }
  if (m_.size() != items.size())
    throw std::logic_error("parameter set changed under the optimizer");
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < items.size(); ++k) {
    auto& p = items[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m_[k][i] = opts_.beta1 * m_[k][i] + (1.0 - opts_.beta1) * g;
      v_[k][i] = opts_.beta2 * v_[k][i] + (1.0 - opts_.beta2) * g * g;
      const double mhat = m_[k][i] / bc1;
      const double vhat = v_[k][i] / bc2;
      p.value[i] -= opts_.learning_rate * mhat / (std::sqrt(vhat) + opts_.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult grad_check(const std::function<Var(Tape&)>& fn,
                           ParameterSet& params, double eps,
                           std::size_t max_entries, std::uint64_t seed) {
  params.zero_grad();
  {
    Tape tape;
    Var out = fn(tape);
    tape.backward(out);
  }
  auto evaluate = [&] {
    Tape tape(false);
    return fn(tape).item();
  };

  GradCheckResult result;
  Rng rng(seed);
  for (auto& p : params.items()) {
    std::vector<std::size_t> idx(p.value.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, rng);
    if (idx.size() > max_entries) idx.resize(max_entries);
    for (std::size_t i : idx) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = evaluate();
      p.value[i] = saved - eps;
      const double down = evaluate();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad[i];
      const double rel = std::abs(analytic - numeric) /
                         std::max({1e-8, std::abs(analytic), std::abs(numeric)});
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p.name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace tle
