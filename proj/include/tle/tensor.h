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

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tle {

using Shape = std::vector<int>;

std::string shape_string(const Shape& shape);

/// Raised when operand shapes are incompatible; the message names both.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major array of doubles. Rank-1 tensors behave as a single row
/// where an operation needs a matrix.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor row(std::vector<double> v);

  const Shape& shape() const { return shape_; }
  int rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  int cols() const { return shape_.empty() ? 0 : shape_.back(); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols() + c];
  }

  void fill(double v);
  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// A named trainable tensor and its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Ordered collection of parameters. Element addresses are stable for the
/// lifetime of the set.
class ParameterSet {
 public:
  Parameter& add(std::string name, Tensor init);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::deque<Parameter>& items() { return params_; }
  const std::deque<Parameter>& items() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const;

  void zero_grad();
  double grad_norm() const;
  /// Rescales gradients so their global L2 norm is at most max_norm. Returns
  /// the norm before clipping.
  double clip_grad_norm(double max_norm);

  /// Copies values (not gradients) from another set with identical layout.
  void assign_values(const ParameterSet& other);
  bool values_equal(const ParameterSet& other) const;

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

/// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  /// Value of a single-element tensor.
  double item() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Records operations in execution order (a topological order) and
/// propagates gradients in reverse. A tape built with record = false only
/// evaluates forward values.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Borrows `value`, which must outlive the tape.
  Var constant_ref(const Tensor& value);
  /// Borrows the parameter value; backward() accumulates into its grad.
  Var param(Parameter& p);

  /// Reverse pass from a single-element output. Throws ShapeError otherwise.
  void backward(Var output);

  const Tensor& value(int id) const;
  /// Gradient buffer of a node, allocated as zeros on first use.
  Tensor& grad(int id);
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  using BackwardFn = std::function<void(Tape&, int self)>;
  /// Appends an op result. `backward` runs only when recording and at least
  /// one input requires a gradient.
  Var push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

 private:
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

Var matmul(Var a, Var b);
/// Elementwise sum; `b` may also be a single row broadcast over the rows of
/// `a`, a single column broadcast over its columns, or a scalar.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var tanh(Var a);
Var sigmoid(Var a);
Var square(Var a);
/// Elementwise |x|; the subgradient at 0 is 0.
Var abs(Var a);
/// Rows of `table` selected by `ids`, as an [ids.size() x cols] matrix.
Var gather_rows(Var table, std::span<const int> ids);
/// log-sum-exp over the last axis: [m x n] -> [m x 1].
Var log_sum_exp(Var a);
/// Sum of all entries, shape [1].
Var sum(Var a);

/// Adaptive-moment optimizer over a ParameterSet.
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  explicit Adam(Options opts) : opts_(opts) {}
  void step(ParameterSet& params);
  long steps() const { return t_; }

 private:
  Options opts_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares backward() gradients of the scalar `fn` with central finite
/// differences at up to `max_entries` sampled entries per parameter.
/// Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const std::function<Var(Tape&)>& fn,
                           ParameterSet& params, double eps = 1e-5,
                           std::size_t max_entries = 16,
                           std::uint64_t seed = 1);

}  // namespace tle
