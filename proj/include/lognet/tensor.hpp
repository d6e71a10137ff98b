/*
 * Copyright 2026 The LOGNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lognet {

// Error taxonomy shared by every module.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable, unwritable or corrupt files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

struct TensorImpl {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something writes a gradient
  bool requires_grad = false;
  bool is_leaf = true;

  double* ensure_grad();
};

// Rank-1 or rank-2 dense f64 array. A column vector is {n, 1}; rank-1
// shapes are accepted and treated as {n, 1} by every op. Copies share
// storage (handle semantics), like every other autograd engine.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double v, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor column(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const { return impl_->value.size(); }

  std::span<const double> values() const { return impl_->value; }
  std::span<double> mutable_values() { return impl_->value; }
  std::span<const double> grad() const { return impl_->grad; }
  bool has_grad() const { return !impl_->grad.empty(); }

  double at(std::size_t r, std::size_t c) const { return impl_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on) { impl_->requires_grad = on; }
  void zero_grad();

  // Fresh leaf holding a copy of the values; never receives gradients.
  Tensor detach() const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Ordered log of differentiable operations. Nodes are appended after their
// inputs exist, so reverse order is a valid reverse topological order.
class Tape {
 public:
  using Backward = std::function<void()>;

  void record(std::shared_ptr<TensorImpl> output, Backward backward);

  // Seeds d(loss)/d(loss)=1 and runs every recorded closure once, newest
  // first. Gradients on non-leaf tensors are reset at the start of each call;
  // leaf gradients accumulate across calls.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    std::shared_ptr<TensorImpl> output;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Installs a tape as the recording target for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

// Runs backward on the active tape of this thread.
void backward(const Tensor& loss);

// ---- operations -----------------------------------------------------------
//
// Broadcasting is limited to (r×c op r×1) and (r×c op 1×1), in either
// operand position.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);

Tensor elu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// axis 0: every column is a distribution; axis 1: every row is.
Tensor softmax(const Tensor& x, int axis);

Tensor concat(std::span<const Tensor> parts, int axis);
Tensor concat(const Tensor& a, const Tensor& b, int axis);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// xᵀ·x, mirrored from the upper triangle so the result is exactly symmetric.
Tensor gram(const Tensor& x);

// a: d×S, b: d×N → d×(S·N), column s·N+i holds a[:,s] + b[:,i].
Tensor pairwise_add(const Tensor& a, const Tensor& b);

// table: V×w → w×S, column s is table row tokens[s].
Tensor embed(const Tensor& table, std::span<const int> tokens);

struct BatchNormState {
  Tensor gamma;  // 1×d
  Tensor beta;   // 1×d
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNormState create(std::size_t features);
};

enum class Mode { kTrain, kEval };

// x: B×d. In training mode statistics come from the batch (biased variance
// for normalization, unbiased for the running estimate) and running stats
// are updated when `update_running` is set.
Tensor batchnorm(const Tensor& x, BatchNormState& state, Mode mode,
                 bool update_running = true);

// logits: C×B (one column per sample). Mean softmax cross-entropy.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

// logits: C×B. Mean binary cross-entropy of sigmoid(logits) against the
// one-hot targets, averaged over classes and batch.
Tensor binary_cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace lognet
