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

#include "lognet/tensor.hpp"

#include <numeric>
#include <sstream>

namespace lognet {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

double* TensorImpl::ensure_grad() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad.data();
}

namespace {

std::size_t product(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

void validate_shape(const Shape& s) {
  if (s.empty() || s.size() > 2) throw ShapeError("tensor rank must be 1 or 2, got " + shape_str(s));
}

thread_local Tape* g_active_tape = nullptr;

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  validate_shape(shape);
  if (values.size() != product(shape))
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                     shape_str(shape));
  impl_ = std::make_shared<TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->value = std::move(values);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::filled(Shape shape, double v, bool requires_grad) {
  validate_shape(shape);
  const std::size_t n = product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, v), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return Tensor({1, 1}, {v}, requires_grad); }

Tensor Tensor::column(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return Tensor({n, 1}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
  return Tensor({rows, cols}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const { return impl_->shape[0]; }
std::size_t Tensor::cols() const { return impl_->shape.size() == 2 ? impl_->shape[1] : 1; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return impl_->value[0];
}

void Tensor::zero_grad() { impl_->grad.clear(); }

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->value, false); }

void Tape::record(std::shared_ptr<TensorImpl> output, Backward backward) {
  nodes_.push_back(Node{std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ShapeError("backward() needs a scalar loss");
  if (!loss.requires_grad()) return;
  for (auto& n : nodes_) n.output->grad.clear();
  loss.impl()->ensure_grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->backward();
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

void backward(const Tensor& loss) {
  if (g_active_tape == nullptr) throw std::logic_error("backward() without an active tape");
  g_active_tape->backward(loss);
}

BatchNormState BatchNormState::create(std::size_t features) {
  BatchNormState s;
  s.gamma = Tensor::filled({1, features}, 1.0, true);
  s.beta = Tensor::zeros({1, features}, true);
  s.running_mean.assign(features, 0.0);
  s.running_var.assign(features, 1.0);
  return s;
}

}  // namespace lognet
