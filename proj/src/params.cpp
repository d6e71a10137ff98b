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

#include "lognet/params.hpp"

#include <cmath>
#include <sstream>

namespace lognet {

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (!is) throw std::runtime_error("corrupt RNG state");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Tensor& ParameterSet::push(const std::string& name, const std::string& group, Tensor t) {
  if (find(name) != nullptr) throw std::logic_error("duplicate parameter " + name);
  t.set_requires_grad(true);
  params_.push_back(Parameter{name, group, std::move(t)});
  return params_.back().tensor;
}

Tensor& ParameterSet::uniform(const std::string& name, const std::string& group, Shape shape, double bound,
                              Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_values()) v = rng.uniform(-bound, bound);
  return push(name, group, std::move(t));
}

Tensor& ParameterSet::linear(const std::string& name, const std::string& group, std::size_t rows,
                             std::size_t cols, Rng& rng) {
  return uniform(name, group, {rows, cols}, 1.0 / std::sqrt(static_cast<double>(cols)), rng);
}

Tensor& ParameterSet::bias(const std::string& name, const std::string& group, std::size_t rows,
                           std::size_t fan_in, Rng& rng) {
  return uniform(name, group, {rows, 1}, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

Tensor& ParameterSet::constant(const std::string& name, const std::string& group, Shape shape, double value) {
  return push(name, group, Tensor::filled(std::move(shape), value));
}

Tensor& ParameterSet::adopt(const std::string& name, const std::string& group, Tensor t) {
  return push(name, group, std::move(t));
}

std::size_t ParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace lognet
