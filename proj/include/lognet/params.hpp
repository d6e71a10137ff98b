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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lognet/tensor.hpp"

namespace lognet {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }
  // Uniform integer in [0, n).
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }
  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }
  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent per-sample seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

struct Parameter {
  std::string name;
  std::string group;
  Tensor tensor;
};

// Trainable tensors in declaration order. Order is the checkpoint layout.
class ParameterSet {
 public:
  // Weight matrix rows×cols, uniform(±1/√cols).
  Tensor& linear(const std::string& name, const std::string& group, std::size_t rows, std::size_t cols, Rng& rng);
  // Bias column of `rows`, uniform(±1/√fan_in).
  Tensor& bias(const std::string& name, const std::string& group, std::size_t rows, std::size_t fan_in, Rng& rng);
  Tensor& uniform(const std::string& name, const std::string& group, Shape shape, double bound, Rng& rng);
  Tensor& constant(const std::string& name, const std::string& group, Shape shape, double value);
  // Registers an existing tensor (e.g. batch-norm scale) under a name.
  Tensor& adopt(const std::string& name, const std::string& group, Tensor t);

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  std::size_t element_count() const;
  void zero_grad();
  const Parameter* find(const std::string& name) const;

 private:
  Tensor& push(const std::string& name, const std::string& group, Tensor t);
  std::vector<Parameter> params_;
};

}  // namespace lognet
