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

#include <span>
#include <vector>

#include "lognet/config.hpp"
#include "lognet/params.hpp"
#include "lognet/tensor.hpp"

namespace lognet {

struct AnswerHead {
  Tensor fuse_weights;  // d×2d
  Tensor fuse_bias;     // d×1
  Tensor hidden_weights;  // d×d
  Tensor hidden_bias;     // d×1
  BatchNormState norm;    // over the hidden layer
  Tensor out_weights;     // |A|×d
  Tensor out_bias;        // |A|×1

  static AnswerHead create(ParameterSet& params, std::size_t d, std::size_t answers, Rng& rng);

  // J = W[m_T ; q] + b
  Tensor fuse(const Tensor& memory, const Tensor& query) const;

  // J for the whole batch as d×B → logits |A|×B.
  Tensor classify(const Tensor& fused, Mode mode, bool update_running = true);
};

// Column-wise argmax of a C×B logit matrix.
std::vector<int> predictions(const Tensor& logits);

// `binary` flags samples whose question type is yes/no. With kCrossEntropy
// every sample uses softmax cross-entropy; with kBinaryCrossEntropy the
// binary samples use BCE and the rest cross-entropy, weighted by count.
Tensor answer_loss(const Tensor& logits, std::span<const int> labels, std::span<const bool> binary, LossKind kind);

}  // namespace lognet
