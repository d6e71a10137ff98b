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

#include "lognet/answer_head.hpp"

namespace lognet {

AnswerHead AnswerHead::create(ParameterSet& ps, std::size_t d, std::size_t answers, Rng& rng) {
  AnswerHead h;
  h.fuse_weights = ps.linear("head.fuse_weights", "head.fuse", d, 2 * d, rng);
  h.fuse_bias = ps.bias("head.fuse_bias", "head.fuse", d, 2 * d, rng);
  h.hidden_weights = ps.linear("head.hidden_weights", "head.mlp", d, d, rng);
  h.hidden_bias = ps.bias("head.hidden_bias", "head.mlp", d, d, rng);
  h.norm = BatchNormState::create(d);
  h.norm.gamma = ps.adopt("head.norm_scale", "head.norm", h.norm.gamma);
  h.norm.beta = ps.adopt("head.norm_shift", "head.norm", h.norm.beta);
  h.out_weights = ps.linear("head.out_weights", "head.mlp", answers, d, rng);
  h.out_bias = ps.bias("head.out_bias", "head.mlp", answers, d, rng);
  return h;
}

Tensor AnswerHead::fuse(const Tensor& memory, const Tensor& query) const {
  if (memory.rows() != query.rows()) throw ShapeError("memory and query widths differ");
  return add(matmul(fuse_weights, concat(memory, query, 0)), fuse_bias);
}

Tensor AnswerHead::classify(const Tensor& fused, Mode mode, bool update_running) {
  const Tensor hidden = elu(add(matmul(hidden_weights, fused), hidden_bias));  // d×B
  const Tensor normed = transpose(batchnorm(transpose(hidden), norm, mode, update_running));
  return add(matmul(out_weights, normed), out_bias);
}

std::vector<int> predictions(const Tensor& logits) {
  const std::size_t classes = logits.rows(), batch = logits.cols();
  std::vector<int> out(batch, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    double best = logits.at(0, b);
    for (std::size_t c = 1; c < classes; ++c)
      if (logits.at(c, b) > best) {
        best = logits.at(c, b);
        out[b] = static_cast<int>(c);
      }
  }
  return out;
}

Tensor answer_loss(const Tensor& logits, std::span<const int> labels, std::span<const bool> binary, LossKind kind) {
  if (labels.size() != logits.cols() || binary.size() != labels.size())
    throw ShapeError("answer_loss: labels, type flags and batch differ");
  if (kind == LossKind::kCrossEntropy) return cross_entropy(logits, labels);
  std::vector<std::size_t> bin_idx, open_idx;
  for (std::size_t b = 0; b < labels.size(); ++b) (binary[b] ? bin_idx : open_idx).push_back(b);
  auto gather = [&](const std::vector<std::size_t>& idx, std::vector<int>& lab) {
    std::vector<Tensor> cols;
    for (auto b : idx) {
      cols.push_back(slice_cols(logits, b, 1));
      lab.push_back(labels[b]);
    }
    return concat(std::span<const Tensor>(cols), 1);
  };
  const double total = static_cast<double>(labels.size());
  Tensor loss;
  if (!bin_idx.empty()) {
    std::vector<int> lab;
    const Tensor cols = gather(bin_idx, lab);
    const Tensor part = binary_cross_entropy(cols, lab);
    loss = scale(part, static_cast<double>(bin_idx.size()) / total);
  }
  if (!open_idx.empty()) {
    std::vector<int> lab;
    const Tensor cols = gather(open_idx, lab);
    const Tensor part = scale(cross_entropy(cols, lab), static_cast<double>(open_idx.size()) / total);
    loss = loss.defined() ? add(loss, part) : part;
  }
  return loss;
}

}  // namespace lognet
