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
#include <string>

#include <json.hpp>

namespace lognet {

enum class LossKind { kCrossEntropy, kBinaryCrossEntropy };

// Architecture hyperparameters plus ablation switches.
struct ModelConfig {
  int d = 64;        // feature dimension
  int word_dim = 64; // word embedding width
  int appearance_dim = 16;
  int steps = 4;     // T, number of LOG units
  int gcn_layers = 4;  // H
  int heads = 2;     // K
  int descriptor_rows = 8;  // r
  int lexical_types = 3;    // P
  int max_objects = 10;
  int max_question_len = 16;
  int vocab_size = 0;
  int num_answers = 0;

  bool tie_gcn = false;
  bool tie_steps = false;
  bool disable_binding = false;
  bool single_head = false;
  bool use_boxes = true;
  LossKind loss = LossKind::kCrossEntropy;

  int effective_heads() const { return single_head ? 1 : heads; }

  // Throws ConfigError on any non-positive extent or odd d (biLSTM halves).
  void validate() const;

  static ModelConfig desk();
  static ModelConfig paper_scale();
  // d=8, N=3, S=4, T=2, H=2, K=2, r=2, P=2
  static ModelConfig gradcheck_tiny();
};

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 32;
  double clip_norm = 8.0;
  int epochs = 30;
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

}  // namespace lognet
