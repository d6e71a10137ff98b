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
#include <span>
#include <string>
#include <vector>

#include "lognet/answer_head.hpp"
#include "lognet/config.hpp"
#include "lognet/log_unit.hpp"
#include "lognet/scene_frontend.hpp"
#include "lognet/text_encoder.hpp"
#include "lognet/toy_data.hpp"

namespace lognet {

// Model-ready view of one sample.
struct EncodedSample {
  std::vector<int> tokens;
  std::vector<RegionFeature> regions;
  int label = 0;
  bool binary = false;
  std::string type;
};

// Maps tokens through `vocab` (truncating to max_question_len) and derives
// region features from the scene.
EncodedSample encode_sample(const toy::Sample& s, const Vocabulary& vocab, const ModelConfig& cfg);
std::vector<EncodedSample> encode_all(std::span<const toy::Sample> samples, const Vocabulary& vocab,
                                      const ModelConfig& cfg);

struct SampleForward {
  Tensor fused;  // J, d×1
  LinguisticObjects language;
  Tensor objects;  // V
  std::vector<LogState> states;  // after each step
  std::vector<StepTrace> traces;
};

struct BatchForward {
  Tensor logits;  // |A|×B
  std::vector<SampleForward> samples;
};

// Parameters are handles: copying a Model yields a replica sharing the same
// weights with its own batch-norm running statistics.
class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  BatchNormState& norm() { return head_.norm; }
  const BatchNormState& norm() const { return head_.norm; }

  SampleForward forward_sample(const EncodedSample& s) const;
  BatchForward forward(std::span<const EncodedSample* const> batch, Mode mode, bool update_running = true);
  Tensor loss(const BatchForward& out, std::span<const EncodedSample* const> batch) const;

  const StepParams& step_params(int t) const;  // t is 1-based

 private:
  ModelConfig cfg_;
  ParameterSet params_;
  TextEncoder text_;
  SceneFrontend frontend_;
  SharedParams shared_;
  std::vector<StepParams> steps_;
  AnswerHead head_;
};

}  // namespace lognet
