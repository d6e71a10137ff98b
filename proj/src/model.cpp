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

#include "lognet/model.hpp"

#include <memory>

namespace lognet {

EncodedSample encode_sample(const toy::Sample& s, const Vocabulary& vocab, const ModelConfig& cfg) {
  EncodedSample e;
  e.tokens = vocab.encode(s.tokens);
  if (e.tokens.size() > static_cast<std::size_t>(cfg.max_question_len))
    e.tokens.resize(static_cast<std::size_t>(cfg.max_question_len));
  if (s.scene.objects.size() > static_cast<std::size_t>(cfg.max_objects))
    throw ConfigError("sample has " + std::to_string(s.scene.objects.size()) + " objects but the model allows " +
                      std::to_string(cfg.max_objects));
  e.regions = toy::region_features(s.scene, static_cast<std::size_t>(cfg.appearance_dim));
  e.label = toy::answer_index(s.answer);
  if (e.label >= cfg.num_answers) throw ConfigError("answer '" + s.answer + "' outside the model's answer space");
  e.binary = toy::is_binary(s.family);
  e.type = std::string(toy::family_name(s.family));
  return e;
}

std::vector<EncodedSample> encode_all(std::span<const toy::Sample> samples, const Vocabulary& vocab,
                                      const ModelConfig& cfg) {
  std::vector<EncodedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(encode_sample(s, vocab, cfg));
  return out;
}

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const auto d = static_cast<std::size_t>(cfg_.d);
  text_ = TextEncoder::create(params_, static_cast<std::size_t>(cfg_.vocab_size),
                              static_cast<std::size_t>(cfg_.word_dim), d, rng);
  frontend_ = SceneFrontend::create(params_, static_cast<std::size_t>(cfg_.appearance_dim), d,
                                    static_cast<std::size_t>(cfg_.max_objects), cfg_.use_boxes, rng);
  shared_ = make_shared_params(params_, cfg_, rng);
  const int distinct = cfg_.tie_steps ? 1 : cfg_.steps;
  for (int t = 1; t <= distinct; ++t) steps_.push_back(make_step_params(params_, "step" + std::to_string(t), cfg_, rng));
  head_ = AnswerHead::create(params_, d, static_cast<std::size_t>(cfg_.num_answers), rng);
}

const StepParams& Model::step_params(int t) const {
  return steps_[cfg_.tie_steps ? 0 : static_cast<std::size_t>(t - 1)];
}

SampleForward Model::forward_sample(const EncodedSample& s) const {
  SampleForward out;
  out.language = text_.encode(s.tokens);
  out.objects = frontend_.encode_objects(s.regions);
  const Tensor gates = cfg_.disable_binding ? Tensor() : lexical_gates(out.language.words, shared_);
  const StepInputs in{out.objects, out.language.words, out.language.query, gates};
  LogState state = initial_state(out.language.query, step_params(1), shared_, cfg_);
  for (int t = 1; t <= cfg_.steps; ++t) {
    StepResult r = step(in, state, step_params(t), shared_, cfg_);
    state = r.state;
    out.states.push_back(state);
    out.traces.push_back(std::move(r.trace));
  }
  out.fused = head_.fuse(state.memory, out.language.query);
  return out;
}

BatchForward Model::forward(std::span<const EncodedSample* const> batch, Mode mode, bool update_running) {
  if (batch.empty()) throw ShapeError("empty batch");
  BatchForward out;
  std::vector<Tensor> fused;
  out.samples.reserve(batch.size());
  for (const EncodedSample* s : batch) {
    out.samples.push_back(forward_sample(*s));
    fused.push_back(out.samples.back().fused);
  }
  out.logits = head_.classify(concat(std::span<const Tensor>(fused), 1), mode, update_running);
  return out;
}

Tensor Model::loss(const BatchForward& out, std::span<const EncodedSample* const> batch) const {
  std::vector<int> labels;
  std::vector<char> binary_store;
  for (const EncodedSample* s : batch) {
    labels.push_back(s->label);
    binary_store.push_back(s->binary ? 1 : 0);
  }
  std::unique_ptr<bool[]> binary(new bool[batch.size()]);
  for (std::size_t i = 0; i < batch.size(); ++i) binary[i] = binary_store[i] != 0;
  return answer_loss(out.logits, labels, std::span<const bool>(binary.get(), batch.size()), cfg_.loss);
}

}  // namespace lognet
