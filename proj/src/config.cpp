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

#include "lognet/config.hpp"

#include "lognet/tensor.hpp"

namespace lognet {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  positive(d, "d");
  positive(word_dim, "word_dim");
  positive(appearance_dim, "appearance_dim");
  positive(steps, "steps");
  positive(gcn_layers, "gcn_layers");
  positive(heads, "heads");
  positive(descriptor_rows, "descriptor_rows");
  positive(lexical_types, "lexical_types");
  positive(max_objects, "max_objects");
  positive(max_question_len, "max_question_len");
  positive(vocab_size, "vocab_size");
  positive(num_answers, "num_answers");
  if (d % 2 != 0) throw ConfigError("d must be even so each LSTM direction gets d/2 units");
  if (max_objects < 2) throw ConfigError("max_objects must be at least 2");
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::paper_scale() {
  ModelConfig c;
  c.d = 512;
  c.word_dim = 300;
  c.appearance_dim = 2048;
  c.steps = 8;
  c.gcn_layers = 8;
  c.heads = 2;
  c.descriptor_rows = 64;
  c.lexical_types = 3;
  c.max_objects = 14;
  return c;
}

ModelConfig ModelConfig::gradcheck_tiny() {
  ModelConfig c;
  c.d = 8;
  c.word_dim = 8;
  c.appearance_dim = 16;
  c.steps = 2;
  c.gcn_layers = 2;
  c.heads = 2;
  c.descriptor_rows = 2;
  c.lexical_types = 2;
  c.max_objects = 3;
  c.max_question_len = 4;
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  return nlohmann::json{{"d", c.d},
                        {"word_dim", c.word_dim},
                        {"appearance_dim", c.appearance_dim},
                        {"steps", c.steps},
                        {"gcn_layers", c.gcn_layers},
                        {"heads", c.heads},
                        {"descriptor_rows", c.descriptor_rows},
                        {"lexical_types", c.lexical_types},
                        {"max_objects", c.max_objects},
                        {"max_question_len", c.max_question_len},
                        {"vocab_size", c.vocab_size},
                        {"num_answers", c.num_answers},
                        {"tie_gcn", c.tie_gcn},
                        {"tie_steps", c.tie_steps},
                        {"disable_binding", c.disable_binding},
                        {"single_head", c.single_head},
                        {"use_boxes", c.use_boxes},
                        {"loss", c.loss == LossKind::kCrossEntropy ? "ce" : "bce"}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("d", c.d);
  get("word_dim", c.word_dim);
  get("appearance_dim", c.appearance_dim);
  get("steps", c.steps);
  get("gcn_layers", c.gcn_layers);
  get("heads", c.heads);
  get("descriptor_rows", c.descriptor_rows);
  get("lexical_types", c.lexical_types);
  get("max_objects", c.max_objects);
  get("max_question_len", c.max_question_len);
  get("vocab_size", c.vocab_size);
  get("num_answers", c.num_answers);
  get("tie_gcn", c.tie_gcn);
  get("tie_steps", c.tie_steps);
  get("disable_binding", c.disable_binding);
  get("single_head", c.single_head);
  get("use_boxes", c.use_boxes);
  if (j.contains("loss")) {
    const auto s = j.at("loss").get<std::string>();
    if (s == "ce") c.loss = LossKind::kCrossEntropy;
    else if (s == "bce") c.loss = LossKind::kBinaryCrossEntropy;
    else throw ConfigError("unknown loss '" + s + "' (expected ce or bce)");
  }
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return nlohmann::json{{"lr", c.lr},           {"beta1", c.beta1},   {"beta2", c.beta2},
                        {"adam_eps", c.adam_eps}, {"batch_size", c.batch_size},
                        {"clip_norm", c.clip_norm}, {"epochs", c.epochs}, {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("lr", c.lr);
  get("beta1", c.beta1);
  get("beta2", c.beta2);
  get("adam_eps", c.adam_eps);
  get("batch_size", c.batch_size);
  get("clip_norm", c.clip_norm);
  get("epochs", c.epochs);
  get("seed", c.seed);
  if (c.batch_size < 2) throw ConfigError("batch_size must be at least 2 (batch normalization)");
  if (c.lr <= 0) throw ConfigError("lr must be positive");
  return c;
}

}  // namespace lognet
