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

#include "lognet/text_encoder.hpp"

#include <fstream>

namespace lognet {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

int Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t));
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write vocabulary to " + path.string());
  for (const auto& t : tokens_) os << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read vocabulary from " + path.string());
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  std::string line;
  while (std::getline(is, line)) {
    if (v.index_.count(line) != 0) throw IoError("duplicate vocabulary token '" + line + "'");
    v.index_.emplace(line, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(line);
  }
  if (v.tokens_.size() < 2 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<unk>")
    throw IoError("vocabulary file must start with <pad> and <unk>");
  return v;
}

LstmWeights make_lstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim, std::size_t hidden,
                      Rng& rng) {
  LstmWeights w;
  w.input_weights = params.linear(prefix + ".w_input", "encoder.lstm", 4 * hidden, input_dim, rng);
  w.recurrent_weights = params.linear(prefix + ".w_recurrent", "encoder.lstm", 4 * hidden, hidden, rng);
  Tensor b = Tensor::zeros({4 * hidden, 1});
  auto bv = b.mutable_values();
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bv[i] = 1.0;  // forget gate
  w.bias = params.adopt(prefix + ".bias", "encoder.lstm", std::move(b));
  return w;
}

namespace {

// Returns h×S hidden states, visiting columns in `order`.
Tensor run_direction(const Tensor& embedded, const LstmWeights& w, bool reverse) {
  const std::size_t s_count = embedded.cols();
  const std::size_t hidden = w.recurrent_weights.cols();
  const Tensor projected = matmul(w.input_weights, embedded);  // 4h×S
  Tensor h = Tensor::zeros({hidden, 1});
  Tensor c = Tensor::zeros({hidden, 1});
  std::vector<Tensor> states(s_count);
  for (std::size_t step = 0; step < s_count; ++step) {
    const std::size_t s = reverse ? s_count - 1 - step : step;
    const Tensor z = add(add(slice_cols(projected, s, 1), matmul(w.recurrent_weights, h)), w.bias);
    const Tensor in_gate = sigmoid(slice_rows(z, 0, hidden));
    const Tensor forget_gate = sigmoid(slice_rows(z, hidden, hidden));
    const Tensor candidate = tanh(slice_rows(z, 2 * hidden, hidden));
    const Tensor out_gate = sigmoid(slice_rows(z, 3 * hidden, hidden));
    c = add(mul(forget_gate, c), mul(in_gate, candidate));
    h = mul(out_gate, tanh(c));
    states[s] = h;
  }
  return concat(std::span<const Tensor>(states), 1);
}

}  // namespace

DirectionalStates run_bilstm(const Tensor& embedded, const LstmWeights& fwd, const LstmWeights& bwd) {
  if (embedded.cols() == 0) throw ShapeError("bilstm over an empty sequence");
  return DirectionalStates{run_direction(embedded, fwd, false), run_direction(embedded, bwd, true)};
}

LinguisticObjects bilstm(const Tensor& embedded, const LstmWeights& fwd, const LstmWeights& bwd) {
  const DirectionalStates st = run_bilstm(embedded, fwd, bwd);
  const std::size_t s_count = embedded.cols();
  LinguisticObjects out;
  out.words = concat(st.forward, st.backward, 0);
  out.query = concat(slice_cols(st.backward, 0, 1), slice_cols(st.forward, s_count - 1, 1), 0);
  return out;
}

TextEncoder TextEncoder::create(ParameterSet& params, std::size_t vocab, std::size_t word_dim, std::size_t d,
                                Rng& rng) {
  TextEncoder enc;
  enc.embedding = params.uniform("encoder.embedding", "encoder.embedding", {vocab, word_dim}, 0.08, rng);
  enc.forward = make_lstm(params, "encoder.lstm_forward", word_dim, d / 2, rng);
  enc.backward = make_lstm(params, "encoder.lstm_backward", word_dim, d / 2, rng);
  return enc;
}

LinguisticObjects TextEncoder::encode(std::span<const int> tokens) const {
  return bilstm(embed(embedding, tokens), forward, backward);
}

}  // namespace lognet
