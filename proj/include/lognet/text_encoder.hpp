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

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lognet/params.hpp"
#include "lognet/tensor.hpp"

namespace lognet {

// Token <-> index map. Index 0 is padding, 1 is the unknown token.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  int add(const std::string& token);
  int index(const std::string& token) const;  // kUnk when absent
  const std::string& token(int index) const;
  std::size_t size() const { return tokens_.size(); }

  std::vector<int> encode(std::span<const std::string> tokens) const;

  // Plain text, one token per line; the line number is the index.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct LinguisticObjects {
  Tensor words;  // L, d×S
  Tensor query;  // q, d×1
};

// One LSTM direction. Gate rows are ordered input, forget, candidate, output.
struct LstmWeights {
  Tensor input_weights;      // 4h×w
  Tensor recurrent_weights;  // 4h×h
  Tensor bias;               // 4h×1
};

LstmWeights make_lstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                      std::size_t hidden, Rng& rng);

struct DirectionalStates {
  Tensor forward;   // h×S, column s is the state after reading token s
  Tensor backward;  // h×S, column s is the state after reading tokens S-1..s
};

// Runs both directions over E (w×S).
DirectionalStates run_bilstm(const Tensor& embedded, const LstmWeights& fwd, const LstmWeights& bwd);

// e_s = [→h_s ; ←h_s], q = [←h_1 ; →h_S].
LinguisticObjects bilstm(const Tensor& embedded, const LstmWeights& fwd, const LstmWeights& bwd);

struct TextEncoder {
  Tensor embedding;  // vocab×w
  LstmWeights forward;
  LstmWeights backward;

  static TextEncoder create(ParameterSet& params, std::size_t vocab, std::size_t word_dim, std::size_t d,
                            Rng& rng);
  LinguisticObjects encode(std::span<const int> tokens) const;
};

}  // namespace lognet
