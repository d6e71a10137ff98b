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

// One Language-binding Object Graph reasoning step. Every stage is exposed
// as a free function over tensors so it can be tested in isolation; `step`
// composes them.
//
// Layout conventions: feature-major matrices, one column per object (V is
// d×N) or per word (L is d×S). Controlling signals are stored as the
// columns of a d×K matrix.

#include <string>
#include <vector>

#include "lognet/config.hpp"
#include "lognet/params.hpp"
#include "lognet/tensor.hpp"

namespace lognet {

// Weights owned by one reasoning step.
struct StepParams {
  Tensor augment_weights;  // d×2d
  Tensor augment_bias;     // d×1
  Tensor query_weights;    // d×d
  Tensor query_bias;       // d×1
  Tensor mix_weights;      // d×2d, projects [q_t ; Σγc] back to d
  Tensor mix_bias;         // d×1
  Tensor head_logits;      // K×1, softmaxed into γ
  Tensor attention_weights;  // K×d, row k scores words for head k
  Tensor descriptor_weights; // r×d
  Tensor bind_input_weights; // d×2d, V̂ = W[V ; m⊙V] + b
  Tensor bind_input_bias;    // d×1
  Tensor bind_object_weights;  // d×d, applied to v̂_i
  Tensor bind_word_weights;    // d×d, applied to e_s
  Tensor bind_score_weights;   // P×d
  Tensor readout_weights;  // 1×d
  Tensor memory_weights;   // d×2d
  Tensor memory_bias;      // d×1
};

struct GcnLayer {
  Tensor inner;  // W¹, d×d
  Tensor outer;  // W², d×d
  Tensor bias;   // d×1
};

// Weights shared by all steps.
struct SharedParams {
  Tensor lexical_hidden;       // W^{z0}, d×d
  Tensor lexical_hidden_bias;  // d×1
  Tensor lexical_out;          // W^{z1}, P×d
  Tensor lexical_out_bias;     // P×1
  Tensor refine_input;         // W^x, d×2d
  std::vector<GcnLayer> gcn;   // H layers, or one when tied
  Tensor initial_memory;       // m_0, d×1
};

StepParams make_step_params(ParameterSet& params, const std::string& prefix, const ModelConfig& cfg, Rng& rng);
SharedParams make_shared_params(ParameterSet& params, const ModelConfig& cfg, Rng& rng);

struct LogState {
  Tensor memory;    // d×1
  Tensor controls;  // d×K, one column per head
  int t = 1;
};

struct StepTrace {
  Tensor alpha;      // K×S, rows sum to 1
  Tensor gamma;      // K×1, sums to 1
  Tensor adjacency;  // N×N, symmetric
  Tensor beta;       // N×S
  Tensor delta;      // 1×N, sums to 1
};

// V_t = W[V ; m_prev ⊙ V] + b
Tensor augment_nodes(const Tensor& objects, const Tensor& memory, const Tensor& weights, const Tensor& bias);

struct ControlOutput {
  Tensor controls;  // d×K
  Tensor alpha;     // K×S
  Tensor gamma;     // K×1
};

ControlOutput control_signals(const Tensor& query, const Tensor& prev_controls, const Tensor& words,
                              const StepParams& p);

// softmax over objects of W · (V ⊙ Σ_k c_k); r×N.
Tensor node_descriptors(const Tensor& objects, const Tensor& controls, const Tensor& weights);

// Ṽᵀ·Ṽ; symmetric PSD, rank ≤ r.
Tensor adjacency(const Tensor& descriptors);

// z_s for every word, P×S with entries in (0,1).
Tensor lexical_gates(const Tensor& words, const SharedParams& shared);

struct BindingOutput {
  Tensor nodes;  // X, 2d×N
  Tensor beta;   // N×S
};

// X = [V_t ; L·βᵀ], where β_{i,s} = Σ_p z_{s,p} softmax_s(score_p)_{i,s}.
// `objects` is the raw V feeding V̂; `step_nodes` is V_t.
BindingOutput language_binding(const Tensor& objects, const Tensor& step_nodes, const Tensor& words,
                               const Tensor& memory, const Tensor& gates, const StepParams& p);

// X = [V_t ; 0] and β = 0: the binding-free variant.
BindingOutput unbound_nodes(const Tensor& step_nodes, std::size_t words);

// Residual GCN over the multimodal graph; returns R_H (d×N).
Tensor refine(const Tensor& nodes, const Tensor& adj, const Tensor& input_weights,
              const std::vector<GcnLayer>& layers, std::size_t depth);

struct ReadoutOutput {
  Tensor summary;  // x̃, d×1
  Tensor delta;    // 1×N
};

ReadoutOutput readout(const Tensor& refined, const Tensor& weights);

// m_t = W[m_prev ; x̃] + b
Tensor memory_update(const Tensor& memory, const Tensor& summary, const Tensor& weights, const Tensor& bias);

struct StepInputs {
  const Tensor& objects;  // V
  const Tensor& words;    // L
  const Tensor& query;    // q
  const Tensor& gates;    // z, P×S
};

struct StepResult {
  LogState state;
  StepTrace trace;
};

StepResult step(const StepInputs& in, const LogState& state, const StepParams& p, const SharedParams& shared,
                const ModelConfig& cfg);

// State before step 1: m_0 and c_{0,k} = q_1 for every head.
LogState initial_state(const Tensor& query, const StepParams& first, const SharedParams& shared,
                       const ModelConfig& cfg);

}  // namespace lognet
