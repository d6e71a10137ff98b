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

#include "lognet/log_unit.hpp"

namespace lognet {

StepParams make_step_params(ParameterSet& ps, const std::string& prefix, const ModelConfig& cfg, Rng& rng) {
  const auto d = static_cast<std::size_t>(cfg.d);
  const auto k = static_cast<std::size_t>(cfg.effective_heads());
  const auto r = static_cast<std::size_t>(cfg.descriptor_rows);
  const auto p = static_cast<std::size_t>(cfg.lexical_types);
  const std::string aug = prefix + ".augment";
  const std::string ctl = prefix + ".control";
  const std::string desc = prefix + ".descriptor";
  const std::string bind = prefix + ".binding";
  const std::string rd = prefix + ".readout";
  const std::string mem = prefix + ".memory";
  StepParams s;
  s.augment_weights = ps.linear(aug + ".weights", aug, d, 2 * d, rng);
  s.augment_bias = ps.bias(aug + ".bias", aug, d, 2 * d, rng);
  s.query_weights = ps.linear(ctl + ".query_weights", ctl, d, d, rng);
  s.query_bias = ps.bias(ctl + ".query_bias", ctl, d, d, rng);
  s.mix_weights = ps.linear(ctl + ".mix_weights", ctl, d, 2 * d, rng);
  s.mix_bias = ps.bias(ctl + ".mix_bias", ctl, d, 2 * d, rng);
  s.head_logits = ps.constant(ctl + ".head_logits", ctl, {k, 1}, 0.0);
  s.attention_weights = ps.linear(ctl + ".attention_weights", ctl, k, d, rng);
  s.descriptor_weights = ps.linear(desc + ".weights", desc, r, d, rng);
  if (!cfg.disable_binding) {
    s.bind_input_weights = ps.linear(bind + ".input_weights", bind, d, 2 * d, rng);
    s.bind_input_bias = ps.bias(bind + ".input_bias", bind, d, 2 * d, rng);
    s.bind_object_weights = ps.linear(bind + ".object_weights", bind, d, d, rng);
    s.bind_word_weights = ps.linear(bind + ".word_weights", bind, d, d, rng);
    s.bind_score_weights = ps.linear(bind + ".score_weights", bind, p, d, rng);
  }
  s.readout_weights = ps.linear(rd + ".weights", rd, 1, d, rng);
  s.memory_weights = ps.linear(mem + ".weights", mem, d, 2 * d, rng);
  s.memory_bias = ps.bias(mem + ".bias", mem, d, 2 * d, rng);
  return s;
}

SharedParams make_shared_params(ParameterSet& ps, const ModelConfig& cfg, Rng& rng) {
  const auto d = static_cast<std::size_t>(cfg.d);
  const auto p = static_cast<std::size_t>(cfg.lexical_types);
  SharedParams s;
  if (!cfg.disable_binding) {
    s.lexical_hidden = ps.linear("lexical.hidden_weights", "lexical", d, d, rng);
    s.lexical_hidden_bias = ps.bias("lexical.hidden_bias", "lexical", d, d, rng);
    s.lexical_out = ps.linear("lexical.out_weights", "lexical", p, d, rng);
    s.lexical_out_bias = ps.bias("lexical.out_bias", "lexical", p, d, rng);
  }
  s.refine_input = ps.linear("refine.input_weights", "refine.input", d, 2 * d, rng);
  const int layers = cfg.tie_gcn ? 1 : cfg.gcn_layers;
  for (int h = 0; h < layers; ++h) {
    const std::string pre = "refine.gcn" + std::to_string(h);
    GcnLayer g;
    g.inner = ps.linear(pre + ".inner", "refine.gcn", d, d, rng);
    g.outer = ps.linear(pre + ".outer", "refine.gcn", d, d, rng);
    g.bias = ps.bias(pre + ".bias", "refine.gcn", d, d, rng);
    s.gcn.push_back(std::move(g));
  }
  s.initial_memory = ps.constant("memory.initial", "memory.initial", {d, 1}, 0.0);
  return s;
}

Tensor augment_nodes(const Tensor& objects, const Tensor& memory, const Tensor& weights, const Tensor& bias) {
  if (memory.rows() != objects.rows() || memory.cols() != 1)
    throw ShapeError("memory " + shape_str(memory.shape()) + " does not match objects " + shape_str(objects.shape()));
  const Tensor modulated = mul(objects, memory);
  return add(matmul(weights, concat(objects, modulated, 0)), bias);
}

ControlOutput control_signals(const Tensor& query, const Tensor& prev_controls, const Tensor& words,
                              const StepParams& p) {
  if (words.cols() == 0) throw ShapeError("control signals need at least one word");
  ControlOutput out;
  const Tensor step_query = add(matmul(p.query_weights, query), p.query_bias);
  out.gamma = softmax(p.head_logits, 0);
  const Tensor past = matmul(prev_controls, out.gamma);  // Σ_k γ_k c_{t-1,k}
  const Tensor mixed = add(matmul(p.mix_weights, concat(step_query, past, 0)), p.mix_bias);
  const Tensor modulated_words = mul(words, mixed);  // e_s ⊙ q'_t
  out.alpha = softmax(matmul(p.attention_weights, modulated_words), 1);
  out.controls = matmul(words, transpose(out.alpha));
  return out;
}

Tensor node_descriptors(const Tensor& objects, const Tensor& controls, const Tensor& weights) {
  if (controls.rows() != objects.rows()) throw ShapeError("control width differs from object width");
  // Σ_k V ⊙ c_k = V ⊙ Σ_k c_k
  const Tensor control_sum = matmul(controls, Tensor::filled({controls.cols(), 1}, 1.0));
  return softmax(matmul(weights, mul(objects, control_sum)), 1);
}

Tensor adjacency(const Tensor& descriptors) { return gram(descriptors); }

Tensor lexical_gates(const Tensor& words, const SharedParams& shared) {
  const Tensor hidden = add(matmul(shared.lexical_hidden, words), shared.lexical_hidden_bias);
  return sigmoid(add(matmul(shared.lexical_out, hidden), shared.lexical_out_bias));
}

BindingOutput language_binding(const Tensor& objects, const Tensor& step_nodes, const Tensor& words,
                               const Tensor& memory, const Tensor& gates, const StepParams& p) {
  const std::size_t n = objects.cols();
  const std::size_t s_count = words.cols();
  const std::size_t types = gates.rows();
  if (gates.cols() != s_count) throw ShapeError("lexical gates must have one column per word");
  const Tensor memory_objects = augment_nodes(objects, memory, p.bind_input_weights, p.bind_input_bias);
  const Tensor object_side = matmul(p.bind_object_weights, memory_objects);
  const Tensor word_side = matmul(p.bind_word_weights, words);
  const Tensor joint = tanh(pairwise_add(word_side, object_side));  // d×(S·N)
  const Tensor scores = matmul(p.bind_score_weights, joint);        // P×(S·N)
  Tensor beta_t;                                                     // S×N
  for (std::size_t type = 0; type < types; ++type) {
    const Tensor per_type = softmax(reshape(slice_rows(scores, type, 1), {s_count, n}), 0);
    const Tensor gated = mul(per_type, transpose(slice_rows(gates, type, 1)));
    beta_t = beta_t.defined() ? add(beta_t, gated) : gated;
  }
  BindingOutput out;
  out.nodes = concat(step_nodes, matmul(words, beta_t), 0);
  out.beta = transpose(beta_t);
  return out;
}

BindingOutput unbound_nodes(const Tensor& step_nodes, std::size_t words) {
  BindingOutput out;
  out.nodes = concat(step_nodes, Tensor::zeros(step_nodes.shape()), 0);
  out.beta = Tensor::zeros({step_nodes.cols(), words});
  return out;
}

Tensor refine(const Tensor& nodes, const Tensor& adj, const Tensor& input_weights,
              const std::vector<GcnLayer>& layers, std::size_t depth) {
  if (layers.empty()) throw ConfigError("refinement needs at least one GCN layer");
  Tensor r = matmul(input_weights, nodes);
  for (std::size_t h = 0; h < depth; ++h) {
    const GcnLayer& layer = layers[layers.size() == 1 ? 0 : h];
    const Tensor propagated = add(matmul(matmul(layer.inner, r), adj), layer.bias);
    const Tensor residual = matmul(layer.outer, elu(propagated));
    r = elu(add(r, residual));
  }
  return r;
}

ReadoutOutput readout(const Tensor& refined, const Tensor& weights) {
  ReadoutOutput out;
  out.delta = softmax(matmul(weights, refined), 1);
  out.summary = matmul(refined, transpose(out.delta));
  return out;
}

Tensor memory_update(const Tensor& memory, const Tensor& summary, const Tensor& weights, const Tensor& bias) {
  return add(matmul(weights, concat(memory, summary, 0)), bias);
}

LogState initial_state(const Tensor& query, const StepParams& first, const SharedParams& shared,
                       const ModelConfig& cfg) {
  const Tensor first_query = add(matmul(first.query_weights, query), first.query_bias);
  std::vector<Tensor> heads(static_cast<std::size_t>(cfg.effective_heads()), first_query);
  return LogState{shared.initial_memory, concat(std::span<const Tensor>(heads), 1), 1};
}

StepResult step(const StepInputs& in, const LogState& state, const StepParams& p, const SharedParams& shared,
                const ModelConfig& cfg) {
  if (state.t > cfg.steps) throw ConfigError("step index beyond configured depth");
  const Tensor step_nodes = augment_nodes(in.objects, state.memory, p.augment_weights, p.augment_bias);
  ControlOutput control = control_signals(in.query, state.controls, in.words, p);
  const Tensor descriptors = node_descriptors(in.objects, control.controls, p.descriptor_weights);
  const Tensor adj = adjacency(descriptors);
  BindingOutput bound = cfg.disable_binding
                            ? unbound_nodes(step_nodes, in.words.cols())
                            : language_binding(in.objects, step_nodes, in.words, state.memory, in.gates, p);
  const Tensor refined = refine(bound.nodes, adj, shared.refine_input, shared.gcn,
                                static_cast<std::size_t>(cfg.gcn_layers));
  ReadoutOutput pooled = readout(refined, p.readout_weights);
  StepResult result;
  result.state.memory = memory_update(state.memory, pooled.summary, p.memory_weights, p.memory_bias);
  result.state.controls = control.controls;
  result.state.t = state.t + 1;
  result.trace = StepTrace{control.alpha, control.gamma, adj, bound.beta, pooled.delta};
  return result;
}

}  // namespace lognet
