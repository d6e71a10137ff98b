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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lognet/config.hpp"
#include "lognet/model.hpp"

namespace lognet {

struct MetricRow {
  int epoch = 0;
  std::string split;  // "train" or "val"
  std::string type;   // question family or "all"
  double accuracy = 0.0;
  double loss = 0.0;
};

struct AdamState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::int64_t step = 0;
};

class Adam {
 public:
  explicit Adam(const TrainConfig& cfg) : cfg_(cfg) {}

  // Clips the global gradient norm to cfg.clip_norm, then applies one update.
  // Returns the pre-clip norm.
  double step(ParameterSet& params);

  AdamState& state() { return state_; }
  const AdamState& state() const { return state_; }

 private:
  TrainConfig cfg_;
  AdamState state_;
};

// Snapshot of a training run. The binary layout is:
//   "LOGK" | u32 version | u64 n + n bytes canonical JSON |
//   per parameter (declaration order): u64 count + count f64 |
//   running mean, running var, Adam first moments, Adam second moments
//   (same length-prefixed f64 encoding); all integers and floats little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  ModelConfig model;
  TrainConfig train;
  std::vector<std::string> vocabulary;
  std::vector<std::string> answers;
  std::vector<std::string> parameter_names;
  std::vector<std::vector<double>> parameters;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  AdamState adam;
  std::string rng_state;
  int epoch = 0;
  double best_val_accuracy = -1.0;
  std::vector<MetricRow> metrics;
};

Checkpoint capture(const Model& model);
void restore(Model& model, const Checkpoint& ckpt);
Model model_from_checkpoint(const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows);

struct EvalReport {
  double accuracy = 0.0;
  double loss = 0.0;
  std::size_t count = 0;
  std::map<std::string, double> type_accuracy;
  std::map<std::string, std::size_t> type_count;
};

// Eval-mode pass over `data`; with workers > 1 the data is sharded over
// model replicas and the counts merged.
EvalReport evaluate(Model& model, std::span<const EncodedSample> data, int workers = 1, std::size_t batch_size = 64);

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochSummary {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  EvalReport val;
  double seconds = 0.0;
};

struct TrainOptions {
  std::function<void(const EpochSummary&)> on_epoch;
  const Checkpoint* resume = nullptr;
  // Stop after this many optimizer steps (0 = no limit).
  std::int64_t max_steps = 0;
  // Skip validation (used by overfit checks).
  bool validate = true;
};

struct TrainResult {
  Checkpoint best;  // highest validation accuracy
  Checkpoint last;
  std::vector<double> batch_losses;
  std::vector<MetricRow> metrics;
};

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& train_cfg, const Vocabulary& vocab,
                  std::span<const EncodedSample> train_data, std::span<const EncodedSample> val_data,
                  const TrainOptions& options = {});

// ---- gradient checking -----------------------------------------------------

struct GroupReport {
  std::string group;
  std::size_t elements = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool pass = true;
};

struct GradcheckReport {
  std::vector<GroupReport> groups;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool pass = true;
  double seconds = 0.0;
};

struct GradcheckOptions {
  ModelConfig config = ModelConfig::gradcheck_tiny();
  double step = 1e-5;
  double tolerance = 1e-4;
  // Differences below this are treated as exact agreement.
  double abs_floor = 1e-7;
  std::size_t batch = 4;
  std::size_t objects = 3;
  std::size_t words = 4;
  std::uint64_t seed = 7;
  // Test fixture: perturbs analytic gradients of this group by 1%.
  std::optional<std::string> corrupt_group;
};

// Central finite differences over every parameter element, grouped.
GradcheckReport gradcheck(const GradcheckOptions& options = {});

// Relative error used by the checker: 0 when |a-n| <= floor, else
// |a-n| / max(|a|, |n|).
double gradient_error(double analytic, double numeric, double abs_floor);

}  // namespace lognet
