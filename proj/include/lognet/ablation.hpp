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

// Toy-scale ablation grid and data-efficiency sweep with ordering verdicts.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lognet/training.hpp"

namespace lognet {

struct AblationVariant {
  std::string label;
  ModelConfig model;
  double train_fraction = 1.0;
};

struct AblationRun {
  std::string label;
  std::uint64_t seed = 0;
  int epochs = 0;
  double train_fraction = 1.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
  std::string manifest;  // path of the RunManifest behind this row
};

struct AblationSummary {
  std::string label;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
  std::size_t n = 0;
};

struct TrendVerdict {
  std::string name;
  std::string detail;
  bool pass = false;
  bool required = true;  // informational verdicts do not gate the report
};

struct AblationReport {
  std::vector<AblationRun> runs;
  std::vector<AblationSummary> summaries;
  std::vector<TrendVerdict> verdicts;
  bool complete = true;
  std::string error;
  bool pass = false;
};

struct AblationOptions {
  ModelConfig base;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<int> steps{1, 4, 8, 12};
  std::vector<double> fractions{0.1, 0.25, 0.5, 1.0};
  bool variants = true;    // single-head and no-binding rows
  bool data_sweep = true;
  std::filesystem::path out_dir;  // per-run manifests land in out_dir/runs
  std::string data_dir;           // recorded in manifests for replay
  std::function<void(const AblationRun&)> on_run;
};

// Configuration grid in report order; rows with identical config and
// fraction share one training run per seed.
std::vector<AblationVariant> ablation_variants(const AblationOptions& options);

AblationReport run_ablations(const AblationOptions& options, const Vocabulary& vocab,
                             std::span<const EncodedSample> train_data, std::span<const EncodedSample> val_data);

// Summaries and verdicts from the raw runs; exposed for tests.
void summarize(AblationReport& report, const AblationOptions& options);

std::string to_markdown(const AblationReport& report);
void write_csv(const std::filesystem::path& path, const AblationReport& report);

}  // namespace lognet
