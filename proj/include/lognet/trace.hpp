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

// Per-step trace export: JSON carries every matrix in full, DOT draws the
// object graph (red) and word-object binding (cyan) above a weight threshold.

#include <string>
#include <vector>

#include <json.hpp>

#include "lognet/log_unit.hpp"

namespace lognet {

struct TraceLabels {
  std::vector<std::string> words;    // S entries
  std::vector<std::string> objects;  // N entries
};

nlohmann::ordered_json trace_to_json(const StepTrace& trace, int step, const TraceLabels& labels);
std::string trace_to_dot(const StepTrace& trace, int step, const TraceLabels& labels, double threshold = 0.05);

// Mean over objects of max_s β_{i,s}.
double beta_sharpness(const Tensor& beta);

}  // namespace lognet
