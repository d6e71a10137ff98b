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


#include "lognet/trace.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace lognet {

namespace {

nlohmann::ordered_json matrix_json(const Tensor& t) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

void check_labels(const StepTrace& trace, const TraceLabels& labels) {
  if (labels.objects.size() != trace.adjacency.rows() || labels.words.size() != trace.beta.cols())
    throw ShapeError("trace labels do not match trace shapes");
}

}  // namespace

nlohmann::ordered_json trace_to_json(const StepTrace& trace, int step, const TraceLabels& labels) {
  check_labels(trace, labels);
  nlohmann::ordered_json j;
  j["step"] = step;
  j["objects"] = labels.objects;
  j["words"] = labels.words;
  j["adjacency"] = matrix_json(trace.adjacency);
  j["beta"] = matrix_json(trace.beta);
  j["alpha"] = matrix_json(trace.alpha);
  std::vector<double> gamma(trace.gamma.values().begin(), trace.gamma.values().end());
  std::vector<double> delta(trace.delta.values().begin(), trace.delta.values().end());
  j["gamma"] = gamma;
  j["delta"] = delta;
  j["beta_sharpness"] = beta_sharpness(trace.beta);
  return j;
}

std::string trace_to_dot(const StepTrace& trace, int step, const TraceLabels& labels, double threshold) {
  check_labels(trace, labels);
  const std::size_t n = trace.adjacency.rows();
  const std::size_t s = trace.beta.cols();
  std::ostringstream os;
  os << std::setprecision(4);
  os << "graph step" << step << " {\n";
  os << "  label=\"step " << step << "\";\n";
  os << "  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < n; ++i)
    os << "  o" << i << " [shape=box, label=" << quoted(labels.objects[i])
       << ", xlabel=\"" << trace.delta.values()[i] << "\"];\n";
  for (std::size_t w = 0; w < s; ++w) os << "  w" << w << " [shape=ellipse, label=" << quoted(labels.words[w]) << "];\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      const double a = trace.adjacency.at(i, k);
      if (a >= threshold)
        os << "  o" << i << " -- o" << k << " [color=red, penwidth=" << 1.0 + 4.0 * a << ", label=\"" << a
           << "\"];\n";
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t w = 0; w < s; ++w) {
      const double b = trace.beta.at(i, w);
      if (b >= threshold)
        os << "  o" << i << " -- w" << w << " [color=cyan, penwidth=" << 1.0 + 4.0 * b << ", label=\"" << b
           << "\"];\n";
    }
  os << "}\n";
  return os.str();
}

double beta_sharpness(const Tensor& beta) {
  if (beta.rows() == 0 || beta.cols() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < beta.rows(); ++i) {
    double best = beta.at(i, 0);
    for (std::size_t w = 1; w < beta.cols(); ++w) best = std::max(best, beta.at(i, w));
    total += best;
  }
  return total / static_cast<double>(beta.rows());
}

}  // namespace lognet
