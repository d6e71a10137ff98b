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

#include "lognet/scene_frontend.hpp"

#include <string>

namespace lognet {

void validate_box(const std::array<double, 4>& box) {
  for (double v : box)
    if (!(v >= 0.0 && v <= 1.0)) throw ShapeError("box coordinate outside [0,1]");
  if (!(box[0] < box[2]) || !(box[1] < box[3])) throw ShapeError("degenerate box: need x1<x2 and y1<y2");
}

SceneFrontend SceneFrontend::create(ParameterSet& params, std::size_t appearance_dim, std::size_t d,
                                    std::size_t max_objects, bool use_boxes, Rng& rng) {
  SceneFrontend f;
  f.weights = params.linear("frontend.weights", "frontend", d, appearance_dim + 4, rng);
  f.bias = params.bias("frontend.bias", "frontend", d, appearance_dim + 4, rng);
  f.appearance_dim = appearance_dim;
  f.max_objects = max_objects;
  f.use_boxes = use_boxes;
  return f;
}

Tensor SceneFrontend::encode_objects(std::span<const RegionFeature> regions) const {
  const std::size_t n = regions.size();
  if (n < 2 || n > max_objects)
    throw ShapeError("object count " + std::to_string(n) + " outside [2, " + std::to_string(max_objects) + "]");
  const std::size_t width = appearance_dim + 4;
  // Stacked inputs, one column per region.
  std::vector<double> stacked(width * n);
  for (std::size_t i = 0; i < n; ++i) {
    const RegionFeature& r = regions[i];
    if (r.appearance.size() != appearance_dim)
      throw ShapeError("appearance vector has " + std::to_string(r.appearance.size()) + " entries, expected " +
                       std::to_string(appearance_dim));
    validate_box(r.box);
    for (std::size_t j = 0; j < appearance_dim; ++j) stacked[j * n + i] = r.appearance[j];
    for (std::size_t j = 0; j < 4; ++j) stacked[(appearance_dim + j) * n + i] = use_boxes ? r.box[j] : 0.0;
  }
  return add(matmul(weights, Tensor::matrix(width, n, std::move(stacked))), bias);
}

}  // namespace lognet
