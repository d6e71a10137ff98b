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

#include <array>
#include <span>
#include <vector>

#include "lognet/params.hpp"
#include "lognet/tensor.hpp"

namespace lognet {

struct RegionFeature {
  std::vector<double> appearance;
  std::array<double, 4> box{};  // x1, y1, x2, y2 normalized to [0,1]
};

// Throws ShapeError unless x1<x2, y1<y2 and all corners lie in [0,1].
void validate_box(const std::array<double, 4>& box);

// v_i = W_enc·[a_i ; p_i] + b_enc
struct SceneFrontend {
  Tensor weights;  // d×(d_a+4)
  Tensor bias;     // d×1
  std::size_t appearance_dim = 0;
  std::size_t max_objects = 0;
  bool use_boxes = true;

  static SceneFrontend create(ParameterSet& params, std::size_t appearance_dim, std::size_t d,
                              std::size_t max_objects, bool use_boxes, Rng& rng);

  // Columns of the result follow the input order.
  Tensor encode_objects(std::span<const RegionFeature> regions) const;
};

}  // namespace lognet
