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

// Synthetic CLEVR-style scenes, templated questions and a symbolic oracle.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lognet/params.hpp"
#include "lognet/scene_frontend.hpp"
#include "lognet/text_encoder.hpp"

namespace lognet::toy {

inline constexpr std::array<std::string_view, 8> kColors{"gray",  "red",    "blue", "green",
                                                         "brown", "purple", "cyan", "yellow"};
inline constexpr std::array<std::string_view, 3> kShapes{"cube", "sphere", "cylinder"};
inline constexpr std::array<std::string_view, 3> kShapePlurals{"cubes", "spheres", "cylinders"};
inline constexpr std::array<std::string_view, 2> kSizes{"small", "large"};
inline constexpr std::array<std::string_view, 2> kMaterials{"rubber", "metal"};

enum class Attribute { kColor = 0, kShape = 1, kSize = 2, kMaterial = 3 };
inline constexpr std::array<Attribute, 4> kAttributes{Attribute::kColor, Attribute::kShape, Attribute::kSize,
                                                      Attribute::kMaterial};
std::string_view attribute_name(Attribute a);
std::string_view attribute_value(Attribute a, int value);
int attribute_cardinality(Attribute a);

struct ObjectSpec {
  std::array<int, 4> attrs{};  // indexed by Attribute
  std::array<double, 4> box{};

  int attr(Attribute a) const { return attrs[static_cast<std::size_t>(a)]; }
  double center_x() const { return 0.5 * (box[0] + box[2]); }
};

struct SceneSpec {
  std::vector<ObjectSpec> objects;
  std::uint64_t seed = 0;
};

enum class Family { kQuery = 0, kExist = 1, kCount = 2, kCompare = 3, kSpatial = 4 };
inline constexpr std::array<Family, 5> kFamilies{Family::kQuery, Family::kExist, Family::kCount, Family::kCompare,
                                                 Family::kSpatial};
std::string_view family_name(Family f);
Family family_from_name(std::string_view name);
bool is_binary(Family f);
// Answers a family can produce, in answer-space order.
std::vector<std::string> family_answers(Family f);

// Attribute constraints; -1 leaves an attribute unconstrained.
struct Description {
  std::array<int, 4> attrs{-1, -1, -1, -1};

  bool matches(const ObjectSpec& o) const;
  std::vector<std::string> words() const;  // e.g. {"small", "red", "cube"}
};

struct QuestionSpec {
  Family family = Family::kQuery;
  std::vector<std::string> tokens;
  std::string answer;
};

struct GeneratorConfig {
  int min_objects = 4;
  int max_objects = 10;
  int max_question_len = 16;
  std::vector<Family> families{kFamilies.begin(), kFamilies.end()};
  int max_attempts = 2000;
};

struct SceneStats {
  std::size_t draws = 0;       // object draws
  std::size_t rejections = 0;  // draws discarded for sitting too close in x to another object
};

SceneSpec generate_scene(Rng& rng, const GeneratorConfig& cfg, SceneStats* stats = nullptr);

// Throws std::invalid_argument when the scene breaks an invariant.
void validate_scene(const SceneSpec& scene, const GeneratorConfig& cfg);

// Tries to build a `family` question on `scene`, optionally with a required
// answer. Returns nullopt when the template has no valid instance.
std::optional<QuestionSpec> generate_question(const SceneSpec& scene, Family family,
                                              const std::optional<std::string>& target, Rng& rng,
                                              int max_question_len = 16);

// Draws families uniformly until one applies.
QuestionSpec generate_question(const SceneSpec& scene, Rng& rng, const GeneratorConfig& cfg = {});

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluates the question program recovered from its tokens.
std::string oracle(const SceneSpec& scene, std::span<const std::string> tokens);

struct Sample {
  SceneSpec scene;
  std::vector<std::string> tokens;
  std::string text;
  std::string answer;
  Family family = Family::kQuery;
};

// Balanced sample: family uniform, then answer uniform within the family.
Sample generate_sample(std::uint64_t seed, const GeneratorConfig& cfg);

enum class Split { kTrain = 0, kVal = 1, kTest = 2 };
std::vector<Sample> generate_split(std::uint64_t seed, Split split, std::size_t count, const GeneratorConfig& cfg);

nlohmann::ordered_json to_json(const Sample& s);
Sample sample_from_json(const nlohmann::json& j);
void write_jsonl(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> read_jsonl(const std::filesystem::path& path);

// Fixed answer vocabulary.
const std::vector<std::string>& answer_space();
int answer_index(std::string_view answer);  // throws on unknown answers

// All template words, in a fixed order.
Vocabulary build_vocabulary();

// Appearance = one-hot(color, shape, size, material), padded with zeros to
// `appearance_dim`, plus N(0, 0.05) noise seeded from the scene seed.
std::vector<RegionFeature> region_features(const SceneSpec& scene, std::size_t appearance_dim);

struct DatasetAudit {
  std::size_t total = 0;
  std::map<std::string, std::size_t> answer_counts;
  std::map<std::string, std::size_t> family_counts;
  std::map<std::string, std::map<std::string, std::size_t>> family_answer_counts;
  std::string majority_answer;
  double majority_baseline = 0.0;
  // Largest |share - 1/k| over each family's k answers.
  std::map<std::string, double> family_uniformity_gap;
  std::map<std::string, double> family_chance;
};

DatasetAudit audit(std::span<const Sample> samples);
nlohmann::ordered_json to_json(const DatasetAudit& a);

}  // namespace lognet::toy
