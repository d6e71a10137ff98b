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

#include "lognet/toy_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace lognet::toy {

std::string_view attribute_name(Attribute a) {
  switch (a) {
    case Attribute::kColor: return "color";
    case Attribute::kShape: return "shape";
    case Attribute::kSize: return "size";
    case Attribute::kMaterial: return "material";
  }
  return "";
}

std::string_view attribute_value(Attribute a, int v) {
  const auto i = static_cast<std::size_t>(v);
  switch (a) {
    case Attribute::kColor: return kColors.at(i);
    case Attribute::kShape: return kShapes.at(i);
    case Attribute::kSize: return kSizes.at(i);
    case Attribute::kMaterial: return kMaterials.at(i);
  }
  return "";
}

int attribute_cardinality(Attribute a) {
  switch (a) {
    case Attribute::kColor: return static_cast<int>(kColors.size());
    case Attribute::kShape: return static_cast<int>(kShapes.size());
    case Attribute::kSize: return static_cast<int>(kSizes.size());
    case Attribute::kMaterial: return static_cast<int>(kMaterials.size());
  }
  return 0;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kQuery: return "query";
    case Family::kExist: return "exist";
    case Family::kCount: return "count";
    case Family::kCompare: return "compare";
    case Family::kSpatial: return "spatial";
  }
  return "";
}

Family family_from_name(std::string_view name) {
  for (Family f : kFamilies)
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown question type '" + std::string(name) + "'");
}

bool is_binary(Family f) { return f == Family::kExist || f == Family::kCompare; }

namespace {

constexpr int kMaxCount = 3;

std::vector<std::string> to_strings(std::span<const std::string_view> v) { return {v.begin(), v.end()}; }

}  // namespace

std::vector<std::string> family_answers(Family f) {
  switch (f) {
    case Family::kQuery: return to_strings(kColors);
    case Family::kExist:
    case Family::kCompare: return {"yes", "no"};
    case Family::kCount: {
      std::vector<std::string> out;
      for (int c = 0; c <= kMaxCount; ++c) out.push_back(std::to_string(c));
      return out;
    }
    case Family::kSpatial: return to_strings(kShapes);
  }
  return {};
}

const std::vector<std::string>& answer_space() {
  static const std::vector<std::string> space = [] {
    std::vector<std::string> s{"yes", "no"};
    for (int c = 0; c <= kMaxCount; ++c) s.push_back(std::to_string(c));
    for (auto c : kColors) s.emplace_back(c);
    for (auto c : kShapes) s.emplace_back(c);
    return s;
  }();
  return space;
}

int answer_index(std::string_view answer) {
  const auto& s = answer_space();
  auto it = std::find(s.begin(), s.end(), answer);
  if (it == s.end()) throw std::invalid_argument("answer '" + std::string(answer) + "' outside the answer space");
  return static_cast<int>(it - s.begin());
}

bool Description::matches(const ObjectSpec& o) const {
  for (std::size_t a = 0; a < 4; ++a)
    if (attrs[a] >= 0 && attrs[a] != o.attrs[a]) return false;
  return true;
}

std::vector<std::string> Description::words() const {
  std::vector<std::string> w;
  const auto push = [&](Attribute a) {
    const int v = attrs[static_cast<std::size_t>(a)];
    if (v >= 0) w.emplace_back(attribute_value(a, v));
  };
  push(Attribute::kSize);
  push(Attribute::kColor);
  push(Attribute::kMaterial);
  if (attrs[static_cast<std::size_t>(Attribute::kShape)] >= 0) push(Attribute::kShape);
  else w.emplace_back("object");
  return w;
}

// ---- scenes ----------------------------------------------------------------

SceneSpec generate_scene(Rng& rng, const GeneratorConfig& cfg, SceneStats* stats) {
  if (cfg.min_objects < 2 || cfg.max_objects < cfg.min_objects)
    throw std::invalid_argument("object range must satisfy 2 <= min <= max");
  SceneSpec scene;
  const int n = cfg.min_objects + rng.below(cfg.max_objects - cfg.min_objects + 1);
  constexpr double kMinSeparation = 0.005;
  constexpr int kCombos = 8 * 3 * 2 * 2;
  if (cfg.max_objects > kCombos) throw std::invalid_argument("more objects than distinct attribute combinations");
  std::array<bool, kCombos> used{};
  while (static_cast<int>(scene.objects.size()) < n) {
    // uniform over combinations not yet in the scene
    int pick = rng.below(kCombos - static_cast<int>(scene.objects.size()));
    int combo = 0;
    for (;; ++combo)
      if (!used[static_cast<std::size_t>(combo)] && pick-- == 0) break;
    ObjectSpec o;
    for (int a = 0, rest = combo; a < 4; ++a) {
      const int k = attribute_cardinality(static_cast<Attribute>(a));
      o.attrs[static_cast<std::size_t>(a)] = rest % k;
      rest /= k;
    }
    const double half = o.attr(Attribute::kSize) == 1 ? rng.uniform(0.07, 0.10) : rng.uniform(0.04, 0.06);
    const double cx = rng.uniform(half, 1.0 - half);
    const double cy = rng.uniform(half, 1.0 - half);
    o.box = {cx - half, cy - half, cx + half, cy + half};
    if (stats) ++stats->draws;
    const bool clash = std::any_of(scene.objects.begin(), scene.objects.end(), [&](const ObjectSpec& p) {
      return std::abs(p.center_x() - o.center_x()) < kMinSeparation;
    });
    if (clash) {
      if (stats) ++stats->rejections;
      continue;
    }
    used[static_cast<std::size_t>(combo)] = true;
    scene.objects.push_back(o);
  }
  return scene;
}

void validate_scene(const SceneSpec& scene, const GeneratorConfig& cfg) {
  const int n = static_cast<int>(scene.objects.size());
  if (n < 2 || n < cfg.min_objects || n > cfg.max_objects) throw std::invalid_argument("object count out of range");
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const ObjectSpec& o = scene.objects[i];
    for (Attribute a : kAttributes)
      if (o.attr(a) < 0 || o.attr(a) >= attribute_cardinality(a)) throw std::invalid_argument("attribute out of range");
    validate_box(o.box);
    for (std::size_t j = i + 1; j < scene.objects.size(); ++j)
      if (scene.objects[j].attrs == o.attrs) throw std::invalid_argument("two objects share all attributes");
  }
}

// ---- questions -------------------------------------------------------------

namespace {

std::vector<std::size_t> matching(const SceneSpec& scene, const Description& d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    if (d.matches(scene.objects[i])) out.push_back(i);
  return out;
}

// Smallest attribute subset (drawn from `allowed`) that singles out object
// `idx`; ties broken at random.
std::optional<Description> unique_description(const SceneSpec& scene, std::size_t idx,
                                              const std::vector<Attribute>& allowed, Rng& rng) {
  const std::size_t m = allowed.size();
  for (std::size_t size = 1; size <= m; ++size) {
    std::vector<Description> found;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
      Description d;
      for (std::size_t b = 0; b < m; ++b)
        if (mask & (1u << b)) {
          const auto a = static_cast<std::size_t>(allowed[b]);
          d.attrs[a] = scene.objects[idx].attrs[a];
        }
      if (matching(scene, d).size() == 1) found.push_back(d);
    }
    if (!found.empty()) return found[static_cast<std::size_t>(rng.below(static_cast<int>(found.size())))];
  }
  return std::nullopt;
}

std::vector<Attribute> attributes_except(Attribute excluded) {
  std::vector<Attribute> out;
  for (Attribute a : kAttributes)
    if (a != excluded) out.push_back(a);
  return out;
}

void append(std::vector<std::string>& dst, std::initializer_list<std::string_view> words) {
  for (auto w : words) dst.emplace_back(w);
}

void append(std::vector<std::string>& dst, const std::vector<std::string>& words) {
  dst.insert(dst.end(), words.begin(), words.end());
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(rng.below(static_cast<int>(i)))]);
}

std::vector<std::size_t> indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::optional<QuestionSpec> query_question(const SceneSpec& scene, const std::optional<std::string>& target, Rng& rng) {
  auto order = indices(scene.objects.size());
  shuffle(order, rng);
  for (std::size_t idx : order) {
    const std::string answer(attribute_value(Attribute::kColor, scene.objects[idx].attr(Attribute::kColor)));
    if (target && *target != answer) continue;
    auto desc = unique_description(scene, idx, attributes_except(Attribute::kColor), rng);
    if (!desc) continue;
    QuestionSpec q{Family::kQuery, {}, answer};
    append(q.tokens, {"what", "color", "is", "the"});
    append(q.tokens, desc->words());
    q.tokens.emplace_back("?");
    return q;
  }
  return std::nullopt;
}

std::optional<QuestionSpec> exist_question(const SceneSpec& scene, const std::optional<std::string>& target, Rng& rng) {
  const bool want_yes = target ? *target == "yes" : rng.below(2) == 0;
  const bool with_size = rng.below(2) == 0;
  Description d;
  if (want_yes) {
    const ObjectSpec& o = scene.objects[static_cast<std::size_t>(rng.below(static_cast<int>(scene.objects.size())))];
    d.attrs[0] = o.attr(Attribute::kColor);
    d.attrs[1] = o.attr(Attribute::kShape);
    if (with_size) d.attrs[2] = o.attr(Attribute::kSize);
  } else {
    bool found = false;
    for (int tries = 0; tries < 64 && !found; ++tries) {
      d = Description{};
      d.attrs[0] = rng.below(attribute_cardinality(Attribute::kColor));
      d.attrs[1] = rng.below(attribute_cardinality(Attribute::kShape));
      if (with_size) d.attrs[2] = rng.below(attribute_cardinality(Attribute::kSize));
      found = matching(scene, d).empty();
    }
    if (!found) return std::nullopt;
  }
  QuestionSpec q{Family::kExist, {}, want_yes ? "yes" : "no"};
  append(q.tokens, {"is", "there", "a"});
  append(q.tokens, d.words());
  q.tokens.emplace_back("?");
  return q;
}

std::optional<QuestionSpec> count_question(const SceneSpec& scene, const std::optional<std::string>& target, Rng& rng) {
  std::vector<std::pair<Attribute, int>> options;
  for (Attribute a : {Attribute::kColor, Attribute::kShape})
    for (int v = 0; v < attribute_cardinality(a); ++v) options.emplace_back(a, v);
  shuffle(options, rng);
  for (auto [a, v] : options) {
    Description d;
    d.attrs[static_cast<std::size_t>(a)] = v;
    const auto n = matching(scene, d).size();
    if (n > static_cast<std::size_t>(kMaxCount)) continue;
    const std::string answer = std::to_string(n);
    if (target && *target != answer) continue;
    QuestionSpec q{Family::kCount, {}, answer};
    append(q.tokens, {"how", "many"});
    if (a == Attribute::kColor) append(q.tokens, {attribute_value(a, v), "things"});
    else append(q.tokens, {kShapePlurals[static_cast<std::size_t>(v)]});
    append(q.tokens, {"are", "there", "?"});
    return q;
  }
  return std::nullopt;
}

std::optional<QuestionSpec> compare_question(const SceneSpec& scene, const std::optional<std::string>& target,
                                             Rng& rng) {
  const bool want_yes = target ? *target == "yes" : rng.below(2) == 0;
  std::vector<Attribute> attrs(kAttributes.begin(), kAttributes.end());
  shuffle(attrs, rng);
  for (Attribute a : attrs) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
      for (std::size_t j = 0; j < scene.objects.size(); ++j)
        if (i != j && (scene.objects[i].attr(a) == scene.objects[j].attr(a)) == want_yes) pairs.emplace_back(i, j);
    shuffle(pairs, rng);
    for (auto [i, j] : pairs) {
      auto di = unique_description(scene, i, attributes_except(a), rng);
      auto dj = unique_description(scene, j, attributes_except(a), rng);
      if (!di || !dj) continue;
      QuestionSpec q{Family::kCompare, {}, want_yes ? "yes" : "no"};
      append(q.tokens, {"is", "the", attribute_name(a), "of", "the"});
      append(q.tokens, di->words());
      append(q.tokens, {"the", "same", "as", "the"});
      append(q.tokens, dj->words());
      q.tokens.emplace_back("?");
      return q;
    }
  }
  return std::nullopt;
}

// The referent must have exactly one object strictly to its left, so only
// the second-leftmost object qualifies.
std::optional<std::size_t> second_leftmost(const SceneSpec& scene) {
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    std::size_t left = 0;
    for (const auto& o : scene.objects) left += o.center_x() < scene.objects[i].center_x() ? 1 : 0;
    if (left == 1) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> only_left_of(const SceneSpec& scene, std::size_t ref) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    if (scene.objects[i].center_x() < scene.objects[ref].center_x()) {
      if (found) return std::nullopt;
      found = i;
    }
  return found;
}

std::optional<QuestionSpec> spatial_question(const SceneSpec& scene, const std::optional<std::string>& target,
                                             Rng& rng) {
  const auto ref = second_leftmost(scene);
  if (!ref) return std::nullopt;
  const auto left = only_left_of(scene, *ref);
  if (!left) return std::nullopt;
  const std::string answer(attribute_value(Attribute::kShape, scene.objects[*left].attr(Attribute::kShape)));
  if (target && *target != answer) return std::nullopt;
  std::vector<Attribute> all(kAttributes.begin(), kAttributes.end());
  auto desc = unique_description(scene, *ref, all, rng);
  if (!desc) return std::nullopt;
  QuestionSpec q{Family::kSpatial, {}, answer};
  append(q.tokens, {"what", "is", "the", "shape", "of", "the", "object", "left", "of", "the"});
  append(q.tokens, desc->words());
  q.tokens.emplace_back("?");
  return q;
}

}  // namespace

std::optional<QuestionSpec> generate_question(const SceneSpec& scene, Family family,
                                              const std::optional<std::string>& target, Rng& rng,
                                              int max_question_len) {
  std::optional<QuestionSpec> q;
  switch (family) {
    case Family::kQuery: q = query_question(scene, target, rng); break;
    case Family::kExist: q = exist_question(scene, target, rng); break;
    case Family::kCount: q = count_question(scene, target, rng); break;
    case Family::kCompare: q = compare_question(scene, target, rng); break;
    case Family::kSpatial: q = spatial_question(scene, target, rng); break;
  }
  if (q && static_cast<int>(q->tokens.size()) > max_question_len) return std::nullopt;
  return q;
}

QuestionSpec generate_question(const SceneSpec& scene, Rng& rng, const GeneratorConfig& cfg) {
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const Family f = cfg.families[static_cast<std::size_t>(rng.below(static_cast<int>(cfg.families.size())))];
    if (auto q = generate_question(scene, f, std::nullopt, rng, cfg.max_question_len)) return *q;
  }
  throw std::runtime_error("no template applies to this scene");
}

// ---- oracle ----------------------------------------------------------------

namespace {

Description parse_description(std::span<const std::string> words) {
  if (words.empty()) throw OracleError("empty object description");
  Description d;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const bool last = w + 1 == words.size();
    if (last && words[w] == "object") continue;
    bool ok = false;
    for (Attribute a : kAttributes)
      for (int v = 0; v < attribute_cardinality(a) && !ok; ++v)
        if (attribute_value(a, v) == words[w]) {
          if (a == Attribute::kShape && !last) throw OracleError("shape word must end a description");
          d.attrs[static_cast<std::size_t>(a)] = v;
          ok = true;
        }
    if (!ok) throw OracleError("unknown description word '" + words[w] + "'");
  }
  return d;
}

const ObjectSpec& resolve_unique(const SceneSpec& scene, const Description& d) {
  const auto m = matching(scene, d);
  if (m.size() != 1) throw OracleError("description matches " + std::to_string(m.size()) + " objects");
  return scene.objects[m.front()];
}

bool starts_with(std::span<const std::string> tokens, std::initializer_list<std::string_view> prefix) {
  if (tokens.size() < prefix.size()) return false;
  std::size_t i = 0;
  for (auto p : prefix)
    if (tokens[i++] != p) return false;
  return true;
}

std::ptrdiff_t find_seq(std::span<const std::string> tokens, std::initializer_list<std::string_view> seq,
                        std::size_t from) {
  for (std::size_t i = from; i + seq.size() <= tokens.size(); ++i)
    if (starts_with(tokens.subspan(i), seq)) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

}  // namespace

std::string oracle(const SceneSpec& scene, std::span<const std::string> tokens) {
  if (tokens.size() < 3 || tokens.back() != "?") throw OracleError("question must end with '?'");
  const auto body = tokens.first(tokens.size() - 1);
  if (starts_with(body, {"what", "color", "is", "the"})) {
    const auto& o = resolve_unique(scene, parse_description(body.subspan(4)));
    return std::string(attribute_value(Attribute::kColor, o.attr(Attribute::kColor)));
  }
  if (starts_with(body, {"is", "there", "a"})) {
    return matching(scene, parse_description(body.subspan(3))).empty() ? "no" : "yes";
  }
  if (starts_with(body, {"how", "many"})) {
    Description d;
    if (body.size() == 5 && body[3] == "are" && body[4] == "there") {
      for (int v = 0; v < static_cast<int>(kShapePlurals.size()); ++v)
        if (kShapePlurals[static_cast<std::size_t>(v)] == body[2]) d.attrs[1] = v;
      if (d.attrs[1] < 0) throw OracleError("unknown plural '" + body[2] + "'");
    } else if (body.size() == 6 && body[3] == "things") {
      d = parse_description(body.subspan(2, 1));
    } else {
      throw OracleError("malformed counting question");
    }
    return std::to_string(matching(scene, d).size());
  }
  if (starts_with(body, {"what", "is", "the", "shape", "of", "the", "object", "left", "of", "the"})) {
    const auto& ref = resolve_unique(scene, parse_description(body.subspan(10)));
    const ObjectSpec* left = nullptr;
    for (const auto& o : scene.objects)
      if (o.center_x() < ref.center_x()) {
        if (left) throw OracleError("more than one object left of the referent");
        left = &o;
      }
    if (!left) throw OracleError("nothing left of the referent");
    return std::string(attribute_value(Attribute::kShape, left->attr(Attribute::kShape)));
  }
  if (starts_with(body, {"is", "the"}) && body.size() > 4 && body[3] == "of" && body[4] == "the") {
    Attribute attr = Attribute::kColor;
    bool ok = false;
    for (Attribute a : kAttributes)
      if (attribute_name(a) == body[2]) {
        attr = a;
        ok = true;
      }
    if (!ok) throw OracleError("unknown attribute '" + body[2] + "'");
    const auto mid = find_seq(body, {"the", "same", "as", "the"}, 5);
    if (mid < 0) throw OracleError("malformed comparison");
    const auto m = static_cast<std::size_t>(mid);
    const auto& a = resolve_unique(scene, parse_description(body.subspan(5, m - 5)));
    const auto& b = resolve_unique(scene, parse_description(body.subspan(m + 4)));
    return a.attr(attr) == b.attr(attr) ? "yes" : "no";
  }
  throw OracleError("question matches no template");
}

// ---- samples ---------------------------------------------------------------

namespace {

std::string join_text(const std::vector<std::string>& tokens) {
  std::string text;
  for (const auto& t : tokens) {
    if (!text.empty() && t != "?") text += ' ';
    text += t;
  }
  return text;
}

}  // namespace

Sample generate_sample(std::uint64_t seed, const GeneratorConfig& cfg) {
  if (cfg.families.empty()) throw std::invalid_argument("no question families enabled");
  Rng rng(seed);
  const Family family = cfg.families[static_cast<std::size_t>(rng.below(static_cast<int>(cfg.families.size())))];
  const auto answers = family_answers(family);
  const std::string target = answers[static_cast<std::size_t>(rng.below(static_cast<int>(answers.size())))];
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    SceneSpec scene = generate_scene(rng, cfg);
    scene.seed = mix_seed(seed, static_cast<std::uint64_t>(attempt));
    auto q = generate_question(scene, family, target, rng, cfg.max_question_len);
    if (!q) continue;
    Sample s;
    s.scene = std::move(scene);
    s.tokens = std::move(q->tokens);
    s.text = join_text(s.tokens);
    s.answer = std::move(q->answer);
    s.family = family;
    if (oracle(s.scene, s.tokens) != s.answer) throw OracleError("generator and oracle disagree: " + s.text);
    return s;
  }
  throw std::runtime_error("could not realize a '" + std::string(family_name(family)) + "' question with answer '" +
                           target + "'");
}

std::vector<Sample> generate_split(std::uint64_t seed, Split split, std::size_t count, const GeneratorConfig& cfg) {
  const std::uint64_t split_seed = mix_seed(seed, static_cast<std::uint64_t>(split) + 1);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_sample(mix_seed(split_seed, i), cfg));
  return out;
}

nlohmann::ordered_json to_json(const Sample& s) {
  nlohmann::ordered_json objects = nlohmann::ordered_json::array();
  for (const auto& o : s.scene.objects) {
    nlohmann::ordered_json obj;
    for (Attribute a : kAttributes) obj[std::string(attribute_name(a))] = std::string(attribute_value(a, o.attr(a)));
    obj["box"] = o.box;
    objects.push_back(std::move(obj));
  }
  nlohmann::ordered_json j;
  j["scene"] = nlohmann::ordered_json{{"seed", s.scene.seed}, {"objects", std::move(objects)}};
  j["question_tokens"] = s.tokens;
  j["question_text"] = s.text;
  j["answer"] = s.answer;
  j["type"] = std::string(family_name(s.family));
  return j;
}

Sample sample_from_json(const nlohmann::json& j) {
  Sample s;
  const auto& scene = j.at("scene");
  s.scene.seed = scene.value("seed", std::uint64_t{0});
  for (const auto& obj : scene.at("objects")) {
    ObjectSpec o;
    for (Attribute a : kAttributes) {
      const auto word = obj.at(std::string(attribute_name(a))).get<std::string>();
      int found = -1;
      for (int v = 0; v < attribute_cardinality(a); ++v)
        if (attribute_value(a, v) == word) found = v;
      if (found < 0) throw std::invalid_argument("unknown " + std::string(attribute_name(a)) + " '" + word + "'");
      o.attrs[static_cast<std::size_t>(a)] = found;
    }
    o.box = obj.at("box").get<std::array<double, 4>>();
    s.scene.objects.push_back(o);
  }
  s.tokens = j.at("question_tokens").get<std::vector<std::string>>();
  s.text = j.at("question_text").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.family = family_from_name(j.at("type").get<std::string>());
  return s;
}

void write_jsonl(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  for (const auto& s : samples) os << to_json(s).dump() << '\n';
  if (!os) throw IoError("write failed for " + path.string());
}

std::vector<Sample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  std::vector<Sample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Vocabulary build_vocabulary() {
  Vocabulary v;
  for (auto w : {"what", "color", "is", "the", "there", "a", "how", "many", "things", "are", "of", "same", "as",
                 "shape", "size", "material", "object", "left", "?"})
    v.add(w);
  for (Attribute a : kAttributes)
    for (int i = 0; i < attribute_cardinality(a); ++i) v.add(std::string(attribute_value(a, i)));
  for (auto p : kShapePlurals) v.add(std::string(p));
  return v;
}

std::vector<RegionFeature> region_features(const SceneSpec& scene, std::size_t appearance_dim) {
  constexpr std::size_t kOneHot = kColors.size() + kShapes.size() + kSizes.size() + kMaterials.size();
  if (appearance_dim < kOneHot)
    throw std::invalid_argument("appearance_dim must be at least " + std::to_string(kOneHot));
  Rng rng(mix_seed(scene.seed, 0xfeedULL));
  std::vector<RegionFeature> out;
  for (const auto& o : scene.objects) {
    RegionFeature r;
    r.appearance.assign(appearance_dim, 0.0);
    std::size_t offset = 0;
    for (Attribute a : kAttributes) {
      r.appearance[offset + static_cast<std::size_t>(o.attr(a))] = 1.0;
      offset += static_cast<std::size_t>(attribute_cardinality(a));
    }
    for (double& v : r.appearance) v += rng.normal(0.0, 0.05);
    r.box = o.box;
    out.push_back(std::move(r));
  }
  return out;
}

DatasetAudit audit(std::span<const Sample> samples) {
  DatasetAudit a;
  a.total = samples.size();
  for (const auto& s : samples) {
    ++a.answer_counts[s.answer];
    const std::string fam(family_name(s.family));
    ++a.family_counts[fam];
    ++a.family_answer_counts[fam][s.answer];
  }
  for (const auto& [ans, n] : a.answer_counts)
    if (n > a.answer_counts[a.majority_answer] || a.majority_answer.empty()) a.majority_answer = ans;
  if (a.total > 0) a.majority_baseline = static_cast<double>(a.answer_counts[a.majority_answer]) / static_cast<double>(a.total);
  for (Family f : kFamilies) {
    const std::string fam(family_name(f));
    const auto answers = family_answers(f);
    a.family_chance[fam] = 1.0 / static_cast<double>(answers.size());
    auto it = a.family_counts.find(fam);
    if (it == a.family_counts.end()) continue;
    double gap = 0.0;
    for (const auto& ans : answers) {
      const double share = static_cast<double>(a.family_answer_counts[fam][ans]) / static_cast<double>(it->second);
      gap = std::max(gap, std::abs(share - a.family_chance[fam]));
    }
    a.family_uniformity_gap[fam] = gap;
  }
  return a;
}

nlohmann::ordered_json to_json(const DatasetAudit& a) {
  nlohmann::ordered_json j;
  j["total"] = a.total;
  j["majority_answer"] = a.majority_answer;
  j["majority_baseline"] = a.majority_baseline;
  j["answer_counts"] = a.answer_counts;
  j["family_counts"] = a.family_counts;
  j["family_answer_counts"] = a.family_answer_counts;
  j["family_uniformity_gap"] = a.family_uniformity_gap;
  j["family_chance"] = a.family_chance;
  return j;
}

}  // namespace lognet::toy
