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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lognet/toy_data.hpp"

using namespace lognet;
using namespace lognet::toy;

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

ObjectSpec object(int color, int shape, int size, int material, double cx) {
  ObjectSpec o;
  o.attrs = {color, shape, size, material};
  o.box = {cx - 0.05, 0.4, cx + 0.05, 0.5};
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

// Answers questions straight from the serialized scene, matching words
// against attribute strings rather than going through the library parser.
struct JsonOracle {
  const nlohmann::json& objects;

  bool has(const nlohmann::json& o, const std::string& w) const {
    if (w == "object") return true;
    for (auto key : {"color", "shape", "size", "material"})
      if (o.at(key).get<std::string>() == w) return true;
    return false;
  }
  std::vector<const nlohmann::json*> select(const std::vector<std::string>& words) const {
    std::vector<const nlohmann::json*> out;
    for (const auto& o : objects) {
      bool ok = true;
      for (const auto& w : words) ok = ok && has(o, w);
      if (ok) out.push_back(&o);
    }
    return out;
  }
  static double cx(const nlohmann::json& o) { return 0.5 * (o.at("box")[0].get<double>() + o.at("box")[2].get<double>()); }

  std::string answer(std::vector<std::string> t) const {
    t.pop_back();
    auto tail = [&](std::size_t from, std::size_t to) { return std::vector<std::string>(t.begin() + from, t.begin() + to); };
    if (t[0] == "what" && t[1] == "color") {
      auto m = select(tail(4, t.size()));
      EXPECT_EQ(m.size(), 1u);
      return m.at(0)->at("color");
    }
    if (t[0] == "is" && t[1] == "there") return select(tail(3, t.size())).empty() ? "no" : "yes";
    if (t[0] == "how") {
      std::string w = t[2];
      if (w.back() == 's' && t[3] == "are") w.pop_back();
      return std::to_string(select({w}).size());
    }
    if (t[0] == "what" && t[1] == "is") {
      auto ref = select(tail(10, t.size()));
      EXPECT_EQ(ref.size(), 1u);
      std::vector<const nlohmann::json*> left;
      for (const auto& o : objects)
        if (cx(o) < cx(*ref.at(0))) left.push_back(&o);
      EXPECT_EQ(left.size(), 1u);
      return left.at(0)->at("shape");
    }
    std::size_t mid = 5;
    while (!(t[mid] == "the" && t[mid + 1] == "same")) ++mid;
    auto a = select(tail(5, mid)), b = select(tail(mid + 4, t.size()));
    EXPECT_EQ(a.size(), 1u);
    EXPECT_EQ(b.size(), 1u);
    return a.at(0)->at(t[2]) == b.at(0)->at(t[2]) ? "yes" : "no";
  }
};

}  // namespace

TEST(Scenes, TenThousandValidWithLowRejection) {
  GeneratorConfig cfg;
  Rng rng(2024);
  SceneStats stats;
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    auto scene = generate_scene(rng, cfg, &stats);
    try {
      validate_scene(scene, cfg);
    } catch (const std::invalid_argument&) {
      ++violations;
    }
  }
  EXPECT_EQ(violations, 0u);
  EXPECT_LT(static_cast<double>(stats.rejections) / static_cast<double>(stats.draws), 0.05);
  EXPECT_EQ(cfg.min_objects, 4);
  EXPECT_EQ(cfg.max_objects, 10);
}

TEST(Scenes, SeededCallsAreBitwiseEqual) {
  GeneratorConfig cfg;
  Rng a(9), b(9);
  for (int i = 0; i < 50; ++i) {
    auto x = generate_scene(a, cfg), y = generate_scene(b, cfg);
    ASSERT_EQ(x.objects.size(), y.objects.size());
    for (std::size_t k = 0; k < x.objects.size(); ++k) {
      EXPECT_EQ(x.objects[k].attrs, y.objects[k].attrs);
      EXPECT_EQ(x.objects[k].box, y.objects[k].box);
    }
  }
}

TEST(Scenes, ValidatorRejectsBrokenScenes) {
  GeneratorConfig cfg;
  cfg.min_objects = 2;
  SceneSpec dup{{object(1, 0, 0, 0, 0.2), object(1, 0, 0, 0, 0.6)}, 0};
  EXPECT_THROW(validate_scene(dup, cfg), std::invalid_argument);
  SceneSpec lonely{{object(1, 0, 0, 0, 0.2)}, 0};
  EXPECT_THROW(validate_scene(lonely, cfg), std::invalid_argument);
  SceneSpec bad_box{{object(1, 0, 0, 0, 0.2), object(2, 0, 0, 0, 0.6)}, 0};
  bad_box.objects[1].box = {0.7, 0.4, 0.6, 0.5};
  EXPECT_THROW(validate_scene(bad_box, cfg), std::invalid_argument);
}

TEST(Oracle, HandBuiltScenes) {
  // red small rubber cube, red large metal sphere
  SceneSpec two{{object(1, 0, 0, 0, 0.3), object(1, 1, 1, 1, 0.7)}, 0};
  EXPECT_EQ(oracle(two, split_words("is the color of the cube the same as the sphere ?")), "yes");
  EXPECT_EQ(oracle(two, split_words("is the size of the cube the same as the sphere ?")), "no");
  EXPECT_EQ(oracle(two, split_words("what color is the metal object ?")), "red");
  EXPECT_EQ(oracle(two, split_words("what is the shape of the object left of the sphere ?")), "cube");
  EXPECT_EQ(oracle(two, split_words("is there a blue cube ?")), "no");

  SceneSpec spheres{{object(0, 1, 0, 0, 0.1), object(2, 1, 0, 0, 0.3), object(3, 1, 1, 1, 0.5), object(3, 0, 0, 0, 0.8)},
                    0};
  EXPECT_EQ(oracle(spheres, split_words("how many spheres are there ?")), "3");
  EXPECT_EQ(oracle(spheres, split_words("how many green things are there ?")), "2");
  EXPECT_EQ(oracle(spheres, split_words("what color is the cube ?")), "green");

  // "left of" compares box centres, not left edges
  SceneSpec wide{{object(0, 0, 0, 0, 0.5), object(1, 2, 0, 0, 0.4)}, 0};
  wide.objects[0].box = {0.1, 0.1, 0.9, 0.2};
  EXPECT_EQ(oracle(wide, split_words("what is the shape of the object left of the cube ?")), "cylinder");

  EXPECT_THROW(oracle(spheres, split_words("what color is the sphere ?")), OracleError);
  EXPECT_THROW(oracle(spheres, split_words("why is the sky blue ?")), OracleError);
  EXPECT_THROW(oracle(spheres, split_words("what color is the cube")), OracleError);
}

TEST(Questions, TwoObjectSameColorCompare) {
  SceneSpec two{{object(1, 0, 0, 0, 0.3), object(1, 1, 1, 1, 0.7)}, 0};
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto q = generate_question(two, Family::kCompare, std::string("yes"), rng);
    ASSERT_TRUE(q.has_value());
    EXPECT_EQ(q->answer, "yes");
    EXPECT_EQ(oracle(two, q->tokens), "yes");
  }
}

TEST(Samples, AuditOverTenThousand) {
  auto samples = generate_split(5, Split::kTrain, 10000, GeneratorConfig{});
  auto a = audit(samples);
  EXPECT_EQ(a.total, 10000u);
  for (const auto& [fam, gap] : a.family_uniformity_gap) EXPECT_LE(gap, 0.05) << fam;
  EXPECT_EQ(a.family_uniformity_gap.size(), 5u);
  EXPECT_LE(a.majority_baseline, 0.35);
  std::size_t longest = 0;
  for (const auto& s : samples) longest = std::max(longest, s.tokens.size());
  EXPECT_LE(longest, 16u);
}

TEST(Samples, IndependentOracleAgrees) {
  auto samples = generate_split(6, Split::kVal, 3000, GeneratorConfig{});
  std::set<std::string> families;
  for (const auto& s : samples) {
    auto j = to_json(s);
    nlohmann::json plain = nlohmann::json::parse(j.dump());
    JsonOracle o{plain.at("scene").at("objects")};
    EXPECT_EQ(o.answer(s.tokens), s.answer) << s.text;
    EXPECT_NO_THROW(answer_index(s.answer));
    families.insert(std::string(family_name(s.family)));
  }
  EXPECT_EQ(families.size(), 5u);
}

TEST(Samples, RegenerationIsByteIdentical) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "lognet_toy_regen";
  fs::create_directories(dir);
  GeneratorConfig cfg;
  write_jsonl(dir / "a.jsonl", generate_split(17, Split::kTest, 500, cfg));
  write_jsonl(dir / "b.jsonl", generate_split(17, Split::kTest, 500, cfg));
  write_jsonl(dir / "c.jsonl", generate_split(18, Split::kTest, 500, cfg));
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_NE(slurp(dir / "a.jsonl"), slurp(dir / "c.jsonl"));
  fs::remove_all(dir);
}

TEST(Samples, SplitsUseDisjointSeeds) {
  GeneratorConfig cfg;
  std::set<std::uint64_t> seen;
  std::size_t total = 0;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest})
    for (const auto& x : generate_split(1, s, 300, cfg)) {
      seen.insert(x.scene.seed);
      ++total;
    }
  EXPECT_EQ(seen.size(), total);
}

TEST(Samples, JsonlRoundTripAndOracleRegression) {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "lognet_toy_roundtrip.jsonl";
  auto samples = generate_split(8, Split::kTrain, 400, GeneratorConfig{});
  write_jsonl(path, samples);
  auto back = read_jsonl(path);
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(to_json(back[i]).dump(), to_json(samples[i]).dump());
    EXPECT_EQ(oracle(back[i].scene, back[i].tokens), back[i].answer);
  }
  auto first = slurp(path);
  auto line = first.substr(0, first.find('\n'));
  EXPECT_EQ(line.rfind("{\"scene\":", 0), 0u);
  EXPECT_LT(line.find("\"question_tokens\""), line.find("\"question_text\""));
  EXPECT_LT(line.find("\"answer\""), line.find("\"type\""));
  fs::remove(path);
}

TEST(Samples, MalformedFilesRaiseIoError) {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "lognet_toy_bad.jsonl";
  {
    std::ofstream os(path);
    os << "{\"scene\": 3}\n";
  }
  EXPECT_THROW(read_jsonl(path), IoError);
  fs::remove(path);
  EXPECT_THROW(read_jsonl(path), IoError);
}

TEST(Features, OneHotPlusSmallNoise) {
  SceneSpec s{{object(7, 2, 1, 1, 0.3), object(0, 0, 0, 0, 0.7)}, 99};
  auto f = region_features(s, 16);
  ASSERT_EQ(f.size(), 2u);
  const std::vector<std::size_t> hot{7, 8 + 2, 11 + 1, 13 + 1};
  for (std::size_t k = 0; k < 16; ++k) {
    const bool is_hot = std::find(hot.begin(), hot.end(), k) != hot.end();
    EXPECT_NEAR(f[0].appearance[k], is_hot ? 1.0 : 0.0, 0.3);
  }
  EXPECT_EQ(f[0].box, s.objects[0].box);
  auto again = region_features(s, 16);
  EXPECT_EQ(again[1].appearance, f[1].appearance);
  EXPECT_THROW(region_features(s, 10), std::invalid_argument);
}

TEST(Answers, SpaceIsFixedAndUnique) {
  const auto& a = answer_space();
  EXPECT_EQ(a.size(), 17u);
  EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), a.size());
  EXPECT_THROW(answer_index("maybe"), std::invalid_argument);
  auto v = build_vocabulary();
  for (const auto& s : generate_split(3, Split::kTrain, 200, GeneratorConfig{}))
    for (const auto& t : s.tokens) EXPECT_GE(v.index(t), 2) << t;
}
