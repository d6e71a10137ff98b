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

#include "lognet/answer_head.hpp"
#include "lognet/model.hpp"
#include "testing.hpp"

using namespace lognet;
using lognet::testing::grad_error;
using lognet::testing::probe;
using lognet::testing::random_tensor;

namespace {

AnswerHead make_head(ParameterSet& ps, std::size_t d, std::size_t answers, std::uint64_t seed = 3) {
  Rng rng(seed);
  return AnswerHead::create(ps, d, answers, rng);
}

void fill(Tensor t, std::initializer_list<double> v) {
  std::copy(v.begin(), v.end(), t.mutable_values().begin());
}

}  // namespace

TEST(AnswerHead, FuseZeroWeightsGivesBias) {
  ParameterSet ps;
  auto h = make_head(ps, 4, 5);
  for (auto& w : h.fuse_weights.mutable_values()) w = 0.0;
  Rng rng(1);
  auto J = h.fuse(random_tensor(4, 1, rng, -1, 1, false), random_tensor(4, 1, rng, -1, 1, false));
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(J.values()[r], h.fuse_bias.values()[r]);
  EXPECT_THROW(h.fuse(Tensor::zeros({4, 1}), Tensor::zeros({3, 1})), ShapeError);
}

TEST(AnswerHead, FuseGradcheck) {
  ParameterSet ps;
  auto h = make_head(ps, 6, 5);
  Rng rng(2);
  EXPECT_LT(grad_error({random_tensor(6, 1, rng), random_tensor(6, 1, rng)},
                       [&](const auto& in) { return probe(h.fuse(in[0], in[1])); }),
            1e-6);
}

TEST(AnswerHead, PaperScaleFusedWidth) {
  ParameterSet ps;
  const auto d = static_cast<std::size_t>(ModelConfig::paper_scale().d);
  EXPECT_EQ(d, 512u);
  auto h = make_head(ps, d, 17);
  auto J = h.fuse(Tensor::zeros({d, 1}), Tensor::zeros({d, 1}));
  EXPECT_EQ(J.rows(), 512u);
  EXPECT_EQ(J.cols(), 1u);
}

TEST(AnswerHead, ConstructedTwoAnswerHead) {
  ParameterSet ps;
  auto h = make_head(ps, 2, 2);
  fill(h.hidden_weights, {1, 0, 0, 1});
  fill(h.hidden_bias, {0, 0});
  fill(h.out_weights, {1, 0, -1, 0});
  fill(h.out_bias, {0, 0});
  auto J = Tensor::matrix(2, 4, {1, -1, 2.5, -0.3, 0, 0, 1, -1});
  auto logits = h.classify(J, Mode::kEval);
  EXPECT_EQ(predictions(logits), (std::vector<int>{0, 1, 0, 1}));
}

TEST(AnswerHead, EvalModeIsRepeatable) {
  ParameterSet ps;
  auto h = make_head(ps, 5, 7);
  Rng rng(4);
  auto J = random_tensor(5, 6, rng, -1, 1, false);
  h.classify(J, Mode::kTrain);
  auto a = h.classify(J, Mode::kEval), b = h.classify(J, Mode::kEval);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
}

TEST(AnswerHead, ArgmaxIgnoresConstantShift) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto logits = random_tensor(17, 8, rng, -5, 5, false);
    const double c = rng.uniform(-100, 100);
    EXPECT_EQ(predictions(logits), predictions(add(logits, Tensor::scalar(c))));
  }
}

TEST(AnswerLoss, UniformAndConfident) {
  std::vector<int> labels{0, 3, 9};
  bool raw[3] = {false, false, false};
  auto l = answer_loss(Tensor::zeros({10, 3}), labels, raw, LossKind::kCrossEntropy);
  EXPECT_NEAR(l.item(), std::log(10.0), 1e-12);
  std::vector<double> v(30, 0.0);
  for (std::size_t b = 0; b < 3; ++b) v[static_cast<std::size_t>(labels[b]) * 3 + b] = 60.0;
  EXPECT_LT(answer_loss(Tensor::matrix(10, 3, v), labels, raw, LossKind::kCrossEntropy).item(), 1e-20);
  std::vector<int> bad{10, 0, 0};
  EXPECT_THROW(answer_loss(Tensor::zeros({10, 3}), bad, raw, LossKind::kCrossEntropy), ShapeError);
  EXPECT_THROW(answer_loss(Tensor::zeros({10, 2}), labels, raw, LossKind::kCrossEntropy), ShapeError);
}

TEST(AnswerLoss, NonNegativeAndGradchecked) {
  Rng rng(6);
  std::vector<int> labels{1, 4, 0, 2};
  bool mixed[4] = {true, false, true, false};
  for (auto kind : {LossKind::kCrossEntropy, LossKind::kBinaryCrossEntropy}) {
    for (int trial = 0; trial < 20; ++trial)
      EXPECT_GE(answer_loss(random_tensor(5, 4, rng, -8, 8, false), labels, mixed, kind).item(), 0.0);
    EXPECT_LT(grad_error({random_tensor(5, 4, rng)},
                         [&](const auto& in) { return answer_loss(in[0], labels, mixed, kind); }),
              1e-6);
  }
}

TEST(AnswerLoss, InitialLossNearLogAnswerCount) {
  auto vocab = toy::build_vocabulary();
  ModelConfig cfg = ModelConfig::desk();
  cfg.vocab_size = static_cast<int>(vocab.size());
  cfg.num_answers = static_cast<int>(toy::answer_space().size());
  auto samples = toy::generate_split(11, toy::Split::kTrain, 64, toy::GeneratorConfig{});
  auto enc = encode_all(samples, vocab, cfg);
  std::vector<const EncodedSample*> batch;
  for (const auto& e : enc) batch.push_back(&e);
  Model model(cfg, 1);
  Tape tape;
  TapeScope scope(tape);
  auto out = model.forward(batch, Mode::kTrain);
  EXPECT_NEAR(model.loss(out, batch).item(), std::log(17.0), 0.3);
}
