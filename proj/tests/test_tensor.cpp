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
#include <limits>

#include "lognet/tensor.hpp"
#include "testing.hpp"

using namespace lognet;
using lognet::testing::grad_error;
using lognet::testing::probe;
using lognet::testing::random_tensor;

namespace {

void expect_values(const Tensor& t, std::vector<double> want, double tol = 1e-12) {
  ASSERT_EQ(t.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(t.values()[i], want[i], tol) << "index " << i;
}

}  // namespace

TEST(Matmul, IdentityAndSelector) {
  auto eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  auto m = Tensor::matrix(2, 2, {1, 2, 3, 4});
  expect_values(matmul(eye, m), {1, 2, 3, 4}, 0.0);
  expect_values(matmul(Tensor::matrix(1, 2, {1, 0}), Tensor::matrix(2, 1, {2, 5})), {2}, 0.0);
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
}

TEST(Matmul, Gradcheck) {
  Rng rng(1);
  auto a = random_tensor(3, 4, rng), b = random_tensor(4, 2, rng);
  EXPECT_LT(grad_error({a, b}, [](const auto& in) { return probe(matmul(in[0], in[1])); }), 1e-6);
}

TEST(Elementwise, Definitions) {
  auto x = Tensor::column({0.0, -1e3, 2.0});
  expect_values(elu(x), {0.0, -1.0, 2.0});
  expect_values(sigmoid(Tensor::scalar(0.0)), {0.5}, 0.0);
  expect_values(tanh(Tensor::scalar(0.3)), {std::tanh(0.3)});
}

TEST(Elementwise, TanhDerivativeAtPointThree) {
  auto x = Tensor::scalar(0.3, true);
  Tape tape;
  TapeScope scope(tape);
  tape.backward(tanh(x));
  const double t = std::tanh(0.3);
  EXPECT_NEAR(x.grad()[0], 1 - t * t, 1e-15);
  EXPECT_LT(grad_error({Tensor::scalar(0.3, true)}, [](const auto& in) { return tanh(in[0]); }), 1e-6);
}

TEST(Elementwise, Broadcasting) {
  auto m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  expect_values(add(m, Tensor::column({10, 20})), {11, 12, 13, 24, 25, 26}, 0.0);
  expect_values(add(Tensor::column({10, 20}), m), {11, 12, 13, 24, 25, 26}, 0.0);
  expect_values(mul(m, Tensor::scalar(2)), {2, 4, 6, 8, 10, 12}, 0.0);
  expect_values(sub(m, Tensor::column({1, 1})), {0, 1, 2, 3, 4, 5}, 0.0);
  EXPECT_THROW(add(m, Tensor::matrix(1, 3, {1, 2, 3})), ShapeError);
  EXPECT_THROW(add(m, Tensor::zeros({3, 1})), ShapeError);
}

TEST(Elementwise, GradcheckAllOpsOnRandomInputs) {
  Rng rng(2);
  const double h = 1e-4;
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_tensor(3, 4, rng), b = random_tensor(3, 4, rng), c = random_tensor(3, 1, rng);
    auto s = random_tensor(1, 1, rng);
    EXPECT_LT(grad_error({a, b}, [](const auto& in) { return probe(add(in[0], in[1])); }, h), 1e-4);
    EXPECT_LT(grad_error({a, b}, [](const auto& in) { return probe(sub(in[0], in[1])); }, h), 1e-4);
    EXPECT_LT(grad_error({a, b}, [](const auto& in) { return probe(mul(in[0], in[1])); }, h), 1e-4);
    EXPECT_LT(grad_error({a, c}, [](const auto& in) { return probe(mul(in[0], in[1])); }, h), 1e-4);
    EXPECT_LT(grad_error({c, a}, [](const auto& in) { return probe(sub(in[0], in[1])); }, h), 1e-4);
    EXPECT_LT(grad_error({a, s}, [](const auto& in) { return probe(add(in[0], in[1])); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(scale(in[0], -1.7)); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(elu(in[0])); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(tanh(in[0])); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(sigmoid(in[0])); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(softmax(in[0], 0)); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(softmax(in[0], 1)); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(transpose(in[0])); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(reshape(in[0], {2, 6})); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(slice_rows(in[0], 1, 2)); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(slice_cols(in[0], 1, 3)); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return mean(in[0]); }, h), 1e-4);
    EXPECT_LT(grad_error({a}, [](const auto& in) { return probe(gram(in[0])); }, h), 1e-4);
    EXPECT_LT(grad_error({a, b}, [](const auto& in) { return probe(pairwise_add(in[0], in[1])); }, h), 1e-4);
    EXPECT_LT(grad_error({a, c}, [](const auto& in) { return probe(concat(in[0], in[1], 1)); }, h), 1e-4);
  }
}

TEST(Softmax, ClosedForms) {
  expect_values(softmax(Tensor::column({0, 0, 0}), 0), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  expect_values(softmax(Tensor::column({1000, 1000}), 0), {0.5, 0.5});
  expect_values(softmax(Tensor::column({0, std::log(3.0)}), 0), {0.25, 0.75});
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_tensor(4, 7, rng, -50, 50, false);
    for (int axis : {0, 1}) {
      auto y = softmax(x, axis);
      auto shifted = softmax(add(x, Tensor::scalar(rng.uniform(-100, 100))), axis);
      const std::size_t outer = axis == 0 ? y.cols() : y.rows();
      const std::size_t inner = axis == 0 ? y.rows() : y.cols();
      for (std::size_t o = 0; o < outer; ++o) {
        double s = 0;
        for (std::size_t i = 0; i < inner; ++i) s += axis == 0 ? y.at(i, o) : y.at(o, i);
        EXPECT_NEAR(s, 1.0, 1e-9);
      }
      for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y.values()[i], shifted.values()[i], 1e-12);
    }
  }
}

TEST(Concat, ValuesAndShapes) {
  expect_values(concat(Tensor::column({1, 2}), Tensor::column({3}), 0), {1, 2, 3}, 0.0);
  auto v = Tensor::zeros({8, 3});
  auto x = concat(v, v, 0);
  EXPECT_EQ(x.rows(), 16u);
  EXPECT_EQ(x.cols(), 3u);
  EXPECT_THROW(concat(Tensor::zeros({2, 3}), Tensor::zeros({2, 4}), 0), ShapeError);
}

TEST(Concat, GradcheckThroughSum) {
  Rng rng(4);
  auto a = random_tensor(2, 3, rng), b = random_tensor(1, 3, rng);
  EXPECT_LT(grad_error({a, b}, [](const auto& in) { return sum(concat(in[0], in[1], 0)); }), 1e-6);
  EXPECT_LT(grad_error({a, b}, [](const auto& in) { return probe(concat(in[0], in[1], 0)); }), 1e-6);
}

TEST(BatchNorm, ConstantColumnGivesShift) {
  auto st = BatchNormState::create(2);
  st.beta.mutable_values()[0] = 0.25;
  auto x = Tensor::matrix(3, 2, {5, 1, 5, 2, 5, 3});
  auto y = batchnorm(x, st, Mode::kTrain);
  for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(y.at(b, 0), 0.25, 1e-12);
}

TEST(BatchNorm, HandComputedColumn) {
  auto st = BatchNormState::create(1);
  auto y = batchnorm(Tensor::matrix(2, 1, {-1, 1}), st, Mode::kTrain);
  const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
  expect_values(y, {-expect, expect}, 1e-15);
  // running stats: mean 0, unbiased var 2
  EXPECT_NEAR(st.running_mean[0], 0.0, 1e-15);
  EXPECT_NEAR(st.running_var[0], 0.9 * 1.0 + 0.1 * 2.0, 1e-15);
}

TEST(BatchNorm, EvalModeDeterministicAndUsesRunningStats) {
  auto st = BatchNormState::create(2);
  st.running_mean = {1.0, -1.0};
  st.running_var = {4.0, 0.25};
  auto x = Tensor::matrix(1, 2, {3.0, 0.0});
  auto y1 = batchnorm(x, st, Mode::kEval);
  auto y2 = batchnorm(x, st, Mode::kEval);
  expect_values(y1, {2.0 / std::sqrt(4.0 + 1e-5), 1.0 / std::sqrt(0.25 + 1e-5)});
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(y1.values()[i], y2.values()[i]);
}

TEST(BatchNorm, SingleSampleTrainingIsAConfigError) {
  auto st = BatchNormState::create(2);
  EXPECT_THROW(batchnorm(Tensor::zeros({1, 2}), st, Mode::kTrain), ConfigError);
}

TEST(BatchNorm, Gradcheck) {
  Rng rng(5);
  auto st = BatchNormState::create(3);
  for (auto& g : st.gamma.mutable_values()) g = rng.uniform(0.5, 1.5);
  auto x = random_tensor(4, 3, rng);
  EXPECT_LT(grad_error({x, st.gamma, st.beta},
                       [&](const auto& in) { return probe(batchnorm(in[0], st, Mode::kTrain, false)); }),
            1e-5);
}

TEST(Backward, QuadraticAndAccumulation) {
  auto w = Tensor::column({1, 2}, true);
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(mul(w, w)));
    EXPECT_EQ(w.grad()[0], 2.0);
    EXPECT_EQ(w.grad()[1], 4.0);
  }
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(mul(w, w)));
  }
  EXPECT_EQ(w.grad()[0], 4.0);
  EXPECT_EQ(w.grad()[1], 8.0);
}

TEST(Backward, LinearityOfAccumulation) {
  Rng rng(6);
  auto a = random_tensor(3, 3, rng);
  auto f1 = [](const Tensor& x) { return probe(tanh(x), 1); };
  auto f2 = [](const Tensor& x) { return probe(elu(matmul(x, x)), 2); };
  std::vector<double> together, separate;
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(add(f1(a), f2(a)));
    together.assign(a.grad().begin(), a.grad().end());
  }
  a.zero_grad();
  for (auto* f : {+f1, +f2}) {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(f(a));
  }
  separate.assign(a.grad().begin(), a.grad().end());
  for (std::size_t i = 0; i < together.size(); ++i) EXPECT_NEAR(together[i], separate[i], 1e-12);
}

TEST(Backward, DetachedTensorGetsNoGrad) {
  auto w = Tensor::column({1, 2}, true);
  auto d = w.detach();
  Tape tape;
  TapeScope scope(tape);
  tape.backward(sum(mul(w, d)));
  EXPECT_FALSE(d.has_grad());
  EXPECT_EQ(w.grad()[1], 2.0);
}

TEST(Backward, NonScalarLossThrows) {
  auto w = Tensor::column({1, 2}, true);
  Tape tape;
  TapeScope scope(tape);
  EXPECT_THROW(tape.backward(mul(w, w)), ShapeError);
}

TEST(Numerics, NonFiniteResultsThrow) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(add(Tensor::scalar(inf), Tensor::scalar(1)), NumericError);
  EXPECT_THROW(mul(Tensor::scalar(1e300), Tensor::scalar(1e300)), NumericError);
}

TEST(Embed, ColumnsAreTableRowsAndGradScatters) {
  auto table = Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}, true);
  const int tokens[] = {2, 2, 0};
  auto e = embed(table, tokens);
  expect_values(e, {5, 5, 1, 6, 6, 2}, 0.0);
  Tape tape;
  TapeScope scope(tape);
  tape.backward(sum(embed(table, tokens)));
  expect_values(Tensor::matrix(3, 2, {table.grad().begin(), table.grad().end()}), {1, 1, 0, 0, 2, 2}, 0.0);
  const int bad[] = {3};
  EXPECT_THROW(embed(table, bad), ShapeError);
}

TEST(Losses, CrossEntropyClosedForms) {
  const int labels[] = {3};
  EXPECT_NEAR(cross_entropy(Tensor::zeros({10, 1}), labels).item(), std::log(10.0), 1e-12);
  std::vector<double> confident(10, 0.0);
  confident[3] = 60.0;
  EXPECT_LT(cross_entropy(Tensor::matrix(10, 1, confident), labels).item(), 1e-20);
  const int oob[] = {10};
  EXPECT_THROW(cross_entropy(Tensor::zeros({10, 1}), oob), ShapeError);
}

TEST(Losses, Gradcheck) {
  Rng rng(7);
  auto logits = random_tensor(5, 3, rng);
  const std::vector<int> labels{0, 4, 2};
  EXPECT_LT(grad_error({logits}, [&](const auto& in) { return cross_entropy(in[0], labels); }), 1e-6);
  EXPECT_LT(grad_error({logits}, [&](const auto& in) { return binary_cross_entropy(in[0], labels); }), 1e-6);
}
