// Copyright 2026 The ARC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "arc/tensor.hpp"

#include <cstring>

#include <gtest/gtest.h>

#include "arc/ops.hpp"
#include "arc/rng.hpp"

namespace arc {
namespace {

TEST(Tensor, ShapeAndValues) {
  Tensor t = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.rank(), 2);
  EXPECT_EQ(t.dim(1), 3);
  EXPECT_DOUBLE_EQ(t.value_at(4), 5.0);
}

TEST(Tensor, RejectsMismatchedValueCount) {
  EXPECT_THROW(Tensor::from_values({2, 2}, {1, 2, 3}), ShapeError);
}

TEST(Tensor, RejectsNonPositiveExtent) {
  EXPECT_THROW(Tensor::zeros({2, 0}), ShapeError);
  EXPECT_THROW(Tensor::zeros({-1}), ShapeError);
}

TEST(Tensor, ScalarValueRequiresSingleElement) {
  EXPECT_THROW(Tensor::zeros({2}).scalar_value(), ShapeError);
  EXPECT_DOUBLE_EQ(Tensor::scalar(4.5).scalar_value(), 4.5);
}

TEST(Tensor, GradStorageIsLazy) {
  Tensor t = Tensor::zeros({3});
  EXPECT_FALSE(t.has_grad());
  t.ensure_grad();
  EXPECT_TRUE(t.has_grad());
  EXPECT_EQ(t.grad().size(), 3u);
  t.drop_grad();
  EXPECT_FALSE(t.has_grad());
}

TEST(Tensor, CopiesShareStorage) {
  Tensor a = Tensor::zeros({2});
  Tensor b = a;
  b.values_mut()[0] = 7.0;
  EXPECT_DOUBLE_EQ(a.value_at(0), 7.0);
  EXPECT_TRUE(a.same_storage(b));
}

TEST(Tape, BackwardBeforeForwardRejected) {
  Tape tape;
  Tensor loss = Tensor::scalar(1.0);
  loss.set_requires_grad(true);
  EXPECT_THROW(tape.backward(loss), ShapeError);
}

TEST(Tape, BackwardRequiresScalarLoss) {
  Tape tape;
  Tensor x = Tensor::zeros({2, 2});
  x.set_requires_grad(true);
  Tensor y = relu(tape, x);
  EXPECT_THROW(tape.backward(y), ShapeError);
}

TEST(Tape, BackwardRequiresConnectedLoss) {
  Tape tape;
  Tensor x = Tensor::zeros({2});
  x.set_requires_grad(true);
  (void)relu(tape, x);
  Tensor constant = Tensor::scalar(3.0);  // never recorded
  EXPECT_THROW(tape.backward(constant), ShapeError);
}

TEST(Tape, SumLossGivesUnitGradients) {
  Tape tape;
  Tensor x = Tensor::from_values({4}, {1, -2, 3, -4});
  x.set_requires_grad(true);
  Tensor loss = sum(tape, x);
  tape.backward(loss);
  ASSERT_TRUE(x.has_grad());
  for (const double g : x.grad()) EXPECT_DOUBLE_EQ(g, 1.0);
}

TEST(Tape, DisconnectedParameterGetsNoGradient) {
  Tape tape;
  Tensor x = Tensor::from_values({2}, {1, 2});
  Tensor other = Tensor::from_values({2}, {5, 6});
  x.set_requires_grad(true);
  other.set_requires_grad(true);
  Tensor loss = sum(tape, x);
  tape.backward(loss);
  EXPECT_TRUE(x.has_grad());
  EXPECT_FALSE(other.has_grad());
}

TEST(Tape, SecondBackwardWithoutForwardRejected) {
  Tape tape;
  Tensor x = Tensor::from_values({2}, {1, 2});
  x.set_requires_grad(true);
  Tensor loss = sum(tape, x);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), ShapeError);
}

TEST(Tape, RecordingOffKeepsTapeEmpty) {
  Tape tape(false);
  Tensor x = Tensor::from_values({2}, {1, 2});
  x.set_requires_grad(true);
  Tensor y = sum(tape, x);
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_FALSE(y.requires_grad());
}

// Identical seed + identical inputs must give bit-identical values and
// gradients across runs in the same build.
TEST(Tape, DeterministicForwardBackward) {
  const auto run = [](std::vector<double>* vals, std::vector<double>* grads) {
    Rng rng(99);
    Tensor x = Tensor::zeros({2, 3, 4, 4});
    for (double& v : x.values_mut()) v = rng.uniform(-1, 1);
    x.set_requires_grad(true);
    Tape tape;
    Tensor y = sigmoid(tape, x);
    Tensor loss = sum(tape, y);
    tape.backward(loss);
    vals->assign(y.values().begin(), y.values().end());
    grads->assign(x.grad().begin(), x.grad().end());
  };
  std::vector<double> v1, g1, v2, g2;
  run(&v1, &g1);
  run(&v2, &g2);
  ASSERT_EQ(v1.size(), v2.size());
  EXPECT_EQ(0, std::memcmp(v1.data(), v2.data(), v1.size() * sizeof(double)));
  EXPECT_EQ(0, std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)));
}

}  // namespace
}  // namespace arc
