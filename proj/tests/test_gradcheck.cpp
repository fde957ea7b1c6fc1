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

#include "arc/gradcheck.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "arc/ops.hpp"
#include "arc/rng.hpp"

namespace arc {
namespace {

// Quick pass over every op; the acceptance suite runs the full 20 seeds.
TEST(GradCheck, SuitePassesOnThreeSeeds) {
  const auto results = run_gradcheck_suite(42, 3);
  EXPECT_EQ(results.size(), 16u);
  for (const OpGradCheck& r : results) {
    EXPECT_TRUE(r.pass) << r.op << " max_rel_err=" << r.max_rel_err;
    EXPECT_LT(r.max_rel_err, kGradCheckTolerance) << r.op;
  }
}

TEST(GradCheck, RejectsNonPositiveCaseCount) {
  EXPECT_THROW(run_gradcheck_suite(1, 0), ConfigError);
}

// A sign-flipped sigmoid backward must be reported loudly; this guards the
// checker itself against silently accepting wrong gradients.
TEST(GradCheck, DetectsInjectedSignFlipFault) {
  Rng rng(5);
  Tensor x = Tensor::zeros({2, 3});
  for (double& v : x.values_mut()) v = rng.uniform(-2.0, 2.0);
  x.set_requires_grad(true);

  Tape tape;
  // Faulty op: forward identical to sigmoid, backward with flipped sign.
  Tensor y = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double v = x.value_at(i);
    y.values_mut()[i] = 1.0 / (1.0 + std::exp(-v));
  }
  y.set_requires_grad(true);
  y.ensure_grad();
  tape.record([x, y]() mutable {
    x.ensure_grad();
    for (std::size_t i = 0; i < x.numel(); ++i) {
      const double s = y.value_at(i);
      x.grad_mut()[i] -= y.grad()[i] * s * (1.0 - s);  // wrong sign
    }
  });
  Tensor loss = sum(tape, y);
  tape.backward(loss);

  std::vector<Tensor> inputs = {x};
  const double err = max_grad_rel_error(inputs, [&x]() {
    double acc = 0.0;
    for (const double v : x.values()) acc += 1.0 / (1.0 + std::exp(-v));
    return acc;
  });
  EXPECT_GT(err, kGradCheckTolerance);
}

TEST(GradCheck, RequiresAnalyticGradients) {
  Tensor x = Tensor::zeros({2});
  x.set_requires_grad(true);  // but no backward ran
  std::vector<Tensor> inputs = {x};
  EXPECT_THROW(max_grad_rel_error(inputs, []() { return 0.0; }), NumericError);
}

}  // namespace
}  // namespace arc
