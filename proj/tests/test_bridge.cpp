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

#include "arc/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include <gtest/gtest.h>

#include "arc/ops.hpp"
#include "arc/rng.hpp"

#include "oracles.hpp"

namespace arc {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values_mut()) v = rng.uniform(lo, hi);
  return t;
}

void zero_state(BridgeState& s) {
  for (Parameter* p : s.params()) {
    if (p->name.find("alpha") != std::string::npos) continue;
    std::fill(p->tensor.values_mut().begin(), p->tensor.values_mut().end(),
              0.0);
  }
}

BridgeState test_state(int c_ctx, int c_task, int r, double alpha, Rng& rng) {
  BridgeConfig cfg;
  cfg.c_ctx = c_ctx;
  cfg.c_task = c_task;
  cfg.reduction_ratio = r;
  cfg.alpha_init = alpha;
  BridgeState s = make_bridge(cfg, "bridge.0.", rng);
  // Randomize biases too, so the oracle comparison exercises them.
  for (Parameter* p : s.params()) {
    if (p->name.find("_b") != std::string::npos) {
      for (double& v : p->tensor.values_mut()) v = rng.uniform(-0.4, 0.4);
    }
  }
  return s;
}

TEST(BridgeConfig, HiddenWidthIsFlooredWithMinimumOne) {
  BridgeConfig cfg;
  cfg.c_ctx = 32;
  cfg.c_task = 32;
  cfg.reduction_ratio = 8;
  EXPECT_EQ(cfg.hidden_width(), 4);
  cfg.reduction_ratio = 100;
  EXPECT_EQ(cfg.hidden_width(), 1);
  cfg.c_ctx = 13;
  cfg.reduction_ratio = 8;
  EXPECT_EQ(cfg.hidden_width(), 1);
}

TEST(BridgeConfig, RejectsInvalid) {
  BridgeConfig cfg;
  cfg.c_ctx = 0;
  cfg.c_task = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(BridgeState, AllParametersTrainable) {
  Rng rng(1);
  BridgeState s = test_state(8, 4, 4, 0.0, rng);
  for (const Parameter* p : s.params()) {
    EXPECT_FALSE(p->frozen) << p->name;
    EXPECT_TRUE(p->tensor.requires_grad()) << p->name;
  }
}

TEST(ChannelAttention, ZeroWeightsGiveHalfEverywhere) {
  Rng rng(2);
  BridgeState s = test_state(6, 6, 2, 0.0, rng);
  zero_state(s);
  Tensor x = random_tensor({2, 6, 5, 5}, rng);
  Tape tape(false);
  auto [m_c, refined] = channel_attention(tape, x, s);
  ASSERT_EQ(m_c.shape(), (Shape{2, 6, 1, 1}));
  for (const double v : m_c.values()) EXPECT_DOUBLE_EQ(v, 0.5);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    EXPECT_DOUBLE_EQ(refined.value_at(i), 0.5 * x.value_at(i));
  }
}

TEST(ChannelAttention, ZeroInputZeroBiasGivesHalfMaskZeroOutput) {
  Rng rng(3);
  BridgeState s = test_state(4, 4, 2, 0.0, rng);
  std::fill(s.mlp_b1.tensor.values_mut().begin(),
            s.mlp_b1.tensor.values_mut().end(), 0.0);
  std::fill(s.mlp_b2.tensor.values_mut().begin(),
            s.mlp_b2.tensor.values_mut().end(), 0.0);
  Tensor x = Tensor::zeros({1, 4, 3, 3});
  Tape tape(false);
  auto [m_c, refined] = channel_attention(tape, x, s);
  for (const double v : m_c.values()) EXPECT_DOUBLE_EQ(v, 0.5);
  for (const double v : refined.values()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(ChannelAttention, RejectsChannelMismatch) {
  Rng rng(4);
  BridgeState s = test_state(6, 6, 2, 0.0, rng);
  Tape tape(false);
  EXPECT_THROW(channel_attention(tape, Tensor::zeros({1, 5, 3, 3}), s),
               ShapeError);
}

TEST(SpatialGate, ZeroWeightsGiveHalfMask) {
  Rng rng(5);
  BridgeState s = test_state(6, 6, 2, 0.0, rng);
  zero_state(s);
  Tape tape(false);
  Tensor m_s = spatial_gate(tape, random_tensor({2, 6, 4, 4}, rng), s);
  ASSERT_EQ(m_s.shape(), (Shape{2, 1, 4, 4}));
  for (const double v : m_s.values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(SpatialGate, PreservesSpatialExtent) {
  Rng rng(6);
  BridgeState s = test_state(3, 3, 2, 0.0, rng);
  Tape tape(false);
  for (const int extent : {1, 7, 20}) {
    Tensor m_s = spatial_gate(tape, random_tensor({1, 3, extent, extent}, rng), s);
    EXPECT_EQ(m_s.shape(), (Shape{1, 1, extent, extent}));
  }
}

TEST(BridgeForward, AlphaZeroIsBitIdenticalIdentity) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    BridgeState s = test_state(rng.next_int(1, 8), rng.next_int(1, 8),
                               rng.next_int(1, 8), 0.0, rng);
    const int n = rng.next_int(1, 2);
    const int h = rng.next_int(1, 6), w = rng.next_int(1, 6);
    Tensor f_in = random_tensor({n, s.config.c_task, h, w}, rng);
    Tensor x_ctx = random_tensor({n, s.config.c_ctx, h, w}, rng);
    Tape tape(false);
    Tensor out = bridge_forward(tape, f_in, x_ctx, s);
    ASSERT_EQ(out.shape(), f_in.shape());
    EXPECT_EQ(0, std::memcmp(out.values().data(), f_in.values().data(),
                             f_in.numel() * sizeof(double)));
  }
}

TEST(BridgeForward, ZeroContextZeroProjBiasIsIdentity) {
  Rng rng(8);
  BridgeState s = test_state(5, 4, 2, 0.9, rng);
  std::fill(s.proj_b.tensor.values_mut().begin(),
            s.proj_b.tensor.values_mut().end(), 0.0);
  Tensor f_in = random_tensor({2, 4, 3, 3}, rng);
  Tensor x_ctx = Tensor::zeros({2, 5, 3, 3});
  Tape tape(false);
  Tensor out = bridge_forward(tape, f_in, x_ctx, s);
  // Zero context refines to zero, gates to zero, projects to zero (bias 0).
  for (std::size_t i = 0; i < out.numel(); ++i) {
    EXPECT_DOUBLE_EQ(out.value_at(i), f_in.value_at(i));
  }
}

TEST(BridgeForward, RejectsSpatialMismatch) {
  Rng rng(9);
  BridgeState s = test_state(4, 4, 2, 0.0, rng);
  Tape tape(false);
  EXPECT_THROW(bridge_forward(tape, Tensor::zeros({1, 4, 3, 3}),
                              Tensor::zeros({1, 4, 5, 5}), s),
               ShapeError);
}

// The modular implementation must agree with the single-function oracle.
TEST(BridgeForward, MatchesStraightLineOracleOn100Cases) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int c_ctx = rng.next_int(1, 10);
    const int c_task = rng.next_int(1, 8);
    const int r = rng.next_int(1, 8);
    const double alpha = trial % 3 == 0 ? 1.0 : rng.uniform(-1.5, 1.5);
    BridgeState s = test_state(c_ctx, c_task, r, alpha, rng);
    const int n = rng.next_int(1, 2);
    const int h = rng.next_int(1, 7), w = rng.next_int(1, 7);
    Tensor f_in = random_tensor({n, c_task, h, w}, rng);
    Tensor x_ctx = random_tensor({n, c_ctx, h, w}, rng);

    Tape tape(false);
    std::vector<double> ref_m_c, ref_m_s;
    const std::vector<double> expected =
        oracles::BridgeReference::run(f_in, x_ctx, s, &ref_m_c, &ref_m_s);
    Tensor out = bridge_forward(tape, f_in, x_ctx, s);
    ASSERT_EQ(out.numel(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_NEAR(out.value_at(i), expected[i], 1e-12);
    }

    auto [m_c, refined] = channel_attention(tape, x_ctx, s);
    for (std::size_t i = 0; i < ref_m_c.size(); ++i) {
      EXPECT_NEAR(m_c.value_at(i), ref_m_c[i], 1e-12);
    }
    Tensor m_s = spatial_gate(tape, refined, s);
    for (std::size_t i = 0; i < ref_m_s.size(); ++i) {
      EXPECT_NEAR(m_s.value_at(i), ref_m_s[i], 1e-12);
    }
  }
}

TEST(BridgeForward, MasksAreStrictlyInsideUnitInterval) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    BridgeState s = test_state(6, 4, 2, 0.5, rng);
    Tensor x = random_tensor({2, 6, 5, 5}, rng, -8.0, 8.0);
    Tape tape(false);
    auto [m_c, refined] = channel_attention(tape, x, s);
    Tensor m_s = spatial_gate(tape, refined, s);
    for (const double v : m_c.values()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
    for (const double v : m_s.values()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

// With non-negative first-layer weights, zero biases, and non-negative
// inputs, the hidden relu is the identity, so scaling the input by c > 0
// scales the pre-activation linearly and the channel argmax is invariant.
TEST(ChannelAttention, GateArgmaxInvariantUnderPositiveScaling) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    BridgeState s = test_state(6, 6, 2, 0.0, rng);
    for (double& v : s.mlp_w1.tensor.values_mut()) v = std::abs(v);
    std::fill(s.mlp_b1.tensor.values_mut().begin(),
              s.mlp_b1.tensor.values_mut().end(), 0.0);
    std::fill(s.mlp_b2.tensor.values_mut().begin(),
              s.mlp_b2.tensor.values_mut().end(), 0.0);
    Tensor x = random_tensor({1, 6, 4, 4}, rng, 0.0, 1.0);

    const auto argmax_channel = [&](double scale_factor) {
      Tensor xs = Tensor::zeros(x.shape());
      for (std::size_t i = 0; i < x.numel(); ++i) {
        xs.values_mut()[i] = x.value_at(i) * scale_factor;
      }
      Tape tape(false);
      auto [m_c, refined] = channel_attention(tape, xs, s);
      int best = 0;
      for (int c = 1; c < 6; ++c) {
        if (m_c.value_at(static_cast<std::size_t>(c)) >
            m_c.value_at(static_cast<std::size_t>(best))) {
          best = c;
        }
      }
      return best;
    };

    const int base = argmax_channel(1.0);
    for (const double c : {0.5, 2.0, 7.0}) {
      EXPECT_EQ(argmax_channel(c), base);
    }
  }
}

TEST(BridgeForward, GradientsReachEveryParameterAndSkipFrozenProducers) {
  Rng rng(13);
  BridgeState s = test_state(6, 4, 2, 0.7, rng);

  // x_ctx produced by a frozen conv: no gradient may reach its weight.
  Parameter frozen_w =
      make_parameter("ctx.weight", random_tensor({6, 3, 1, 1}, rng), true);
  Parameter frozen_b =
      make_parameter("ctx.bias", random_tensor({6}, rng), true);
  Tensor images = random_tensor({2, 3, 5, 5}, rng);

  Tape tape;
  Tensor x_ctx = conv2d(tape, images, frozen_w.tensor, frozen_b.tensor, 1, 0);
  Tensor f_in = random_tensor({2, 4, 5, 5}, rng);
  f_in.set_requires_grad(true);
  Tensor out = bridge_forward(tape, f_in, x_ctx, s);
  Tensor loss = sum(tape, out);
  tape.backward(loss);

  for (const Parameter* p : s.params()) {
    ASSERT_TRUE(p->tensor.has_grad()) << p->name;
    double norm = 0.0;
    for (const double g : p->tensor.grad()) norm += std::abs(g);
    EXPECT_GT(norm, 0.0) << p->name;
  }
  EXPECT_FALSE(frozen_w.tensor.has_grad());
  EXPECT_FALSE(frozen_b.tensor.has_grad());
  EXPECT_FALSE(x_ctx.requires_grad());
}

TEST(BridgeState, InitializationIsDeterministic) {
  Rng rng1(77), rng2(77);
  BridgeState a = test_state(8, 8, 4, 0.0, rng1);
  BridgeState b = test_state(8, 8, 4, 0.0, rng2);
  auto pa = a.params();
  auto pb = b.params();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    ASSERT_EQ(pa[i]->tensor.numel(), pb[i]->tensor.numel());
    EXPECT_EQ(0, std::memcmp(pa[i]->tensor.values().data(),
                             pb[i]->tensor.values().data(),
                             pa[i]->tensor.numel() * sizeof(double)));
  }
}

}  // namespace
}  // namespace arc
