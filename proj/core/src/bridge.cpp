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

namespace arc {

void BridgeConfig::validate() const {
  if (c_ctx < 1 || c_task < 1 || reduction_ratio < 1) {
    throw ConfigError("bridge config requires c_ctx >= 1, c_task >= 1, r >= 1");
  }
}

std::vector<Parameter*> BridgeState::params() {
  return {&mlp_w1, &mlp_b1, &mlp_w2,    &mlp_b2,    &compress_w, &compress_b,
          &spatial_w, &spatial_b, &proj_w, &proj_b, &alpha};
}

std::vector<const Parameter*> BridgeState::params() const {
  return {&mlp_w1, &mlp_b1, &mlp_w2,    &mlp_b2,    &compress_w, &compress_b,
          &spatial_w, &spatial_b, &proj_w, &proj_b, &alpha};
}

BridgeState make_bridge(const BridgeConfig& config, const std::string& prefix,
                        Rng& init_rng) {
  config.validate();
  const int c = config.c_ctx;
  const int hidden = config.hidden_width();
  const int k = config.spatial_kernel;

  BridgeState s;
  s.config = config;
  s.mlp_w1 = make_parameter(prefix + "mlp_w1",
                            uniform_fan_in({hidden, c}, c, init_rng));
  s.mlp_b1 = make_parameter(prefix + "mlp_b1", Tensor::zeros({hidden}));
  s.mlp_w2 = make_parameter(prefix + "mlp_w2",
                            uniform_fan_in({c, hidden}, hidden, init_rng));
  s.mlp_b2 = make_parameter(prefix + "mlp_b2", Tensor::zeros({c}));
  s.compress_w = make_parameter(
      prefix + "compress_w", uniform_fan_in({hidden, c, 1, 1}, c, init_rng));
  s.compress_b = make_parameter(prefix + "compress_b", Tensor::zeros({hidden}));
  s.spatial_w = make_parameter(
      prefix + "spatial_w",
      uniform_fan_in({1, hidden, k, k}, hidden * k * k, init_rng));
  s.spatial_b = make_parameter(prefix + "spatial_b", Tensor::zeros({1}));
  s.proj_w = make_parameter(
      prefix + "proj_w",
      uniform_fan_in({config.c_task, c, 1, 1}, c, init_rng));
  s.proj_b = make_parameter(prefix + "proj_b", Tensor::zeros({config.c_task}));
  s.alpha = make_parameter(prefix + "alpha", Tensor::scalar(config.alpha_init));
  return s;
}

namespace {

// Shared two-layer perceptron over pooled channel descriptors (N x C).
Tensor shared_mlp(Tape& tape, const Tensor& z, const BridgeState& s) {
  Tensor h = relu(tape, linear(tape, z, s.mlp_w1.tensor, s.mlp_b1.tensor));
  return linear(tape, h, s.mlp_w2.tensor, s.mlp_b2.tensor);
}

}  // namespace

std::pair<Tensor, Tensor> channel_attention(Tape& tape, const Tensor& x_ctx,
                                            const BridgeState& state) {
  if (x_ctx.rank() != 4 || x_ctx.dim(1) != state.config.c_ctx) {
    throw ShapeError("channel_attention: expected N x " +
                     std::to_string(state.config.c_ctx) + " x H x W, got " +
                     shape_str(x_ctx.shape()));
  }
  const int n = x_ctx.dim(0);
  const int c = x_ctx.dim(1);

  Tensor z_avg = reshape(tape, global_avg_pool(tape, x_ctx), {n, c});
  Tensor z_max = reshape(tape, global_max_pool(tape, x_ctx), {n, c});
  Tensor pre = add(tape, shared_mlp(tape, z_avg, state),
                   shared_mlp(tape, z_max, state));
  Tensor m_c = reshape(tape, sigmoid(tape, pre), {n, c, 1, 1});
  Tensor refined = mul_elementwise(tape, x_ctx, m_c);
  return {m_c, refined};
}

Tensor spatial_gate(Tape& tape, const Tensor& x_ctx_refined,
                    const BridgeState& state) {
  if (x_ctx_refined.rank() != 4 ||
      x_ctx_refined.dim(1) != state.config.c_ctx) {
    throw ShapeError("spatial_gate: expected N x " +
                     std::to_string(state.config.c_ctx) + " x H x W, got " +
                     shape_str(x_ctx_refined.shape()));
  }
  Tensor compressed = conv2d(tape, x_ctx_refined, state.compress_w.tensor,
                             state.compress_b.tensor, 1, 0);
  // Padding (k-1)/2 keeps H x W, down to 1 x 1 maps.
  Tensor pre = conv2d(tape, compressed, state.spatial_w.tensor,
                      state.spatial_b.tensor, 1,
                      (state.config.spatial_kernel - 1) / 2);
  return sigmoid(tape, pre);
}

Tensor bridge_forward(Tape& tape, const Tensor& f_in, const Tensor& x_ctx,
                      const BridgeState& state) {
  if (f_in.rank() != 4 || x_ctx.rank() != 4) {
    throw ShapeError("bridge_forward expects rank-4 feature maps");
  }
  if (f_in.dim(0) != x_ctx.dim(0) || f_in.dim(2) != x_ctx.dim(2) ||
      f_in.dim(3) != x_ctx.dim(3)) {
    throw ShapeError("bridge_forward: f_in " + shape_str(f_in.shape()) +
                     " and x_ctx " + shape_str(x_ctx.shape()) +
                     " disagree on N or spatial extent");
  }
  if (f_in.dim(1) != state.config.c_task) {
    throw ShapeError("bridge_forward: f_in channels " +
                     std::to_string(f_in.dim(1)) + " != c_task " +
                     std::to_string(state.config.c_task));
  }

  auto [m_c, refined] = channel_attention(tape, x_ctx, state);
  Tensor m_s = spatial_gate(tape, refined, state);
  Tensor gated = mul_elementwise(tape, refined, m_s);
  Tensor projected =
      conv2d(tape, gated, state.proj_w.tensor, state.proj_b.tensor, 1, 0);
  return add(tape, f_in, scale(tape, projected, state.alpha.tensor));
}

}  // namespace arc
