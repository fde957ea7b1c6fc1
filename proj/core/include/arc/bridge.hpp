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

#ifndef ARC_BRIDGE_HPP_
#define ARC_BRIDGE_HPP_

#include <string>
#include <utility>
#include <vector>

#include "arc/ops.hpp"
#include "arc/param.hpp"
#include "arc/rng.hpp"
#include "arc/tensor.hpp"

namespace arc {

// Context-Guided Bridge hyperparameters. The bridge reads frozen-branch
// features with c_ctx channels and injects a residual into the task stream
// with c_task channels.
struct BridgeConfig {
  int c_ctx = 0;
  int c_task = 0;
  int reduction_ratio = 8;
  double alpha_init = 0.0;  // 0 makes the bridge an exact identity at start
  int spatial_kernel = 7;   // fixed by the architecture
  int compress_kernel = 1;  // fixed

  int hidden_width() const { return std::max(1, c_ctx / reduction_ratio); }
  void validate() const;
};

// Learnable state. The MLP is shared: the same weights process both pooled
// descriptors. All bridge parameters are trainable.
struct BridgeState {
  BridgeConfig config;
  Parameter mlp_w1, mlp_b1;          // c_ctx -> hidden
  Parameter mlp_w2, mlp_b2;          // hidden -> c_ctx
  Parameter compress_w, compress_b;  // 1x1 conv, c_ctx -> hidden
  Parameter spatial_w, spatial_b;    // 7x7 conv, hidden -> 1, padding 3
  Parameter proj_w, proj_b;          // 1x1 conv, c_ctx -> c_task
  Parameter alpha;                   // scalar residual gain

  std::vector<Parameter*> params();
  std::vector<const Parameter*> params() const;
};

// Weights uniform in +-1/sqrt(fan_in) from the given stream, biases zero,
// alpha = alpha_init. Parameter names get the given prefix (e.g.
// "bridge.0."), which is also the checkpoint prefix.
BridgeState make_bridge(const BridgeConfig& config, const std::string& prefix,
                        Rng& init_rng);

// Channel attention: m_c = sigmoid(MLP(avg_pool(x)) + MLP(max_pool(x))),
// refined = m_c (broadcast over H x W) * x. Returns (m_c as N x C x 1 x 1,
// refined).
std::pair<Tensor, Tensor> channel_attention(Tape& tape, const Tensor& x_ctx,
                                            const BridgeState& state);

// Spatial gate: sigmoid(conv7x7(conv1x1(x))) with padding 3, one output
// channel; spatial extent is preserved.
Tensor spatial_gate(Tape& tape, const Tensor& x_ctx_refined,
                    const BridgeState& state);

// Full bridge: f_in + alpha * proj(m_s * refined). Differentiable through
// every bridge parameter; with alpha == 0 the output equals f_in.
Tensor bridge_forward(Tape& tape, const Tensor& f_in, const Tensor& x_ctx,
                      const BridgeState& state);

}  // namespace arc

#endif  // ARC_BRIDGE_HPP_
