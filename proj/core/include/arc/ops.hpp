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

#ifndef ARC_OPS_HPP_
#define ARC_OPS_HPP_

#include "arc/tensor.hpp"

namespace arc {

// Differentiable primitives. Each op validates shapes, computes the forward
// value into a fresh tensor, and records one backward step on the tape when
// any input requires a gradient. Gradients accumulate (+=), so shared inputs
// receive the sum of all their downstream contributions.

// Cross-correlation with square k x k kernels, zero padding, no kernel flip.
// input: N x Cin x H x W, weight: Cout x Cin x k x k, bias: Cout.
// Output extent (H + 2*padding - k) / stride + 1 must be a positive integer.
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias, int stride, int padding);

// N x C x H x W -> N x C x 1 x 1, arithmetic mean per plane.
Tensor global_avg_pool(Tape& tape, const Tensor& input);

// N x C x H x W -> N x C x 1 x 1, per-plane maximum. On ties the gradient
// routes to the first maximal element in row-major order.
Tensor global_max_pool(Tape& tape, const Tensor& input);

// input: N x Cin, weight: Cout x Cin, bias: Cout -> N x Cout.
Tensor linear(Tape& tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias);

Tensor sigmoid(Tape& tape, const Tensor& input);

Tensor relu(Tape& tape, const Tensor& input);

// Hadamard product. b must either match a's shape exactly or be a rank-4
// tensor broadcastable to a over singleton axes (covers the N x C x 1 x 1
// channel mask and the N x 1 x H x W spatial mask).
Tensor mul_elementwise(Tape& tape, const Tensor& a, const Tensor& b);

// Elementwise sum of equal-shaped tensors.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);

// a * s with a scalar (single-element) tensor s. The scalar's gradient is
// sum(upstream * a).
Tensor scale(Tape& tape, const Tensor& a, const Tensor& s);

// Copy into a new shape with identical element count; gradient passes
// through flat.
Tensor reshape(Tape& tape, const Tensor& input, Shape shape);

// Sum of all elements, as a scalar tensor.
Tensor sum(Tape& tape, const Tensor& input);

}  // namespace arc

#endif  // ARC_OPS_HPP_
