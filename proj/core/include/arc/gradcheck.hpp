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

#ifndef ARC_GRADCHECK_HPP_
#define ARC_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "arc/tensor.hpp"

namespace arc {

inline constexpr double kGradCheckEpsilon = 1e-5;
inline constexpr double kGradCheckTolerance = 1e-4;

// Compares the analytic gradients already stored on `inputs` against central
// finite differences of `forward_value`, which must recompute the scalar
// objective from the inputs' current values (it is invoked with temporarily
// perturbed entries). Relative error uses max(|analytic|, |numeric|, 1e-6)
// as the denominator.
double max_grad_rel_error(std::span<Tensor> inputs,
                          const std::function<double()>& forward_value,
                          double epsilon = kGradCheckEpsilon);

struct OpGradCheck {
  std::string op;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Finite-difference checks for every differentiable primitive, the composed
// bridge (pooled descriptors through the residual projection), and the
// detection loss. Each op runs `cases` times with distinct sub-seeds.
std::vector<OpGradCheck> run_gradcheck_suite(std::uint64_t seed, int cases,
                                             double tolerance = kGradCheckTolerance);

}  // namespace arc

#endif  // ARC_GRADCHECK_HPP_
