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

#ifndef ARC_PARAM_HPP_
#define ARC_PARAM_HPP_

#include <string>
#include <utility>

#include "arc/rng.hpp"
#include "arc/tensor.hpp"

namespace arc {

// A named, optionally frozen tensor. Frozen parameters carry no gradient
// storage and are never touched by the optimizer.
struct Parameter {
  std::string name;
  Tensor tensor;
  bool frozen = false;

  void set_frozen(bool f) {
    frozen = f;
    tensor.set_requires_grad(!f);
  }
};

inline Parameter make_parameter(std::string name, Tensor tensor,
                                bool frozen = false) {
  Parameter p{std::move(name), std::move(tensor), frozen};
  p.tensor.set_requires_grad(!frozen);
  return p;
}

// Uniform init in +-1/sqrt(fan_in), the convention used for every conv and
// affine weight in this project. Biases start at zero.
inline Tensor uniform_fan_in(Shape shape, int fan_in, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.values_mut()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace arc

#endif  // ARC_PARAM_HPP_
