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

#ifndef ARC_TENSOR_HPP_
#define ARC_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "arc/errors.hpp"

namespace arc {

// Extents in row-major layout order; feature maps are N x C x H x W.
using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {
struct TensorData {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until a backward pass needs it
  bool requires_grad = false;
};
}  // namespace detail

// Dense 64-bit float tensor. Copies are cheap handles onto shared storage;
// tensors that have been recorded on a tape are never mutated in place, so
// reverse replay always sees the forward values.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from_values(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  int dim(int axis) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  // Writable view, intended for initialization before the tensor enters a
  // forward pass.
  std::span<double> values_mut();
  double value_at(std::size_t flat) const;
  double scalar_value() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  void ensure_grad();
  void zero_grad();
  void drop_grad();

  bool same_storage(const Tensor& other) const {
    return data_ == other.data_;
  }

 private:
  std::shared_ptr<detail::TensorData> data_;
};

// Reverse-mode tape. Ops append one backward step each during the forward
// pass, so the step list is topologically ordered by construction; backward()
// replays it once, in reverse.
class Tape {
 public:
  Tape() = default;
  explicit Tape(bool recording) : recording_(recording) {}

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

  std::size_t size() const { return steps_.size(); }

  void record(std::function<void()> backward_step);

  // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse, accumulating
  // gradients into every reachable tensor with requires_grad set. The tape is
  // consumed: a second backward without a new forward is rejected.
  void backward(const Tensor& loss);

  void clear() { steps_.clear(); }

 private:
  bool recording_ = true;
  std::vector<std::function<void()>> steps_;
};

}  // namespace arc

#endif  // ARC_TENSOR_HPP_
