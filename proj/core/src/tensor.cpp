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

#include <sstream>
#include <utility>

namespace arc {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (const int d : shape) {
    if (d <= 0) throw ShapeError("non-positive extent in shape " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor Tensor::zeros(Shape shape) {
  return full(std::move(shape), 0.0);
}

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  Tensor t;
  t.data_ = std::make_shared<detail::TensorData>();
  t.data_->shape = std::move(shape);
  t.data_->values.assign(n, value);
  return t;
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values) {
  const std::size_t n = shape_numel(shape);
  if (n != values.size()) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  }
  Tensor t;
  t.data_ = std::make_shared<detail::TensorData>();
  t.data_->shape = std::move(shape);
  t.data_->values = std::move(values);
  return t;
}

Tensor Tensor::scalar(double value) {
  return from_values({1}, {value});
}

const Shape& Tensor::shape() const { return data_->shape; }

int Tensor::rank() const { return static_cast<int>(data_->shape.size()); }

int Tensor::dim(int axis) const { return data_->shape[static_cast<std::size_t>(axis)]; }

std::size_t Tensor::numel() const { return data_->values.size(); }

std::span<const double> Tensor::values() const { return data_->values; }

std::span<double> Tensor::values_mut() { return data_->values; }

double Tensor::value_at(std::size_t flat) const { return data_->values[flat]; }

double Tensor::scalar_value() const {
  if (numel() != 1) {
    throw ShapeError("scalar_value on tensor of shape " + shape_str(shape()));
  }
  return data_->values[0];
}

bool Tensor::requires_grad() const {
  return data_ != nullptr && data_->requires_grad;
}

void Tensor::set_requires_grad(bool on) {
  data_->requires_grad = on;
  if (!on) data_->grad.clear();
}

bool Tensor::has_grad() const {
  return data_ != nullptr && !data_->grad.empty();
}

std::span<const double> Tensor::grad() const { return data_->grad; }

std::span<double> Tensor::grad_mut() { return data_->grad; }

void Tensor::ensure_grad() {
  if (data_->grad.empty()) data_->grad.assign(data_->values.size(), 0.0);
}

void Tensor::zero_grad() {
  data_->grad.assign(data_->grad.size(), 0.0);
}

void Tensor::drop_grad() { data_->grad.clear(); }

void Tape::record(std::function<void()> backward_step) {
  if (recording_) steps_.push_back(std::move(backward_step));
}

void Tape::backward(const Tensor& loss) {
  if (steps_.empty()) {
    throw ShapeError("backward called before any op was recorded");
  }
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward requires a scalar loss");
  }
  if (!loss.requires_grad()) {
    throw ShapeError("loss is not connected to any recorded op");
  }
  Tensor seed = loss;
  seed.ensure_grad();
  seed.grad_mut()[0] = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  steps_.clear();
}

}  // namespace arc
