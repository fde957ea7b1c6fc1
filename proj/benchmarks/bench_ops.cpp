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

#include <benchmark/benchmark.h>

#include "arc/bridge.hpp"
#include "arc/ops.hpp"
#include "arc/rng.hpp"

namespace {

arc::Tensor random_tensor(arc::Shape shape, arc::Rng& rng) {
  arc::Tensor t = arc::Tensor::zeros(std::move(shape));
  for (double& v : t.values_mut()) v = rng.uniform(-1, 1);
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  arc::Rng rng(1);
  arc::Tensor in = random_tensor({8, 16, 16, 16}, rng);
  arc::Tensor w = random_tensor({32, 16, 3, 3}, rng);
  arc::Tensor b = random_tensor({32}, rng);
  for (auto _ : state) {
    arc::Tape tape(false);
    benchmark::DoNotOptimize(arc::conv2d(tape, in, w, b, 1, 1));
  }
}
BENCHMARK(BM_Conv2dForward);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  arc::Rng rng(2);
  arc::Tensor in = random_tensor({8, 16, 16, 16}, rng);
  arc::Tensor w = random_tensor({32, 16, 3, 3}, rng);
  arc::Tensor b = random_tensor({32}, rng);
  in.set_requires_grad(true);
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  for (auto _ : state) {
    arc::Tape tape;
    arc::Tensor out = arc::conv2d(tape, in, w, b, 1, 1);
    arc::Tensor loss = arc::sum(tape, out);
    tape.backward(loss);
    in.zero_grad();
    w.zero_grad();
    b.zero_grad();
  }
}
BENCHMARK(BM_Conv2dForwardBackward);

void BM_Conv2dStride2(benchmark::State& state) {
  arc::Rng rng(3);
  arc::Tensor in = random_tensor({8, 3, 64, 64}, rng);
  arc::Tensor w = random_tensor({8, 3, 4, 4}, rng);
  arc::Tensor b = random_tensor({8}, rng);
  for (auto _ : state) {
    arc::Tape tape(false);
    benchmark::DoNotOptimize(arc::conv2d(tape, in, w, b, 2, 1));
  }
}
BENCHMARK(BM_Conv2dStride2);

void BM_BridgeForward(benchmark::State& state) {
  arc::Rng rng(4);
  arc::BridgeConfig cfg;
  cfg.c_ctx = 32;
  cfg.c_task = 32;
  arc::BridgeState s = arc::make_bridge(cfg, "b.", rng);
  arc::Tensor f_in = random_tensor({8, 32, 8, 8}, rng);
  arc::Tensor x_ctx = random_tensor({8, 32, 8, 8}, rng);
  for (auto _ : state) {
    arc::Tape tape(false);
    benchmark::DoNotOptimize(arc::bridge_forward(tape, f_in, x_ctx, s));
  }
}
BENCHMARK(BM_BridgeForward);

void BM_Sigmoid(benchmark::State& state) {
  arc::Rng rng(5);
  arc::Tensor in = random_tensor({8, 32, 16, 16}, rng);
  for (auto _ : state) {
    arc::Tape tape(false);
    benchmark::DoNotOptimize(arc::sigmoid(tape, in));
  }
}
BENCHMARK(BM_Sigmoid);

}  // namespace
