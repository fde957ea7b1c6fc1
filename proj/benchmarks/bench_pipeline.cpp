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

#include "arc/eval_runner.hpp"
#include "arc/fusion.hpp"
#include "arc/metrics.hpp"
#include "arc/model.hpp"
#include "arc/rng.hpp"
#include "arc/synth.hpp"

namespace {

void BM_RenderScene(benchmark::State& state) {
  const arc::SceneSpec spec;
  std::uint64_t idx = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        arc::render_scene(spec, 11, idx++, arc::ClassMix::mixed));
  }
}
BENCHMARK(BM_RenderScene);

void BM_ModelForward(benchmark::State& state) {
  arc::BackboneConfig cfg;
  arc::ArcModel model =
      arc::make_model(cfg, 3, arc::base_class_names(), 1);
  arc::Rng rng(1);
  arc::Tensor images = arc::Tensor::zeros({8, 3, 64, 64});
  for (double& v : images.values_mut()) v = rng.uniform(0, 1);
  for (auto _ : state) {
    arc::Tape tape(false);
    benchmark::DoNotOptimize(arc::model_forward(tape, model, images));
  }
}
BENCHMARK(BM_ModelForward);

void BM_Nms(benchmark::State& state) {
  arc::Rng rng(2);
  std::vector<arc::Detection> dets;
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
    dets.push_back(arc::Detection{arc::BBox(x, y, x + rng.uniform(4, 14),
                                            y + rng.uniform(4, 14)),
                                  rng.next_int(0, 3), rng.next_double(),
                                  arc::Branch::context});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(arc::nms(dets, 0.5));
  }
}
BENCHMARK(BM_Nms);

void BM_Evaluate(benchmark::State& state) {
  arc::Rng rng(3);
  std::vector<arc::DetectionRecord> dets;
  std::vector<arc::GroundTruth> gts;
  for (int i = 0; i < 400; ++i) {
    const double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
    const int img = rng.next_int(0, 63);
    const int cls = rng.next_int(0, 3);
    gts.push_back(arc::GroundTruth{img, cls,
                                   arc::BBox(x, y, x + 10, y + 10)});
    dets.push_back(arc::DetectionRecord{
        img, arc::Detection{arc::BBox(x + rng.uniform(-2, 2),
                                      y + rng.uniform(-2, 2), x + 10, y + 10),
                            cls, rng.next_double(), arc::Branch::context}});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(arc::evaluate(dets, gts, {0, 1, 2, 3}));
  }
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
