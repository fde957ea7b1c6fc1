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

#ifndef ARC_EVAL_RUNNER_HPP_
#define ARC_EVAL_RUNNER_HPP_

#include <span>
#include <vector>

#include "arc/metrics.hpp"
#include "arc/model.hpp"
#include "arc/synth.hpp"

namespace arc {

struct EvalOptions {
  // Decode at a low threshold so average precision sees the full curve; the
  // report's precision/recall still use the fixed 0.25 operating point.
  double decode_conf = 0.05;
  double nms_iou = 0.5;
  bool veto = true;
  VetoConfig veto_cfg;
};

// Decode + per-class NMS for every branch, then veto fusion (or plain
// concatenation when veto is off). One list per image.
std::vector<std::vector<Detection>> run_detector(const ArcModel& model,
                                                 const Tensor& images,
                                                 const EvalOptions& opts);

struct DatasetEval {
  std::vector<DetectionRecord> detections;  // image ids = scene indices
  std::vector<GroundTruth> ground_truth;
  EvalReport report;
};

DatasetEval evaluate_model(const ArcModel& model, std::span<const Scene> scenes,
                           const std::vector<int>& class_set,
                           const EvalOptions& opts);

}  // namespace arc

#endif  // ARC_EVAL_RUNNER_HPP_
