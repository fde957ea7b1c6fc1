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

#include "arc/eval_runner.hpp"

#include <algorithm>

namespace arc {

std::vector<std::vector<Detection>> run_detector(const ArcModel& model,
                                                 const Tensor& images,
                                                 const EvalOptions& opts) {
  Tape tape(false);
  RawOutputs raw = model_forward(tape, model, images);
  const int stride = model.backbone.stride();
  const int image_size = model.backbone.input_size;

  auto context = decode(raw.context, opts.decode_conf, stride, image_size,
                        model.context_head.config.class_id_offset,
                        Branch::context);
  std::vector<std::vector<std::vector<Detection>>> specialist_dets;
  for (std::size_t k = 0; k < model.specialists.size(); ++k) {
    specialist_dets.push_back(
        decode(raw.specialists[k], opts.decode_conf, stride, image_size,
               model.specialists[k].head.config.class_id_offset,
               Branch::specialist));
  }

  const std::size_t n = context.size();
  std::vector<std::vector<Detection>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<Detection> ctx = nms(context[i], opts.nms_iou);
    std::vector<Detection> spec;
    for (const auto& per_head : specialist_dets) {
      const std::vector<Detection> kept = nms(per_head[i], opts.nms_iou);
      spec.insert(spec.end(), kept.begin(), kept.end());
    }
    if (opts.veto) {
      out[i] = veto_fuse(ctx, spec, opts.veto_cfg);
    } else {
      out[i] = ctx;
      out[i].insert(out[i].end(), spec.begin(), spec.end());
    }
  }
  return out;
}

DatasetEval evaluate_model(const ArcModel& model, std::span<const Scene> scenes,
                           const std::vector<int>& class_set,
                           const EvalOptions& opts) {
  DatasetEval ev;
  const int image_size = model.backbone.input_size;
  constexpr std::size_t kEvalBatch = 8;

  for (std::size_t start = 0; start < scenes.size(); start += kEvalBatch) {
    const std::size_t end = std::min(scenes.size(), start + kEvalBatch);
    const int n = static_cast<int>(end - start);
    Tensor batch = Tensor::zeros({n, 3, image_size, image_size});
    double* out = batch.values_mut().data();
    const std::size_t per =
        3 * static_cast<std::size_t>(image_size) * image_size;
    for (std::size_t i = start; i < end; ++i) {
      std::copy(scenes[i].image.values().begin(),
                scenes[i].image.values().end(), out + (i - start) * per);
    }
    const auto dets = run_detector(model, batch, opts);
    for (std::size_t i = start; i < end; ++i) {
      for (const Detection& d : dets[i - start]) {
        ev.detections.push_back(DetectionRecord{static_cast<int>(i), d});
      }
      for (GroundTruth g : scenes[i].gts) {
        g.image_id = static_cast<int>(i);
        ev.ground_truth.push_back(g);
      }
    }
  }

  std::map<int, std::string> names;
  const auto all = all_class_names();
  for (std::size_t i = 0; i < all.size(); ++i) {
    names[static_cast<int>(i)] = all[i];
  }
  ev.report = evaluate(ev.detections, ev.ground_truth, class_set, names);
  return ev;
}

}  // namespace arc
