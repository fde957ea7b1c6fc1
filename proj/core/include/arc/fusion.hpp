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

#ifndef ARC_FUSION_HPP_
#define ARC_FUSION_HPP_

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "arc/errors.hpp"

namespace arc {

// Axis-aligned pixel box; construction rejects degenerate extents.
struct BBox {
  double x1, y1, x2, y2;

  BBox(double x1_, double y1_, double x2_, double y2_)
      : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
    if (!(x1 < x2) || !(y1 < y2)) {
      throw ShapeError("degenerate box");
    }
  }

  double area() const { return (x2 - x1) * (y2 - y1); }
};

enum class Branch { context, specialist };

std::string_view branch_name(Branch b);
Branch parse_branch(std::string_view s);

struct Detection {
  BBox box;
  int class_id;
  double confidence;  // in [0, 1]
  Branch branch;
};

struct VetoConfig {
  double iou_threshold = 0.5;
  // Minimum context-branch confidence for a veto to fire.
  double context_confidence_floor = 0.5;
};

// Intersection area over union area; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

// Greedy per-class suppression: detections are visited by (confidence desc,
// input index asc); a detection is dropped when it overlaps an already kept
// same-class detection with IoU > threshold. Output keeps the visit order.
std::vector<Detection> nms(const std::vector<Detection>& dets,
                           double iou_threshold);

// Inference-time veto: every context detection survives; a specialist
// detection is dropped when some context detection with confidence >= floor
// overlaps it with IoU > threshold, regardless of the context class. Order
// within each branch is preserved, context detections first.
std::vector<Detection> veto_fuse(const std::vector<Detection>& context_dets,
                                 const std::vector<Detection>& specialist_dets,
                                 const VetoConfig& cfg);

// Line-delimited interchange shared by the eval tooling, one detection per
// line: image_id, branch, class_id, confidence (6 decimals), x1, y1, x2, y2
// (2 decimals), tab-separated.
struct DetectionRecord {
  int image_id;
  Detection det;
};

void write_detections(std::ostream& os, std::span<const DetectionRecord> recs);
std::vector<DetectionRecord> read_detections(std::istream& is);

}  // namespace arc

#endif  // ARC_FUSION_HPP_
