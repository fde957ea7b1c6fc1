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

#ifndef ARC_METRICS_HPP_
#define ARC_METRICS_HPP_

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arc/fusion.hpp"

namespace arc {

struct GroundTruth {
  int image_id;
  int class_id;
  BBox box;
};

// Greedy matching outcome over a (possibly multi-image, multi-class) set of
// detections. Flags follow the internal visit order: confidence descending,
// ties broken by input index. Matching is confined to the same
// (image_id, class_id) pair; each ground truth matches at most once.
struct Matches {
  std::vector<std::size_t> order;  // indices into the input detections
  std::vector<char> tp;            // aligned with `order`
  int fn = 0;
  int num_gt = 0;
};

Matches match_detections(std::span<const DetectionRecord> dets,
                         std::span<const GroundTruth> gts,
                         double iou_threshold);

// 101-point interpolated AP over the precision envelope, recall sampled at
// {0.00, 0.01, ..., 1.00}. `tp_sequence` must be ordered by confidence
// descending. Returns nullopt when num_gt == 0 and the sequence is empty
// (AP undefined; the class is excluded from means); returns 0 when num_gt
// == 0 but detections exist.
std::optional<double> average_precision(std::span<const char> tp_sequence,
                                        int num_gt);

// Per-class AP at IoU thresholds 0.50:0.05:0.95 plus the fixed-operating-
// point precision/recall and counts (IoU 0.5, confidence 0.25).
struct EvalReport {
  std::vector<int> class_ids;
  std::vector<std::string> class_names;        // aligned; may hold fallbacks
  std::vector<double> iou_thresholds;          // 0.50 .. 0.95
  // ap[c][t]: AP of class_ids[c] at iou_thresholds[t]; NaN when undefined
  // (no ground truth and no detections for that class).
  std::vector<std::vector<double>> ap;
  double map50 = 0.0;
  double map5095 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  struct ClassCounts {
    int tp = 0, fp = 0, fn = 0;
  };
  std::vector<ClassCounts> counts;             // aligned with class_ids
  double conf_operating_point = 0.25;
  double iou_operating_point = 0.5;
};

EvalReport evaluate(std::span<const DetectionRecord> dets,
                    std::span<const GroundTruth> gts,
                    const std::vector<int>& class_set,
                    const std::map<int, std::string>& class_names = {});

// Forgetting Measure: change in base mAP after adaptation, in percentage
// points. Negative means the model forgot.
double forgetting_points(double map_base_before, double map_base_after);

// The same change expressed relative to the pre-adaptation value, in percent
// (-100 means the base task was lost entirely).
double forgetting_relative_percent(double map_base_before,
                                   double map_base_after);

void write_report_text(std::ostream& os, const EvalReport& report);
// Machine-readable table: "class,iou_threshold,ap" rows followed by
// "summary,<metric>,<value>" rows. Values use max round-trip precision.
void write_report_csv(std::ostream& os, const EvalReport& report);
// Reads the summary rows back from a CSV written by write_report_csv.
std::map<std::string, double> read_report_summary(std::istream& is);

// Ground-truth interchange, same shape as the detection format with branch
// "gt" and confidence 1.
void write_groundtruth(std::ostream& os, std::span<const GroundTruth> gts);
std::vector<GroundTruth> read_groundtruth(std::istream& is);

}  // namespace arc

#endif  // ARC_METRICS_HPP_
