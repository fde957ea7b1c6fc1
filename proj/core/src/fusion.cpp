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

#include "arc/fusion.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace arc {

std::string_view branch_name(Branch b) {
  return b == Branch::context ? "context" : "specialist";
}

Branch parse_branch(std::string_view s) {
  if (s == "context") return Branch::context;
  if (s == "specialist") return Branch::specialist;
  throw ConfigError("unknown branch tag: " + std::string(s));
}

double iou(const BBox& a, const BBox& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

std::vector<Detection> nms(const std::vector<Detection>& dets,
                           double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&dets](std::size_t a, std::size_t b) {
                     return dets[a].confidence > dets[b].confidence;
                   });
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const std::size_t i : order) {
    const Detection& cand = dets[i];
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (k.class_id == cand.class_id &&
          iou(k.box, cand.box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

std::vector<Detection> veto_fuse(const std::vector<Detection>& context_dets,
                                 const std::vector<Detection>& specialist_dets,
                                 const VetoConfig& cfg) {
  std::vector<Detection> out;
  out.reserve(context_dets.size() + specialist_dets.size());
  // Context detections pass unconditionally; only specialists can be vetoed.
  out.insert(out.end(), context_dets.begin(), context_dets.end());
  for (const Detection& s : specialist_dets) {
    bool vetoed = false;
    for (const Detection& c : context_dets) {
      if (c.confidence >= cfg.context_confidence_floor &&
          iou(c.box, s.box) > cfg.iou_threshold) {
        vetoed = true;
        break;
      }
    }
    if (!vetoed) out.push_back(s);
  }
  return out;
}

void write_detections(std::ostream& os, std::span<const DetectionRecord> recs) {
  char line[256];
  for (const DetectionRecord& r : recs) {
    std::snprintf(line, sizeof(line),
                  "%d\t%s\t%d\t%.6f\t%.2f\t%.2f\t%.2f\t%.2f\n", r.image_id,
                  branch_name(r.det.branch).data(), r.det.class_id,
                  r.det.confidence, r.det.box.x1, r.det.box.y1, r.det.box.x2,
                  r.det.box.y2);
    os << line;
  }
}

std::vector<DetectionRecord> read_detections(std::istream& is) {
  std::vector<DetectionRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string image_id, branch, class_id, conf, x1, y1, x2, y2;
    if (!std::getline(ls, image_id, '\t') || !std::getline(ls, branch, '\t') ||
        !std::getline(ls, class_id, '\t') || !std::getline(ls, conf, '\t') ||
        !std::getline(ls, x1, '\t') || !std::getline(ls, y1, '\t') ||
        !std::getline(ls, x2, '\t') || !std::getline(ls, y2, '\t')) {
      throw ConfigError("malformed detection line: " + line);
    }
    out.push_back(DetectionRecord{
        std::stoi(image_id),
        Detection{BBox(std::stod(x1), std::stod(y1), std::stod(x2),
                       std::stod(y2)),
                  std::stoi(class_id), std::stod(conf), parse_branch(branch)}});
  }
  return out;
}

}  // namespace arc
