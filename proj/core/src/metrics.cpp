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

#include "arc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace arc {

Matches match_detections(std::span<const DetectionRecord> dets,
                         std::span<const GroundTruth> gts,
                         double iou_threshold) {
  Matches m;
  m.num_gt = static_cast<int>(gts.size());
  m.order.resize(dets.size());
  std::iota(m.order.begin(), m.order.end(), 0);
  std::stable_sort(m.order.begin(), m.order.end(),
                   [&dets](std::size_t a, std::size_t b) {
                     return dets[a].det.confidence > dets[b].det.confidence;
                   });
  std::vector<char> gt_used(gts.size(), 0);
  m.tp.resize(dets.size(), 0);
  for (std::size_t oi = 0; oi < m.order.size(); ++oi) {
    const DetectionRecord& d = dets[m.order[oi]];
    double best_iou = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_used[gi]) continue;
      if (gts[gi].image_id != d.image_id) continue;
      if (gts[gi].class_id != d.det.class_id) continue;
      const double v = iou(d.det.box, gts[gi].box);
      // Strict > keeps the lowest ground-truth index on IoU ties.
      if (v > best_iou) {
        best_iou = v;
        best_gt = gi;
      }
    }
    if (best_gt < gts.size() && best_iou >= iou_threshold) {
      gt_used[best_gt] = 1;
      m.tp[oi] = 1;
    }
  }
  m.fn = m.num_gt -
         static_cast<int>(std::count(m.tp.begin(), m.tp.end(), char(1)));
  return m;
}

std::optional<double> average_precision(std::span<const char> tp_sequence,
                                        int num_gt) {
  if (num_gt == 0) {
    if (tp_sequence.empty()) return std::nullopt;
    return 0.0;
  }
  const std::size_t n = tp_sequence.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += tp_sequence[i] ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  // Precision envelope: for each point, the best precision at any recall at
  // or beyond it.
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double acc = 0.0;
  std::size_t idx = 0;
  for (int r = 0; r <= 100; ++r) {
    const double target = static_cast<double>(r) / 100.0;
    while (idx < n && recall[idx] < target - 1e-12) ++idx;
    if (idx < n) acc += precision[idx];
  }
  return acc / 101.0;
}

namespace {

double mean_ignoring_nan(const std::vector<double>& v) {
  double acc = 0.0;
  int count = 0;
  for (const double x : v) {
    if (!std::isnan(x)) {
      acc += x;
      ++count;
    }
  }
  return count > 0 ? acc / count : 0.0;
}

}  // namespace

EvalReport evaluate(std::span<const DetectionRecord> dets,
                    std::span<const GroundTruth> gts,
                    const std::vector<int>& class_set,
                    const std::map<int, std::string>& class_names) {
  if (class_set.empty()) throw ConfigError("evaluate: empty class set");
  EvalReport rep;
  rep.class_ids = class_set;
  for (const int cid : class_set) {
    auto it = class_names.find(cid);
    rep.class_names.push_back(it != class_names.end()
                                  ? it->second
                                  : "class_" + std::to_string(cid));
  }
  for (int t = 0; t < 10; ++t) {
    rep.iou_thresholds.push_back(0.5 + 0.05 * t);
  }

  rep.ap.assign(class_set.size(),
                std::vector<double>(rep.iou_thresholds.size(),
                                    std::numeric_limits<double>::quiet_NaN()));
  rep.counts.assign(class_set.size(), EvalReport::ClassCounts{});

  int op_tp = 0, op_fp = 0, op_gt = 0;

  for (std::size_t c = 0; c < class_set.size(); ++c) {
    const int cid = class_set[c];
    std::vector<DetectionRecord> cd;
    std::vector<GroundTruth> cg;
    for (const auto& d : dets) {
      if (d.det.class_id == cid) cd.push_back(d);
    }
    for (const auto& g : gts) {
      if (g.class_id == cid) cg.push_back(g);
    }

    for (std::size_t t = 0; t < rep.iou_thresholds.size(); ++t) {
      const Matches m = match_detections(cd, cg, rep.iou_thresholds[t]);
      const auto ap = average_precision(m.tp, m.num_gt);
      rep.ap[c][t] = ap.has_value()
                         ? *ap
                         : std::numeric_limits<double>::quiet_NaN();
    }

    // Operating-point counts: IoU 0.5, confidence 0.25.
    std::vector<DetectionRecord> confident;
    for (const auto& d : cd) {
      if (d.det.confidence >= rep.conf_operating_point) confident.push_back(d);
    }
    const Matches m =
        match_detections(confident, cg, rep.iou_operating_point);
    const int tp = static_cast<int>(
        std::count(m.tp.begin(), m.tp.end(), char(1)));
    rep.counts[c].tp = tp;
    rep.counts[c].fp = static_cast<int>(confident.size()) - tp;
    rep.counts[c].fn = m.fn;
    op_tp += rep.counts[c].tp;
    op_fp += rep.counts[c].fp;
    op_gt += static_cast<int>(cg.size());
  }

  std::vector<double> map_per_thr(rep.iou_thresholds.size(), 0.0);
  for (std::size_t t = 0; t < rep.iou_thresholds.size(); ++t) {
    std::vector<double> col;
    col.reserve(class_set.size());
    for (std::size_t c = 0; c < class_set.size(); ++c) col.push_back(rep.ap[c][t]);
    map_per_thr[t] = mean_ignoring_nan(col);
  }
  rep.map50 = map_per_thr[0];
  rep.map5095 =
      std::accumulate(map_per_thr.begin(), map_per_thr.end(), 0.0) /
      static_cast<double>(map_per_thr.size());
  rep.precision = (op_tp + op_fp) > 0
                      ? static_cast<double>(op_tp) / (op_tp + op_fp)
                      : 0.0;
  rep.recall = op_gt > 0 ? static_cast<double>(op_tp) / op_gt : 0.0;
  return rep;
}

double forgetting_points(double map_base_before, double map_base_after) {
  return (map_base_after - map_base_before) * 100.0;
}

double forgetting_relative_percent(double map_base_before,
                                   double map_base_after) {
  if (map_base_before <= 0.0) return 0.0;
  return (map_base_after - map_base_before) / map_base_before * 100.0;
}

void write_report_text(std::ostream& os, const EvalReport& rep) {
  char buf[256];
  os << "# detection evaluation report\n";
  std::snprintf(buf, sizeof(buf),
                "# operating point: confidence >= %.2f, IoU >= %.2f\n",
                rep.conf_operating_point, rep.iou_operating_point);
  os << buf;
  std::snprintf(buf, sizeof(buf), "mAP@0.5        %.6f\n", rep.map50);
  os << buf;
  std::snprintf(buf, sizeof(buf), "mAP@0.5:0.95   %.6f\n", rep.map5095);
  os << buf;
  std::snprintf(buf, sizeof(buf), "precision      %.6f\n", rep.precision);
  os << buf;
  std::snprintf(buf, sizeof(buf), "recall         %.6f\n", rep.recall);
  os << buf;
  os << "\nper-class AP@0.5 (tp/fp/fn at operating point):\n";
  for (std::size_t c = 0; c < rep.class_ids.size(); ++c) {
    const double ap50 = rep.ap[c][0];
    if (std::isnan(ap50)) {
      std::snprintf(buf, sizeof(buf), "  %-12s id=%d  AP --      (%d/%d/%d)\n",
                    rep.class_names[c].c_str(), rep.class_ids[c],
                    rep.counts[c].tp, rep.counts[c].fp, rep.counts[c].fn);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "  %-12s id=%d  AP %.6f (%d/%d/%d)\n",
                    rep.class_names[c].c_str(), rep.class_ids[c], ap50,
                    rep.counts[c].tp, rep.counts[c].fp, rep.counts[c].fn);
    }
    os << buf;
  }
}

void write_report_csv(std::ostream& os, const EvalReport& rep) {
  char buf[128];
  os << "class,iou_threshold,ap\n";
  for (std::size_t c = 0; c < rep.class_ids.size(); ++c) {
    for (std::size_t t = 0; t < rep.iou_thresholds.size(); ++t) {
      if (std::isnan(rep.ap[c][t])) {
        std::snprintf(buf, sizeof(buf), "%d,%.2f,nan\n", rep.class_ids[c],
                      rep.iou_thresholds[t]);
      } else {
        std::snprintf(buf, sizeof(buf), "%d,%.2f,%.17g\n", rep.class_ids[c],
                      rep.iou_thresholds[t], rep.ap[c][t]);
      }
      os << buf;
    }
  }
  const auto summary = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "summary,%s,%.17g\n", key, v);
    os << buf;
  };
  summary("map50", rep.map50);
  summary("map5095", rep.map5095);
  summary("precision", rep.precision);
  summary("recall", rep.recall);
}

std::map<std::string, double> read_report_summary(std::istream& is) {
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("summary,", 0) != 0) continue;
    const std::size_t second = line.find(',', 8);
    if (second == std::string::npos) {
      throw ConfigError("malformed summary row: " + line);
    }
    out[line.substr(8, second - 8)] = std::stod(line.substr(second + 1));
  }
  return out;
}

void write_groundtruth(std::ostream& os, std::span<const GroundTruth> gts) {
  char line[256];
  for (const GroundTruth& g : gts) {
    std::snprintf(line, sizeof(line),
                  "%d\tgt\t%d\t%.6f\t%.2f\t%.2f\t%.2f\t%.2f\n", g.image_id,
                  g.class_id, 1.0, g.box.x1, g.box.y1, g.box.x2, g.box.y2);
    os << line;
  }
}

std::vector<GroundTruth> read_groundtruth(std::istream& is) {
  std::vector<GroundTruth> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string image_id, branch, class_id, conf, x1, y1, x2, y2;
    if (!std::getline(ls, image_id, '\t') || !std::getline(ls, branch, '\t') ||
        !std::getline(ls, class_id, '\t') || !std::getline(ls, conf, '\t') ||
        !std::getline(ls, x1, '\t') || !std::getline(ls, y1, '\t') ||
        !std::getline(ls, x2, '\t') || !std::getline(ls, y2, '\t')) {
      throw ConfigError("malformed ground-truth line: " + line);
    }
    out.push_back(GroundTruth{std::stoi(image_id), std::stoi(class_id),
                              BBox(std::stod(x1), std::stod(y1), std::stod(x2),
                                   std::stod(y2))});
  }
  return out;
}

}  // namespace arc
