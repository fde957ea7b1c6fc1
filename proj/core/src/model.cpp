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

#include "arc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace arc {

namespace {

// Backbone stages downsample with 4x4 stride-2 pad-1 convs so the output
// extent (S + 2 - 4) / 2 + 1 = S / 2 is exact for even S; 3x3 stride-2 on a
// 64 px map would not divide evenly.
constexpr int kBackboneKernel = 4;
constexpr int kHeadHiddenKernel = 3;

std::string stage_name(int i, const char* leaf) {
  return "backbone.stage" + std::to_string(i) + ".conv." + leaf;
}

// `zero_output` starts the final conv at zero: predictions begin at
// sigmoid(0) and no gradient reaches the shared trunk until those weights
// grow. Used for heads attached to an already-converged backbone, so a fresh
// random head cannot shock it; heads trained from scratch keep a random
// output layer.
Head make_head(const std::string& prefix, const HeadConfig& cfg, int channels,
               Rng& rng, bool zero_output) {
  Head h;
  h.config = cfg;
  const int k = kHeadHiddenKernel;
  h.conv1_w = make_parameter(
      prefix + ".conv1.weight",
      uniform_fan_in({channels, channels, k, k}, channels * k * k, rng));
  h.conv1_b = make_parameter(prefix + ".conv1.bias", Tensor::zeros({channels}));
  h.conv2_w = make_parameter(
      prefix + ".conv2.weight",
      uniform_fan_in({channels, channels, k, k}, channels * k * k, rng));
  h.conv2_b = make_parameter(prefix + ".conv2.bias", Tensor::zeros({channels}));
  const int out = 5 + cfg.num_classes;
  h.conv3_w = make_parameter(
      prefix + ".conv3.weight",
      zero_output ? Tensor::zeros({out, channels, 1, 1})
                  : uniform_fan_in({out, channels, 1, 1}, channels, rng));
  h.conv3_b = make_parameter(prefix + ".conv3.bias", Tensor::zeros({out}));
  return h;
}

void check_unique_names(const ArcModel& model) {
  std::set<std::string> seen;
  for (const Parameter* p : model.all_params()) {
    if (!seen.insert(p->name).second) {
      throw ConfigError("duplicate parameter name: " + p->name);
    }
  }
}

}  // namespace

void BackboneConfig::validate() const {
  if (widths.empty()) throw ConfigError("backbone needs at least one stage");
  if (input_size < stride() || input_size % stride() != 0) {
    throw ConfigError("input_size " + std::to_string(input_size) +
                      " is not divisible by backbone stride " +
                      std::to_string(stride()));
  }
}

std::vector<Parameter*> Head::params() {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &conv3_w, &conv3_b};
}

std::vector<const Parameter*> Head::params() const {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &conv3_w, &conv3_b};
}

Mode parse_mode(std::string_view s) {
  if (s == "pretrained") return Mode::pretrained;
  if (s == "finetune") return Mode::finetune;
  if (s == "joint") return Mode::joint;
  if (s == "arc") return Mode::arc;
  throw ConfigError("unknown mode: " + std::string(s));
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::pretrained: return "pretrained";
    case Mode::finetune: return "finetune";
    case Mode::joint: return "joint";
    case Mode::arc: return "arc";
  }
  return "?";
}

std::vector<Parameter*> ArcModel::all_params() {
  std::vector<Parameter*> out;
  for (Parameter& p : backbone_params) out.push_back(&p);
  for (Parameter* p : context_head.params()) out.push_back(p);
  for (Specialist& s : specialists) {
    for (Parameter* p : s.head.params()) out.push_back(p);
    for (Parameter* p : s.bridge.params()) out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> ArcModel::all_params() const {
  std::vector<const Parameter*> out;
  for (const Parameter& p : backbone_params) out.push_back(&p);
  for (const Parameter* p : context_head.params()) out.push_back(p);
  for (const Specialist& s : specialists) {
    for (const Parameter* p : s.head.params()) out.push_back(p);
    for (const Parameter* p : s.bridge.params()) out.push_back(p);
  }
  return out;
}

std::vector<Parameter*> ArcModel::base_params() {
  std::vector<Parameter*> out;
  for (Parameter& p : backbone_params) out.push_back(&p);
  for (Parameter* p : context_head.params()) out.push_back(p);
  return out;
}

void ArcModel::apply_mode(Mode mode) {
  // finetune/joint/pretrained: everything trainable. arc: exactly the
  // backbone + context set is frozen; specialists and bridges stay live.
  for (Parameter* p : all_params()) p->set_frozen(false);
  if (mode == Mode::arc) {
    for (Parameter* p : base_params()) p->set_frozen(true);
  }
}

Checkpoint ArcModel::to_checkpoint() const {
  std::vector<Parameter> copy;
  for (const Parameter* p : all_params()) copy.push_back(*p);
  return checkpoint_from_params(copy);
}

ArcModel make_model(const BackboneConfig& cfg, int base_classes,
                    std::vector<std::string> base_class_names,
                    std::uint64_t seed) {
  cfg.validate();
  if (base_classes < 1) throw ConfigError("base_classes must be >= 1");
  ArcModel m;
  m.backbone = cfg;
  Rng rng = substream(seed, "init.model");
  int in_ch = 3;
  for (std::size_t i = 0; i < cfg.widths.size(); ++i) {
    const int out_ch = cfg.widths[i];
    const int kb = kBackboneKernel;
    m.backbone_params.push_back(make_parameter(
        stage_name(static_cast<int>(i), "weight"),
        uniform_fan_in({out_ch, in_ch, kb, kb}, in_ch * kb * kb, rng)));
    m.backbone_params.push_back(make_parameter(
        stage_name(static_cast<int>(i), "bias"), Tensor::zeros({out_ch})));
    in_ch = out_ch;
  }
  HeadConfig hc;
  hc.num_classes = base_classes;
  hc.class_id_offset = 0;
  hc.class_names = std::move(base_class_names);
  m.context_head =
      make_head("context_head", hc, m.feature_channels(), rng, false);
  check_unique_names(m);
  return m;
}

ArcModel build_arc(const Checkpoint& ckpt, const BackboneConfig& cfg,
                   int base_classes, std::vector<std::string> base_class_names,
                   const std::vector<HeadConfig>& specialist_configs,
                   BridgeConfig bridge_config, std::uint64_t seed) {
  ArcModel m = make_model(cfg, base_classes, std::move(base_class_names), seed);

  // The pretrained head must have been trained for the same class count.
  const CheckpointEntry* head_out = ckpt.find("context_head.conv3.weight");
  if (head_out == nullptr) {
    throw CheckpointError("checkpoint lacks a context head");
  }
  if (head_out->shape[0] != 5 + base_classes) {
    throw CheckpointError(
        "checkpoint context head was trained for " +
        std::to_string(head_out->shape[0] - 5) + " classes, expected " +
        std::to_string(base_classes));
  }

  auto base = m.base_params();
  load_into_params(ckpt, base);
  for (Parameter* p : base) p->set_frozen(true);

  Rng rng = substream(seed, "init.specialist");
  bridge_config.c_ctx = m.feature_channels();
  for (std::size_t k = 0; k < specialist_configs.size(); ++k) {
    Specialist s;
    s.head = make_head("specialist." + std::to_string(k) + ".head",
                       specialist_configs[k], m.feature_channels(), rng, true);
    BridgeConfig bc = bridge_config;
    bc.c_task = m.feature_channels();
    s.bridge = make_bridge(bc, "bridge." + std::to_string(k) + ".", rng);
    m.specialists.push_back(std::move(s));
  }
  check_unique_names(m);
  return m;
}

ArcModel model_from_checkpoint(const Checkpoint& ckpt,
                               const BackboneConfig& cfg,
                               std::vector<std::string> base_class_names,
                               std::vector<std::string> task_class_names) {
  const CheckpointEntry* head_out = ckpt.find("context_head.conv3.weight");
  if (head_out == nullptr) {
    throw CheckpointError("checkpoint lacks a context head");
  }
  const int base_classes = head_out->shape[0] - 5;
  if (base_classes < 1) throw CheckpointError("invalid context head extent");
  if (static_cast<int>(base_class_names.size()) != base_classes) {
    base_class_names.clear();
    for (int i = 0; i < base_classes; ++i) {
      base_class_names.push_back("base_" + std::to_string(i));
    }
  }
  ArcModel m = make_model(cfg, base_classes, std::move(base_class_names), 0);

  // Attach one specialist per "specialist.<k>." prefix found.
  Rng rng(0);
  int next_offset = base_classes;
  for (int k = 0;; ++k) {
    const std::string prefix = "specialist." + std::to_string(k) + ".head";
    const CheckpointEntry* e = ckpt.find(prefix + ".conv3.weight");
    if (e == nullptr) break;
    const int classes = e->shape[0] - 5;
    if (classes < 1) throw CheckpointError("invalid specialist head extent");
    HeadConfig hc;
    hc.num_classes = classes;
    hc.class_id_offset = next_offset;
    if (k == 0 && static_cast<int>(task_class_names.size()) == classes) {
      hc.class_names = task_class_names;
    } else {
      for (int i = 0; i < classes; ++i) {
        hc.class_names.push_back("task_" + std::to_string(k) + "_" +
                                 std::to_string(i));
      }
    }
    next_offset += classes;
    Specialist s;
    s.head = make_head(prefix, hc, m.feature_channels(), rng, true);
    const CheckpointEntry* cw =
        ckpt.find("bridge." + std::to_string(k) + ".compress_w");
    if (cw == nullptr) {
      throw CheckpointError("checkpoint lacks bridge." + std::to_string(k));
    }
    BridgeConfig bc;
    bc.c_ctx = m.feature_channels();
    bc.c_task = m.feature_channels();
    // Recover the reduction ratio from the stored compression width.
    bc.reduction_ratio = std::max(1, bc.c_ctx / cw->shape[0]);
    s.bridge = make_bridge(bc, "bridge." + std::to_string(k) + ".", rng);
    m.specialists.push_back(std::move(s));
  }

  auto params = m.all_params();
  if (params.size() != ckpt.entries.size()) {
    throw CheckpointError("checkpoint entry count " +
                          std::to_string(ckpt.entries.size()) +
                          " does not match model parameter count " +
                          std::to_string(params.size()));
  }
  load_into_params(ckpt, params);
  return m;
}

Tensor backbone_forward(Tape& tape, const ArcModel& model,
                        const Tensor& images) {
  if (images.rank() != 4 || images.dim(1) != 3 ||
      images.dim(2) != model.backbone.input_size ||
      images.dim(3) != model.backbone.input_size) {
    throw ShapeError("backbone expects N x 3 x " +
                     std::to_string(model.backbone.input_size) + " x " +
                     std::to_string(model.backbone.input_size) + ", got " +
                     shape_str(images.shape()));
  }
  Tensor x = images;
  for (std::size_t i = 0; i < model.backbone.widths.size(); ++i) {
    const Parameter& w = model.backbone_params[2 * i];
    const Parameter& b = model.backbone_params[2 * i + 1];
    x = relu(tape, conv2d(tape, x, w.tensor, b.tensor, 2, 1));
  }
  return x;
}

Tensor head_forward(Tape& tape, const Head& head, const Tensor& features) {
  const int pad = (kHeadHiddenKernel - 1) / 2;
  Tensor h = relu(tape, conv2d(tape, features, head.conv1_w.tensor,
                               head.conv1_b.tensor, 1, pad));
  h = relu(tape,
           conv2d(tape, h, head.conv2_w.tensor, head.conv2_b.tensor, 1, pad));
  return conv2d(tape, h, head.conv3_w.tensor, head.conv3_b.tensor, 1, 0);
}

RawOutputs model_forward(Tape& tape, const ArcModel& model,
                         const Tensor& images) {
  Tensor features = backbone_forward(tape, model, images);
  RawOutputs out;
  out.context = head_forward(tape, model.context_head, features);
  for (const Specialist& s : model.specialists) {
    // X_ctx is the feature map entering the frozen head; F_in is the same
    // map routed to the specialist stream.
    Tensor enhanced = bridge_forward(tape, features, features, s.bridge);
    out.specialists.push_back(head_forward(tape, s.head, enhanced));
  }
  return out;
}

std::vector<std::vector<Detection>> decode(const Tensor& raw,
                                           double conf_threshold, int stride,
                                           int image_size, int class_id_offset,
                                           Branch branch) {
  if (raw.rank() != 4) throw ShapeError("decode expects N x (5+C) x h x w");
  const int n = raw.dim(0), ch = raw.dim(1), gh = raw.dim(2), gw = raw.dim(3);
  const int num_classes = ch - 5;
  if (num_classes < 1) throw ShapeError("decode: head carries no classes");
  const double* v = raw.values().data();
  const auto sig = [](double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  };
  const double max_extent = 2.0 * image_size;

  std::vector<std::vector<Detection>> out(static_cast<std::size_t>(n));
  for (int ni = 0; ni < n; ++ni) {
    const std::size_t base = static_cast<std::size_t>(ni) * ch * gh * gw;
    const std::size_t plane = static_cast<std::size_t>(gh) * gw;
    for (int row = 0; row < gh; ++row) {
      for (int col = 0; col < gw; ++col) {
        const std::size_t cell = static_cast<std::size_t>(row) * gw + col;
        const auto at = [&](int c) { return v[base + static_cast<std::size_t>(c) * plane + cell]; };
        const double obj = sig(at(4));
        int best = 0;
        double best_score = sig(at(5));
        for (int c = 1; c < num_classes; ++c) {
          const double s = sig(at(5 + c));
          if (s > best_score) {
            best_score = s;
            best = c;
          }
        }
        const double conf = obj * best_score;
        if (conf < conf_threshold) continue;
        const double cx = (col + sig(at(0))) * stride;
        const double cy = (row + sig(at(1))) * stride;
        const double w =
            std::clamp(std::exp(at(2)) * stride, 1e-3, max_extent);
        const double h =
            std::clamp(std::exp(at(3)) * stride, 1e-3, max_extent);
        out[static_cast<std::size_t>(ni)].push_back(
            Detection{BBox(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2),
                      class_id_offset + best, conf, branch});
      }
    }
  }
  return out;
}

bool verify_frozen(const ArcModel& model, const Checkpoint& before,
                   const Checkpoint& after) {
  std::set<std::string> model_names, before_names, after_names;
  for (const Parameter* p : model.all_params()) model_names.insert(p->name);
  for (const auto& e : before.entries) before_names.insert(e.name);
  for (const auto& e : after.entries) after_names.insert(e.name);
  if (model_names != before_names || model_names != after_names) {
    throw CheckpointError(
        "verify_frozen: checkpoints do not match the model architecture");
  }
  return frozen_entries_identical(before, after);
}

ImageTargets build_targets(std::span<const GroundTruth> gts, int grid,
                           int stride, int num_classes, int class_id_offset) {
  ImageTargets t;
  std::vector<char> taken(static_cast<std::size_t>(grid) * grid, 0);
  for (const GroundTruth& g : gts) {
    const int local = g.class_id - class_id_offset;
    if (local < 0 || local >= num_classes) continue;
    const double cx = (g.box.x1 + g.box.x2) / 2.0;
    const double cy = (g.box.y1 + g.box.y2) / 2.0;
    int col = static_cast<int>(std::floor(cx / stride));
    int row = static_cast<int>(std::floor(cy / stride));
    col = std::clamp(col, 0, grid - 1);
    row = std::clamp(row, 0, grid - 1);
    const std::size_t cell = static_cast<std::size_t>(row) * grid + col;
    if (taken[cell]) continue;  // first box claims the cell
    taken[cell] = 1;
    CellTarget ct;
    ct.row = row;
    ct.col = col;
    ct.tx = cx / stride - col;
    ct.ty = cy / stride - row;
    ct.tw = std::log((g.box.x2 - g.box.x1) / stride);
    ct.th = std::log((g.box.y2 - g.box.y1) / stride);
    ct.class_index = local;
    t.positives.push_back(ct);
  }
  return t;
}

namespace {

inline double bce_with_logits(double x, double t) {
  // max(x,0) - x*t + log(1 + exp(-|x|)), stable for large |x|.
  return std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
}

inline double stable_sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

inline double huber(double d) {
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

inline double huber_grad(double d) {
  if (d > 1.0) return 1.0;
  if (d < -1.0) return -1.0;
  return d;
}

}  // namespace

LossResult detection_loss(Tape& tape, const Tensor& raw,
                          const std::vector<ImageTargets>& targets,
                          const LossWeights& weights, int num_classes) {
  if (raw.rank() != 4 || raw.dim(1) != 5 + num_classes) {
    throw ShapeError("detection_loss: raw shape " + shape_str(raw.shape()) +
                     " does not match num_classes " +
                     std::to_string(num_classes));
  }
  const int n = raw.dim(0), ch = raw.dim(1), gh = raw.dim(2), gw = raw.dim(3);
  if (static_cast<int>(targets.size()) != n) {
    throw ShapeError("detection_loss: expected targets for every image");
  }
  const std::size_t plane = static_cast<std::size_t>(gh) * gw;
  const double* v = raw.values().data();

  int num_pos = 0;
  for (const auto& t : targets) num_pos += static_cast<int>(t.positives.size());
  const double pos_norm = 1.0 / std::max(1, num_pos);
  const double obj_norm = 1.0 / (static_cast<double>(n) * static_cast<double>(plane));

  double loss_obj = 0.0, loss_cls = 0.0, loss_box = 0.0;
  for (int ni = 0; ni < n; ++ni) {
    const std::size_t base = static_cast<std::size_t>(ni) * ch * plane;
    std::vector<char> pos_cell(plane, 0);
    for (const CellTarget& ct : targets[static_cast<std::size_t>(ni)].positives) {
      const std::size_t cell = static_cast<std::size_t>(ct.row) * gw + ct.col;
      pos_cell[cell] = 1;
      // Class scores, one-vs-all.
      for (int c = 0; c < num_classes; ++c) {
        loss_cls += bce_with_logits(v[base + (5 + static_cast<std::size_t>(c)) * plane + cell],
                                    c == ct.class_index ? 1.0 : 0.0);
      }
      const double px = stable_sigmoid(v[base + 0 * plane + cell]);
      const double py = stable_sigmoid(v[base + 1 * plane + cell]);
      loss_box += huber(px - ct.tx) + huber(py - ct.ty) +
                  huber(v[base + 2 * plane + cell] - ct.tw) +
                  huber(v[base + 3 * plane + cell] - ct.th);
    }
    for (std::size_t cell = 0; cell < plane; ++cell) {
      loss_obj += bce_with_logits(v[base + 4 * plane + cell],
                                  pos_cell[cell] ? 1.0 : 0.0);
    }
  }
  loss_obj *= obj_norm;
  loss_cls *= pos_norm;
  loss_box *= pos_norm;

  const double total_v = weights.obj * loss_obj + weights.cls * loss_cls +
                         weights.box * loss_box;
  Tensor total = Tensor::scalar(total_v);

  if (tape.recording() && raw.requires_grad()) {
    total.set_requires_grad(true);
    total.ensure_grad();
    Tensor raw_t = raw;
    tape.record([raw_t, total, targets, weights, num_classes, n, ch, gh, gw,
                 plane, pos_norm, obj_norm]() mutable {
      const double g = total.grad()[0];
      raw_t.ensure_grad();
      const double* v = raw_t.values().data();
      double* dv = raw_t.grad_mut().data();
      for (int ni = 0; ni < n; ++ni) {
        const std::size_t base = static_cast<std::size_t>(ni) * ch * plane;
        std::vector<char> pos_cell(plane, 0);
        for (const CellTarget& ct :
             targets[static_cast<std::size_t>(ni)].positives) {
          const std::size_t cell = static_cast<std::size_t>(ct.row) * gw + ct.col;
          pos_cell[cell] = 1;
          for (int c = 0; c < num_classes; ++c) {
            const std::size_t idx = base + (5 + static_cast<std::size_t>(c)) * plane + cell;
            const double t = c == ct.class_index ? 1.0 : 0.0;
            dv[idx] += g * weights.cls * pos_norm * (stable_sigmoid(v[idx]) - t);
          }
          {
            const std::size_t ix = base + 0 * plane + cell;
            const double px = stable_sigmoid(v[ix]);
            dv[ix] += g * weights.box * pos_norm * huber_grad(px - ct.tx) *
                      px * (1.0 - px);
            const std::size_t iy = base + 1 * plane + cell;
            const double py = stable_sigmoid(v[iy]);
            dv[iy] += g * weights.box * pos_norm * huber_grad(py - ct.ty) *
                      py * (1.0 - py);
            const std::size_t iw = base + 2 * plane + cell;
            dv[iw] += g * weights.box * pos_norm * huber_grad(v[iw] - ct.tw);
            const std::size_t ih = base + 3 * plane + cell;
            dv[ih] += g * weights.box * pos_norm * huber_grad(v[ih] - ct.th);
          }
        }
        for (std::size_t cell = 0; cell < plane; ++cell) {
          const std::size_t idx = base + 4 * plane + cell;
          const double t = pos_cell[cell] ? 1.0 : 0.0;
          dv[idx] += g * weights.obj * obj_norm * (stable_sigmoid(v[idx]) - t);
        }
      }
    });
  }

  LossResult r;
  r.total = total;
  r.obj = loss_obj;
  r.cls = loss_cls;
  r.box = loss_box;
  return r;
}

}  // namespace arc
