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

#ifndef ARC_MODEL_HPP_
#define ARC_MODEL_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "arc/bridge.hpp"
#include "arc/checkpoint.hpp"
#include "arc/fusion.hpp"
#include "arc/metrics.hpp"
#include "arc/ops.hpp"
#include "arc/param.hpp"
#include "arc/tensor.hpp"

namespace arc {

// Small convolutional backbone: one 3x3 stride-2 conv + relu per stage, so
// the cumulative stride is 2^len(widths) (8 for the default three stages).
struct BackboneConfig {
  int input_size = 64;
  std::vector<int> widths = {8, 16, 32};

  int stride() const { return 1 << static_cast<int>(widths.size()); }
  int grid_size() const { return input_size / stride(); }
  void validate() const;
};

// Anchor-free grid head: per cell 4 box offsets, 1 objectness logit, and one
// logit per class, laid out as N x (5 + num_classes) x H x W.
struct HeadConfig {
  int num_classes = 1;
  int class_id_offset = 0;  // heads own disjoint global class-id ranges
  std::vector<std::string> class_names;
};

// Two 3x3 convs with relu, then a 1x1 conv onto the (5 + C) output maps.
struct Head {
  HeadConfig config;
  Parameter conv1_w, conv1_b;
  Parameter conv2_w, conv2_b;
  Parameter conv3_w, conv3_b;

  std::vector<Parameter*> params();
  std::vector<const Parameter*> params() const;
};

struct Specialist {
  Head head;
  BridgeState bridge;
};

enum class Mode { pretrained, finetune, joint, arc };
Mode parse_mode(std::string_view s);
std::string_view mode_name(Mode m);

// The dual-branch detector: shared backbone, a context head for the base
// classes, and zero or more specialist heads fed bridge-enhanced features.
// In arc mode the backbone and context head are frozen, so the context
// branch output is unconditionally preserved during specialist training.
struct ArcModel {
  BackboneConfig backbone;
  std::vector<Parameter> backbone_params;  // conv w, conv b per stage
  Head context_head;
  std::vector<Specialist> specialists;

  int feature_channels() const { return backbone.widths.back(); }
  std::vector<Parameter*> all_params();
  std::vector<const Parameter*> all_params() const;
  // Parameters on the frozen path in arc mode (backbone + context head).
  std::vector<Parameter*> base_params();

  void apply_mode(Mode mode);
  Checkpoint to_checkpoint() const;
};

ArcModel make_model(const BackboneConfig& cfg, int base_classes,
                    std::vector<std::string> base_class_names,
                    std::uint64_t seed);

// Reconstructs the pretrained branch from a checkpoint, freezes it, and
// attaches freshly initialized specialist heads and bridges (alpha as
// configured, 0 by default). The checkpoint must carry exactly the backbone
// and context-head entries produced by make_model; a class-count mismatch is
// rejected.
ArcModel build_arc(const Checkpoint& ckpt, const BackboneConfig& cfg,
                   int base_classes, std::vector<std::string> base_class_names,
                   const std::vector<HeadConfig>& specialist_configs,
                   BridgeConfig bridge_config, std::uint64_t seed);

// Rebuilds a model (with any specialist heads) from a checkpoint alone,
// inferring head and bridge extents from the stored shapes. Class names are
// filled from the given tables when the counts match.
ArcModel model_from_checkpoint(const Checkpoint& ckpt,
                               const BackboneConfig& cfg,
                               std::vector<std::string> base_class_names,
                               std::vector<std::string> task_class_names);

Tensor backbone_forward(Tape& tape, const ArcModel& model,
                        const Tensor& images);
Tensor head_forward(Tape& tape, const Head& head, const Tensor& features);

struct RawOutputs {
  Tensor context;                 // N x (5+B) x h x w
  std::vector<Tensor> specialists;  // N x (5+T_k) x h x w each
};

// Context head consumes the backbone features directly; each specialist
// consumes bridge_forward(features, features) for its own bridge.
RawOutputs model_forward(Tape& tape, const ArcModel& model,
                         const Tensor& images);

// Grid decode: center = (cell + sigmoid(offset)) * stride, extents =
// exp(t) * stride clamped to twice the image size, confidence =
// sigmoid(objectness) * best sigmoid(class score). Detections with
// confidence below the threshold are dropped. Returns one list per image.
std::vector<std::vector<Detection>> decode(const Tensor& raw,
                                           double conf_threshold, int stride,
                                           int image_size, int class_id_offset,
                                           Branch branch);

// True iff every frozen entry is bit-identical between the two checkpoints.
// Both checkpoints must carry exactly the model's parameter names.
bool verify_frozen(const ArcModel& model, const Checkpoint& before,
                   const Checkpoint& after);

// ---- training targets & loss ----------------------------------------------

// One positive cell: a ground-truth box whose center falls in it.
struct CellTarget {
  int row = 0, col = 0;
  double tx = 0, ty = 0;  // in-cell center offsets, in [0, 1)
  double tw = 0, th = 0;  // log(extent / stride)
  int class_index = 0;    // local to the head
};

struct ImageTargets {
  std::vector<CellTarget> positives;
};

struct LossWeights {
  double obj = 1.0, cls = 1.0, box = 1.0;
};

struct LossResult {
  Tensor total;  // scalar, differentiable w.r.t. the raw head output
  double obj = 0, cls = 0, box = 0;
};

// Maps ground truth (global class ids) onto grid cells for one head. Boxes
// outside the head's class-id range are ignored; the first box whose center
// lands in a cell claims it.
ImageTargets build_targets(std::span<const GroundTruth> gts, int grid,
                           int stride, int num_classes, int class_id_offset);

// Binary cross-entropy on objectness (mean over all cells) and on class
// scores (positives only), smooth-L1 on box offsets (positives only),
// combined with the given weights. Fused op: the backward step writes the
// analytic gradient straight into `raw`.
LossResult detection_loss(Tape& tape, const Tensor& raw,
                          const std::vector<ImageTargets>& targets,
                          const LossWeights& weights, int num_classes);

}  // namespace arc

#endif  // ARC_MODEL_HPP_
