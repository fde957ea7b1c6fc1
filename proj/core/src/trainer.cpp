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

#include "arc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace arc {

void OptimConfig::validate() const {
  if (lr < 0 || momentum < 0 || weight_decay < 0 || warmup_epochs < 0 ||
      epochs < 1 || batch_size < 1) {
    throw ConfigError("optimizer config out of range");
  }
  if (warmup_epochs > epochs) {
    throw ConfigError("warmup_epochs must not exceed epochs");
  }
}

double lr_schedule(int epoch, const OptimConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw ConfigError("epoch index out of range");
  }
  if (epoch < cfg.warmup_epochs) {
    return cfg.lr * static_cast<double>(epoch + 1) /
           static_cast<double>(cfg.warmup_epochs);
  }
  return cfg.lr;
}

void sgd_step(std::span<Parameter*> params, OptimState& state,
              const OptimConfig& cfg, double lr_t) {
  for (Parameter* p : params) {
    if (p->frozen) continue;
    if (!p->tensor.has_grad()) {
      throw NumericError("missing gradient on trainable parameter " + p->name);
    }
    auto& v = state.velocity[p->name];
    if (v.empty()) v.assign(p->tensor.numel(), 0.0);
    std::span<const double> g = p->tensor.grad();
    std::span<double> w = p->tensor.values_mut();
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = cfg.momentum * v[i] + g[i] + cfg.weight_decay * w[i];
      w[i] -= lr_t * v[i];
    }
  }
  state.step_count += 1;
  state.current_lr = lr_t;
}

void write_train_log_csv(std::ostream& os, const TrainLog& log) {
  os << "epoch,lr,loss_total,loss_obj,loss_cls,loss_box\n";
  char buf[192];
  for (const EpochLog& e : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  e.epoch, e.lr, e.loss_total, e.loss_obj, e.loss_cls,
                  e.loss_box);
    os << buf;
  }
}

namespace {

Tensor stack_images(std::span<const Scene> data,
                    std::span<const std::size_t> indices, int image_size) {
  const int n = static_cast<int>(indices.size());
  Tensor batch = Tensor::zeros({n, 3, image_size, image_size});
  double* out = batch.values_mut().data();
  const std::size_t per = 3 * static_cast<std::size_t>(image_size) * image_size;
  for (int i = 0; i < n; ++i) {
    const Tensor& img = data[indices[static_cast<std::size_t>(i)]].image;
    std::copy(img.values().begin(), img.values().end(),
              out + static_cast<std::size_t>(i) * per);
  }
  return batch;
}

struct BatchLoss {
  double total = 0, obj = 0, cls = 0, box = 0;
};

}  // namespace

TrainLog adapt(ArcModel& model, Mode mode, std::span<const Scene> base_data,
               std::span<const Scene> task_data, const OptimConfig& cfg,
               std::uint64_t seed) {
  cfg.validate();
  model.apply_mode(mode);

  std::vector<std::size_t> indices;
  std::span<const Scene> data;
  std::vector<Scene> joint_data;
  switch (mode) {
    case Mode::pretrained:
      data = base_data;
      break;
    case Mode::finetune:
    case Mode::arc:
      data = task_data;
      break;
    case Mode::joint:
      joint_data.assign(base_data.begin(), base_data.end());
      joint_data.insert(joint_data.end(), task_data.begin(), task_data.end());
      data = joint_data;
      break;
  }
  if (data.empty()) throw ConfigError("adapt: empty training data");

  const bool train_context = mode != Mode::arc;
  const int grid = model.backbone.grid_size();
  const int stride = model.backbone.stride();
  const int image_size = model.backbone.input_size;

  auto params = model.all_params();
  std::vector<Parameter*> trainable(params.begin(), params.end());
  OptimState opt_state;
  TrainLog log;

  indices.resize(data.size());
  std::iota(indices.begin(), indices.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr_t = lr_schedule(epoch, cfg);
    Rng shuffle_rng = substream(seed, "shuffle", static_cast<std::uint64_t>(epoch));
    shuffle(indices, shuffle_rng);

    BatchLoss epoch_loss;
    int batches = 0;
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(indices.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::span<const std::size_t> batch_idx(indices.data() + start, end - start);

      for (Parameter* p : trainable) {
        if (!p->frozen) p->tensor.zero_grad();
      }

      Tape tape;
      Tensor images = stack_images(data, batch_idx, image_size);
      Tensor features = backbone_forward(tape, model, images);

      Tensor total;
      BatchLoss bl;
      int supervised_heads = 0;
      const auto add_head_loss = [&](const Head& head, const Tensor& raw) {
        std::vector<ImageTargets> targets;
        targets.reserve(batch_idx.size());
        for (const std::size_t si : batch_idx) {
          targets.push_back(build_targets(data[si].gts, grid, stride,
                                          head.config.num_classes,
                                          head.config.class_id_offset));
        }
        LossResult lr = detection_loss(tape, raw, targets, cfg.loss_weights,
                                       head.config.num_classes);
        bl.obj += lr.obj;
        bl.cls += lr.cls;
        bl.box += lr.box;
        total = total.defined() ? add(tape, total, lr.total) : lr.total;
        ++supervised_heads;
      };

      if (train_context) {
        add_head_loss(model.context_head,
                      head_forward(tape, model.context_head, features));
      }
      for (const Specialist& s : model.specialists) {
        Tensor enhanced = bridge_forward(tape, features, features, s.bridge);
        add_head_loss(s.head, head_forward(tape, s.head, enhanced));
      }
      if (!total.defined()) {
        throw ConfigError("adapt: no trainable head produced a loss");
      }
      // Mean over supervised heads: the shared trunk sees the same effective
      // step size no matter how many heads feed it.
      if (supervised_heads > 1) {
        total = scale(tape, total,
                      Tensor::scalar(1.0 / supervised_heads));
        bl.obj /= supervised_heads;
        bl.cls /= supervised_heads;
        bl.box /= supervised_heads;
      }

      bl.total = total.scalar_value();
      if (!std::isfinite(bl.total)) {
        throw NumericError("NaN/Inf loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches) + ", seed " +
                           std::to_string(seed));
      }

      tape.backward(total);
      sgd_step(trainable, opt_state, cfg, lr_t);

      epoch_loss.total += bl.total;
      epoch_loss.obj += bl.obj;
      epoch_loss.cls += bl.cls;
      epoch_loss.box += bl.box;
      ++batches;
    }

    EpochLog el;
    el.epoch = epoch;
    el.lr = lr_t;
    el.loss_total = epoch_loss.total / batches;
    el.loss_obj = epoch_loss.obj / batches;
    el.loss_cls = epoch_loss.cls / batches;
    el.loss_box = epoch_loss.box / batches;
    log.epochs.push_back(el);
  }
  return log;
}

}  // namespace arc
