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

#ifndef ARC_TRAINER_HPP_
#define ARC_TRAINER_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "arc/model.hpp"
#include "arc/synth.hpp"

namespace arc {

struct OptimConfig {
  double lr = 0.01;
  double momentum = 0.937;
  double weight_decay = 0.0005;
  int warmup_epochs = 3;
  int epochs = 30;
  int batch_size = 8;
  LossWeights loss_weights;

  void validate() const;
};

// Linear ramp 0 -> lr over the warm-up epochs, constant afterwards.
double lr_schedule(int epoch, const OptimConfig& cfg);

// Velocity buffers exist only for trainable parameters.
struct OptimState {
  std::map<std::string, std::vector<double>> velocity;
  long step_count = 0;
  double current_lr = 0.0;
};

// Classic SGD with momentum and L2 decay folded into the velocity:
//   v <- momentum * v + grad + weight_decay * param
//   param <- param - lr_t * v
// Frozen parameters are untouched; a trainable parameter without a gradient
// is rejected (it signals a disconnected graph).
void sgd_step(std::span<Parameter*> params, OptimState& state,
              const OptimConfig& cfg, double lr_t);

struct EpochLog {
  int epoch = 0;
  double lr = 0, loss_total = 0, loss_obj = 0, loss_cls = 0, loss_box = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
};

void write_train_log_csv(std::ostream& os, const TrainLog& log);

// Runs one adaptation mode end to end:
//   pretrained: context head on base_data (the pretraining phase itself)
//   finetune:   every parameter, task_data only
//   joint:      every parameter, base_data + task_data
//   arc:        specialist heads + bridges only, task_data only
// Every trainable head is supervised on every training image with the labels
// of its own class namespace; images without such labels supervise it as
// all-background, mirroring what single-model fine-tuning does to the old
// classes. A NaN loss aborts with the offending epoch/batch in the message.
TrainLog adapt(ArcModel& model, Mode mode, std::span<const Scene> base_data,
               std::span<const Scene> task_data, const OptimConfig& cfg,
               std::uint64_t seed);

}  // namespace arc

#endif  // ARC_TRAINER_HPP_
