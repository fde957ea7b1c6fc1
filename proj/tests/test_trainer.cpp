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

#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "arc/config.hpp"
#include "arc/rng.hpp"

namespace arc {
namespace {

OptimConfig plain_sgd(double lr, double momentum = 0.0, double decay = 0.0) {
  OptimConfig cfg;
  cfg.lr = lr;
  cfg.momentum = momentum;
  cfg.weight_decay = decay;
  cfg.warmup_epochs = 0;
  cfg.epochs = 1;
  return cfg;
}

TEST(SgdStep, ZeroGradientZeroDecayIsFixedPoint) {
  Parameter p = make_parameter("p", Tensor::scalar(1.25));
  p.tensor.ensure_grad();
  std::vector<Parameter*> params = {&p};
  OptimState state;
  sgd_step(params, state, plain_sgd(0.1, 0.9, 0.0), 0.1);
  EXPECT_DOUBLE_EQ(p.tensor.value_at(0), 1.25);
}

TEST(SgdStep, VanillaStep) {
  Parameter p = make_parameter("p", Tensor::scalar(1.0));
  p.tensor.ensure_grad();
  p.tensor.grad_mut()[0] = 1.0;
  std::vector<Parameter*> params = {&p};
  OptimState state;
  sgd_step(params, state, plain_sgd(0.1), 0.1);
  EXPECT_DOUBLE_EQ(p.tensor.value_at(0), 0.9);
}

TEST(SgdStep, HandIteratedMomentumTrace) {
  // p: 1 -> 0.9 -> 0.71 with momentum 0.9, constant grad 1, lr 0.1.
  Parameter p = make_parameter("p", Tensor::scalar(1.0));
  std::vector<Parameter*> params = {&p};
  OptimState state;
  const OptimConfig cfg = plain_sgd(0.1, 0.9, 0.0);
  for (int step = 0; step < 2; ++step) {
    p.tensor.ensure_grad();
    p.tensor.zero_grad();
    p.tensor.grad_mut()[0] = 1.0;
    sgd_step(params, state, cfg, 0.1);
  }
  EXPECT_NEAR(p.tensor.value_at(0), 0.71, 1e-12);
  EXPECT_NEAR(state.velocity.at("p")[0], 1.9, 1e-12);
}

TEST(SgdStep, WeightDecayEntersTheVelocity) {
  Parameter p = make_parameter("p", Tensor::scalar(2.0));
  p.tensor.ensure_grad();  // zero gradient
  std::vector<Parameter*> params = {&p};
  OptimState state;
  sgd_step(params, state, plain_sgd(0.1, 0.0, 0.5), 0.1);
  // v = 0 + 0 + 0.5 * 2 = 1; p = 2 - 0.1 = 1.9
  EXPECT_DOUBLE_EQ(p.tensor.value_at(0), 1.9);
}

TEST(SgdStep, MissingGradientOnTrainableIsRejected) {
  Parameter p = make_parameter("p", Tensor::scalar(1.0));
  std::vector<Parameter*> params = {&p};
  OptimState state;
  EXPECT_THROW(sgd_step(params, state, plain_sgd(0.1), 0.1), NumericError);
}

TEST(SgdStep, FrozenParametersAreUntouchedAndHaveNoVelocity) {
  Parameter frozen = make_parameter("f", Tensor::scalar(3.0), true);
  Parameter live = make_parameter("l", Tensor::scalar(1.0));
  live.tensor.ensure_grad();
  live.tensor.grad_mut()[0] = 1.0;
  std::vector<Parameter*> params = {&frozen, &live};
  OptimState state;
  const double before = frozen.tensor.value_at(0);
  for (int i = 0; i < 5; ++i) {
    live.tensor.zero_grad();
    live.tensor.grad_mut()[0] = 1.0;
    sgd_step(params, state, plain_sgd(0.1, 0.9, 0.01), 0.1);
  }
  EXPECT_EQ(std::memcmp(&before, frozen.tensor.values().data(),
                        sizeof(double)),
            0);
  EXPECT_EQ(state.velocity.count("f"), 0u);
  EXPECT_EQ(state.velocity.count("l"), 1u);
  EXPECT_EQ(state.step_count, 5);
}

TEST(LrSchedule, LinearWarmupThenConstant) {
  OptimConfig cfg;
  cfg.lr = 0.01;
  cfg.warmup_epochs = 3;
  cfg.epochs = 30;
  EXPECT_NEAR(lr_schedule(0, cfg), 0.01 / 3.0, 1e-15);
  EXPECT_NEAR(lr_schedule(1, cfg), 0.01 * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(lr_schedule(2, cfg), 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(lr_schedule(3, cfg), 0.01);
  EXPECT_DOUBLE_EQ(lr_schedule(29, cfg), 0.01);
}

TEST(LrSchedule, DisabledWarmupStartsAtFullRate) {
  OptimConfig cfg;
  cfg.lr = 0.01;
  cfg.warmup_epochs = 0;
  cfg.epochs = 10;
  EXPECT_DOUBLE_EQ(lr_schedule(0, cfg), 0.01);
}

TEST(LrSchedule, NonDecreasingDuringWarmupConstantAfter) {
  OptimConfig cfg;
  cfg.lr = 0.02;
  cfg.warmup_epochs = 5;
  cfg.epochs = 20;
  double prev = 0.0;
  for (int e = 0; e < cfg.epochs; ++e) {
    const double lr = lr_schedule(e, cfg);
    EXPECT_GE(lr, prev);
    if (e >= cfg.warmup_epochs) EXPECT_DOUBLE_EQ(lr, cfg.lr);
    prev = lr;
  }
}

TEST(LrSchedule, RejectsOutOfRangeEpoch) {
  OptimConfig cfg;
  EXPECT_THROW(lr_schedule(-1, cfg), ConfigError);
  EXPECT_THROW(lr_schedule(cfg.epochs, cfg), ConfigError);
}

TEST(OptimConfig, ValidatesRanges) {
  OptimConfig cfg;
  cfg.warmup_epochs = 40;
  cfg.epochs = 30;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.warmup_epochs = 3;
  cfg.lr = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TrainLog, CsvHasHeaderAndRows) {
  TrainLog log;
  log.epochs.push_back(EpochLog{0, 0.003, 1.5, 0.7, 0.5, 0.3});
  log.epochs.push_back(EpochLog{1, 0.01, 1.1, 0.5, 0.4, 0.2});
  std::stringstream ss;
  write_train_log_csv(ss, log);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "epoch,lr,loss_total,loss_obj,loss_cls,loss_box");
  std::getline(ss, line);
  EXPECT_EQ(line.rfind("0,", 0), 0u);
}

TEST(RunConfig, UnknownKeyIsRejected) {
  const auto kv = KeyValueConfig::from_string("lr=0.1\nnot_a_key=3\n");
  EXPECT_THROW(RunConfig::from_kv(kv), ConfigError);
}

TEST(RunConfig, OverridesEveryOptimField) {
  const auto kv = KeyValueConfig::from_string(
      "lr=0.5\nmomentum=0.8\nweight_decay=0.001\nwarmup_epochs=1\n"
      "epochs=7\nbatch_size=4\nw_obj=2\nw_cls=3\nw_box=4\n");
  const RunConfig cfg = RunConfig::from_kv(kv);
  EXPECT_DOUBLE_EQ(cfg.optim.lr, 0.5);
  EXPECT_DOUBLE_EQ(cfg.optim.momentum, 0.8);
  EXPECT_DOUBLE_EQ(cfg.optim.weight_decay, 0.001);
  EXPECT_EQ(cfg.optim.warmup_epochs, 1);
  EXPECT_EQ(cfg.optim.epochs, 7);
  EXPECT_EQ(cfg.optim.batch_size, 4);
  EXPECT_DOUBLE_EQ(cfg.optim.loss_weights.obj, 2.0);
  EXPECT_DOUBLE_EQ(cfg.optim.loss_weights.cls, 3.0);
  EXPECT_DOUBLE_EQ(cfg.optim.loss_weights.box, 4.0);
}

TEST(RunConfig, DefaultsMatchTheTrainingRecipe) {
  const RunConfig cfg = RunConfig::defaults();
  EXPECT_DOUBLE_EQ(cfg.optim.lr, 0.01);
  EXPECT_DOUBLE_EQ(cfg.optim.momentum, 0.937);
  EXPECT_DOUBLE_EQ(cfg.optim.weight_decay, 0.0005);
  EXPECT_EQ(cfg.optim.warmup_epochs, 3);
  EXPECT_EQ(cfg.optim.batch_size, 8);
}

TEST(RunConfig, WriteParsesBackIdentically) {
  RunConfig cfg = RunConfig::defaults();
  cfg.optim.lr = 0.0123;
  cfg.base_scenes = 50;
  std::stringstream ss;
  cfg.write(ss);
  const RunConfig back = RunConfig::from_kv(KeyValueConfig::from_string(ss.str()));
  EXPECT_DOUBLE_EQ(back.optim.lr, 0.0123);
  EXPECT_EQ(back.base_scenes, 50);
  EXPECT_EQ(back.backbone.widths, cfg.backbone.widths);
}

TEST(KeyValueConfig, ParsesCommentsAndWhitespace) {
  const auto kv = KeyValueConfig::from_string(
      "# comment\n  lr = 0.25  # trailing\n\nepochs=4\n");
  EXPECT_DOUBLE_EQ(kv.get_double("lr", 0), 0.25);
  EXPECT_EQ(kv.get_int("epochs", 0), 4);
  EXPECT_EQ(kv.get_int("absent", 9), 9);
}

TEST(KeyValueConfig, RejectsMalformedLines) {
  EXPECT_THROW(KeyValueConfig::from_string("just a line\n"), ConfigError);
  const auto kv = KeyValueConfig::from_string("lr=abc\n");
  EXPECT_THROW(kv.get_double("lr", 0), ConfigError);
}

// A short end-to-end adaptation on a tiny model: loss must drop and the
// run must be reproducible bit for bit.
TEST(Adapt, TinyRunIsDeterministicAndLearns) {
  BackboneConfig bb;
  bb.input_size = 32;
  bb.widths = {4, 8};
  SceneSpec spec;
  spec.image_size = 32;
  spec.max_objects = 2;
  spec.min_size = 8;
  spec.max_size = 14;
  const std::vector<Scene> data = generate(spec, 77, 24, ClassMix::base_only);

  OptimConfig cfg;
  cfg.epochs = 6;
  cfg.warmup_epochs = 2;
  cfg.batch_size = 8;

  const auto run = [&](Checkpoint* out) {
    ArcModel m = make_model(bb, 3, base_class_names(), 5);
    TrainLog log = adapt(m, Mode::pretrained, data, {}, cfg, 9);
    *out = m.to_checkpoint();
    return log;
  };
  Checkpoint c1, c2;
  const TrainLog l1 = run(&c1);
  const TrainLog l2 = run(&c2);

  ASSERT_EQ(l1.epochs.size(), 6u);
  EXPECT_LT(l1.epochs.back().loss_total, l1.epochs.front().loss_total);
  for (std::size_t i = 0; i < l1.epochs.size(); ++i) {
    EXPECT_EQ(l1.epochs[i].loss_total, l2.epochs[i].loss_total);
  }
  ASSERT_EQ(c1.entries.size(), c2.entries.size());
  for (std::size_t i = 0; i < c1.entries.size(); ++i) {
    EXPECT_EQ(0, std::memcmp(c1.entries[i].values.data(),
                             c2.entries[i].values.data(),
                             c1.entries[i].values.size() * sizeof(double)));
  }
}

TEST(Adapt, ArcModeNeverTouchesFrozenBytes) {
  BackboneConfig bb;
  bb.input_size = 32;
  bb.widths = {4, 8};
  SceneSpec spec;
  spec.image_size = 32;
  spec.min_size = 8;
  spec.max_size = 14;
  const std::vector<Scene> base_data = generate(spec, 70, 16, ClassMix::base_only);
  const std::vector<Scene> task_data = generate(spec, 71, 16, ClassMix::task_only);

  ArcModel pre = make_model(bb, 3, base_class_names(), 3);
  const Checkpoint pre_ckpt = pre.to_checkpoint();
  HeadConfig task_head;
  task_head.num_classes = 1;
  task_head.class_id_offset = 3;
  task_head.class_names = {task_class_name()};
  ArcModel m = build_arc(pre_ckpt, bb, 3, base_class_names(), {task_head},
                         BridgeConfig{}, 3);
  const Checkpoint before = m.to_checkpoint();

  OptimConfig cfg;
  cfg.epochs = 3;
  cfg.warmup_epochs = 1;
  adapt(m, Mode::arc, base_data, task_data, cfg, 11);
  const Checkpoint after = m.to_checkpoint();
  EXPECT_TRUE(verify_frozen(m, before, after));

  // Specialist parameters must have moved.
  bool specialist_changed = false;
  for (std::size_t i = 0; i < before.entries.size(); ++i) {
    if (before.entries[i].frozen) continue;
    if (std::memcmp(before.entries[i].values.data(),
                    after.entries[i].values.data(),
                    before.entries[i].values.size() * sizeof(double)) != 0) {
      specialist_changed = true;
    }
  }
  EXPECT_TRUE(specialist_changed);
}

TEST(Adapt, FinetuneModeMovesBaseParameters) {
  BackboneConfig bb;
  bb.input_size = 32;
  bb.widths = {4, 8};
  SceneSpec spec;
  spec.image_size = 32;
  spec.min_size = 8;
  spec.max_size = 14;
  const std::vector<Scene> task_data = generate(spec, 72, 16, ClassMix::task_only);

  ArcModel pre = make_model(bb, 3, base_class_names(), 4);
  const Checkpoint pre_ckpt = pre.to_checkpoint();
  HeadConfig task_head;
  task_head.num_classes = 1;
  task_head.class_id_offset = 3;
  task_head.class_names = {task_class_name()};
  ArcModel m = build_arc(pre_ckpt, bb, 3, base_class_names(), {task_head},
                         BridgeConfig{}, 4);
  m.apply_mode(Mode::finetune);
  const Checkpoint before = m.to_checkpoint();

  OptimConfig cfg;
  cfg.epochs = 2;
  cfg.warmup_epochs = 0;
  adapt(m, Mode::finetune, {}, task_data, cfg, 12);
  const Checkpoint after = m.to_checkpoint();

  bool backbone_changed = false;
  for (std::size_t i = 0; i < before.entries.size(); ++i) {
    if (before.entries[i].name.rfind("backbone.", 0) != 0) continue;
    if (std::memcmp(before.entries[i].values.data(),
                    after.entries[i].values.data(),
                    before.entries[i].values.size() * sizeof(double)) != 0) {
      backbone_changed = true;
    }
  }
  EXPECT_TRUE(backbone_changed);
}

}  // namespace
}  // namespace arc
