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

#ifndef ARC_CONFIG_HPP_
#define ARC_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "arc/fusion.hpp"
#include "arc/model.hpp"
#include "arc/synth.hpp"
#include "arc/trainer.hpp"

namespace arc {

// Flat key=value text; '#' starts a comment, blank lines are ignored.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig from_file(const std::filesystem::path& path);
  static KeyValueConfig from_string(const std::string& text);

  bool has(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key, std::string fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                std::vector<int> fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Every tunable of the experiment harness, with desk-scale defaults. Any
// field can be overridden from a config file; unknown keys are rejected.
struct RunConfig {
  BackboneConfig backbone;        // input_size, widths
  OptimConfig optim;              // lr, momentum, decay, warmup, epochs, batch
  SceneSpec scene;                // synthetic scene geometry
  int base_scenes = 1280;         // split 80/10/10 train/test/val
  int task_scenes = 1280;
  int mixed_scenes = 64;
  double decode_conf = 0.05;      // decode threshold used for evaluation
  double nms_iou = 0.5;
  VetoConfig veto;
  double pretrain_map50_floor = 0.80;

  static RunConfig defaults() { return RunConfig{}; }
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_kv(const KeyValueConfig& kv);
  void write(std::ostream& os) const;
};

}  // namespace arc

#endif  // ARC_CONFIG_HPP_
