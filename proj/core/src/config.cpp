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

#include "arc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace arc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        " is not key=value: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("empty key on config line " + std::to_string(lineno));
    }
    cfg.kv_[key] = value;
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return kv_.count(key) > 0;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + it->second);
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key +
                      " is not an integer: " + it->second);
  }
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       std::string fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              std::vector<int> fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<int> out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(trim(item)));
    } catch (const std::exception&) {
      throw ConfigError("config key " + key +
                        " is not a comma-separated int list: " + it->second);
    }
  }
  if (out.empty()) {
    throw ConfigError("config key " + key + " is empty");
  }
  return out;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  return from_kv(KeyValueConfig::from_file(path));
}

RunConfig RunConfig::from_kv(const KeyValueConfig& kv) {
  static const std::set<std::string> known = {
      "input_size",    "widths",         "lr",
      "momentum",      "weight_decay",   "warmup_epochs",
      "epochs",        "batch_size",     "w_obj",
      "w_cls",         "w_box",          "min_objects",
      "max_objects",   "min_size",       "max_size",
      "noise_sigma",   "base_scenes",    "task_scenes",
      "mixed_scenes",  "decode_conf",    "nms_iou",
      "veto_iou",      "veto_conf_floor", "pretrain_map50_floor",
  };
  for (const auto& [key, value] : kv.entries()) {
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);
  }

  RunConfig c;
  c.backbone.input_size = kv.get_int("input_size", c.backbone.input_size);
  c.backbone.widths = kv.get_int_list("widths", c.backbone.widths);
  c.optim.lr = kv.get_double("lr", c.optim.lr);
  c.optim.momentum = kv.get_double("momentum", c.optim.momentum);
  c.optim.weight_decay = kv.get_double("weight_decay", c.optim.weight_decay);
  c.optim.warmup_epochs = kv.get_int("warmup_epochs", c.optim.warmup_epochs);
  c.optim.epochs = kv.get_int("epochs", c.optim.epochs);
  c.optim.batch_size = kv.get_int("batch_size", c.optim.batch_size);
  c.optim.loss_weights.obj = kv.get_double("w_obj", c.optim.loss_weights.obj);
  c.optim.loss_weights.cls = kv.get_double("w_cls", c.optim.loss_weights.cls);
  c.optim.loss_weights.box = kv.get_double("w_box", c.optim.loss_weights.box);
  c.scene.image_size = c.backbone.input_size;
  c.scene.min_objects = kv.get_int("min_objects", c.scene.min_objects);
  c.scene.max_objects = kv.get_int("max_objects", c.scene.max_objects);
  c.scene.min_size = kv.get_int("min_size", c.scene.min_size);
  c.scene.max_size = kv.get_int("max_size", c.scene.max_size);
  c.scene.noise_sigma = kv.get_double("noise_sigma", c.scene.noise_sigma);
  c.base_scenes = kv.get_int("base_scenes", c.base_scenes);
  c.task_scenes = kv.get_int("task_scenes", c.task_scenes);
  c.mixed_scenes = kv.get_int("mixed_scenes", c.mixed_scenes);
  c.decode_conf = kv.get_double("decode_conf", c.decode_conf);
  c.nms_iou = kv.get_double("nms_iou", c.nms_iou);
  c.veto.iou_threshold = kv.get_double("veto_iou", c.veto.iou_threshold);
  c.veto.context_confidence_floor =
      kv.get_double("veto_conf_floor", c.veto.context_confidence_floor);
  c.pretrain_map50_floor =
      kv.get_double("pretrain_map50_floor", c.pretrain_map50_floor);

  c.backbone.validate();
  c.optim.validate();
  if (c.base_scenes < 10 || c.task_scenes < 10) {
    throw ConfigError("base_scenes and task_scenes must be >= 10");
  }
  return c;
}

void RunConfig::write(std::ostream& os) const {
  char buf[320];
  os << "input_size=" << backbone.input_size << "\n";
  os << "widths=";
  for (std::size_t i = 0; i < backbone.widths.size(); ++i) {
    os << (i ? "," : "") << backbone.widths[i];
  }
  os << "\n";
  std::snprintf(buf, sizeof(buf), "lr=%.17g\nmomentum=%.17g\nweight_decay=%.17g\n",
                optim.lr, optim.momentum, optim.weight_decay);
  os << buf;
  os << "warmup_epochs=" << optim.warmup_epochs << "\n";
  os << "epochs=" << optim.epochs << "\n";
  os << "batch_size=" << optim.batch_size << "\n";
  std::snprintf(buf, sizeof(buf), "w_obj=%.17g\nw_cls=%.17g\nw_box=%.17g\n",
                optim.loss_weights.obj, optim.loss_weights.cls,
                optim.loss_weights.box);
  os << buf;
  os << "min_objects=" << scene.min_objects << "\n";
  os << "max_objects=" << scene.max_objects << "\n";
  os << "min_size=" << scene.min_size << "\n";
  os << "max_size=" << scene.max_size << "\n";
  std::snprintf(buf, sizeof(buf), "noise_sigma=%.17g\n", scene.noise_sigma);
  os << buf;
  os << "base_scenes=" << base_scenes << "\n";
  os << "task_scenes=" << task_scenes << "\n";
  os << "mixed_scenes=" << mixed_scenes << "\n";
  std::snprintf(buf, sizeof(buf),
                "decode_conf=%.17g\nnms_iou=%.17g\nveto_iou=%.17g\n"
                "veto_conf_floor=%.17g\npretrain_map50_floor=%.17g\n",
                decode_conf, nms_iou, veto.iou_threshold,
                veto.context_confidence_floor, pretrain_map50_floor);
  os << buf;
}

}  // namespace arc
