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

#ifndef ARC_SYNTH_HPP_
#define ARC_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "arc/metrics.hpp"
#include "arc/tensor.hpp"

namespace arc {

// Class ids: 0 circle, 1 square, 2 triangle (base), 3 rounded-bar (task).
// The rounded bar is deliberately square-like so that new-class confusion
// and forgetting are measurable rather than trivial.
inline constexpr int kNumBaseClasses = 3;
inline constexpr int kTaskClassId = 3;

const std::vector<std::string>& base_class_names();
const std::string& task_class_name();
std::vector<std::string> all_class_names();

enum class ClassMix { base_only, task_only, mixed };
ClassMix parse_class_mix(std::string_view s);

struct SceneSpec {
  int image_size = 64;
  int min_objects = 1, max_objects = 4;
  int min_size = 8, max_size = 24;  // object bounding-box extent in px
  double noise_sigma = 0.05;
  int margin = 2;               // min distance from the image border
  double max_overlap_iou = 0.3;  // rejection bound between placed objects
};

struct Scene {
  Tensor image;                   // 3 x S x S, identical channels
  std::vector<GroundTruth> gts;   // image_id filled by the caller's indexing
};

struct RenderedObject {
  int class_id;
  BBox box;                        // tight bounds of the object's own mask
  std::vector<std::uint8_t> mask;  // S*S foreground mask, before overdraw
};

struct RenderedScene {
  Tensor image;
  std::vector<GroundTruth> gts;
  std::vector<RenderedObject> objects;
};

// Pure function of (spec, split_seed, index, mix): the same arguments always
// produce a bit-identical scene.
RenderedScene render_scene(const SceneSpec& spec, std::uint64_t split_seed,
                           std::uint64_t index, ClassMix mix);

std::vector<Scene> generate(const SceneSpec& spec, std::uint64_t split_seed,
                            int count, ClassMix mix);

// 80/10/10 train/test/validation partition. Scene content and membership are
// pure functions of (spec, root seed, tag, count, mix): the "data.<tag>"
// sub-stream seeds the renderer and "split.<tag>" shuffles the membership.
struct DataSplits {
  std::vector<Scene> train, test, val;
};

DataSplits make_splits(const SceneSpec& spec, std::uint64_t seed,
                       const std::string& tag, int count, ClassMix mix);

// 8-bit binary PGM of channel 0.
void write_pgm(const std::filesystem::path& path, const Tensor& image);

// Dumps scene images (scene_%05d.pgm) and one labels.tsv in the shared
// ground-truth format, image ids equal to scene indices.
void dump_scenes(const std::filesystem::path& dir,
                 std::span<const Scene> scenes);

}  // namespace arc

#endif  // ARC_SYNTH_HPP_
