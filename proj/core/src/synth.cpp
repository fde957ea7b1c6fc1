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

#include "arc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "arc/rng.hpp"

namespace arc {

const std::vector<std::string>& base_class_names() {
  static const std::vector<std::string> names = {"circle", "square",
                                                 "triangle"};
  return names;
}

const std::string& task_class_name() {
  static const std::string name = "rounded-bar";
  return name;
}

std::vector<std::string> all_class_names() {
  std::vector<std::string> names = base_class_names();
  names.push_back(task_class_name());
  return names;
}

ClassMix parse_class_mix(std::string_view s) {
  if (s == "base" || s == "base-only") return ClassMix::base_only;
  if (s == "task" || s == "task-only") return ClassMix::task_only;
  if (s == "mixed") return ClassMix::mixed;
  throw ConfigError("unknown class mix: " + std::string(s));
}

namespace {

constexpr double kBackground = 0.10;
// Per-class fill values. The rounded bar stays geometrically square-like;
// its fill sits between the other classes so no single intensity separates
// it trivially.
constexpr double kFill[4] = {0.90, 0.45, 0.70, 0.55};

struct Placement {
  int class_id;
  int x, y, w, h;  // intended extent before mask tightening
};

// Rasterizes one object into `mask` (image-sized, row-major). Returns false
// if the mask came out empty (cannot happen for the supported sizes).
void rasterize(const Placement& p, int s, std::vector<std::uint8_t>& mask) {
  std::fill(mask.begin(), mask.end(), 0);
  const auto put = [&](int x, int y) {
    mask[static_cast<std::size_t>(y) * s + x] = 1;
  };
  switch (p.class_id) {
    case 0: {  // circle
      const double cx = p.x + p.w / 2.0;
      const double cy = p.y + p.h / 2.0;
      const double r = p.w / 2.0;
      for (int y = p.y; y < p.y + p.h; ++y) {
        for (int x = p.x; x < p.x + p.w; ++x) {
          const double dx = x + 0.5 - cx;
          const double dy = y + 0.5 - cy;
          if (dx * dx + dy * dy <= r * r) put(x, y);
        }
      }
      break;
    }
    case 1: {  // square
      for (int y = p.y; y < p.y + p.h; ++y) {
        for (int x = p.x; x < p.x + p.w; ++x) put(x, y);
      }
      break;
    }
    case 2: {  // triangle: upward wedge with a truncated apex so the box
               // stays mostly foreground
      for (int y = p.y; y < p.y + p.h; ++y) {
        const double f = (y - p.y + 0.5) / p.h;  // 0 at top, 1 at bottom
        const double half = (0.35 + 0.65 * f) * p.w / 2.0;
        const double cx = p.x + p.w / 2.0;
        for (int x = p.x; x < p.x + p.w; ++x) {
          if (std::abs(x + 0.5 - cx) <= half) put(x, y);
        }
      }
      break;
    }
    case 3: {  // rounded bar: elongated rectangle with semicircular caps
      const double r = p.h / 2.0;
      const double cy = p.y + p.h / 2.0;
      const double lx = p.x + r;
      const double rx = p.x + p.w - r;
      for (int y = p.y; y < p.y + p.h; ++y) {
        for (int x = p.x; x < p.x + p.w; ++x) {
          const double px = x + 0.5, py = y + 0.5;
          bool inside = px >= lx && px <= rx && std::abs(py - cy) <= r;
          if (!inside) {
            const double dx1 = px - lx, dx2 = px - rx, dy = py - cy;
            inside = (dx1 * dx1 + dy * dy <= r * r) ||
                     (dx2 * dx2 + dy * dy <= r * r);
          }
          if (inside) put(x, y);
        }
      }
      break;
    }
    default:
      throw ConfigError("unknown class id " + std::to_string(p.class_id));
  }
}

BBox tight_bounds(const std::vector<std::uint8_t>& mask, int s) {
  int x1 = s, y1 = s, x2 = -1, y2 = -1;
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      if (mask[static_cast<std::size_t>(y) * s + x]) {
        x1 = std::min(x1, x);
        y1 = std::min(y1, y);
        x2 = std::max(x2, x);
        y2 = std::max(y2, y);
      }
    }
  }
  if (x2 < 0) throw NumericError("empty object mask");
  // Pixel (x, y) covers [x, x+1) x [y, y+1).
  return BBox(x1, y1, x2 + 1, y2 + 1);
}

int sample_class(Rng& rng, ClassMix mix, bool first) {
  switch (mix) {
    case ClassMix::base_only:
      return rng.next_int(0, kNumBaseClasses - 1);
    case ClassMix::task_only:
      return kTaskClassId;
    case ClassMix::mixed:
      // Guarantee at least one task object per mixed scene, then draw from
      // all four classes.
      if (first) return kTaskClassId;
      return rng.next_int(0, kNumBaseClasses);
  }
  return 0;
}

}  // namespace

RenderedScene render_scene(const SceneSpec& spec, std::uint64_t split_seed,
                           std::uint64_t index, ClassMix mix) {
  const int s = spec.image_size;
  Rng rng = substream(split_seed, "scene", index);

  RenderedScene scene;
  scene.image = Tensor::zeros({3, s, s});

  const int count = rng.next_int(spec.min_objects, spec.max_objects);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(s) * s);
  std::vector<double> canvas(static_cast<std::size_t>(s) * s, kBackground);

  for (int obj = 0; obj < count; ++obj) {
    const int class_id = sample_class(rng, mix, obj == 0);
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      Placement p;
      p.class_id = class_id;
      if (class_id == kTaskClassId) {
        // Elongated, roughly 3:1: width from the upper part of the size
        // range, height floored so every extent stays >= 6 px.
        const int lo = std::min(std::max(spec.min_size, 15), spec.max_size);
        p.w = rng.next_int(lo, spec.max_size);
        p.h = std::max(6, static_cast<int>(std::lround(p.w / 3.0)));
      } else {
        p.w = rng.next_int(spec.min_size, spec.max_size);
        p.h = p.w;
      }
      if (p.w > s - 2 * spec.margin || p.h > s - 2 * spec.margin) continue;
      p.x = rng.next_int(spec.margin, s - spec.margin - p.w);
      p.y = rng.next_int(spec.margin, s - spec.margin - p.h);
      rasterize(p, s, mask);
      const BBox box = tight_bounds(mask, s);
      bool ok = true;
      for (const RenderedObject& other : scene.objects) {
        if (iou(box, other.box) > spec.max_overlap_iou) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      placed = true;
      const double fill = kFill[class_id];
      for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
          if (mask[static_cast<std::size_t>(y) * s + x]) {
            canvas[static_cast<std::size_t>(y) * s + x] = fill;
          }
        }
      }
      scene.objects.push_back(RenderedObject{class_id, box, mask});
      scene.gts.push_back(GroundTruth{0, class_id, box});
    }
    // A crowded scene may fail placement; the first object always fits.
  }

  // Value noise on the composite, clipped to [0, 1]; identical channels.
  double* img = scene.image.values_mut().data();
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  for (std::size_t i = 0; i < plane; ++i) {
    const double v = std::clamp(
        canvas[i] + spec.noise_sigma * rng.normal(), 0.0, 1.0);
    img[i] = v;
    img[plane + i] = v;
    img[2 * plane + i] = v;
  }
  return scene;
}

std::vector<Scene> generate(const SceneSpec& spec, std::uint64_t split_seed,
                            int count, ClassMix mix) {
  if (count < 1) throw ConfigError("generate: count must be >= 1");
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    RenderedScene r =
        render_scene(spec, split_seed, static_cast<std::uint64_t>(i), mix);
    scenes.push_back(Scene{std::move(r.image), std::move(r.gts)});
  }
  return scenes;
}

DataSplits make_splits(const SceneSpec& spec, std::uint64_t seed,
                       const std::string& tag, int count, ClassMix mix) {
  std::vector<Scene> scenes =
      generate(spec, substream(seed, "data." + tag).next_u64(), count, mix);
  std::vector<std::size_t> idx(scenes.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng split_rng = substream(seed, "split." + tag);
  shuffle(idx, split_rng);
  DataSplits s;
  const std::size_t n_train = scenes.size() * 8 / 10;
  const std::size_t n_test = scenes.size() / 10;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    Scene& sc = scenes[idx[i]];
    if (i < n_train) {
      s.train.push_back(std::move(sc));
    } else if (i < n_train + n_test) {
      s.test.push_back(std::move(sc));
    } else {
      s.val.push_back(std::move(sc));
    }
  }
  return s;
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 3) throw ShapeError("write_pgm expects 3 x S x S");
  const int h = image.dim(1), w = image.dim(2);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "P5\n" << w << " " << h << "\n255\n";
  const double* v = image.values().data();
  for (int i = 0; i < h * w; ++i) {
    const int byte =
        std::clamp(static_cast<int>(std::lround(v[i] * 255.0)), 0, 255);
    out.put(static_cast<char>(byte));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void dump_scenes(const std::filesystem::path& dir,
                 std::span<const Scene> scenes) {
  std::filesystem::create_directories(dir);
  std::vector<GroundTruth> all;
  char name[32];
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    std::snprintf(name, sizeof(name), "scene_%05zu.pgm", i);
    write_pgm(dir / name, scenes[i].image);
    for (GroundTruth g : scenes[i].gts) {
      g.image_id = static_cast<int>(i);
      all.push_back(g);
    }
  }
  std::ofstream labels(dir / "labels.tsv", std::ios::trunc);
  if (!labels) throw IoError("cannot open labels.tsv under " + dir.string());
  write_groundtruth(labels, all);
}

}  // namespace arc
