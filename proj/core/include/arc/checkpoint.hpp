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

#ifndef ARC_CHECKPOINT_HPP_
#define ARC_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arc/param.hpp"
#include "arc/tensor.hpp"

namespace arc {

// ARCK binary checkpoint, little-endian:
//   magic "ARCK" | u32 version (=1) | u32 entry count
//   per entry: u32 name length | name bytes (UTF-8) | u8 frozen (0/1)
//              | u32 rank | u32 extents... | f64 values...
// Loaders reject unknown magic or version.

inline constexpr char kCheckpointMagic[4] = {'A', 'R', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  bool frozen = false;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::vector<CheckpointEntry> entries;  // insertion order is preserved

  const CheckpointEntry* find(std::string_view name) const;
  bool has(std::string_view name) const { return find(name) != nullptr; }
};

Checkpoint checkpoint_from_params(std::span<const Parameter> params);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// True iff the two checkpoints carry the same frozen-entry name set and every
// frozen entry is bit-identical (shape, flag, and raw value bytes). A
// name-set mismatch between the frozen subsets is rejected with an error.
bool frozen_entries_identical(const Checkpoint& before, const Checkpoint& after);

// Copies values (and the frozen flag) from a checkpoint entry into a
// parameter of the same name; shape must match exactly.
void load_into_params(const Checkpoint& ckpt, std::span<Parameter*> params);

}  // namespace arc

#endif  // ARC_CHECKPOINT_HPP_
