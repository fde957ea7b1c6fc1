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

#include "arc/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "arc/errors.hpp"

namespace arc {

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f64(std::string& buf, double d) {
  std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }

  bool exhausted() const { return pos_ == size_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw CheckpointError("truncated checkpoint");
  }
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

const CheckpointEntry* Checkpoint::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

Checkpoint checkpoint_from_params(std::span<const Parameter> params) {
  Checkpoint ckpt;
  ckpt.entries.reserve(params.size());
  for (const Parameter& p : params) {
    CheckpointEntry e;
    e.name = p.name;
    e.frozen = p.frozen;
    e.shape = p.tensor.shape();
    e.values.assign(p.tensor.values().begin(), p.tensor.values().end());
    ckpt.entries.push_back(std::move(e));
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kCheckpointMagic, 4);
  put_u32(buf, kCheckpointVersion);
  put_u32(buf, static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    put_u32(buf, static_cast<std::uint32_t>(e.name.size()));
    buf.append(e.name);
    buf.push_back(e.frozen ? 1 : 0);
    put_u32(buf, static_cast<std::uint32_t>(e.shape.size()));
    for (const int d : e.shape) put_u32(buf, static_cast<std::uint32_t>(d));
    for (const double v : e.values) put_f64(buf, v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  Reader r(data.data(), data.size());

  const std::string magic = r.bytes(4);
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("bad checkpoint magic in " + path.string());
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version) + " in " + path.string());
  }
  const std::uint32_t count = r.u32();
  Checkpoint ckpt;
  ckpt.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    const std::uint32_t name_len = r.u32();
    e.name = r.bytes(name_len);
    e.frozen = r.u8() != 0;
    const std::uint32_t rank = r.u32();
    std::size_t numel = 1;
    e.shape.reserve(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint32_t ext = r.u32();
      if (ext == 0) throw CheckpointError("zero extent in entry " + e.name);
      e.shape.push_back(static_cast<int>(ext));
      numel *= ext;
    }
    e.values.resize(numel);
    for (std::size_t v = 0; v < numel; ++v) e.values[v] = r.f64();
    ckpt.entries.push_back(std::move(e));
  }
  if (!r.exhausted()) throw CheckpointError("trailing bytes in " + path.string());
  return ckpt;
}

bool frozen_entries_identical(const Checkpoint& before, const Checkpoint& after) {
  std::set<std::string> names_before, names_after;
  for (const auto& e : before.entries) {
    if (e.frozen) names_before.insert(e.name);
  }
  for (const auto& e : after.entries) {
    if (e.frozen) names_after.insert(e.name);
  }
  if (names_before != names_after) {
    throw CheckpointError("frozen entry name sets differ between checkpoints");
  }
  for (const std::string& name : names_before) {
    const CheckpointEntry* a = before.find(name);
    const CheckpointEntry* b = after.find(name);
    if (a->shape != b->shape) return false;
    if (a->values.size() != b->values.size()) return false;
    // Bit-level comparison; -0.0 vs 0.0 or differing NaN payloads count as
    // changes.
    if (std::memcmp(a->values.data(), b->values.data(),
                    a->values.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

void load_into_params(const Checkpoint& ckpt, std::span<Parameter*> params) {
  for (Parameter* p : params) {
    const CheckpointEntry* e = ckpt.find(p->name);
    if (e == nullptr) {
      throw CheckpointError("checkpoint is missing entry " + p->name);
    }
    if (e->shape != p->tensor.shape()) {
      throw CheckpointError("shape mismatch for " + p->name + ": checkpoint " +
                            shape_str(e->shape) + " vs model " +
                            shape_str(p->tensor.shape()));
    }
    std::copy(e->values.begin(), e->values.end(),
              p->tensor.values_mut().begin());
    p->set_frozen(e->frozen);
  }
}

}  // namespace arc
