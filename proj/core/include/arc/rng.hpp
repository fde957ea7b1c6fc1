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

#ifndef ARC_RNG_HPP_
#define ARC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace arc {

// splitmix64. Every random draw in the project flows through this generator;
// it is fully specified here so runs are bit-identical across platforms and
// standard library versions (std:: distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [lo, hi], both ends inclusive.
  int next_int(int lo, int hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % range);
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Named sub-stream of a root seed. Streams with different names (or indices)
// are statistically independent, so e.g. data generation never perturbs
// weight initialization.
inline Rng substream(std::uint64_t seed, std::string_view name) {
  Rng mixer(seed ^ fnv1a64(name));
  return Rng(mixer.next_u64());
}

inline Rng substream(std::uint64_t seed, std::string_view name,
                     std::uint64_t index) {
  Rng mixer(seed ^ fnv1a64(name));
  std::uint64_t s = mixer.next_u64();
  Rng mixer2(s + 0x9e3779b97f4a7c15ULL * (index + 1));
  return Rng(mixer2.next_u64());
}

// Fisher-Yates with the portable generator above.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace arc

#endif  // ARC_RNG_HPP_
