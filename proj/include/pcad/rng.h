/*
 * Copyright 2026 The pcad Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Portable counter-based generator ("SplitMix64-CTR").
//
// For a (seed, stream) pair the key is
//
//   key = mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15))
//
// and draw i (0-based) is mix64(key + (i + 1) * 0x9E3779B97F4A7C15), where
// mix64 is the SplitMix64 finalizer. Uniforms take the top 53 bits;
// normals use Box-Muller on two uniforms, returning the cosine branch first
// and the sine branch on the following call. Any implementation of these
// few lines reproduces the same streams bit for bit.

#ifndef PCAD_RNG_H_
#define PCAD_RNG_H_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pcad {

constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(Mix64(seed ^ Mix64(stream + kGamma))) {}

  std::uint64_t NextU64() { return Mix64(key_ + (++counter_) * kGamma); }

  // Uniform in [0, 1).
  double NextUniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n) by rejection; n >= 1.
  std::uint64_t NextBelow(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t v;
    do {
      v = NextU64();
    } while (v >= limit);
    return v % n;
  }

  double NextNormal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - NextUniform();
    const double u2 = NextUniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pcad

#endif  // PCAD_RNG_H_
