/* Copyright 2026 The dthawkes Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <array>
#include <cstdint>

namespace dthawkes {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: maps a
/// 128-bit counter and a 64-bit key to 128 random bits.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  static constexpr int kRounds = 10;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr Counter round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// SplitMix64 finalizer, used to derive Philox keys from (seed, domain).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent families of streams under one master seed.
enum class StreamDomain : std::uint64_t {
  kHawkes = 0,
  kSeol = 1,
  kTest = 2,
};

/// Random draws for one (master_seed, path, step) cell.
///
/// The counter is (block, step, path_lo, path_hi) and the key is derived
/// from the seed and domain, so any cell can be regenerated in isolation:
/// draws never depend on thread scheduling, ensemble size, or what other
/// cells consumed.
class StepStream {
 public:
  constexpr StepStream(std::uint64_t master_seed, std::uint64_t path, std::uint32_t step,
                       StreamDomain domain = StreamDomain::kHawkes) noexcept
      : key_(make_key(master_seed, domain)),
        step_(step),
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  constexpr std::uint64_t next_u64() noexcept {
    if (index_ >= 4) refill();
    const std::uint64_t hi = buffer_[index_];
    const std::uint64_t lo = buffer_[index_ + 1];
    index_ += 2;
    ++consumed_;
    return (hi << 32) | lo;
  }

  /// Uniform double on the open interval (0, 1), 53-bit resolution.
  constexpr double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Number of 64-bit draws consumed so far.
  constexpr std::uint64_t draws() const noexcept { return consumed_; }

 private:
  static constexpr Philox4x32::Key make_key(std::uint64_t seed, StreamDomain domain) noexcept {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(domain)));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  constexpr void refill() noexcept {
    buffer_ = Philox4x32::generate({block_, step_, path_lo_, path_hi_}, key_);
    ++block_;
    index_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t step_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint32_t block_ = 0;
  std::uint32_t index_ = 4;
  std::uint64_t consumed_ = 0;
  Philox4x32::Counter buffer_{};
};

}  // namespace dthawkes
