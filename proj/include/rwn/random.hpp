// Copyright 2026 The rwn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is a pure function of
// (seed, domain, a, b, draw-index), evaluated with Philox4x32-10. Streams
// are therefore addressable: the donor for cell (i, j) can be computed by
// any worker, in any order, and always comes out the same. No stream is
// ever shared between threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rwn {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123).
constexpr Philox4x32Counter philox4x32_10(Philox4x32Counter ctr,
                                          Philox4x32Key key) {
  constexpr std::uint32_t kMulA = 0xD2511F53u;
  constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Separates the purposes randomness is consumed for, so that e.g. the
// q-coin of cell (i, j) and the donor of cell (i, j) never share bits.
enum class Domain : std::uint32_t {
  kCellCoin = 1,
  kCellDonor = 2,
  kSharedPool = 3,
  kFreshPool = 4,
  kPairSample = 5,
  kPartition = 6,
  kHoldoutSplit = 7,
  kSynthetic = 8,
  kReplicate = 9,
  kControl = 10,
};

// A deterministic stream of 64-bit words addressed by
// (seed, domain, a, b). Satisfies UniformRandomBitGenerator.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t seed, Domain domain, std::uint32_t a = 0,
                std::uint32_t b = 0)
      : a_(a), b_(b) {
    const std::uint64_t k =
        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(domain)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (!has_spare_) {
      const auto out = philox4x32_10(
          {static_cast<std::uint32_t>(block_),
           static_cast<std::uint32_t>(block_ >> 32), a_, b_},
          key_);
      ++block_;
      spare_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
      has_spare_ = true;
      return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    }
    has_spare_ = false;
    return spare_;
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform on [0, bound) without modulo bias (Lemire's method).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double probability) { return uniform01() < probability; }

  // Standard normal via Box-Muller; the second variate is discarded so
  // every call consumes exactly two words.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  Philox4x32Key key_{};
  std::uint32_t a_;
  std::uint32_t b_;
  std::uint64_t block_ = 0;
  std::uint64_t spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace rwn
