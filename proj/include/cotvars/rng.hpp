// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded random streams. All randomness in the toolchain derives from a root
// seed through named sub-streams so that results do not depend on scheduling.
// Distributions are implemented here rather than taken from <random> because
// the standard distributions are not specified bit-for-bit across libraries.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cotvars {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (root seed, stream name, index).
  static Rng derive(std::uint64_t root_seed, std::string_view stream, std::uint64_t index = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [lo, hi], unbiased.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
  /// Uniform real in [0, 1).
  double uniform01();
  /// Standard normal (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cotvars
