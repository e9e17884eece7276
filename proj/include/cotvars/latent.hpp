// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// One-hot latent encodings of intermediate values. A layout is a sequence of
// 10-wide groups; each group holds exactly one hot bit. Group 0 is the units
// digit (little-endian).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotvars/error.hpp"

namespace cotvars {

enum class LayoutKind { NumberGroups, DigitCarry };

struct LatentLayout {
  LayoutKind kind = LayoutKind::NumberGroups;
  std::size_t n_groups = 5;

  std::size_t dim() const { return 10 * n_groups; }

  static LatentLayout number_groups(std::size_t n_groups);
  /// Multiplication layout: group 0 is the emitted digit, group 1 the carry.
  static LatentLayout digit_carry() { return {LayoutKind::DigitCarry, 2}; }
  /// DP layout used for grid values (values below 100,000).
  static LatentLayout dp_default() { return number_groups(5); }

  friend bool operator==(const LatentLayout&, const LatentLayout&) = default;
};

std::string_view to_string(LayoutKind kind);
LayoutKind layout_kind_from_string(std::string_view name);

/// Raised when a vector violates the one-hot-per-group invariant.
class MalformedLatent : public ValidationError {
 public:
  MalformedLatent(std::size_t group, const std::string& what)
      : ValidationError(what), group_(group) {}
  std::size_t group() const { return group_; }

 private:
  std::size_t group_;
};

class LatentVec {
 public:
  LatentVec() = default;
  /// Unchecked; call check() before trusting the group invariant.
  LatentVec(LatentLayout layout, std::vector<std::uint8_t> bits);
  static LatentVec zeros(LatentLayout layout);
  /// Builds from hot indices and verifies the group invariant.
  static LatentVec from_hot_indices(LatentLayout layout, std::span<const std::size_t> hot);

  const LatentLayout& layout() const { return layout_; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::vector<std::size_t> hot_indices() const;
  /// Index within the group of its hot bit; throws MalformedLatent.
  std::size_t group_value(std::size_t group) const;
  void check() const;

  friend bool operator==(const LatentVec&, const LatentVec&) = default;

 private:
  LatentLayout layout_;
  std::vector<std::uint8_t> bits_;
};

LatentVec encode_number(std::uint64_t value, LatentLayout layout);
std::uint64_t decode_number(const LatentVec& vec);

LatentVec encode_mul_step(int digit_out, int carry_out);
/// Returns (digit_out, carry_out).
std::pair<int, int> decode_mul_step(const LatentVec& vec);

/// Per-group arg-max of real scores; ties go to the lowest index.
LatentVec decode_real_vector(std::span<const double> scores, LatentLayout layout);
LatentVec decode_real_vector(std::span<const float> scores, LatentLayout layout);

}  // namespace cotvars
