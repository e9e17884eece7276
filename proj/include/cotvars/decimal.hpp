// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Arbitrary-size nonnegative integer stored as little-endian decimal digits.
// Only the operations the two tasks need are provided.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cotvars {

class Decimal {
 public:
  Decimal() = default;
  explicit Decimal(std::uint64_t value);

  /// Parses a run of ASCII digits. Leading zeros are accepted and dropped.
  static Decimal parse(std::string_view text);
  /// Builds a value from little-endian digits (each 0-9); trailing zeros are trimmed.
  static Decimal from_digits(std::vector<std::uint8_t> little_endian);

  bool is_zero() const { return digits_.empty(); }
  /// Number of decimal digits; zero has one digit.
  std::size_t digit_count() const { return digits_.empty() ? 1 : digits_.size(); }
  /// Digit at place k (units = 0); zero beyond the most significant digit.
  int digit(std::size_t k) const { return k < digits_.size() ? digits_[k] : 0; }
  int leading_digit() const { return digit(digit_count() - 1); }
  std::span<const std::uint8_t> digits() const { return digits_; }

  /// this * 10^places
  Decimal shifted(std::size_t places) const;

  std::string str() const;
  std::optional<std::uint64_t> to_u64() const;

  friend Decimal operator+(const Decimal& lhs, const Decimal& rhs);
  Decimal& operator+=(const Decimal& rhs);

  friend bool operator==(const Decimal&, const Decimal&) = default;
  friend std::strong_ordering operator<=>(const Decimal& lhs, const Decimal& rhs);

 private:
  std::vector<std::uint8_t> digits_;  // little-endian, no trailing zeros; empty == 0
};

}  // namespace cotvars
