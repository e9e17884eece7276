// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reference executions of the two compositional tasks: digit-wise long
// multiplication and maximum path sum over a grid. Every trace produced here
// is exact; other modules render, grade and intervene on these traces.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cotvars/decimal.hpp"

namespace cotvars {

/// One digit-times-digit step of a partial product. raw_product excludes the
/// incoming carry; digit_out and carry_out include it.
struct MulStep {
  int a_digit = 0;
  int b_digit = 0;
  int raw_product = 0;
  int carry_in = 0;
  int digit_out = 0;
  int carry_out = 0;

  friend bool operator==(const MulStep&, const MulStep&) = default;
};

struct PartialProduct {
  std::size_t place = 0;  // little-endian place of the multiplier digit
  int b_digit = 0;
  std::vector<MulStep> steps;  // one per multiplicand digit, little-endian
  Decimal value;               // a * b_digit * 10^place

  /// b_digit * 10^place, the multiplier as it appears in block headers.
  Decimal multiplier() const { return Decimal(static_cast<std::uint64_t>(b_digit)).shifted(place); }

  friend bool operator==(const PartialProduct&, const PartialProduct&) = default;
};

struct MulTrace {
  Decimal a;
  Decimal b;
  std::vector<PartialProduct> partials;  // one per digit of b, ascending place
  std::vector<Decimal> addition_chain;   // left-fold prefix sums
  Decimal final;

  friend bool operator==(const MulTrace&, const MulTrace&) = default;
};

MulTrace multiply_with_trace(const Decimal& a, const Decimal& b);

/// Combines emitted digits (little-endian) and the last carry, then applies
/// the place shift. Used to reconstruct a partial product from its step lines.
Decimal combine_partial(std::span<const int> digits, int last_carry, std::size_t place);

/// Left-fold prefix sums; length values.size() - 1.
std::vector<Decimal> fold_addition_chain(std::span<const Decimal> values);

/// Row-major integer matrix.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, std::int64_t fill = 0);
  static Grid from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  std::int64_t& at(std::size_t i, std::size_t j) { return cells_[i * cols_ + j]; }
  std::int64_t at(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
  std::span<const std::int64_t> row(std::size_t i) const { return {cells_.data() + i * cols_, cols_}; }
  std::span<const std::int64_t> cells() const { return cells_; }

  std::vector<std::vector<std::int64_t>> to_rows() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> cells_;
};

inline constexpr std::int64_t kMinCell = 2;
inline constexpr std::int64_t kMaxCell = 99;

struct DpTrace {
  Grid grid;
  Grid dp;
  std::int64_t final = 0;

  friend bool operator==(const DpTrace&, const DpTrace&) = default;
};

struct GridCell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Throws ValidationError on an empty grid or a cell outside [kMinCell, kMaxCell].
void validate_grid(const Grid& grid);

DpTrace dp_with_trace(const Grid& grid);

/// Runs the max-path recurrence in row-major order. When `pinned` is given,
/// that cell takes `pinned_value` instead of its recurrence value and every
/// later cell reads it as authoritative.
Grid run_dp_recurrence(const Grid& grid, const GridCell* pinned = nullptr, std::int64_t pinned_value = 0);

inline constexpr std::size_t kMaxEnumerationSteps = 22;

/// Exhaustive maximum over all monotone lattice paths. Requires
/// rows + cols <= kMaxEnumerationSteps.
std::int64_t brute_force_max_path(const Grid& grid);

}  // namespace cotvars
