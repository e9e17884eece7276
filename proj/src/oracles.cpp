// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/oracles.hpp"

#include <algorithm>
#include <string>

#include "cotvars/error.hpp"

namespace cotvars {

MulTrace multiply_with_trace(const Decimal& a, const Decimal& b) {
  if (a.is_zero() || b.is_zero()) throw ValidationError("multiply_with_trace: operands must be positive");

  MulTrace trace;
  trace.a = a;
  trace.b = b;
  trace.partials.reserve(b.digit_count());

  std::vector<int> digits;
  for (std::size_t place = 0; place < b.digit_count(); ++place) {
    PartialProduct partial;
    partial.place = place;
    partial.b_digit = b.digit(place);
    partial.steps.reserve(a.digit_count());
    digits.clear();

    int carry = 0;
    for (std::size_t k = 0; k < a.digit_count(); ++k) {
      MulStep step;
      step.a_digit = a.digit(k);
      step.b_digit = partial.b_digit;
      step.raw_product = step.a_digit * step.b_digit;
      step.carry_in = carry;
      const int x = step.raw_product + carry;
      step.digit_out = x % 10;
      step.carry_out = x / 10;
      carry = step.carry_out;
      digits.push_back(step.digit_out);
      partial.steps.push_back(step);
    }
    partial.value = combine_partial(digits, carry, place);
    trace.partials.push_back(std::move(partial));
  }

  std::vector<Decimal> values;
  values.reserve(trace.partials.size());
  for (const auto& p : trace.partials) values.push_back(p.value);
  trace.addition_chain = fold_addition_chain(values);
  trace.final = trace.addition_chain.empty() ? values.front() : trace.addition_chain.back();
  return trace;
}

Decimal combine_partial(std::span<const int> digits, int last_carry, std::size_t place) {
  // last_carry may exceed 9 only in intervened traces; fold it in as a number.
  std::vector<std::uint8_t> le;
  le.reserve(digits.size() + 2);
  for (int d : digits) {
    if (d < 0 || d > 9) throw ValidationError("combine_partial: digit out of range");
    le.push_back(static_cast<std::uint8_t>(d));
  }
  if (last_carry < 0) throw ValidationError("combine_partial: negative carry");
  Decimal value = Decimal::from_digits(std::move(le));
  value += Decimal(static_cast<std::uint64_t>(last_carry)).shifted(digits.size());
  return value.shifted(place);
}

std::vector<Decimal> fold_addition_chain(std::span<const Decimal> values) {
  if (values.empty()) throw ValidationError("fold_addition_chain: empty list");
  std::vector<Decimal> chain;
  chain.reserve(values.size() - 1);
  Decimal acc = values.front();
  for (std::size_t i = 1; i < values.size(); ++i) {
    acc += values[i];
    chain.push_back(acc);
  }
  return chain;
}

Grid::Grid(std::size_t rows, std::size_t cols, std::int64_t fill)
    : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

Grid Grid::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  if (rows.empty() || rows.front().empty()) return Grid{};
  Grid g(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != g.cols_) throw ValidationError("grid rows have unequal length");
    std::copy(rows[i].begin(), rows[i].end(), g.cells_.begin() + static_cast<std::ptrdiff_t>(i * g.cols_));
  }
  return g;
}

std::vector<std::vector<std::int64_t>> Grid::to_rows() const {
  std::vector<std::vector<std::int64_t>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

void validate_grid(const Grid& grid) {
  if (grid.empty()) throw ValidationError("grid is empty");
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      const auto v = grid.at(i, j);
      if (v < kMinCell || v > kMaxCell) {
        throw ValidationError("grid cell (" + std::to_string(i) + "," + std::to_string(j) + ") = " +
                              std::to_string(v) + " outside [2, 99]");
      }
    }
  }
}

Grid run_dp_recurrence(const Grid& grid, const GridCell* pinned, std::int64_t pinned_value) {
  Grid dp(grid.rows(), grid.cols());
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      if (pinned != nullptr && pinned->row == i && pinned->col == j) {
        dp.at(i, j) = pinned_value;
        continue;
      }
      std::int64_t best = 0;
      if (i > 0 && j > 0) {
        best = std::max(dp.at(i - 1, j), dp.at(i, j - 1));
      } else if (i > 0) {
        best = dp.at(i - 1, j);
      } else if (j > 0) {
        best = dp.at(i, j - 1);
      }
      dp.at(i, j) = best + grid.at(i, j);
    }
  }
  return dp;
}

DpTrace dp_with_trace(const Grid& grid) {
  validate_grid(grid);
  DpTrace trace;
  trace.grid = grid;
  trace.dp = run_dp_recurrence(grid);
  trace.final = trace.dp.at(grid.rows() - 1, grid.cols() - 1);
  return trace;
}

namespace {

std::int64_t best_from(const Grid& grid, std::size_t i, std::size_t j) {
  const std::int64_t here = grid.at(i, j);
  const bool last_row = i + 1 == grid.rows();
  const bool last_col = j + 1 == grid.cols();
  if (last_row && last_col) return here;
  std::int64_t best = INT64_MIN;
  if (!last_row) best = std::max(best, best_from(grid, i + 1, j));
  if (!last_col) best = std::max(best, best_from(grid, i, j + 1));
  return here + best;
}

}  // namespace

std::int64_t brute_force_max_path(const Grid& grid) {
  if (grid.empty()) throw ValidationError("grid is empty");
  if (grid.rows() + grid.cols() > kMaxEnumerationSteps) {
    throw ValidationError("grid too large for path enumeration");
  }
  // Plain recursion visits every path; no memoisation.
  return best_from(grid, 0, 0);
}

}  // namespace cotvars
