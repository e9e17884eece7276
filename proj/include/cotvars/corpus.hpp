// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic corpus generation. Each entry draws from its own RNG stream
// derived from (seed, entry index), so output is independent of --jobs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cotvars/formats.hpp"
#include "cotvars/json.hpp"
#include "cotvars/oracles.hpp"
#include "cotvars/rng.hpp"

namespace cotvars {

inline constexpr int kCorpusFormatVersion = 1;

struct Scale {
  std::size_t m = 4;  // digits of a, or grid rows
  std::size_t n = 4;  // digits of b, or grid columns

  std::string str() const { return std::to_string(m) + "x" + std::to_string(n); }
  static Scale parse(std::string_view text);

  friend bool operator==(const Scale&, const Scale&) = default;
};

struct DatasetSpec {
  Task task = Task::Multiplication;
  Scale scale;
  PromptStyle style = PromptStyle::FullCot;
  std::size_t count = 100'000;
  double split_ratio = 0.9;
  std::uint64_t seed = 0;
  std::optional<MergePlan> merge_plan;
  SpecialTokens tokens;

  /// Throws ValidationError for an invalid combination.
  void validate() const;
};

struct Entry {
  std::string id;
  Task task = Task::Multiplication;
  Scale scale;
  PromptStyle style = PromptStyle::FullCot;
  std::string prompt;
  std::string target;
  Decimal gold_final;
  std::optional<std::pair<Decimal, Decimal>> operands;  // multiplication
  std::optional<Grid> grid;                             // DP
  std::vector<LatentSlot> latent_slots;

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct Dataset {
  std::vector<Entry> train;
  std::vector<Entry> test;
  bool exhaustive = false;
};

/// Uniform over n-digit numbers with a nonzero leading digit.
Decimal sample_operand(std::size_t n_digits, Rng& rng);

/// The default 5x5 probing plan keeps rows and columns {1, 3, 4}.
MergePlan make_merge_plan(std::size_t m, std::size_t n);

/// Size of the operand space (pairs or grids), saturating at UINT64_MAX.
std::uint64_t operand_space_size(Task task, Scale scale);

Dataset generate_dataset(const DatasetSpec& spec, std::size_t jobs = 1);

/// Re-renders an entry's operands or grid in another style. The style segment
/// of the id is rewritten; merged style falls back to make_merge_plan.
Entry restyle_entry(const Entry& source, PromptStyle style, const SpecialTokens& tokens = {},
                    const MergePlan* plan = nullptr);

/// Rebuilds an entry's oracle trace from its operands or grid.
MulTrace mul_trace_of(const Entry& entry);
DpTrace dp_trace_of(const Entry& entry);

Json entry_to_json(const Entry& entry);
Entry entry_from_json(const Json& j);
Json dataset_card(const DatasetSpec& spec, const Dataset& dataset);

Json merge_plan_to_json(const MergePlan& plan);
MergePlan merge_plan_from_json(const Json& j);
Json tokens_to_json(const SpecialTokens& tokens);

}  // namespace cotvars
