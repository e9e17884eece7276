// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Grading of model outputs. Correctness is decided on the final answer only;
// step-level diffs against the oracle are reported alongside.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cotvars/decimal.hpp"
#include "cotvars/formats.hpp"
#include "cotvars/json.hpp"

namespace cotvars {

struct Entry;

struct StepDiff {
  std::string locator;   // same naming as NumberSpan::locator, or "<field>.count"
  std::string expected;  // "-" when the observed text has an extra item
  std::string observed;  // "-" when the item is missing

  friend bool operator==(const StepDiff&, const StepDiff&) = default;
};

struct GradeReport {
  std::string id;
  bool final_correct = false;
  std::optional<Decimal> parsed_final;
  std::vector<StepDiff> step_diffs;
  std::vector<std::string> diagnostics;
};

/// Integer after the last "Result:" marker (whitespace and leading zeros tolerated).
std::optional<Decimal> extract_final(std::string_view text);

/// Compares every number and latent-token count of two transcripts rendered in `style`.
std::vector<StepDiff> diff_transcripts(const ParsedTrace& observed, const ParsedTrace& expected);

GradeReport grade_entry(std::string_view output_text, const Entry& entry, const SpecialTokens& tokens = {});

/// Fraction of reports with a correct final answer. Throws on an empty list.
double accuracy(std::span<const GradeReport> reports);

Json grade_report_to_json(const GradeReport& report);

}  // namespace cotvars
