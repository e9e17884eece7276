// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Value interventions on full-CoT traces. One number in a golden trace is
// replaced, the text is cut right after it, and the oracle recomputes what a
// faithful continuation should contain. Model continuations are then graded
// against that expectation and failures are classified.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cotvars/decimal.hpp"
#include "cotvars/formats.hpp"
#include "cotvars/json.hpp"
#include "cotvars/oracles.hpp"
#include "cotvars/rng.hpp"

namespace cotvars {

enum class SiteKind {
  MulStepDigit,               // x in "digit x, carry y"; index = (block, step)
  MulStepCarry,               // y in "digit x, carry y"; index = (block, step)
  AdditionChainAddend,        // a term of "Add up partial results:"; index = (addend, 0)
  AdditionChainFirstPartial,  // first rhs term of a fold line; index = (fold, 0)
  FinalResult,                // x in "The final result is: a*b=x"
  DpCell,                     // index = (row, col)
};

std::string_view to_string(SiteKind kind);
SiteKind site_kind_from_string(std::string_view name);

struct InterventionSite {
  SiteKind kind = SiteKind::FinalResult;
  std::size_t first = 0;
  std::size_t second = 0;

  /// Locator of the number in the full-CoT rendering (see NumberSpan).
  std::string locator() const;

  friend bool operator==(const InterventionSite&, const InterventionSite&) = default;
};

/// Every eligible site of a trace, in rendering order.
std::vector<InterventionSite> eligible_sites(const MulTrace& trace);
std::vector<InterventionSite> eligible_sites(const DpTrace& trace);

InterventionSite pick_site(const MulTrace& trace, Rng& rng);
InterventionSite pick_site(const DpTrace& trace, Rng& rng);

/// Value the full-CoT rendering shows at the site.
Decimal site_value(const MulTrace& trace, const InterventionSite& site);
Decimal site_value(const DpTrace& trace, const InterventionSite& site);

/// Same digit count, different value, leading digit kept for 2+ digit values.
Decimal substitute_value(const Decimal& value, Rng& rng);

struct InterventionRecord {
  std::string entry_id;
  Task task = Task::Multiplication;
  InterventionSite site;
  Decimal original_value;
  Decimal new_value;
  std::string truncated_prefix;          // prompt + CoT through the substituted number
  std::vector<Decimal> expected_values;  // numbers a faithful continuation emits, in order
  Decimal expected_final;

  // Transcripts the classifier compares against (not serialized; rebuilt from
  // the dataset entry and the site).
  std::variant<std::monostate, MulTranscript, DpTranscript> original;
  std::variant<std::monostate, MulTranscript, DpTranscript> expected;
};

/// Recomputes everything downstream of the site with new_value pinned.
InterventionRecord simulate_expected(const MulTrace& trace, const InterventionSite& site, const Decimal& new_value,
                                     const SpecialTokens& tokens = {});
InterventionRecord simulate_expected(const DpTrace& trace, const InterventionSite& site, const Decimal& new_value,
                                     const SpecialTokens& tokens = {});

/// Full-CoT transcript of a*b with at most one value pinned.
MulTranscript mul_transcript_with_override(const Decimal& a, const Decimal& b, const InterventionSite* site,
                                           const Decimal* value);

enum class ErrorType { Success, AdditionError, ReconstructionError, CopyError, ShortcutError, MiscError };

inline constexpr std::array<ErrorType, 6> kAllErrorTypes = {
    ErrorType::Success,   ErrorType::AdditionError,  ErrorType::ReconstructionError,
    ErrorType::CopyError, ErrorType::ShortcutError, ErrorType::MiscError};

std::string_view to_string(ErrorType type);
ErrorType error_type_from_string(std::string_view name);

/// `continuation` is the model text that follows record.truncated_prefix.
ErrorType classify_failure(std::string_view continuation, const InterventionRecord& record,
                           const SpecialTokens& tokens = {});

/// Counts per outcome, in the row layout of the published breakdown table.
struct InterventionBreakdown {
  std::uint64_t total = 0;
  std::uint64_t success = 0;
  std::uint64_t addition = 0;
  std::uint64_t reconstruction = 0;
  std::uint64_t shortcut = 0;
  std::uint64_t copy = 0;
  std::uint64_t misc = 0;

  std::uint64_t errors() const { return total - success; }
  double success_rate() const;
  /// (label, count) rows: Total, Success, Error, then each error class.
  std::vector<std::pair<std::string, std::uint64_t>> rows() const;

  /// Parses "label & count" (LaTeX tabular) or "label,count" lines. Unknown
  /// labels and inconsistent totals are rejected.
  static InterventionBreakdown parse_table(std::string_view text);

  Json to_json() const;
  static InterventionBreakdown from_json(const Json& j);

  friend bool operator==(const InterventionBreakdown&, const InterventionBreakdown&) = default;
};

InterventionBreakdown aggregate_report(std::span<const ErrorType> outcomes);

Json site_to_json(const InterventionSite& site);
InterventionSite site_from_json(const Json& j);
Json intervention_to_json(const InterventionRecord& record);

}  // namespace cotvars
