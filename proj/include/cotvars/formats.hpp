// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Text forms of oracle traces. A trace is first turned into a transcript (the
// numbers a reader can see in the CoT text), which is then rendered in one of
// the prompt styles. The parser is the inverse: text -> transcript, with
// per-line diagnostics. The grammar is documented in docs/grammar.md.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotvars/decimal.hpp"
#include "cotvars/latent.hpp"
#include "cotvars/oracles.hpp"

namespace cotvars {

enum class Task { Multiplication, DP };
enum class PromptStyle { Plain, FullCot, CompressedCot, LatentCot, MergedLatentCot };

std::string_view to_string(Task task);
std::string_view to_string(PromptStyle style);
Task task_from_string(std::string_view name);
PromptStyle style_from_string(std::string_view name);
bool style_valid_for(Task task, PromptStyle style);
bool is_latent(PromptStyle style);

struct SpecialTokens {
  std::string cot_open = "<tool_call>";
  std::string cot_close = "</tool_call>";
  std::string latent = "<|fim_middle|>";

  friend bool operator==(const SpecialTokens&, const SpecialTokens&) = default;
};

/// Which DP cells survive latent-token merging. Built by make_merge_plan.
struct MergePlan {
  std::vector<std::size_t> kept_rows;
  std::vector<std::size_t> kept_cols;

  std::size_t cell_count() const { return kept_rows.size() * kept_cols.size(); }
  /// Indices sorted, unique, in range, and including the last row and column.
  void validate(std::size_t rows, std::size_t cols) const;

  friend bool operator==(const MergePlan&, const MergePlan&) = default;
};

struct LatentSlot {
  std::size_t offset = 0;  // character offset of the latent token in the target
  LatentVec vec;

  friend bool operator==(const LatentSlot&, const LatentSlot&) = default;
};

struct RenderedExample {
  std::string prompt;
  std::string target;
  std::vector<LatentSlot> latent_slots;
  Decimal gold_final;
};

// ---------------------------------------------------------------------------
// Transcripts: every number visible in a rendered CoT, in rendering order.

struct StepLine {
  int a_digit = 0;
  int b_digit = 0;
  std::optional<int> raw_product;  // absent in compressed text
  int digit = 0;
  int carry = 0;

  friend bool operator==(const StepLine&, const StepLine&) = default;
};

struct MulBlock {
  Decimal multiplicand;  // header "a*m"
  Decimal multiplier;
  std::vector<StepLine> steps;     // empty in latent styles
  std::size_t latent_count = 0;    // latent tokens in the block (latent styles)
  Decimal result_multiplicand;     // "Result of a*m=v"; equals the header in latent text
  Decimal result_multiplier;
  Decimal value;

  friend bool operator==(const MulBlock&, const MulBlock&) = default;
};

struct FoldLine {
  std::vector<Decimal> lhs;
  std::vector<Decimal> rhs;

  friend bool operator==(const FoldLine&, const FoldLine&) = default;
};

struct MulTranscript {
  std::vector<MulBlock> blocks;
  std::vector<Decimal> addends;
  std::vector<FoldLine> folds;
  Decimal equation_a;
  Decimal equation_b;
  Decimal equation_value;
  Decimal result;

  friend bool operator==(const MulTranscript&, const MulTranscript&) = default;
};

struct DpRow {
  std::vector<std::int64_t> values;  // FullCot
  std::size_t latent_count = 0;      // latent styles

  friend bool operator==(const DpRow&, const DpRow&) = default;
};

struct DpTranscript {
  std::vector<DpRow> rows;
  Decimal result;

  friend bool operator==(const DpTranscript&, const DpTranscript&) = default;
};

/// Full-CoT transcript of an oracle trace (raw products included).
MulTranscript transcript_of(const MulTrace& trace);
/// Transcript of a DP trace as observable in `style`.
DpTranscript transcript_of(const DpTrace& trace, PromptStyle style, const MergePlan* plan = nullptr);
/// Drops what `style` does not show (raw products, or step lines for latent text).
MulTranscript project(const MulTranscript& full, PromptStyle style);

struct NumberSpan {
  std::string locator;  // e.g. "block[1].step[2].carry", "fold[0].rhs[0]", "dp[3][4]", "result"
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const NumberSpan&, const NumberSpan&) = default;
};

struct RenderedText {
  std::string text;
  std::vector<NumberSpan> numbers;          // every number in the text, in order
  std::vector<std::size_t> latent_offsets;  // every latent token, in order
};

std::string render_mul_prompt(const Decimal& a, const Decimal& b);
/// Does not validate cell ranges.
std::string render_dp_prompt(const Grid& grid);

RenderedText render_mul_target(const MulTranscript& transcript, PromptStyle style, const SpecialTokens& tokens);
RenderedText render_dp_target(const DpTranscript& transcript, PromptStyle style, const SpecialTokens& tokens);

RenderedExample render(const MulTrace& trace, PromptStyle style, const SpecialTokens& tokens = {});
/// MergedLatentCot requires `plan`.
RenderedExample render(const DpTrace& trace, PromptStyle style, const SpecialTokens& tokens = {},
                       const MergePlan* plan = nullptr);

/// Strips the wording of a full multiplication CoT, leaving only numbers and
/// symbols. Throws ValidationError if the input is not a complete FullCot text.
std::string remove_non_result_tokens(std::string_view full_cot_text, const SpecialTokens& tokens = {});

// ---------------------------------------------------------------------------
// Parsing

struct Diagnostic {
  std::size_t line = 0;  // 1-based line in the parsed text
  std::string expected;  // grammar production or literal
  std::string found;     // offending text, truncated
  bool fatal = true;

  std::string message() const;
};

struct ParsedTrace {
  Task task = Task::Multiplication;
  PromptStyle style = PromptStyle::FullCot;
  std::optional<MulTranscript> mul;
  std::optional<DpTranscript> dp;
  std::optional<Decimal> final;  // value after the last "Result:" marker
  std::vector<Diagnostic> diagnostics;
  bool complete = false;  // the whole grammar matched (trailing text is non-fatal)
};

/// Total over strings: failures come back as diagnostics. Text before the
/// CoT-open token (an echoed prompt) is skipped.
ParsedTrace parse(std::string_view text, Task task, PromptStyle style, const SpecialTokens& tokens = {});

}  // namespace cotvars
