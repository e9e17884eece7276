// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/formats.hpp"

#include <algorithm>
#include <regex>

#include "cotvars/error.hpp"
#include "cotvars/grader.hpp"

namespace cotvars {

std::string_view to_string(Task task) { return task == Task::DP ? "dp" : "mul"; }

std::string_view to_string(PromptStyle style) {
  switch (style) {
    case PromptStyle::Plain: return "plain";
    case PromptStyle::FullCot: return "full";
    case PromptStyle::CompressedCot: return "compressed";
    case PromptStyle::LatentCot: return "latent";
    case PromptStyle::MergedLatentCot: return "merged_latent";
  }
  return "full";
}

Task task_from_string(std::string_view name) {
  if (name == "mul" || name == "multiplication") return Task::Multiplication;
  if (name == "dp") return Task::DP;
  throw ValidationError("unknown task '" + std::string(name) + "' (expected mul or dp)");
}

PromptStyle style_from_string(std::string_view name) {
  if (name == "plain") return PromptStyle::Plain;
  if (name == "full") return PromptStyle::FullCot;
  if (name == "compressed") return PromptStyle::CompressedCot;
  if (name == "latent") return PromptStyle::LatentCot;
  if (name == "merged_latent" || name == "merged") return PromptStyle::MergedLatentCot;
  throw ValidationError("unknown style '" + std::string(name) +
                        "' (expected plain, full, compressed, latent or merged_latent)");
}

bool style_valid_for(Task task, PromptStyle style) {
  if (task == Task::Multiplication) return style != PromptStyle::MergedLatentCot;
  return style != PromptStyle::CompressedCot;
}

bool is_latent(PromptStyle style) {
  return style == PromptStyle::LatentCot || style == PromptStyle::MergedLatentCot;
}

namespace {

void require_style(Task task, PromptStyle style) {
  if (!style_valid_for(task, style)) {
    throw ValidationError("style '" + std::string(to_string(style)) + "' is not defined for task '" +
                          std::string(to_string(task)) + "'");
  }
}

bool strictly_increasing(const std::vector<std::size_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](auto a, auto b) { return a >= b; }) == v.end();
}

}  // namespace

void MergePlan::validate(std::size_t rows, std::size_t cols) const {
  if (kept_rows.empty() || kept_cols.empty()) throw ValidationError("merge plan keeps no cells");
  if (!strictly_increasing(kept_rows) || !strictly_increasing(kept_cols)) {
    throw ValidationError("merge plan indices must be sorted and unique");
  }
  if (kept_rows.back() != rows - 1 || kept_cols.back() != cols - 1) {
    throw ValidationError("merge plan must keep the last row and column");
  }
}

// ---------------------------------------------------------------------------
// Transcripts

MulTranscript transcript_of(const MulTrace& trace) {
  MulTranscript t;
  t.blocks.reserve(trace.partials.size());
  for (const auto& p : trace.partials) {
    MulBlock block;
    block.multiplicand = trace.a;
    block.multiplier = p.multiplier();
    for (const auto& s : p.steps) {
      block.steps.push_back({s.a_digit, s.b_digit, s.raw_product, s.digit_out, s.carry_out});
    }
    block.result_multiplicand = trace.a;
    block.result_multiplier = block.multiplier;
    block.value = p.value;
    t.addends.push_back(p.value);
    t.blocks.push_back(std::move(block));
  }
  Decimal acc = t.addends.front();
  for (std::size_t i = 1; i < t.addends.size(); ++i) {
    FoldLine line;
    line.lhs.push_back(acc);
    line.lhs.insert(line.lhs.end(), t.addends.begin() + static_cast<std::ptrdiff_t>(i), t.addends.end());
    acc = trace.addition_chain[i - 1];
    line.rhs.push_back(acc);
    line.rhs.insert(line.rhs.end(), t.addends.begin() + static_cast<std::ptrdiff_t>(i + 1), t.addends.end());
    t.folds.push_back(std::move(line));
  }
  t.equation_a = trace.a;
  t.equation_b = trace.b;
  t.equation_value = trace.final;
  t.result = trace.final;
  return t;
}

MulTranscript project(const MulTranscript& full, PromptStyle style) {
  MulTranscript t = full;
  for (auto& block : t.blocks) {
    if (is_latent(style)) {
      block.latent_count = block.steps.size();
      block.steps.clear();
      block.result_multiplicand = block.multiplicand;
      block.result_multiplier = block.multiplier;
    } else if (style == PromptStyle::CompressedCot) {
      for (auto& s : block.steps) s.raw_product.reset();
    }
  }
  return t;
}

DpTranscript transcript_of(const DpTrace& trace, PromptStyle style, const MergePlan* plan) {
  DpTranscript t;
  t.result = Decimal(static_cast<std::uint64_t>(trace.final));
  if (style == PromptStyle::FullCot) {
    for (std::size_t i = 0; i < trace.dp.rows(); ++i) {
      DpRow row;
      row.values.assign(trace.dp.row(i).begin(), trace.dp.row(i).end());
      t.rows.push_back(std::move(row));
    }
  } else if (style == PromptStyle::LatentCot) {
    t.rows.assign(trace.dp.rows(), DpRow{{}, trace.dp.cols()});
  } else if (style == PromptStyle::MergedLatentCot) {
    if (plan == nullptr) throw ValidationError("merged latent rendering needs a merge plan");
    plan->validate(trace.dp.rows(), trace.dp.cols());
    t.rows.assign(plan->kept_rows.size(), DpRow{{}, plan->kept_cols.size()});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

class TextBuilder {
 public:
  void lit(std::string_view s) { out_.text.append(s); }
  void num(const std::string& digits, std::string locator) {
    const auto begin = out_.text.size();
    out_.text.append(digits);
    out_.numbers.push_back({std::move(locator), begin, out_.text.size()});
  }
  void num(const Decimal& v, std::string locator) { num(v.str(), std::move(locator)); }
  void num(std::int64_t v, std::string locator) { num(std::to_string(v), std::move(locator)); }
  void latent(const std::string& token) {
    out_.latent_offsets.push_back(out_.text.size());
    out_.text.append(token);
  }
  void terms(const std::vector<Decimal>& values, const std::string& prefix) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k > 0) lit("+");
      num(values[k], prefix + "[" + std::to_string(k) + "]");
    }
  }
  RenderedText take() { return std::move(out_); }

 private:
  RenderedText out_;
};

std::string block_loc(std::size_t p) { return "block[" + std::to_string(p) + "]"; }

}  // namespace

std::string render_mul_prompt(const Decimal& a, const Decimal& b) { return a.str() + "*" + b.str() + "="; }

std::string render_dp_prompt(const Grid& grid) {
  std::string s =
      "Find a path in the given table from the top-left corner to the bottom-right corner that maximizes the sum "
      "of the numbers on it. You can only move rightwards or downwards.\n\nTable:\n";
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      if (j > 0) s.push_back(' ');
      s += std::to_string(grid.at(i, j));
    }
    s.push_back('\n');
  }
  s.push_back('\n');
  return s;
}

RenderedText render_mul_target(const MulTranscript& t, PromptStyle style, const SpecialTokens& tokens) {
  require_style(Task::Multiplication, style);
  TextBuilder b;
  if (style == PromptStyle::Plain) {
    b.lit("Result: ");
    b.num(t.result, "result");
    return b.take();
  }
  const bool full = style == PromptStyle::FullCot;
  const bool latent = style == PromptStyle::LatentCot;

  b.lit(tokens.cot_open);
  for (std::size_t p = 0; p < t.blocks.size(); ++p) {
    const auto& block = t.blocks[p];
    const auto loc = block_loc(p);
    if (full) b.lit("Calculate ");
    b.num(block.multiplicand, loc + ".multiplicand");
    b.lit("*");
    b.num(block.multiplier, loc + ".multiplier");
    b.lit("\n");
    if (latent) {
      for (std::size_t k = 0; k < block.latent_count; ++k) b.latent(tokens.latent);
      b.lit("|");
      b.num(block.value, loc + ".value");
      b.lit("\n");
      continue;
    }
    for (std::size_t s = 0; s < block.steps.size(); ++s) {
      const auto& step = block.steps[s];
      const auto sloc = loc + ".step[" + std::to_string(s) + "]";
      b.num(step.a_digit, sloc + ".a_digit");
      b.lit("*");
      b.num(step.b_digit, sloc + ".b_digit");
      if (full) {
        if (!step.raw_product) throw ValidationError("full CoT step needs a raw product");
        b.lit("=");
        b.num(*step.raw_product, sloc + ".raw");
        b.lit(", digit ");
        b.num(step.digit, sloc + ".digit");
        b.lit(", carry ");
      } else {
        b.lit(" ");
        b.num(step.digit, sloc + ".digit");
        b.lit(" ");
      }
      b.num(step.carry, sloc + ".carry");
      b.lit("\n");
    }
    if (full) b.lit("Result of ");
    b.num(block.result_multiplicand, loc + ".result_multiplicand");
    b.lit("*");
    b.num(block.result_multiplier, loc + ".result_multiplier");
    b.lit("=");
    b.num(block.value, loc + ".value");
    b.lit("\n");
  }
  b.lit("\n");
  if (full) b.lit("Add up partial results: ");
  b.terms(t.addends, "addends");
  b.lit("\n");
  for (std::size_t i = 0; i < t.folds.size(); ++i) {
    const auto loc = "fold[" + std::to_string(i) + "]";
    b.terms(t.folds[i].lhs, loc + ".lhs");
    b.lit("=");
    b.terms(t.folds[i].rhs, loc + ".rhs");
    b.lit("\n");
  }
  b.lit("\n");
  if (full) b.lit("The final result is: ");
  b.num(t.equation_a, "equation.a");
  b.lit("*");
  b.num(t.equation_b, "equation.b");
  b.lit("=");
  b.num(t.equation_value, "equation.value");
  b.lit(tokens.cot_close);
  b.lit("\n\nResult: ");
  b.num(t.result, "result");
  return b.take();
}

RenderedText render_dp_target(const DpTranscript& t, PromptStyle style, const SpecialTokens& tokens) {
  require_style(Task::DP, style);
  TextBuilder b;
  if (style != PromptStyle::Plain) {
    b.lit(tokens.cot_open);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (i > 0) b.lit("\n");
      const auto& row = t.rows[i];
      if (style == PromptStyle::FullCot) {
        for (std::size_t j = 0; j < row.values.size(); ++j) {
          if (j > 0) b.lit(" ");
          b.num(row.values[j], "dp[" + std::to_string(i) + "][" + std::to_string(j) + "]");
        }
      } else {
        for (std::size_t k = 0; k < row.latent_count; ++k) b.latent(tokens.latent);
      }
    }
    b.lit(tokens.cot_close);
    b.lit("\n\n");
  }
  b.lit("Result: ");
  b.num(t.result, "result");
  return b.take();
}

RenderedExample render(const MulTrace& trace, PromptStyle style, const SpecialTokens& tokens) {
  require_style(Task::Multiplication, style);
  RenderedExample ex;
  ex.prompt = render_mul_prompt(trace.a, trace.b);
  auto text = render_mul_target(project(transcript_of(trace), style), style, tokens);
  ex.target = std::move(text.text);
  ex.gold_final = trace.final;
  if (style == PromptStyle::LatentCot) {
    std::size_t k = 0;
    for (const auto& p : trace.partials) {
      for (const auto& s : p.steps) {
        ex.latent_slots.push_back({text.latent_offsets.at(k++), encode_mul_step(s.digit_out, s.carry_out)});
      }
    }
  }
  return ex;
}

RenderedExample render(const DpTrace& trace, PromptStyle style, const SpecialTokens& tokens, const MergePlan* plan) {
  require_style(Task::DP, style);
  RenderedExample ex;
  ex.prompt = render_dp_prompt(trace.grid);
  auto text = render_dp_target(transcript_of(trace, style, plan), style, tokens);
  ex.target = std::move(text.text);
  ex.gold_final = Decimal(static_cast<std::uint64_t>(trace.final));

  const auto layout = LatentLayout::dp_default();
  std::size_t k = 0;
  auto add_slot = [&](std::size_t i, std::size_t j) {
    ex.latent_slots.push_back(
        {text.latent_offsets.at(k++), encode_number(static_cast<std::uint64_t>(trace.dp.at(i, j)), layout)});
  };
  if (style == PromptStyle::LatentCot) {
    for (std::size_t i = 0; i < trace.dp.rows(); ++i) {
      for (std::size_t j = 0; j < trace.dp.cols(); ++j) add_slot(i, j);
    }
  } else if (style == PromptStyle::MergedLatentCot) {
    for (auto i : plan->kept_rows) {
      for (auto j : plan->kept_cols) add_slot(i, j);
    }
  }
  return ex;
}

std::string remove_non_result_tokens(std::string_view full_cot_text, const SpecialTokens& tokens) {
  const auto parsed = parse(full_cot_text, Task::Multiplication, PromptStyle::FullCot, tokens);
  if (!parsed.complete) {
    std::string why = parsed.diagnostics.empty() ? "unparseable" : parsed.diagnostics.front().message();
    throw ValidationError("remove_non_result_tokens: input is not a full CoT text: " + why);
  }
  static const std::regex step_line(R"((\d+\*\d+)=\d+, digit (\d+), carry (\d+))");
  std::string s = std::regex_replace(std::string(full_cot_text), step_line, "$1 $2 $3");
  for (std::string_view word : {"Calculate ", "Result of ", "Add up partial results: ", "The final result is: "}) {
    for (auto pos = s.find(word); pos != std::string::npos; pos = s.find(word, pos)) s.erase(pos, word.size());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Parsing

std::string Diagnostic::message() const {
  const auto where = "line " + std::to_string(line) + ": ";
  if (found == "<absent>") return where + "missing " + expected;
  return where + "expected " + expected + ", found '" + found + "'";
}

namespace {

struct ParseFailure {
  Diagnostic diagnostic;
};

class Cursor {
 public:
  Cursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  bool eof() const { return pos_ >= text_.size(); }
  std::size_t line() const { return line_; }
  std::string_view rest() const { return text_.substr(pos_); }
  bool at(std::string_view lit) const { return rest().starts_with(lit); }
  bool at_digit() const { return !eof() && text_[pos_] >= '0' && text_[pos_] <= '9'; }

  bool consume(std::string_view lit) {
    if (!at(lit)) return false;
    advance(lit.size());
    return true;
  }

  void expect(std::string_view lit, std::string_view production) {
    if (!consume(lit)) fail(std::string(production) + " '" + escape(lit) + "'");
  }

  Decimal number(std::string_view production) {
    std::size_t n = 0;
    while (pos_ + n < text_.size() && text_[pos_ + n] >= '0' && text_[pos_ + n] <= '9') ++n;
    if (n == 0) fail(std::string(production) + " number");
    auto v = Decimal::parse(text_.substr(pos_, n));
    advance(n);
    return v;
  }

  int small(std::string_view production) {
    const auto at_line = line_;
    auto v = number(production);
    auto u = v.to_u64();
    if (!u || *u > 1'000'000) {
      throw ParseFailure{{at_line, std::string(production) + " small integer", v.str(), true}};
    }
    return static_cast<int>(*u);
  }

  std::int64_t int64(std::string_view production) {
    const auto at_line = line_;
    auto v = number(production);
    auto u = v.to_u64();
    if (!u || *u > static_cast<std::uint64_t>(INT64_MAX)) {
      throw ParseFailure{{at_line, std::string(production) + " 64-bit integer", v.str(), true}};
    }
    return static_cast<std::int64_t>(*u);
  }

  [[noreturn]] void fail(std::string expected) const {
    throw ParseFailure{{line_, std::move(expected), found(), true}};
  }

  std::string found() const {
    auto r = rest();
    if (r.empty()) return "<end of text>";
    auto nl = r.find('\n');
    if (nl == 0) return "<newline>";
    return escape(r.substr(0, std::min<std::size_t>(nl, 40)));
  }

  static std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c == '\n') {
        out += "\\n";
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

 private:
  void advance(std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text_[pos_ + k] == '\n') ++line_;
    }
    pos_ += n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

std::vector<Decimal> parse_terms(Cursor& c, std::string_view production) {
  std::vector<Decimal> terms;
  terms.push_back(c.number(production));
  while (c.consume("+")) terms.push_back(c.number(production));
  return terms;
}

MulBlock parse_mul_block(Cursor& c, PromptStyle style, const SpecialTokens& tokens) {
  const bool full = style == PromptStyle::FullCot;
  MulBlock block;
  if (full) c.expect("Calculate ", "block header");
  block.multiplicand = c.number("block header multiplicand");
  c.expect("*", "block header");
  block.multiplier = c.number("block header multiplier");
  c.expect("\n", "end of block header");

  if (style == PromptStyle::LatentCot) {
    while (c.consume(tokens.latent)) ++block.latent_count;
    if (block.latent_count == 0) c.fail("latent token");
    c.expect("|", "latent block separator");
    block.value = c.number("partial product");
    c.expect("\n", "end of latent block");
    block.result_multiplicand = block.multiplicand;
    block.result_multiplier = block.multiplier;
    return block;
  }

  for (;;) {
    if (full && c.consume("Result of ")) {
      block.result_multiplicand = c.number("partial result multiplicand");
      c.expect("*", "partial result");
      block.result_multiplier = c.number("partial result multiplier");
      c.expect("=", "partial result");
      block.value = c.number("partial product");
      c.expect("\n", "end of partial result line");
      return block;
    }
    StepLine step;
    const auto lhs = c.number(full ? "step line or 'Result of'" : "step line or partial result");
    c.expect("*", "step line");
    const auto rhs = c.number("step multiplier digit");
    if (!full && c.consume("=")) {
      block.result_multiplicand = lhs;
      block.result_multiplier = rhs;
      block.value = c.number("partial product");
      c.expect("\n", "end of partial result line");
      return block;
    }
    auto to_small = [&](const Decimal& v) {
      auto u = v.to_u64();
      if (!u || *u > 1'000'000) c.fail("small integer in step line");
      return static_cast<int>(*u);
    };
    step.a_digit = to_small(lhs);
    step.b_digit = to_small(rhs);
    if (full) {
      c.expect("=", "step product");
      step.raw_product = c.small("raw product");
      c.expect(", digit ", "step line");
      step.digit = c.small("digit");
      c.expect(", carry ", "step line");
      step.carry = c.small("carry");
    } else {
      c.expect(" ", "step line");
      step.digit = c.small("digit");
      c.expect(" ", "step line");
      step.carry = c.small("carry");
    }
    c.expect("\n", "end of step line");
    block.steps.push_back(step);
  }
}

MulTranscript parse_mul_cot(Cursor& c, PromptStyle style, const SpecialTokens& tokens) {
  const bool full = style == PromptStyle::FullCot;
  MulTranscript t;
  c.expect(tokens.cot_open, "CoT open token");
  do {
    t.blocks.push_back(parse_mul_block(c, style, tokens));
  } while (!c.at("\n"));
  c.expect("\n", "blank line before the addition block");

  if (full) c.expect("Add up partial results: ", "addition header");
  t.addends = parse_terms(c, "addend");
  c.expect("\n", "end of addition header");
  while (c.at_digit()) {
    FoldLine line;
    line.lhs = parse_terms(c, "fold term");
    c.expect("=", "fold line");
    line.rhs = parse_terms(c, "fold term");
    c.expect("\n", "end of fold line");
    t.folds.push_back(std::move(line));
  }
  c.expect("\n", "fold line or blank line");

  if (full) c.expect("The final result is: ", "final equation");
  t.equation_a = c.number("final equation operand");
  c.expect("*", "final equation");
  t.equation_b = c.number("final equation operand");
  c.expect("=", "final equation");
  t.equation_value = c.number("final equation value");
  c.expect(tokens.cot_close, "CoT close token");
  c.expect("\n\n", "blank line before the result");
  c.expect("Result: ", "result line");
  t.result = c.number("result value");
  return t;
}

DpTranscript parse_dp_cot(Cursor& c, PromptStyle style, const SpecialTokens& tokens) {
  DpTranscript t;
  c.expect(tokens.cot_open, "CoT open token");
  for (;;) {
    DpRow row;
    if (style == PromptStyle::FullCot) {
      row.values.push_back(c.int64("dp cell"));
      while (c.consume(" ")) row.values.push_back(c.int64("dp cell"));
    } else {
      while (c.consume(tokens.latent)) ++row.latent_count;
      if (row.latent_count == 0) c.fail("latent token");
    }
    t.rows.push_back(std::move(row));
    if (c.consume(tokens.cot_close)) break;
    c.expect("\n", "row separator or CoT close token");
  }
  c.expect("\n\n", "blank line before the result");
  c.expect("Result: ", "result line");
  t.result = c.number("result value");
  return t;
}

std::size_t count_lines(std::string_view s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

ParsedTrace parse(std::string_view text, Task task, PromptStyle style, const SpecialTokens& tokens) {
  ParsedTrace out;
  out.task = task;
  out.style = style;
  out.final = extract_final(text);
  if (!out.final) out.diagnostics.push_back({count_lines(text) + 1, "Result line", "<absent>", true});
  if (!style_valid_for(task, style)) {
    out.diagnostics.push_back({1, "style valid for the task", std::string(to_string(style)), true});
    return out;
  }

  std::size_t start = 0;
  if (style == PromptStyle::Plain) {
    const auto pos = text.rfind("Result:");
    if (pos == std::string_view::npos) return out;
    start = pos;
  } else {
    const auto pos = text.find(tokens.cot_open);
    if (pos == std::string_view::npos) {
      out.diagnostics.push_back({1, "CoT open token '" + tokens.cot_open + "'", "<absent>", true});
      return out;
    }
    start = pos;
  }

  Cursor c(text.substr(start), count_lines(text.substr(0, start)) + 1);
  try {
    if (style == PromptStyle::Plain) {
      c.expect("Result: ", "result line");
      const auto value = c.number("result value");
      if (task == Task::Multiplication) {
        out.mul = MulTranscript{};
        out.mul->result = value;
      } else {
        out.dp = DpTranscript{};
        out.dp->result = value;
      }
    } else if (task == Task::Multiplication) {
      out.mul = parse_mul_cot(c, style, tokens);
    } else {
      out.dp = parse_dp_cot(c, style, tokens);
    }
    out.complete = true;
    if (!c.eof()) out.diagnostics.push_back({c.line(), "end of text after the result line", c.found(), false});
  } catch (const ParseFailure& failure) {
    out.diagnostics.push_back(failure.diagnostic);
  }
  return out;
}

}  // namespace cotvars
