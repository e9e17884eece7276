// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/intervention.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "cotvars/error.hpp"
#include "cotvars/grader.hpp"

namespace cotvars {

std::string_view to_string(SiteKind kind) {
  switch (kind) {
    case SiteKind::MulStepDigit: return "mul_step_digit";
    case SiteKind::MulStepCarry: return "mul_step_carry";
    case SiteKind::AdditionChainAddend: return "addition_chain_addend";
    case SiteKind::AdditionChainFirstPartial: return "addition_chain_first_partial";
    case SiteKind::FinalResult: return "final_result";
    case SiteKind::DpCell: return "dp_cell";
  }
  return "final_result";
}

SiteKind site_kind_from_string(std::string_view name) {
  for (auto kind : {SiteKind::MulStepDigit, SiteKind::MulStepCarry, SiteKind::AdditionChainAddend,
                    SiteKind::AdditionChainFirstPartial, SiteKind::FinalResult, SiteKind::DpCell}) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown intervention site kind '" + std::string(name) + "'");
}

std::string InterventionSite::locator() const {
  const auto a = std::to_string(first);
  const auto b = std::to_string(second);
  switch (kind) {
    case SiteKind::MulStepDigit: return "block[" + a + "].step[" + b + "].digit";
    case SiteKind::MulStepCarry: return "block[" + a + "].step[" + b + "].carry";
    case SiteKind::AdditionChainAddend: return "addends[" + a + "]";
    case SiteKind::AdditionChainFirstPartial: return "fold[" + a + "].rhs[0]";
    case SiteKind::FinalResult: return "equation.value";
    case SiteKind::DpCell: return "dp[" + a + "][" + b + "]";
  }
  return {};
}

std::vector<InterventionSite> eligible_sites(const MulTrace& trace) {
  std::vector<InterventionSite> sites;
  for (std::size_t p = 0; p < trace.partials.size(); ++p) {
    for (std::size_t s = 0; s < trace.partials[p].steps.size(); ++s) {
      sites.push_back({SiteKind::MulStepDigit, p, s});
      sites.push_back({SiteKind::MulStepCarry, p, s});
    }
  }
  for (std::size_t k = 0; k < trace.partials.size(); ++k) sites.push_back({SiteKind::AdditionChainAddend, k, 0});
  for (std::size_t i = 0; i < trace.addition_chain.size(); ++i) {
    sites.push_back({SiteKind::AdditionChainFirstPartial, i, 0});
  }
  sites.push_back({SiteKind::FinalResult, 0, 0});
  return sites;
}

std::vector<InterventionSite> eligible_sites(const DpTrace& trace) {
  std::vector<InterventionSite> sites;
  for (std::size_t i = 0; i < trace.dp.rows(); ++i) {
    for (std::size_t j = 0; j < trace.dp.cols(); ++j) sites.push_back({SiteKind::DpCell, i, j});
  }
  return sites;
}

InterventionSite pick_site(const MulTrace& trace, Rng& rng) {
  const auto sites = eligible_sites(trace);
  return sites[rng.uniform(0, sites.size() - 1)];
}

InterventionSite pick_site(const DpTrace& trace, Rng& rng) {
  const auto sites = eligible_sites(trace);
  return sites[rng.uniform(0, sites.size() - 1)];
}

Decimal substitute_value(const Decimal& value, Rng& rng) {
  const std::size_t len = value.digit_count();
  if (len == 1) {
    auto d = rng.uniform(0, 8);
    if (d >= static_cast<std::uint64_t>(value.digit(0))) ++d;
    return Decimal(d);
  }
  // Keep the leading digit; redraw the tail among the other 10^(len-1) - 1 tails.
  std::vector<std::uint8_t> le(len);
  le[len - 1] = static_cast<std::uint8_t>(value.leading_digit());
  const std::size_t tail_len = len - 1;
  if (tail_len <= 18) {
    std::uint64_t tail_space = 1;
    std::uint64_t original_tail = 0;
    for (std::size_t k = tail_len; k-- > 0;) {
      tail_space *= 10;
      original_tail = original_tail * 10 + static_cast<std::uint64_t>(value.digit(k));
    }
    auto tail = rng.uniform(0, tail_space - 2);
    if (tail >= original_tail) ++tail;
    for (std::size_t k = 0; k < tail_len; ++k) {
      le[k] = static_cast<std::uint8_t>(tail % 10);
      tail /= 10;
    }
  } else {
    do {
      for (std::size_t k = 0; k < tail_len; ++k) le[k] = static_cast<std::uint8_t>(rng.uniform(0, 9));
    } while (std::equal(le.begin(), le.begin() + static_cast<std::ptrdiff_t>(tail_len), value.digits().begin()));
  }
  return Decimal::from_digits(std::move(le));
}

namespace {

int small_value(const Decimal& v) {
  auto u = v.to_u64();
  if (!u || *u > 9) throw ValidationError("digit/carry intervention value must be a single digit");
  return static_cast<int>(*u);
}

bool site_is(const InterventionSite* site, SiteKind kind, std::size_t first, std::size_t second = 0) {
  return site != nullptr && site->kind == kind && site->first == first && site->second == second;
}

}  // namespace

MulTranscript mul_transcript_with_override(const Decimal& a, const Decimal& b, const InterventionSite* site,
                                           const Decimal* value) {
  if (a.is_zero() || b.is_zero()) throw ValidationError("operands must be positive");
  if ((site == nullptr) != (value == nullptr)) throw ValidationError("site and value must be given together");
  MulTranscript t;
  std::vector<int> digits;
  for (std::size_t p = 0; p < b.digit_count(); ++p) {
    MulBlock block;
    const int bd = b.digit(p);
    block.multiplicand = a;
    block.multiplier = Decimal(static_cast<std::uint64_t>(bd)).shifted(p);
    digits.clear();
    int carry = 0;
    for (std::size_t k = 0; k < a.digit_count(); ++k) {
      StepLine step;
      step.a_digit = a.digit(k);
      step.b_digit = bd;
      step.raw_product = step.a_digit * bd;
      const int x = *step.raw_product + carry;
      step.digit = x % 10;
      step.carry = x / 10;
      if (site_is(site, SiteKind::MulStepDigit, p, k)) step.digit = small_value(*value);
      if (site_is(site, SiteKind::MulStepCarry, p, k)) step.carry = small_value(*value);
      carry = step.carry;
      digits.push_back(step.digit);
      block.steps.push_back(step);
    }
    block.result_multiplicand = a;
    block.result_multiplier = block.multiplier;
    block.value = combine_partial(digits, carry, p);
    t.addends.push_back(block.value);
    t.blocks.push_back(std::move(block));
  }
  for (std::size_t k = 0; k < t.addends.size(); ++k) {
    if (site_is(site, SiteKind::AdditionChainAddend, k)) t.addends[k] = *value;
  }
  Decimal acc = t.addends.front();
  for (std::size_t i = 1; i < t.addends.size(); ++i) {
    FoldLine line;
    line.lhs.push_back(acc);
    line.lhs.insert(line.lhs.end(), t.addends.begin() + static_cast<std::ptrdiff_t>(i), t.addends.end());
    acc = site_is(site, SiteKind::AdditionChainFirstPartial, i - 1) ? *value : acc + t.addends[i];
    line.rhs.push_back(acc);
    line.rhs.insert(line.rhs.end(), t.addends.begin() + static_cast<std::ptrdiff_t>(i + 1), t.addends.end());
    t.folds.push_back(std::move(line));
  }
  t.equation_a = a;
  t.equation_b = b;
  t.equation_value = site_is(site, SiteKind::FinalResult, 0) ? *value : acc;
  t.result = t.equation_value;
  return t;
}

namespace {

template <typename Transcript>
void finish_record(InterventionRecord& rec, const std::string& prompt, const RenderedText& original_text,
                   const RenderedText& expected_text, const Transcript& expected) {
  const auto locator = rec.site.locator();
  auto find = [&](const RenderedText& text) {
    auto it = std::find_if(text.numbers.begin(), text.numbers.end(),
                           [&](const NumberSpan& s) { return s.locator == locator; });
    if (it == text.numbers.end()) throw ValidationError("intervention site " + locator + " does not exist in trace");
    return it;
  };
  const auto orig_span = find(original_text);
  rec.original_value = Decimal::parse(original_text.text.substr(orig_span->begin, orig_span->end - orig_span->begin));
  const auto span = find(expected_text);
  rec.truncated_prefix = prompt + expected_text.text.substr(0, span->end);
  for (auto it = std::next(span); it != expected_text.numbers.end(); ++it) {
    rec.expected_values.push_back(Decimal::parse(expected_text.text.substr(it->begin, it->end - it->begin)));
  }
  rec.expected_final = expected.result;
}

}  // namespace

namespace {

Decimal value_at(const RenderedText& text, const InterventionSite& site) {
  const auto locator = site.locator();
  for (const auto& span : text.numbers) {
    if (span.locator == locator) return Decimal::parse(text.text.substr(span.begin, span.end - span.begin));
  }
  throw ValidationError("intervention site " + locator + " does not exist in trace");
}

}  // namespace

Decimal site_value(const MulTrace& trace, const InterventionSite& site) {
  return value_at(render_mul_target(transcript_of(trace), PromptStyle::FullCot, {}), site);
}

Decimal site_value(const DpTrace& trace, const InterventionSite& site) {
  return value_at(render_dp_target(transcript_of(trace, PromptStyle::FullCot), PromptStyle::FullCot, {}), site);
}

InterventionRecord simulate_expected(const MulTrace& trace, const InterventionSite& site, const Decimal& new_value,
                                     const SpecialTokens& tokens) {
  if (site.kind == SiteKind::DpCell) throw ValidationError("dp site on a multiplication trace");
  InterventionRecord rec;
  rec.task = Task::Multiplication;
  rec.site = site;
  rec.new_value = new_value;
  auto original = transcript_of(trace);
  auto expected = mul_transcript_with_override(trace.a, trace.b, &site, &new_value);
  const auto original_text = render_mul_target(original, PromptStyle::FullCot, tokens);
  const auto expected_text = render_mul_target(expected, PromptStyle::FullCot, tokens);
  finish_record(rec, render_mul_prompt(trace.a, trace.b), original_text, expected_text, expected);
  rec.original = std::move(original);
  rec.expected = std::move(expected);
  return rec;
}

InterventionRecord simulate_expected(const DpTrace& trace, const InterventionSite& site, const Decimal& new_value,
                                     const SpecialTokens& tokens) {
  if (site.kind != SiteKind::DpCell) throw ValidationError("multiplication site on a dp trace");
  if (site.first >= trace.grid.rows() || site.second >= trace.grid.cols()) {
    throw ValidationError("dp intervention site out of range");
  }
  const auto pinned_u = new_value.to_u64();
  if (!pinned_u || *pinned_u > static_cast<std::uint64_t>(INT64_MAX)) throw ValidationError("dp value too large");

  InterventionRecord rec;
  rec.task = Task::DP;
  rec.site = site;
  rec.new_value = new_value;
  const GridCell cell{site.first, site.second};
  DpTrace expected_trace;
  expected_trace.grid = trace.grid;
  expected_trace.dp = run_dp_recurrence(trace.grid, &cell, static_cast<std::int64_t>(*pinned_u));
  expected_trace.final = expected_trace.dp.at(trace.grid.rows() - 1, trace.grid.cols() - 1);

  auto original = transcript_of(trace, PromptStyle::FullCot);
  auto expected = transcript_of(expected_trace, PromptStyle::FullCot);
  const auto original_text = render_dp_target(original, PromptStyle::FullCot, tokens);
  const auto expected_text = render_dp_target(expected, PromptStyle::FullCot, tokens);
  finish_record(rec, render_dp_prompt(trace.grid), original_text, expected_text, expected);
  rec.original = std::move(original);
  rec.expected = std::move(expected);
  return rec;
}

std::string_view to_string(ErrorType type) {
  switch (type) {
    case ErrorType::Success: return "success";
    case ErrorType::AdditionError: return "addition_error";
    case ErrorType::ReconstructionError: return "reconstruction_error";
    case ErrorType::CopyError: return "copy_error";
    case ErrorType::ShortcutError: return "shortcut_error";
    case ErrorType::MiscError: return "misc_error";
  }
  return "misc_error";
}

ErrorType error_type_from_string(std::string_view name) {
  for (auto t : kAllErrorTypes) {
    if (to_string(t) == name) return t;
  }
  throw ValidationError("unknown error type '" + std::string(name) + "'");
}

namespace {

bool steps_equal(const std::vector<StepLine>& lhs, const std::vector<StepLine>& rhs) {
  if (lhs.size() != rhs.size()) return false;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    if (lhs[k].digit != rhs[k].digit || lhs[k].carry != rhs[k].carry) return false;
  }
  return true;
}

std::optional<Decimal> reconstruct(const MulBlock& block, std::size_t place) {
  std::vector<int> digits;
  for (const auto& s : block.steps) digits.push_back(s.digit);
  const int last_carry = block.steps.empty() ? 0 : block.steps.back().carry;
  try {
    return combine_partial(digits, last_carry, place);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

ErrorType classify_mul(const MulTranscript& obs, const InterventionRecord& rec) {
  const auto& expected = std::get<MulTranscript>(rec.expected);
  const auto& original = std::get<MulTranscript>(rec.original);
  if (obs.blocks.size() != expected.blocks.size()) return ErrorType::MiscError;
  for (std::size_t p = 0; p < obs.blocks.size(); ++p) {
    if (obs.blocks[p].steps.size() != expected.blocks[p].steps.size()) return ErrorType::MiscError;
  }
  if (obs.addends.empty() || obs.folds.size() != obs.addends.size() - 1) return ErrorType::MiscError;

  // Shortcut: an affected partial reproduces the un-intervened value even
  // though its own step lines carry the intervention.
  for (std::size_t p = 0; p < obs.blocks.size(); ++p) {
    const bool affected = expected.blocks[p].value != original.blocks[p].value;
    if (affected && obs.blocks[p].value == original.blocks[p].value &&
        !steps_equal(obs.blocks[p].steps, original.blocks[p].steps)) {
      return ErrorType::ShortcutError;
    }
  }

  for (std::size_t p = 0; p < obs.blocks.size(); ++p) {
    const auto rebuilt = reconstruct(obs.blocks[p], p);
    if (!rebuilt || *rebuilt != obs.blocks[p].value) return ErrorType::ReconstructionError;
  }

  const auto& site = rec.site;
  if (obs.addends.size() != obs.blocks.size()) return ErrorType::CopyError;
  for (std::size_t k = 0; k < obs.addends.size(); ++k) {
    const bool pinned = site.kind == SiteKind::AdditionChainAddend && site.first == k;
    const Decimal& want = pinned ? rec.new_value : obs.blocks[k].value;
    if (obs.addends[k] != want) return ErrorType::CopyError;
  }
  for (std::size_t i = 0; i < obs.folds.size(); ++i) {
    const auto& line = obs.folds[i];
    std::vector<Decimal> want_lhs{i == 0 ? obs.addends[0] : obs.folds[i - 1].rhs.front()};
    want_lhs.insert(want_lhs.end(), obs.addends.begin() + static_cast<std::ptrdiff_t>(i + 1), obs.addends.end());
    if (line.lhs != want_lhs) return ErrorType::CopyError;
    const std::vector<Decimal> want_tail(obs.addends.begin() + static_cast<std::ptrdiff_t>(i + 2), obs.addends.end());
    if (line.rhs.empty() || !std::equal(line.rhs.begin() + 1, line.rhs.end(), want_tail.begin(), want_tail.end())) {
      return ErrorType::CopyError;
    }
  }
  if (obs.equation_a != original.equation_a || obs.equation_b != original.equation_b) return ErrorType::CopyError;

  for (std::size_t i = 0; i < obs.folds.size(); ++i) {
    if (site.kind == SiteKind::AdditionChainFirstPartial && site.first == i) continue;
    const auto& line = obs.folds[i];
    if (line.rhs.front() != line.lhs[0] + line.lhs[1]) return ErrorType::AdditionError;
  }
  const Decimal& chain_end = obs.folds.empty() ? obs.addends.front() : obs.folds.back().rhs.front();
  if (site.kind != SiteKind::FinalResult && obs.equation_value != chain_end) return ErrorType::AdditionError;

  return ErrorType::MiscError;
}

ErrorType classify_dp(const DpTranscript& obs, const InterventionRecord& rec) {
  const auto& original = std::get<DpTranscript>(rec.original);
  if (obs.rows.size() != original.rows.size()) return ErrorType::MiscError;
  for (std::size_t i = 0; i < obs.rows.size(); ++i) {
    if (obs.rows[i].values.size() != original.rows[i].values.size()) return ErrorType::MiscError;
  }
  // Recover the weights from the original dp table: w = dp - best predecessor.
  auto cell = [](const DpTranscript& t, std::size_t i, std::size_t j) { return t.rows[i].values[j]; };
  auto best_prev = [&](const DpTranscript& t, std::size_t i, std::size_t j) -> std::int64_t {
    if (i > 0 && j > 0) return std::max(cell(t, i - 1, j), cell(t, i, j - 1));
    if (i > 0) return cell(t, i - 1, j);
    if (j > 0) return cell(t, i, j - 1);
    return 0;
  };
  const std::size_t cols = obs.rows.front().values.size();
  const std::size_t site_index = rec.site.first * cols + rec.site.second;
  for (std::size_t i = 0; i < obs.rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (i * cols + j <= site_index) continue;
      const auto weight = cell(original, i, j) - best_prev(original, i, j);
      if (cell(obs, i, j) != best_prev(obs, i, j) + weight) return ErrorType::AdditionError;
    }
  }
  return ErrorType::MiscError;
}

}  // namespace

ErrorType classify_failure(std::string_view continuation, const InterventionRecord& record,
                           const SpecialTokens& tokens) {
  std::string combined = record.truncated_prefix;
  combined.append(continuation);
  const auto final = extract_final(combined);
  if (final && *final == record.expected_final) return ErrorType::Success;

  const auto parsed = parse(combined, record.task, PromptStyle::FullCot, tokens);
  if (!parsed.complete) return ErrorType::MiscError;
  if (record.task == Task::Multiplication) return classify_mul(*parsed.mul, record);
  return classify_dp(*parsed.dp, record);
}

double InterventionBreakdown::success_rate() const {
  return total == 0 ? 0.0 : static_cast<double>(success) / static_cast<double>(total);
}

std::vector<std::pair<std::string, std::uint64_t>> InterventionBreakdown::rows() const {
  return {{"Total", total},
          {"Success", success},
          {"Error", errors()},
          {"Addition error", addition},
          {"Reconstruct error", reconstruction},
          {"Shortcut error", shortcut},
          {"Copy error", copy},
          {"Misc error", misc}};
}

InterventionBreakdown InterventionBreakdown::parse_table(std::string_view text) {
  InterventionBreakdown b;
  std::optional<std::uint64_t> error_row;
  bool have_total = false;
  bool have_success = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    for (auto pos = line.find("\\hline"); pos != std::string::npos; pos = line.find("\\hline")) line.erase(pos, 6);
    for (auto pos = line.find("\\\\"); pos != std::string::npos; pos = line.find("\\\\")) line.erase(pos, 2);
    auto sep = line.find('&');
    if (sep == std::string::npos) sep = line.find(',');
    if (sep == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto z = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, z - a + 1);
    };
    std::string label = trim(line.substr(0, sep));
    const std::string count_text = trim(line.substr(sep + 1));
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc{} || ptr != count_text.data() + count_text.size()) continue;  // header row
    std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::tolower(c); });
    if (label.ends_with(" error")) label.resize(label.size() - 6);
    if (label == "total") {
      b.total = count;
      have_total = true;
    } else if (label == "success") {
      b.success = count;
      have_success = true;
    } else if (label == "error") {
      error_row = count;
    } else if (label == "addition") {
      b.addition = count;
    } else if (label == "reconstruct" || label == "reconstruction") {
      b.reconstruction = count;
    } else if (label == "shortcut") {
      b.shortcut = count;
    } else if (label == "copy") {
      b.copy = count;
    } else if (label == "misc") {
      b.misc = count;
    } else {
      throw ValidationError("unknown breakdown row '" + label + "'");
    }
  }
  if (!have_total || !have_success) throw ValidationError("breakdown table needs Total and Success rows");
  if (b.success > b.total) throw ValidationError("breakdown: success exceeds total");
  if (error_row && *error_row != b.errors()) throw ValidationError("breakdown: Error row != Total - Success");
  if (b.addition + b.reconstruction + b.shortcut + b.copy + b.misc != b.errors()) {
    throw ValidationError("breakdown: error classes do not sum to the error count");
  }
  return b;
}

Json InterventionBreakdown::to_json() const {
  Json j;
  j["total"] = total;
  j["success"] = success;
  j["error"] = errors();
  j["success_rate"] = success_rate();
  j["addition_error"] = addition;
  j["reconstruction_error"] = reconstruction;
  j["shortcut_error"] = shortcut;
  j["copy_error"] = copy;
  j["misc_error"] = misc;
  return j;
}

InterventionBreakdown InterventionBreakdown::from_json(const Json& j) {
  InterventionBreakdown b;
  b.total = j.at("total").get<std::uint64_t>();
  b.success = j.at("success").get<std::uint64_t>();
  b.addition = j.at("addition_error").get<std::uint64_t>();
  b.reconstruction = j.at("reconstruction_error").get<std::uint64_t>();
  b.shortcut = j.at("shortcut_error").get<std::uint64_t>();
  b.copy = j.at("copy_error").get<std::uint64_t>();
  b.misc = j.at("misc_error").get<std::uint64_t>();
  return b;
}

InterventionBreakdown aggregate_report(std::span<const ErrorType> outcomes) {
  if (outcomes.empty()) throw ValidationError("aggregate_report: no outcomes");
  InterventionBreakdown b;
  b.total = outcomes.size();
  for (auto t : outcomes) {
    switch (t) {
      case ErrorType::Success: ++b.success; break;
      case ErrorType::AdditionError: ++b.addition; break;
      case ErrorType::ReconstructionError: ++b.reconstruction; break;
      case ErrorType::CopyError: ++b.copy; break;
      case ErrorType::ShortcutError: ++b.shortcut; break;
      case ErrorType::MiscError: ++b.misc; break;
    }
  }
  return b;
}

Json site_to_json(const InterventionSite& site) {
  Json j;
  j["kind"] = std::string(to_string(site.kind));
  j["index"] = Json::array({site.first, site.second});
  j["locator"] = site.locator();
  return j;
}

InterventionSite site_from_json(const Json& j) {
  InterventionSite site;
  site.kind = site_kind_from_string(j.at("kind").get<std::string>());
  const auto& idx = j.at("index");
  if (!idx.is_array() || idx.size() != 2) throw ValidationError("site index must be a two-element array");
  site.first = idx[0].get<std::size_t>();
  site.second = idx[1].get<std::size_t>();
  return site;
}

Json intervention_to_json(const InterventionRecord& record) {
  Json j;
  j["id"] = record.entry_id;
  j["site"] = site_to_json(record.site);
  j["original"] = decimal_to_json(record.original_value);
  j["substituted"] = decimal_to_json(record.new_value);
  j["prefix"] = record.truncated_prefix;
  j["expected_final"] = decimal_to_json(record.expected_final);
  Json values = Json::array();
  for (const auto& v : record.expected_values) values.push_back(decimal_to_json(v));
  j["expected_values"] = std::move(values);
  return j;
}

}  // namespace cotvars
