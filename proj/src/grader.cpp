// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/grader.hpp"

#include <map>

#include "cotvars/corpus.hpp"
#include "cotvars/error.hpp"

namespace cotvars {

std::optional<Decimal> extract_final(std::string_view text) {
  constexpr std::string_view kMarker = "Result:";
  const auto pos = text.rfind(kMarker);
  if (pos == std::string_view::npos) return std::nullopt;
  auto rest = text.substr(pos + kMarker.size());
  std::size_t k = 0;
  while (k < rest.size() && (rest[k] == ' ' || rest[k] == '\t')) ++k;
  std::size_t n = 0;
  while (k + n < rest.size() && rest[k + n] >= '0' && rest[k + n] <= '9') ++n;
  if (n == 0) return std::nullopt;
  return Decimal::parse(rest.substr(k, n));
}

namespace {

struct Observable {
  std::vector<std::pair<std::string, std::string>> numbers;
  std::vector<std::pair<std::string, std::size_t>> latent_counts;
};

Observable observable(const ParsedTrace& p) {
  Observable o;
  const SpecialTokens tokens;
  RenderedText text;
  const bool counts = is_latent(p.style);
  if (p.mul) {
    text = render_mul_target(*p.mul, p.style, tokens);
    for (std::size_t b = 0; counts && b < p.mul->blocks.size(); ++b) {
      o.latent_counts.emplace_back("block[" + std::to_string(b) + "].latent_count", p.mul->blocks[b].latent_count);
    }
  } else if (p.dp) {
    text = render_dp_target(*p.dp, p.style, tokens);
    for (std::size_t r = 0; counts && r < p.dp->rows.size(); ++r) {
      o.latent_counts.emplace_back("row[" + std::to_string(r) + "].latent_count", p.dp->rows[r].latent_count);
    }
  }
  for (const auto& span : text.numbers) {
    o.numbers.emplace_back(span.locator, text.text.substr(span.begin, span.end - span.begin));
  }
  return o;
}

template <typename V>
void diff_lists(const std::vector<std::pair<std::string, V>>& observed,
                const std::vector<std::pair<std::string, V>>& expected, std::vector<StepDiff>& out) {
  auto str = [](const V& v) {
    if constexpr (std::is_same_v<V, std::string>) {
      return v;
    } else {
      return std::to_string(v);
    }
  };
  std::map<std::string, V> seen;
  for (const auto& [loc, v] : observed) seen.emplace(loc, v);
  for (const auto& [loc, v] : expected) {
    auto it = seen.find(loc);
    if (it == seen.end()) {
      out.push_back({loc, str(v), "-"});
      continue;
    }
    if (it->second != v) out.push_back({loc, str(v), str(it->second)});
    seen.erase(it);
  }
  for (const auto& [loc, v] : observed) {
    if (seen.count(loc) != 0) out.push_back({loc, "-", str(v)});
  }
}

}  // namespace

std::vector<StepDiff> diff_transcripts(const ParsedTrace& observed, const ParsedTrace& expected) {
  const auto obs = observable(observed);
  const auto exp = observable(expected);
  std::vector<StepDiff> diffs;
  diff_lists(obs.numbers, exp.numbers, diffs);
  diff_lists(obs.latent_counts, exp.latent_counts, diffs);
  return diffs;
}

GradeReport grade_entry(std::string_view output_text, const Entry& entry, const SpecialTokens& tokens) {
  GradeReport report;
  report.id = entry.id;
  report.parsed_final = extract_final(output_text);
  report.final_correct = report.parsed_final && *report.parsed_final == entry.gold_final;

  const auto parsed = parse(output_text, entry.task, entry.style, tokens);
  for (const auto& d : parsed.diagnostics) report.diagnostics.push_back(d.message());
  if (!parsed.complete) {
    report.diagnostics.emplace_back("output does not parse as '" + std::string(to_string(entry.style)) +
                                    "'; step diffs skipped");
    return report;
  }

  ParsedTrace expected;
  expected.task = entry.task;
  expected.style = entry.style;
  if (entry.task == Task::Multiplication) {
    expected.mul = project(transcript_of(mul_trace_of(entry)), entry.style);
  } else {
    const auto trace = dp_trace_of(entry);
    std::optional<MergePlan> plan;
    if (entry.style == PromptStyle::MergedLatentCot) plan = make_merge_plan(trace.grid.rows(), trace.grid.cols());
    expected.dp = transcript_of(trace, entry.style, plan ? &*plan : nullptr);
  }
  report.step_diffs = diff_transcripts(parsed, expected);
  return report;
}

double accuracy(std::span<const GradeReport> reports) {
  if (reports.empty()) throw ValidationError("accuracy of an empty report list");
  std::size_t correct = 0;
  for (const auto& r : reports) correct += r.final_correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(reports.size());
}

Json grade_report_to_json(const GradeReport& report) {
  Json j;
  j["id"] = report.id;
  j["final_correct"] = report.final_correct;
  j["parsed_final"] = report.parsed_final ? decimal_to_json(*report.parsed_final) : Json(nullptr);
  Json diffs = Json::array();
  for (const auto& d : report.step_diffs) diffs.push_back({{"locator", d.locator}, {"expected", d.expected}, {"observed", d.observed}});
  j["step_diffs"] = std::move(diffs);
  j["diagnostics"] = report.diagnostics;
  return j;
}

}  // namespace cotvars
