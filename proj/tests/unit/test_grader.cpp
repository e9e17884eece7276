// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cctype>

#include "cotvars/corpus.hpp"
#include "cotvars/error.hpp"
#include "cotvars/grader.hpp"

using namespace cotvars;

namespace {

Dataset make(Task task, const char* scale, PromptStyle style, std::size_t count = 30) {
  DatasetSpec spec;
  spec.task = task;
  spec.scale = Scale::parse(scale);
  spec.style = style;
  spec.count = count;
  spec.seed = 17;
  return generate_dataset(spec);
}

}  // namespace

TEST_SUITE("grader") {
  TEST_CASE("extract_final") {
    CHECK(extract_final("...\n\nResult: 25735633")->str() == "25735633");
    CHECK(extract_final("Result: 007")->str() == "7");
    CHECK(extract_final("Result:   42 trailing")->str() == "42");
    CHECK_FALSE(extract_final("no marker here").has_value());
    CHECK_FALSE(extract_final("Result: x").has_value());
    CHECK(extract_final("Result: 1\nResult: 2")->str() == "2");
  }

  TEST_CASE("golden outputs self-grade for every task and style") {
    const std::vector<std::pair<Task, PromptStyle>> combos = {
        {Task::Multiplication, PromptStyle::Plain},     {Task::Multiplication, PromptStyle::FullCot},
        {Task::Multiplication, PromptStyle::CompressedCot}, {Task::Multiplication, PromptStyle::LatentCot},
        {Task::DP, PromptStyle::Plain},                 {Task::DP, PromptStyle::FullCot},
        {Task::DP, PromptStyle::LatentCot},             {Task::DP, PromptStyle::MergedLatentCot}};
    for (const auto& [task, style] : combos) {
      const auto ds = make(task, task == Task::DP ? "5x5" : "4x3", style);
      for (const auto& e : ds.train) {
        const auto r = grade_entry(e.target, e);
        CAPTURE(e.id);
        CAPTURE(e.target);
        CAPTURE(r.step_diffs.empty() ? std::string() : r.step_diffs.front().locator);
        REQUIRE(r.final_correct);
        REQUIRE(r.step_diffs.empty());
        REQUIRE(r.diagnostics.empty());
        // echoed prompt before the CoT is tolerated
        REQUIRE(grade_entry(e.prompt + e.target, e).step_diffs.empty());
      }
    }
  }

  TEST_CASE("corrupting the final digit gives one diff at the result") {
    const auto ds = make(Task::Multiplication, "4x4", PromptStyle::FullCot);
    const auto& e = ds.train.front();
    auto out = e.target;
    auto& last = out.back();
    last = last == '9' ? '0' : static_cast<char>(last + 1);
    const auto r = grade_entry(out, e);
    CHECK_FALSE(r.final_correct);
    REQUIRE(r.step_diffs.size() == 1);
    CHECK(r.step_diffs[0].locator == "result");
  }

  TEST_CASE("any single numeric corruption yields a step diff") {
    for (auto style : {PromptStyle::FullCot, PromptStyle::CompressedCot}) {
      const auto ds = make(Task::Multiplication, "3x3", style, 5);
      const auto& e = ds.train.front();
      for (std::size_t i = 0; i < e.target.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(e.target[i]))) continue;
        auto out = e.target;
        out[i] = out[i] == '7' ? '8' : '7';
        const auto r = grade_entry(out, e);
        REQUIRE_MESSAGE((!r.step_diffs.empty() || !r.diagnostics.empty()), "offset " << i);
      }
    }
    const auto dp = make(Task::DP, "3x3", PromptStyle::FullCot, 5);
    const auto& e = dp.train.front();
    for (std::size_t i = 0; i < e.target.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(e.target[i]))) continue;
      auto out = e.target;
      out[i] = out[i] == '7' ? '8' : '7';
      REQUIRE(!grade_entry(out, e).step_diffs.empty());
    }
  }

  TEST_CASE("unparseable text with a correct result line still counts") {
    const auto ds = make(Task::Multiplication, "2x2", PromptStyle::FullCot);
    const auto& e = ds.train.front();
    const auto r = grade_entry("I think the answer is\nResult: " + e.gold_final.str(), e);
    CHECK(r.final_correct);
    CHECK(r.step_diffs.empty());
    CHECK_FALSE(r.diagnostics.empty());
  }

  TEST_CASE("accuracy") {
    std::vector<GradeReport> reports(9999);
    for (std::size_t i = 0; i < 7383; ++i) reports[i].final_correct = true;
    CHECK(accuracy(reports) == doctest::Approx(0.7384).epsilon(0.0001));
    std::vector<GradeReport> half(4);
    half[0].final_correct = half[1].final_correct = true;
    CHECK(accuracy(half) == 0.5);
    CHECK_THROWS_AS(accuracy(std::vector<GradeReport>{}), ValidationError);
  }

  TEST_CASE("report JSON") {
    const auto ds = make(Task::DP, "2x2", PromptStyle::FullCot);
    const auto r = grade_entry("garbage", ds.train.front());
    const auto j = grade_report_to_json(r);
    CHECK(j["final_correct"] == false);
    CHECK(j["parsed_final"].is_null());
    CHECK(j["diagnostics"].size() >= 1);
  }
}
