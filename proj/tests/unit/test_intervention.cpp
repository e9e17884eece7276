// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "cotvars/error.hpp"
#include "cotvars/intervention.hpp"
#include "support.hpp"
#include "taxonomy_fixtures.hpp"

using namespace cotvars;

TEST_SUITE("intervention") {
  TEST_CASE("carry 2 to 4 in 8493*7") {
    const auto trace = multiply_with_trace(Decimal(8493), Decimal(7));
    const InterventionSite site{SiteKind::MulStepCarry, 0, 0};
    CHECK(site.locator() == "block[0].step[0].carry");
    CHECK(site_value(trace, site) == Decimal(2));
    const auto rec = simulate_expected(trace, site, Decimal(4));
    CHECK(rec.original_value == Decimal(2));
    CHECK(rec.expected_final.str() == "59471");
    const auto& expected = std::get<MulTranscript>(rec.expected);
    CHECK(expected.blocks[0].value.str() == "59471");
    CHECK(expected.blocks[0].steps[1].digit == 7);
    CHECK(expected.blocks[0].steps[1].carry == 6);
    CHECK(rec.truncated_prefix.ends_with("3*7=21, digit 1, carry 4"));
    CHECK(rec.expected_values.front() == Decimal(9));  // next step line starts with 9*7
  }

  TEST_CASE("digit site keeps the step carry") {
    const auto trace = multiply_with_trace(Decimal(8493), Decimal(7));
    const auto rec = simulate_expected(trace, {SiteKind::MulStepDigit, 0, 0}, Decimal(6));
    const auto& expected = std::get<MulTranscript>(rec.expected);
    CHECK(expected.blocks[0].steps[0].carry == 2);
    CHECK(expected.blocks[0].value.str() == "59456");
  }

  TEST_CASE("final-result site only changes the final") {
    const auto trace = multiply_with_trace(Decimal(3773), Decimal(6821));
    const auto rec = simulate_expected(trace, {SiteKind::FinalResult, 0, 0}, Decimal(25735699));
    CHECK(rec.expected_final.str() == "25735699");
    auto expected = std::get<MulTranscript>(rec.expected);
    auto original = std::get<MulTranscript>(rec.original);
    CHECK(expected.blocks == original.blocks);
    CHECK(expected.folds == original.folds);
  }

  TEST_CASE("addend and fold sites propagate down the chain") {
    const auto trace = multiply_with_trace(Decimal(3773), Decimal(6821));
    const auto addend = simulate_expected(trace, {SiteKind::AdditionChainAddend, 1, 0}, Decimal(75560));
    CHECK(addend.expected_final.str() == "25735733");
    const auto fold = simulate_expected(trace, {SiteKind::AdditionChainFirstPartial, 0, 0}, Decimal(79333));
    CHECK(fold.expected_final.str() == "25735733");
  }

  TEST_CASE("identity interventions reproduce the trace") {
    std::mt19937_64 gen(21);
    for (int i = 0; i < 100; ++i) {
      const auto trace = multiply_with_trace(Decimal::parse(testing::random_digits(4, gen)),
                                             Decimal::parse(testing::random_digits(4, gen)));
      for (const auto& site : eligible_sites(trace)) {
        const auto rec = simulate_expected(trace, site, site_value(trace, site));
        REQUIRE(std::get<MulTranscript>(rec.expected) == std::get<MulTranscript>(rec.original));
        REQUIRE(rec.expected_final == trace.final);
      }
    }
  }

  TEST_CASE("dp intervention equals the pinned recurrence") {
    std::mt19937_64 gen(22);
    std::uniform_int_distribution<std::int64_t> cell(kMinCell, kMaxCell);
    for (int i = 0; i < 100; ++i) {
      Grid g(4, 4);
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) g.at(r, c) = cell(gen);
      const auto trace = dp_with_trace(g);
      auto rng = Rng::derive(i, "t");
      const auto site = pick_site(trace, rng);
      const auto value = substitute_value(site_value(trace, site), rng);
      const auto rec = simulate_expected(trace, site, value);
      const GridCell pin{site.first, site.second};
      const auto pinned = run_dp_recurrence(g, &pin, static_cast<std::int64_t>(*value.to_u64()));
      REQUIRE(rec.expected_final == Decimal(static_cast<std::uint64_t>(pinned.at(3, 3))));
    }
  }

  TEST_CASE("dp[1][1] intervention leaves independent cells alone") {
    const auto g = Grid::from_rows({{2, 3, 4, 5}, {6, 7, 8, 9}, {10, 11, 12, 13}, {14, 15, 16, 17}});
    const auto trace = dp_with_trace(g);
    const auto rec = simulate_expected(trace, {SiteKind::DpCell, 1, 1}, Decimal(900));
    const auto& e = std::get<DpTranscript>(rec.expected);
    const auto& o = std::get<DpTranscript>(rec.original);
    CHECK(e.rows[0].values == o.rows[0].values);
    CHECK(e.rows[1].values[0] == o.rows[1].values[0]);
    CHECK(e.rows[2].values[0] == o.rows[2].values[0]);
    CHECK(e.rows[1].values[1] == 900);
    CHECK(e.rows[3].values[3] == 900 + 11 + 15 + 16 + 17);
  }

  TEST_CASE("substitution keeps length and leading digit") {
    auto rng = Rng::derive(5, "t");
    for (int i = 0; i < 500; ++i) {
      const auto v = substitute_value(Decimal(3), rng);
      REQUIRE(v != Decimal(3));
      REQUIRE(v.digit_count() == 1);
      const auto w = substitute_value(Decimal(75460), rng);
      REQUIRE(w != Decimal(75460));
      REQUIRE(w.digit_count() == 5);
      REQUIRE(w.leading_digit() == 7);
    }
    const auto two = substitute_value(Decimal(10), rng);
    CHECK(two.leading_digit() == 1);
    CHECK(two != Decimal(10));
  }

  TEST_CASE("eligible sites") {
    const auto trace = multiply_with_trace(Decimal(3773), Decimal(6821));
    const auto sites = eligible_sites(trace);
    // 4 blocks x 4 steps x (digit, carry) + 4 addends + 3 folds + final
    CHECK(sites.size() == 32 + 4 + 3 + 1);
    CHECK(eligible_sites(dp_with_trace(Grid::from_rows({{2, 3}, {4, 5}}))).size() == 4);
    CHECK_THROWS_AS(simulate_expected(trace, {SiteKind::DpCell, 0, 0}, Decimal(1)), ValidationError);
    CHECK_THROWS_AS(simulate_expected(trace, {SiteKind::MulStepCarry, 9, 0}, Decimal(1)), ValidationError);
  }

  TEST_CASE("taxonomy fixtures classify as labeled") {
    const auto fixtures = testing::taxonomy_fixtures();
    std::map<ErrorType, int> per_class;
    for (const auto& f : fixtures) {
      INFO(f.name);
      CHECK(classify_failure(f.continuation, f.record) == f.label);
      ++per_class[f.label];
    }
    for (auto t : kAllErrorTypes) CHECK(per_class[t] >= 2);
  }

  TEST_CASE("classification is total on junk") {
    const auto trace = multiply_with_trace(Decimal(3773), Decimal(6821));
    const auto rec = simulate_expected(trace, {SiteKind::MulStepCarry, 1, 1}, Decimal(5));
    CHECK(classify_failure("", rec) == ErrorType::MiscError);
    CHECK(classify_failure("\n\n\nResult: ", rec) == ErrorType::MiscError);
    CHECK(classify_failure("\n\nResult: " + rec.expected_final.str(), rec) == ErrorType::Success);
  }

  TEST_CASE("published breakdown table parses") {
    const auto b = InterventionBreakdown::parse_table(testing::read_golden("intervention_breakdown.tex"));
    CHECK(b.total == 9999);
    CHECK(b.success == 7383);
    CHECK(b.errors() == 2616);
    CHECK(b.addition == 767);
    CHECK(b.reconstruction == 496);
    CHECK(b.shortcut == 1291);
    CHECK(b.copy == 6);
    CHECK(b.misc == 56);
    CHECK(b.success_rate() == doctest::Approx(0.7384).epsilon(0.0001));
    CHECK(InterventionBreakdown::from_json(b.to_json()) == b);
    CHECK(InterventionBreakdown::parse_table("Total,10\nSuccess,7\nCopy error,3\n").copy == 3);
    CHECK_THROWS_AS(InterventionBreakdown::parse_table("Total & 10\nSuccess & 7\nCopy error & 2\n"), ValidationError);
    CHECK_THROWS_AS(InterventionBreakdown::parse_table("Total & 10\nSuccess & 7\nWeird & 3\n"), ValidationError);
  }

  TEST_CASE("aggregation") {
    std::vector<ErrorType> outcomes;
    for (auto t : {ErrorType::AdditionError, ErrorType::ReconstructionError, ErrorType::CopyError,
                   ErrorType::ShortcutError, ErrorType::MiscError}) {
      outcomes.push_back(t);
      outcomes.push_back(t);
    }
    const auto b = aggregate_report(outcomes);
    CHECK(b.total == 10);
    CHECK(b.errors() == 10);
    CHECK(std::vector<std::uint64_t>{b.addition, b.reconstruction, b.copy, b.shortcut, b.misc} ==
          std::vector<std::uint64_t>{2, 2, 2, 2, 2});
    const auto ok = aggregate_report(std::vector<ErrorType>(5, ErrorType::Success));
    CHECK(ok.errors() == 0);
    CHECK(ok.rows()[2] == std::pair<std::string, std::uint64_t>{"Error", 0});
    CHECK_THROWS_AS(aggregate_report(std::vector<ErrorType>{}), ValidationError);
  }

  TEST_CASE("site and record JSON") {
    const InterventionSite site{SiteKind::DpCell, 2, 3};
    const auto j = site_to_json(site);
    CHECK(j["locator"] == "dp[2][3]");
    CHECK(site_from_json(j) == site);
    CHECK(error_type_from_string("shortcut_error") == ErrorType::ShortcutError);
    const auto rec = simulate_expected(multiply_with_trace(Decimal(8493), Decimal(7)), {SiteKind::MulStepCarry, 0, 0},
                                       Decimal(4));
    const auto rj = intervention_to_json(rec);
    std::vector<std::string> keys;
    for (auto it = rj.begin(); it != rj.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"id", "site", "original", "substituted", "prefix", "expected_final",
                                           "expected_values"});
    CHECK(rj["expected_final"] == 59471);
  }
}
