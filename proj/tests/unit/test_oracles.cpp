// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "cotvars/error.hpp"
#include "cotvars/oracles.hpp"
#include "support.hpp"

using namespace cotvars;

namespace {

std::vector<std::string> strs(const std::vector<Decimal>& v) {
  std::vector<std::string> out;
  for (const auto& d : v) out.push_back(d.str());
  return out;
}

const std::vector<std::vector<std::int64_t>> kGrid1 = {{15, 5, 59, 62, 22},
                                                       {41, 61, 7, 12, 27},
                                                       {98, 60, 34, 94, 24},
                                                       {45, 40, 12, 77, 11},
                                                       {56, 94, 46, 34, 45}};

}  // namespace

TEST_SUITE("oracles") {
  TEST_CASE("3773*6821 partials and addition chain") {
    const auto t = multiply_with_trace(Decimal(3773), Decimal(6821));
    std::vector<Decimal> partials;
    for (const auto& p : t.partials) partials.push_back(p.value);
    CHECK(strs(partials) == std::vector<std::string>{"3773", "75460", "3018400", "22638000"});
    CHECK(strs(t.addition_chain) == std::vector<std::string>{"79233", "3097633", "25735633"});
    CHECK(t.final.str() == "25735633");
    CHECK(t.partials[1].multiplier().str() == "20");
  }

  TEST_CASE("8493*7 step digits and carries") {
    const auto t = multiply_with_trace(Decimal(8493), Decimal(7));
    REQUIRE(t.partials.size() == 1);
    const auto& steps = t.partials[0].steps;
    const std::vector<std::pair<int, int>> want = {{1, 2}, {5, 6}, {4, 3}, {9, 5}};
    REQUIRE(steps.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(steps[k].digit_out == want[k].first);
      CHECK(steps[k].carry_out == want[k].second);
    }
    CHECK(steps[1].raw_product == 63);
    CHECK(steps[1].carry_in == 2);
    CHECK(t.partials[0].value.str() == "59451");
    CHECK(t.addition_chain.empty());
    CHECK(t.final.str() == "59451");
  }

  TEST_CASE("zero multiplier digit gives a zero partial") {
    const auto t = multiply_with_trace(Decimal(3167), Decimal(3700));
    CHECK(t.partials[0].value.is_zero());
    CHECK(t.partials[1].value.is_zero());
    CHECK(t.final.str() == "11717900");
  }

  TEST_CASE("combine_partial with carry changed") {
    const std::vector<int> digits = {1, 5, 4, 9};
    CHECK(combine_partial(digits, 5, 0).str() == "59451");
    CHECK(combine_partial(digits, 5, 2).str() == "5945100");
    CHECK_THROWS_AS(combine_partial(std::vector<int>{12}, 0, 0), ValidationError);
  }

  TEST_CASE("fold addition chain") {
    const std::vector<Decimal> v = {Decimal(10), Decimal(20), Decimal(30)};
    CHECK(strs(fold_addition_chain(v)) == std::vector<std::string>{"30", "60"});
    CHECK(fold_addition_chain(std::vector<Decimal>{Decimal(5)}).empty());
  }

  TEST_CASE("multiplication agrees with big integers") {
    std::mt19937_64 gen(5);
    for (std::size_t m = 1; m <= 9; ++m) {
      for (std::size_t n = 1; n <= 9; ++n) {
        for (int i = 0; i < 40; ++i) {
          const auto a = Decimal::parse(testing::random_digits(m, gen));
          const auto b = Decimal::parse(testing::random_digits(n, gen));
          const auto t = multiply_with_trace(a, b);
          REQUIRE(t.final.str() == testing::bigint_product(a, b));
          REQUIRE(t.partials.size() == n);
          if (n > 1) REQUIRE(t.addition_chain.back() == t.final);
        }
      }
    }
  }

  TEST_CASE("dp worked grid") {
    const auto t = dp_with_trace(Grid::from_rows(kGrid1));
    CHECK(t.dp.to_rows().front() == std::vector<std::int64_t>{15, 20, 79, 141, 163});
    CHECK(t.dp.to_rows().back() == std::vector<std::int64_t>{255, 349, 395, 453, 498});
    CHECK(t.final == 498);
    CHECK(brute_force_max_path(Grid::from_rows(kGrid1)) == 498);
  }

  TEST_CASE("dp small grids") {
    CHECK(dp_with_trace(Grid::from_rows({{2, 3}, {4, 5}})).final == 11);
    CHECK(dp_with_trace(Grid::from_rows({{7}})).final == 7);
    CHECK(dp_with_trace(Grid::from_rows({{2, 3, 4}})).final == 9);
  }

  TEST_CASE("dp grid validation") {
    CHECK_THROWS_AS(dp_with_trace(Grid::from_rows({{2, 100}})), ValidationError);
    CHECK_THROWS_AS(dp_with_trace(Grid::from_rows({{1}})), ValidationError);
    CHECK_THROWS_AS(dp_with_trace(Grid()), ValidationError);
    CHECK_THROWS_AS(Grid::from_rows({{2, 3}, {4}}), ValidationError);
  }

  TEST_CASE("dp agrees with brute force") {
    std::mt19937_64 gen(9);
    std::uniform_int_distribution<std::int64_t> cell(kMinCell, kMaxCell);
    for (std::size_t m = 1; m <= 5; ++m) {
      for (std::size_t n = 1; n <= 5; ++n) {
        for (int i = 0; i < 50; ++i) {
          Grid g(m, n);
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) g.at(r, c) = cell(gen);
          REQUIRE(dp_with_trace(g).final == brute_force_max_path(g));
        }
      }
    }
  }

  TEST_CASE("pinned recurrence") {
    const auto g = Grid::from_rows({{2, 3}, {4, 5}});
    const GridCell pin{0, 1};
    const auto dp = run_dp_recurrence(g, &pin, 50);
    CHECK(dp.at(0, 0) == 2);
    CHECK(dp.at(0, 1) == 50);
    CHECK(dp.at(1, 0) == 6);
    CHECK(dp.at(1, 1) == 55);
  }
}
