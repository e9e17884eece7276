// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "cotvars/decimal.hpp"
#include "cotvars/error.hpp"
#include "support.hpp"

using namespace cotvars;

TEST_SUITE("decimal") {
  TEST_CASE("parse and print") {
    CHECK(Decimal::parse("25735633").str() == "25735633");
    CHECK(Decimal::parse("007").str() == "7");
    CHECK(Decimal::parse("0").str() == "0");
    CHECK(Decimal::parse("0").is_zero());
    CHECK(Decimal::parse("000").digit_count() == 1);
    CHECK(Decimal(8493).digit(0) == 3);
    CHECK(Decimal(8493).leading_digit() == 8);
    CHECK(Decimal(8493).digit(9) == 0);
  }

  TEST_CASE("parse rejects non-digits") {
    CHECK_THROWS_AS(Decimal::parse(""), ValidationError);
    CHECK_THROWS_AS(Decimal::parse("-1"), ValidationError);
    CHECK_THROWS_AS(Decimal::parse("12a"), ValidationError);
    CHECK_THROWS_AS(Decimal::parse(" 1"), ValidationError);
  }

  TEST_CASE("shift and compare") {
    CHECK(Decimal(3773).shifted(1).str() == "37730");
    CHECK(Decimal(0).shifted(3).is_zero());
    CHECK(Decimal(99) < Decimal(100));
    CHECK(Decimal(100) > Decimal(99));
    CHECK(Decimal(12) == Decimal::parse("0012"));
    CHECK(Decimal::from_digits({3, 2, 1, 0, 0}) == Decimal(123));
  }

  TEST_CASE("to_u64 saturates to absent") {
    CHECK(Decimal::parse("18446744073709551615").to_u64() == 18446744073709551615ULL);
    CHECK_FALSE(Decimal::parse("18446744073709551616").to_u64().has_value());
  }

  TEST_CASE("addition agrees with big integers") {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 2000; ++i) {
      const auto x = testing::random_digits(1 + gen() % 30, gen);
      const auto y = testing::random_digits(1 + gen() % 30, gen);
      using boost::multiprecision::cpp_int;
      const cpp_int want = cpp_int(x) + cpp_int(y);
      REQUIRE((Decimal::parse(x) + Decimal::parse(y)).str() == want.str());
    }
  }
}
