// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "cotvars/rng.hpp"

using namespace cotvars;

TEST_SUITE("rng") {
  TEST_CASE("derived streams are reproducible and distinct") {
    auto a = Rng::derive(7, "dataset", 3);
    auto b = Rng::derive(7, "dataset", 3);
    auto c = Rng::derive(7, "dataset", 4);
    auto d = Rng::derive(7, "intervention", 3);
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
    CHECK(x != d.next());
  }

  TEST_CASE("uniform stays in range and hits both ends") {
    auto r = Rng::derive(1, "t");
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const auto v = r.uniform(3, 9);
      REQUIRE(v >= 3);
      REQUIRE(v <= 9);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(r.uniform(5, 5) == 5);
  }

  TEST_CASE("normal has roughly unit moments") {
    auto r = Rng::derive(2, "t");
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double v = r.normal();
      sum += v;
      sq += v * v;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    for (int i = 0; i < 1000; ++i) {
      const double u = r.uniform01();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
    }
  }
}
