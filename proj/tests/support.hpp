// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for unit and acceptance tests.

#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "cotvars/decimal.hpp"

namespace cotvars::testing {

inline std::string read_golden(const std::string& name) {
  const auto path = std::filesystem::path(COTVARS_GOLDEN_DIR) / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing golden file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Independent big-integer product, used as the oracle's oracle.
inline std::string bigint_product(const Decimal& a, const Decimal& b) {
  using boost::multiprecision::cpp_int;
  const cpp_int product = cpp_int(a.str()) * cpp_int(b.str());
  return product.str();
}

/// Uniform n-digit number from an independent generator (leading digit 1-9).
inline std::string random_digits(std::size_t n, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> lead(1, 9), rest(0, 9);
  std::string s(1, static_cast<char>('0' + lead(gen)));
  for (std::size_t k = 1; k < n; ++k) s.push_back(static_cast<char>('0' + rest(gen)));
  return s;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cotvars-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cotvars::testing
