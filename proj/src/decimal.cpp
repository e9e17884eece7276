// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/decimal.hpp"

#include <algorithm>

#include "cotvars/error.hpp"

namespace cotvars {

namespace {

void trim(std::vector<std::uint8_t>& digits) {
  while (!digits.empty() && digits.back() == 0) digits.pop_back();
}

}  // namespace

Decimal::Decimal(std::uint64_t value) {
  while (value != 0) {
    digits_.push_back(static_cast<std::uint8_t>(value % 10));
    value /= 10;
  }
}

Decimal Decimal::parse(std::string_view text) {
  if (text.empty()) throw ValidationError("empty number");
  Decimal out;
  out.digits_.reserve(text.size());
  for (auto it = text.rbegin(); it != text.rend(); ++it) {
    if (*it < '0' || *it > '9') {
      throw ValidationError("not a decimal number: '" + std::string(text) + "'");
    }
    out.digits_.push_back(static_cast<std::uint8_t>(*it - '0'));
  }
  trim(out.digits_);
  return out;
}

Decimal Decimal::from_digits(std::vector<std::uint8_t> little_endian) {
  for (auto d : little_endian) {
    if (d > 9) throw ValidationError("digit out of range");
  }
  Decimal out;
  out.digits_ = std::move(little_endian);
  trim(out.digits_);
  return out;
}

Decimal Decimal::shifted(std::size_t places) const {
  if (is_zero() || places == 0) return *this;
  Decimal out;
  out.digits_.assign(places, 0);
  out.digits_.insert(out.digits_.end(), digits_.begin(), digits_.end());
  return out;
}

std::string Decimal::str() const {
  if (digits_.empty()) return "0";
  std::string s;
  s.reserve(digits_.size());
  for (auto it = digits_.rbegin(); it != digits_.rend(); ++it) s.push_back(static_cast<char>('0' + *it));
  return s;
}

std::optional<std::uint64_t> Decimal::to_u64() const {
  if (digits_.size() > 20) return std::nullopt;
  std::uint64_t value = 0;
  for (auto it = digits_.rbegin(); it != digits_.rend(); ++it) {
    if (value > (UINT64_MAX - *it) / 10) return std::nullopt;
    value = value * 10 + *it;
  }
  return value;
}

Decimal& Decimal::operator+=(const Decimal& rhs) {
  const std::size_t n = std::max(digits_.size(), rhs.digits_.size());
  digits_.resize(n, 0);
  int carry = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const int sum = digits_[k] + rhs.digit(k) + carry;
    digits_[k] = static_cast<std::uint8_t>(sum % 10);
    carry = sum / 10;
  }
  if (carry != 0) digits_.push_back(static_cast<std::uint8_t>(carry));
  return *this;
}

Decimal operator+(const Decimal& lhs, const Decimal& rhs) {
  Decimal out = lhs;
  out += rhs;
  return out;
}

std::strong_ordering operator<=>(const Decimal& lhs, const Decimal& rhs) {
  if (lhs.digits_.size() != rhs.digits_.size()) return lhs.digits_.size() <=> rhs.digits_.size();
  for (std::size_t k = lhs.digits_.size(); k-- > 0;) {
    if (lhs.digits_[k] != rhs.digits_[k]) return lhs.digits_[k] <=> rhs.digits_[k];
  }
  return std::strong_ordering::equal;
}

}  // namespace cotvars
