// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/latent.hpp"

namespace cotvars {

LatentLayout LatentLayout::number_groups(std::size_t n_groups) {
  if (n_groups == 0 || n_groups > 19) throw ValidationError("number layout needs 1..19 groups");
  return {LayoutKind::NumberGroups, n_groups};
}

std::string_view to_string(LayoutKind kind) {
  return kind == LayoutKind::DigitCarry ? "digit_carry" : "number_groups";
}

LayoutKind layout_kind_from_string(std::string_view name) {
  if (name == "digit_carry") return LayoutKind::DigitCarry;
  if (name == "number_groups") return LayoutKind::NumberGroups;
  throw ValidationError("unknown latent layout kind '" + std::string(name) + "'");
}

LatentVec::LatentVec(LatentLayout layout, std::vector<std::uint8_t> bits)
    : layout_(layout), bits_(std::move(bits)) {
  if (bits_.size() != layout_.dim()) {
    throw ValidationError("latent vector has " + std::to_string(bits_.size()) + " bits, layout needs " +
                          std::to_string(layout_.dim()));
  }
}

LatentVec LatentVec::zeros(LatentLayout layout) {
  return LatentVec(layout, std::vector<std::uint8_t>(layout.dim(), 0));
}

LatentVec LatentVec::from_hot_indices(LatentLayout layout, std::span<const std::size_t> hot) {
  auto vec = zeros(layout);
  for (auto idx : hot) {
    if (idx >= layout.dim()) throw ValidationError("hot index " + std::to_string(idx) + " out of range");
    vec.bits_[idx] = 1;
  }
  vec.check();
  return vec;
}

std::vector<std::size_t> LatentVec::hot_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 0) out.push_back(i);
  }
  return out;
}

std::size_t LatentVec::group_value(std::size_t group) const {
  std::size_t hot = 10;
  int count = 0;
  for (std::size_t x = 0; x < 10; ++x) {
    if (bits_[10 * group + x] != 0) {
      hot = x;
      ++count;
    }
  }
  if (count != 1) {
    throw MalformedLatent(group, "latent group " + std::to_string(group) + " has " + std::to_string(count) +
                                     " hot bits, expected exactly 1");
  }
  return hot;
}

void LatentVec::check() const {
  for (std::size_t g = 0; g < layout_.n_groups; ++g) group_value(g);
}

LatentVec encode_number(std::uint64_t value, LatentLayout layout) {
  if (layout.kind != LayoutKind::NumberGroups) throw ValidationError("encode_number needs a number layout");
  std::vector<std::uint8_t> bits(layout.dim(), 0);
  std::uint64_t rest = value;
  for (std::size_t k = 0; k < layout.n_groups; ++k) {
    bits[10 * k + rest % 10] = 1;
    rest /= 10;
  }
  if (rest != 0) {
    throw ValidationError("value " + std::to_string(value) + " does not fit in " +
                          std::to_string(layout.n_groups) + " digit groups");
  }
  return LatentVec(layout, std::move(bits));
}

std::uint64_t decode_number(const LatentVec& vec) {
  if (vec.layout().kind != LayoutKind::NumberGroups) throw ValidationError("decode_number needs a number layout");
  std::uint64_t value = 0;
  for (std::size_t k = vec.layout().n_groups; k-- > 0;) value = value * 10 + vec.group_value(k);
  return value;
}

LatentVec encode_mul_step(int digit_out, int carry_out) {
  if (digit_out < 0 || digit_out > 9 || carry_out < 0 || carry_out > 9) {
    throw ValidationError("encode_mul_step: digit and carry must be in 0..9");
  }
  std::vector<std::uint8_t> bits(20, 0);
  bits[static_cast<std::size_t>(digit_out)] = 1;
  bits[10 + static_cast<std::size_t>(carry_out)] = 1;
  return LatentVec(LatentLayout::digit_carry(), std::move(bits));
}

std::pair<int, int> decode_mul_step(const LatentVec& vec) {
  if (vec.layout().kind != LayoutKind::DigitCarry) throw ValidationError("decode_mul_step needs the digit/carry layout");
  return {static_cast<int>(vec.group_value(0)), static_cast<int>(vec.group_value(1))};
}

namespace {

template <typename T>
LatentVec argmax_groups(std::span<const T> scores, LatentLayout layout) {
  if (scores.size() != layout.dim()) throw ValidationError("score vector length does not match layout");
  std::vector<std::uint8_t> bits(layout.dim(), 0);
  for (std::size_t g = 0; g < layout.n_groups; ++g) {
    std::size_t best = 0;
    for (std::size_t x = 1; x < 10; ++x) {
      if (scores[10 * g + x] > scores[10 * g + best]) best = x;
    }
    bits[10 * g + best] = 1;
  }
  return LatentVec(layout, std::move(bits));
}

}  // namespace

LatentVec decode_real_vector(std::span<const double> scores, LatentLayout layout) {
  return argmax_groups(scores, layout);
}

LatentVec decode_real_vector(std::span<const float> scores, LatentLayout layout) {
  return argmax_groups(scores, layout);
}

}  // namespace cotvars
