// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxcodec/codec/range_coder.hpp"
#include "voxcodec/entropy/laplace.hpp"

namespace voxcodec {

inline constexpr std::int32_t kAlphabetMin = -32768;
inline constexpr std::int32_t kAlphabetMax = 32767;
inline constexpr std::uint64_t kAlphabetSize = 65536;

template <typename S>
struct SymbolHit {
  S symbol;
  SymbolRange range;
};

/// Explicit cumulative table over [first, first + n). Used for small
/// alphabets and tests.
class FrequencyTable {
 public:
  FrequencyTable(std::int32_t first, std::vector<std::uint32_t> freqs) : first_(first) {
    cum_.reserve(freqs.size() + 1);
    cum_.push_back(0);
    for (auto f : freqs) {
      check(f >= 1, ErrorCategory::kConfig, "zero-frequency symbol in table");
      cum_.push_back(cum_.back() + f);
    }
    check(cum_.back() <= RangeEncoder::kMaxTotal, ErrorCategory::kConfig, "table total too large");
  }

  std::uint64_t total() const { return cum_.back(); }
  std::int32_t first() const { return first_; }
  std::size_t alphabet_size() const { return cum_.size() - 1; }

  SymbolRange range_of(std::int32_t s) const {
    const std::int64_t i = std::int64_t{s} - first_;
    check(i >= 0 && i < static_cast<std::int64_t>(alphabet_size()), ErrorCategory::kDomain,
          "symbol outside table alphabet");
    return {cum_[i], cum_[i + 1] - cum_[i]};
  }

  SymbolHit<std::int32_t> find(std::uint64_t target) const {
    std::size_t lo = 0, hi = alphabet_size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (cum_[mid] <= target) lo = mid; else hi = mid - 1;
    }
    return {static_cast<std::int32_t>(first_ + static_cast<std::int64_t>(lo)), {cum_[lo], cum_[lo + 1] - cum_[lo]}};
  }

 private:
  std::int32_t first_;
  std::vector<std::uint64_t> cum_;
};

/// Equiprobable model over the full 16-bit alphabet.
class UniformCdf {
 public:
  std::uint64_t total() const { return kAlphabetSize; }
  SymbolRange range_of(std::int32_t s) const {
    check(s >= kAlphabetMin && s <= kAlphabetMax, ErrorCategory::kDomain, "symbol outside alphabet");
    return {static_cast<std::uint64_t>(std::int64_t{s} - kAlphabetMin), 1};
  }
  SymbolHit<std::int32_t> find(std::uint64_t target) const {
    return {static_cast<std::int32_t>(static_cast<std::int64_t>(target) + kAlphabetMin), {target, 1}};
  }
};

/// Quantised discrete Laplace over [-32768, 32767] with total 2^30:
///
///   cum(s) = (s - smin) + floor(M * F(s - 1/2)),   M = 2^30 - 65536,
///   cum(smin) = 0, cum(smax + 1) = 2^30,
///
/// F the Laplace CDF of the (discretised) parameters. Every symbol gets at
/// least one count and cum is a pure function of (mu, b), computable per
/// symbol without materialising the 65536-entry table.
class LaplaceCdf {
 public:
  static constexpr std::uint64_t kTotal = RangeEncoder::kMaxTotal;
  static constexpr std::uint64_t kMass = kTotal - kAlphabetSize;

  explicit LaplaceCdf(const LaplaceParams& p) : mu_(p.mu), b_(p.b) {}

  std::uint64_t total() const { return kTotal; }

  std::uint64_t cumulative(std::int64_t s) const {
    if (s <= kAlphabetMin) return 0;
    if (s > kAlphabetMax) return kTotal;
    const double f = laplace_cdf(static_cast<double>(s) - 0.5, mu_, b_);
    const auto m = static_cast<std::uint64_t>(std::floor(static_cast<double>(kMass) * f));
    return static_cast<std::uint64_t>(s - kAlphabetMin) + std::min(m, kMass);
  }

  SymbolRange range_of(std::int32_t s) const {
    check(s >= kAlphabetMin && s <= kAlphabetMax, ErrorCategory::kDomain, "symbol outside alphabet");
    const std::uint64_t lo = cumulative(s);
    return {lo, cumulative(std::int64_t{s} + 1) - lo};
  }

  SymbolHit<std::int32_t> find(std::uint64_t target) const {
    std::int64_t lo = kAlphabetMin, hi = kAlphabetMax;
    while (lo < hi) {
      const std::int64_t mid = (lo + hi + 1) >> 1;
      if (cumulative(mid) <= target) lo = mid; else hi = mid - 1;
    }
    const std::uint64_t c = cumulative(lo);
    return {static_cast<std::int32_t>(lo), {c, cumulative(lo + 1) - c}};
  }

  /// Probability the coder actually assigns to `s`.
  double probability(std::int32_t s) const {
    return static_cast<double>(range_of(s).freq) / static_cast<double>(kTotal);
  }

  /// Full cumulative table (65537 entries); for verification only.
  std::vector<std::uint64_t> materialize() const {
    std::vector<std::uint64_t> c(kAlphabetSize + 1);
    for (std::uint64_t i = 0; i <= kAlphabetSize; ++i) c[i] = cumulative(static_cast<std::int64_t>(i) + kAlphabetMin);
    return c;
  }

 private:
  double mu_;
  double b_;
};

}  // namespace voxcodec
