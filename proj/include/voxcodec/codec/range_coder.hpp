// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voxcodec/common.hpp"

namespace voxcodec {

/// Sub-interval [low, low + freq) of a model's total frequency.
struct SymbolRange {
  std::uint64_t low = 0;
  std::uint64_t freq = 0;
};

/// Carry-propagating byte-oriented range coder. `low_` keeps a 56-bit window
/// plus one carry bit; `range_` stays in [2^48, 2^56) after normalisation, so
/// model totals up to 2^30 keep at least 18 bits of subdivision precision.
///
/// Stream layout: the first byte is always zero (pending-carry slot), the
/// flush emits 8 bytes, so an empty stream is exactly 8 bytes long.
class RangeEncoder {
 public:
  static constexpr int kWindowBits = 56;
  static constexpr std::uint64_t kWindowMask = (std::uint64_t{1} << kWindowBits) - 1;
  static constexpr std::uint64_t kBottom = std::uint64_t{1} << (kWindowBits - 8);
  static constexpr std::uint64_t kMaxTotal = std::uint64_t{1} << 30;

  void encode(SymbolRange s, std::uint64_t total) {
    const std::uint64_t r = range_ / total;
    low_ += r * s.low;
    range_ = r * s.freq;
    while (range_ < kBottom) {
      range_ <<= 8;
      shift_low();
    }
  }

  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < kWindowBits / 8 + 1; ++i) shift_low();
    return std::move(out_);
  }

 private:
  void shift_low() {
    if (low_ < (std::uint64_t{0xFF} << (kWindowBits - 8)) || (low_ >> kWindowBits) != 0) {
      const auto carry = static_cast<std::uint8_t>(low_ >> kWindowBits);
      std::uint8_t temp = cache_;
      do {
        out_.push_back(static_cast<std::uint8_t>(temp + carry));
        temp = 0xFF;
      } while (--cache_size_ != 0);
      cache_ = static_cast<std::uint8_t>(low_ >> (kWindowBits - 8));
    }
    ++cache_size_;
    low_ = (low_ & (kWindowMask >> 8)) << 8;
  }

  std::uint64_t low_ = 0;
  std::uint64_t range_ = kWindowMask;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> in) : in_(in) {
    check(in_.size() >= kInitBytes, ErrorCategory::kFormat, "range coded stream too short");
    check(in_[0] == 0, ErrorCategory::kFormat, "range coded stream has a bad lead byte");
    for (int i = 0; i < kInitBytes; ++i) code_ = (code_ << 8) | next();
    code_ &= RangeEncoder::kWindowMask;
  }

  /// Target frequency of the next symbol; follow with consume().
  std::uint64_t peek(std::uint64_t total) {
    r_ = range_ / total;
    const std::uint64_t v = code_ / r_;
    check(v < total, ErrorCategory::kFormat, "corrupt range coded stream");
    return v;
  }

  void consume(SymbolRange s) {
    code_ -= r_ * s.low;
    range_ = r_ * s.freq;
    while (range_ < RangeEncoder::kBottom) {
      code_ = ((code_ << 8) | next()) & RangeEncoder::kWindowMask;
      range_ <<= 8;
    }
  }

  /// True when exactly the encoder's bytes were consumed.
  bool at_end() const { return pos_ == in_.size(); }

 private:
  static constexpr int kInitBytes = RangeEncoder::kWindowBits / 8 + 1;

  std::uint8_t next() {
    check(pos_ < in_.size(), ErrorCategory::kFormat, "range coded stream truncated");
    return in_[pos_++];
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint64_t code_ = 0;
  std::uint64_t range_ = RangeEncoder::kWindowMask;
  std::uint64_t r_ = 1;
};

/// Encodes symbols, each under its own model. A model provides total(),
/// range_of(symbol) and find(target) -> {symbol, range}.
template <typename Model, typename Symbol>
std::vector<std::uint8_t> range_encode(std::span<const Symbol> symbols, std::span<const Model> models) {
  check(symbols.size() == models.size(), ErrorCategory::kConfig, "one model per symbol required");
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i)
    enc.encode(models[i].range_of(symbols[i]), models[i].total());
  return enc.finish();
}

template <typename Model>
auto range_decode(std::span<const std::uint8_t> bytes, std::span<const Model> models) {
  using Symbol = decltype(models[0].find(0).symbol);
  std::vector<Symbol> out;
  out.reserve(models.size());
  RangeDecoder dec(bytes);
  for (const auto& m : models) {
    const auto hit = m.find(dec.peek(m.total()));
    dec.consume(hit.range);
    out.push_back(hit.symbol);
  }
  check(dec.at_end(), ErrorCategory::kFormat, "trailing bytes after range coded symbols");
  return out;
}

}  // namespace voxcodec
