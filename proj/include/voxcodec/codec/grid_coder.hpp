// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "voxcodec/codec/cdf_table.hpp"
#include "voxcodec/codec/range_coder.hpp"
#include "voxcodec/entropy/context.hpp"
#include "voxcodec/entropy/entropy_model.hpp"

namespace voxcodec {

/// Coding distribution of one voxel: context -> model -> lattice snap.
template <typename T>
LaplaceParams coding_params(const ImplicitEntropyModel<T>& model, const IntTensor& current,
                            const IntTensor* prev, const VoxelPos& p) {
  std::array<T, kContextWidth> ctx;
  gather_context(current, prev, p, std::span<T>(ctx));
  return discretize_params(model.predict(std::span<const T>(ctx)));
}

namespace detail {
inline void check_prev(const IntTensor& t, const IntTensor* prev) {
  check(prev == nullptr || prev->same_shape(t), ErrorCategory::kConfig,
        "temporal context tensor shape differs from the coded tensor");
}
}  // namespace detail

/// Range-codes every voxel in raster order under the model's prediction from
/// already-coded voxels and the previous frame's tensor.
template <typename T>
std::vector<std::uint8_t> encode_grid(const IntTensor& t, const ImplicitEntropyModel<T>& model,
                                      const IntTensor* prev) {
  detail::check_prev(t, prev);
  RangeEncoder enc;
  const std::size_t n = t.size();
  for (std::size_t r = 0; r < n; ++r) {
    const VoxelPos p = raster_position(t, r);
    const std::int32_t v = t.at(p.x, p.y, p.z, p.c);
    check(v >= kAlphabetMin && v <= kAlphabetMax, ErrorCategory::kDomain,
          "grid integer outside the coding alphabet");
    const LaplaceCdf cdf(coding_params(model, t, prev, p));
    enc.encode(cdf.range_of(v), cdf.total());
  }
  return enc.finish();
}

template <typename T>
IntTensor decode_grid(std::span<const std::uint8_t> bytes, Dims dims, int channels,
                      const ImplicitEntropyModel<T>& model, const IntTensor* prev) {
  IntTensor t(dims, channels);
  detail::check_prev(t, prev);
  RangeDecoder dec(bytes);
  const std::size_t n = t.size();
  for (std::size_t r = 0; r < n; ++r) {
    const VoxelPos p = raster_position(t, r);
    const LaplaceCdf cdf(coding_params(model, t, prev, p));
    const auto hit = cdf.find(dec.peek(cdf.total()));
    dec.consume(hit.range);
    t.at(p.x, p.y, p.z, p.c) = hit.symbol;
  }
  check(dec.at_end(), ErrorCategory::kFormat, "grid payload has trailing or missing bytes");
  return t;
}

/// Model rate of a hard-integer tensor with discretised parameters (bits).
template <typename T>
double estimate_grid_bits(const IntTensor& t, const ImplicitEntropyModel<T>& model,
                          const IntTensor* prev) {
  detail::check_prev(t, prev);
  double bits = 0.0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const VoxelPos p = raster_position(t, r);
    bits += rate_bits(static_cast<double>(t.at(p.x, p.y, p.z, p.c)), coding_params(model, t, prev, p));
  }
  return bits;
}

}  // namespace voxcodec
