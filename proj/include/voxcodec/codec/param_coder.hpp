// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "voxcodec/codec/byte_io.hpp"
#include "voxcodec/codec/cdf_table.hpp"
#include "voxcodec/codec/range_coder.hpp"
#include "voxcodec/render/render_mlp.hpp"

namespace voxcodec {

inline constexpr double kParamLevels = 32767.0;

/// Symmetric 16-bit quantisation of one tensor.
struct QuantizedTensor {
  float scale = 1.0f;
  std::vector<std::int32_t> ints;
};

inline std::int32_t round_half_away(double x) {
  return static_cast<std::int32_t>(x < 0.0 ? -std::floor(-x + 0.5) : std::floor(x + 0.5));
}

template <typename T>
QuantizedTensor quantize_tensor(std::span<const T> w) {
  double maxabs = 0.0;
  for (T v : w) {
    check(std::isfinite(static_cast<double>(v)), ErrorCategory::kDiverged, "non-finite parameter");
    maxabs = std::max(maxabs, std::abs(static_cast<double>(v)));
  }
  QuantizedTensor q;
  q.ints.resize(w.size(), 0);
  if (maxabs == 0.0) return q;
  q.scale = static_cast<float>(maxabs / kParamLevels);
  for (std::size_t i = 0; i < w.size(); ++i)
    q.ints[i] = round_half_away(static_cast<double>(w[i]) / maxabs * kParamLevels);
  return q;
}

template <typename T>
void dequantize_tensor(const QuantizedTensor& q, std::span<T> out) {
  for (std::size_t i = 0; i < q.ints.size(); ++i)
    out[i] = static_cast<T>(static_cast<float>(q.ints[i]) * q.scale);
}

/// Layout: per tensor a f32 scale, then one range-coded stream of all
/// integers under the uniform 16-bit model.
template <typename T>
std::vector<std::uint8_t> encode_params(std::span<const T> params, const std::vector<TensorSlice>& tensors) {
  ByteWriter w;
  std::vector<std::int32_t> all;
  all.reserve(params.size());
  for (const auto& t : tensors) {
    const auto q = quantize_tensor(params.subspan(t.offset, t.size));
    w.f32(q.scale);
    all.insert(all.end(), q.ints.begin(), q.ints.end());
  }
  const std::vector<UniformCdf> models(all.size());
  w.bytes(range_encode(std::span<const std::int32_t>(all), std::span<const UniformCdf>(models)));
  return w.take();
}

template <typename T>
void decode_params(std::span<const std::uint8_t> bytes, const std::vector<TensorSlice>& tensors,
                   std::span<T> params) {
  ByteReader r(bytes);
  std::vector<float> scales;
  std::size_t n = 0;
  for (const auto& t : tensors) {
    const float s = r.f32();
    check(std::isfinite(s) && s > 0.0f, ErrorCategory::kFormat, "bad parameter scale");
    scales.push_back(s);
    n += t.size;
  }
  check(n == params.size(), ErrorCategory::kConfig, "parameter count mismatch");
  const std::vector<UniformCdf> models(n);
  const auto ints = range_decode(r.bytes(r.remaining()), std::span<const UniformCdf>(models));
  std::size_t k = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    QuantizedTensor q;
    q.scale = scales[i];
    q.ints.assign(ints.begin() + static_cast<std::ptrdiff_t>(k),
                  ints.begin() + static_cast<std::ptrdiff_t>(k + tensors[i].size));
    dequantize_tensor(q, params.subspan(tensors[i].offset, tensors[i].size));
    k += tensors[i].size;
  }
}

/// The values a decoder will reconstruct from encode_params.
template <typename T>
void snap_params(std::span<T> params, const std::vector<TensorSlice>& tensors) {
  for (const auto& t : tensors) {
    auto s = params.subspan(t.offset, t.size);
    dequantize_tensor(quantize_tensor(std::span<const T>(s)), s);
  }
}

}  // namespace voxcodec
