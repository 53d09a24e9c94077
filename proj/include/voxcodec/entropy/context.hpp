// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "voxcodec/common.hpp"

namespace voxcodec {

inline constexpr int kSpatialContext = 13;
inline constexpr int kTemporalContext = 27;
inline constexpr int kContextWidth = kSpatialContext + kTemporalContext;
inline constexpr double kContextScale = 128.0;

/// Integer voxel tensor, channel-last like FeatureGrid. Coding (raster)
/// order is channel outermost, then z, y, x (x fastest).
struct IntTensor {
  Dims dims;
  int channels = 1;
  std::vector<std::int32_t> values;

  IntTensor() = default;
  IntTensor(Dims d, int ch) : dims(d), channels(ch), values(d.count() * static_cast<std::size_t>(ch), 0) {}

  std::size_t size() const { return values.size(); }
  std::size_t index(int x, int y, int z, int c) const {
    return ((static_cast<std::size_t>(z) * dims.y + y) * dims.x + x) * channels + c;
  }
  std::int32_t& at(int x, int y, int z, int c) { return values[index(x, y, z, c)]; }
  std::int32_t at(int x, int y, int z, int c) const { return values[index(x, y, z, c)]; }

  bool inside(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims.x && y < dims.y && z < dims.z;
  }

  bool same_shape(const IntTensor& o) const { return dims == o.dims && channels == o.channels; }

  friend bool operator==(const IntTensor&, const IntTensor&) = default;
};

struct VoxelPos {
  int x = 0, y = 0, z = 0, c = 0;
};

/// Position in coding order.
inline std::size_t raster_index(const IntTensor& t, const VoxelPos& p) {
  return ((static_cast<std::size_t>(p.c) * t.dims.z + p.z) * t.dims.y + p.y) * t.dims.x + p.x;
}

inline VoxelPos raster_position(const IntTensor& t, std::size_t r) {
  VoxelPos p;
  p.x = static_cast<int>(r % t.dims.x);
  r /= t.dims.x;
  p.y = static_cast<int>(r % t.dims.y);
  r /= t.dims.y;
  p.z = static_cast<int>(r % t.dims.z);
  p.c = static_cast<int>(r / t.dims.z);
  return p;
}

struct Offset3 {
  int dx, dy, dz;
};

/// The 13 members of the 3x3x3 cube that precede the center in raster order,
/// sorted by (dz, dy, dx).
inline const std::array<Offset3, kSpatialContext>& causal_offsets() {
  static const std::array<Offset3, kSpatialContext> offs = [] {
    std::array<Offset3, kSpatialContext> o{};
    int n = 0;
    for (int dz = -1; dz <= 0; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0))) continue;
          o[n++] = {dx, dy, dz};
        }
    return o;
  }();
  return offs;
}

/// Spatial (13 causal neighbours in `current`, same channel) then temporal
/// (full 3x3x3 cube of `prev` around the same position) context, scaled by
/// 1/128. Out-of-grid entries and an absent `prev` give zeros.
template <typename T>
void gather_context(const IntTensor& current, const IntTensor* prev, const VoxelPos& p,
                    std::span<T> out) {
  const T inv = static_cast<T>(1.0 / kContextScale);
  int k = 0;
  for (const auto& o : causal_offsets()) {
    const int x = p.x + o.dx, y = p.y + o.dy, z = p.z + o.dz;
    out[k++] = current.inside(x, y, z) ? static_cast<T>(current.at(x, y, z, p.c)) * inv : T(0);
  }
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = p.x + dx, y = p.y + dy, z = p.z + dz;
        out[k++] = (prev && prev->inside(x, y, z)) ? static_cast<T>(prev->at(x, y, z, p.c)) * inv
                                                   : T(0);
      }
}

template <typename T>
std::array<T, kContextWidth> gather_context(const IntTensor& current, const IntTensor* prev,
                                            const VoxelPos& p) {
  std::array<T, kContextWidth> out{};
  gather_context(current, prev, p, std::span<T>(out));
  return out;
}

}  // namespace voxcodec
