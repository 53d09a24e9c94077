// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "voxcodec/field/field_frame.hpp"
#include "voxcodec/render/render_mlp.hpp"

namespace voxcodec {

/// Binary cell grid over the frame box. Cells partition the box into
/// dims.x * dims.y * dims.z equal cells, raster order z-major, x fastest.
struct OccupancyGrid {
  Dims dims;
  std::vector<std::uint8_t> bits;  // one 0/1 entry per cell
  Aabb box;

  OccupancyGrid() = default;
  OccupancyGrid(Dims d, Aabb b, bool value = false) : dims(d), bits(d.count(), value ? 1 : 0), box(b) {}

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims.y + y) * dims.x + x;
  }

  Vec3d cell_center(int x, int y, int z) const {
    const Vec3d s = box.size();
    return {box.lo.x + s.x * (x + 0.5) / dims.x, box.lo.y + s.y * (y + 0.5) / dims.y,
            box.lo.z + s.z * (z + 0.5) / dims.z};
  }

  double cell_diagonal() const {
    const Vec3d s = box.size();
    return norm(Vec3d{s.x / dims.x, s.y / dims.y, s.z / dims.z});
  }

  /// Cell containing p (p must be inside the box; the upper face maps to the
  /// last cell).
  template <typename T>
  bool occupied(const Vec3<T>& p) const {
    int c[3];
    for (int a = 0; a < 3; ++a) {
      const double u = (static_cast<double>(p[a]) - box.lo[a]) / (box.hi[a] - box.lo[a]) * dims[a];
      int i = static_cast<int>(std::floor(u));
      if (i < 0) i = 0;
      if (i >= dims[a]) i = dims[a] - 1;
      c[a] = i;
    }
    return bits[index(c[0], c[1], c[2])] != 0;
  }

  std::size_t count_set() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

/// 8 cells per byte, raster order, least significant bit first, last byte
/// zero-padded.
inline std::vector<std::uint8_t> pack_occupancy(const OccupancyGrid& occ) {
  std::vector<std::uint8_t> out((occ.bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < occ.bits.size(); ++i)
    if (occ.bits[i]) out[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
  return out;
}

inline OccupancyGrid unpack_occupancy(std::span<const std::uint8_t> packed, Dims dims, Aabb box) {
  OccupancyGrid occ(dims, box);
  check(packed.size() == (occ.bits.size() + 7) / 8, ErrorCategory::kFormat,
        "packed occupancy has wrong length");
  for (std::size_t i = 0; i < occ.bits.size(); ++i) occ.bits[i] = (packed[i >> 3] >> (i & 7)) & 1;
  const std::size_t tail = occ.bits.size() & 7;
  if (tail != 0) {
    check((packed.back() >> tail) == 0, ErrorCategory::kFormat, "nonzero occupancy padding bits");
  }
  return occ;
}

/// Cell is set iff 1 - exp(-sigma * cell_diagonal) >= threshold, with sigma
/// evaluated at the cell center.
template <typename T>
OccupancyGrid build_occupancy(const FieldFrame<T>& frame, const RenderMLP<T>& mlp, Dims dims,
                              double threshold) {
  OccupancyGrid occ(dims, frame.box());
  const double delta = occ.cell_diagonal();
  FusedSample<T> fs;
  std::vector<T> h1;
  for (int z = 0; z < dims.z; ++z)
    for (int y = 0; y < dims.y; ++y)
      for (int x = 0; x < dims.x; ++x) {
        fuse_features(frame, occ.cell_center(x, y, z), fs);
        const double sigma = static_cast<double>(mlp.density(std::span<const T>(fs.fused), h1));
        const double alpha = 1.0 - std::exp(-sigma * delta);
        occ.bits[occ.index(x, y, z)] = alpha >= threshold ? 1 : 0;
      }
  return occ;
}

/// Sets every cell within `radius` cells (Chebyshev distance) of a set cell.
inline OccupancyGrid dilate_occupancy(const OccupancyGrid& occ, int radius) {
  if (radius <= 0) return occ;
  OccupancyGrid out(occ.dims, occ.box);
  const Dims d = occ.dims;
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x) {
        if (!occ.bits[occ.index(x, y, z)]) continue;
        for (int zz = std::max(0, z - radius); zz <= std::min(d.z - 1, z + radius); ++zz)
          for (int yy = std::max(0, y - radius); yy <= std::min(d.y - 1, y + radius); ++yy)
            for (int xx = std::max(0, x - radius); xx <= std::min(d.x - 1, x + radius); ++xx)
              out.bits[out.index(xx, yy, zz)] = 1;
      }
  return out;
}

}  // namespace voxcodec
