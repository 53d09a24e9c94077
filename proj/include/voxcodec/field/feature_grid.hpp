// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "voxcodec/common.hpp"

namespace voxcodec {

/// Dense voxel feature grid. Nodes sit on a regular lattice spanning `box`
/// (node 0 on box.lo, node n-1 on box.hi); values are channel-last:
/// index = ((z * ny + y) * nx + x) * channels + c.
template <typename T>
struct FeatureGrid {
  Dims dims;
  int channels = 1;
  std::vector<T> values;
  Aabb box;

  FeatureGrid() = default;
  FeatureGrid(Dims d, int ch, Aabb b, T fill = T(0))
      : dims(d), channels(ch), values(d.count() * static_cast<std::size_t>(ch), fill), box(b) {
    check(d.x >= 2 && d.y >= 2 && d.z >= 2, ErrorCategory::kConfig,
          "feature grid needs at least 2 nodes per axis");
    check(ch >= 1, ErrorCategory::kConfig, "feature grid needs at least one channel");
  }

  std::size_t node_count() const { return dims.count(); }
  std::size_t size() const { return values.size(); }

  std::size_t node_index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims.y + y) * dims.x + x;
  }
  T& at(int x, int y, int z, int c) { return values[node_index(x, y, z) * channels + c]; }
  const T& at(int x, int y, int z, int c) const {
    return values[node_index(x, y, z) * channels + c];
  }

  Vec3d node_position(int x, int y, int z) const {
    const Vec3d s = box.size();
    return {box.lo.x + s.x * x / (dims.x - 1), box.lo.y + s.y * y / (dims.y - 1),
            box.lo.z + s.z * z / (dims.z - 1)};
  }

  bool same_shape(const FeatureGrid& o) const {
    return dims == o.dims && channels == o.channels && box == o.box;
  }

  template <typename U>
  FeatureGrid<U> cast() const {
    FeatureGrid<U> g;
    g.dims = dims;
    g.channels = channels;
    g.box = box;
    g.values.assign(values.begin(), values.end());
    return g;
  }
};

/// Uniform random fill in [-amplitude, amplitude].
template <typename T, typename Rng>
void fill_uniform(FeatureGrid<T>& g, T amplitude, Rng& rng) {
  std::uniform_real_distribution<double> u(-static_cast<double>(amplitude),
                                           static_cast<double>(amplitude));
  for (auto& v : g.values) v = static_cast<T>(u(rng));
}

/// The eight corner nodes of a query point and their trilinear weights,
/// plus what is needed to differentiate w.r.t. the point itself.
template <typename T>
struct TrilinearStencil {
  std::array<std::size_t, 8> node{};  // node indices (multiply by channels)
  std::array<T, 8> weight{};
  std::array<T, 3> frac{};            // fractional position inside the cell
  std::array<T, 3> inv_spacing{};     // d(lattice coordinate)/d(world)
};

/// Corner layout: bit 0 -> +x, bit 1 -> +y, bit 2 -> +z.
template <typename T, typename P>
TrilinearStencil<T> trilinear_stencil(const FeatureGrid<T>& g, const Vec3<P>& p) {
  if (!g.box.contains(p)) {
    throw Error(ErrorCategory::kDomain, "trilinear query outside grid box");
  }
  TrilinearStencil<T> s;
  std::array<int, 3> i0{};
  for (int a = 0; a < 3; ++a) {
    const int n = g.dims[a];
    const T extent = static_cast<T>(g.box.hi[a] - g.box.lo[a]);
    const T u = (static_cast<T>(p[a]) - static_cast<T>(g.box.lo[a])) / extent * T(n - 1);
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, n - 2);
    i0[a] = i;
    s.frac[a] = std::clamp(u - T(i), T(0), T(1));
    s.inv_spacing[a] = T(n - 1) / extent;
  }
  const T fx = s.frac[0], fy = s.frac[1], fz = s.frac[2];
  for (int k = 0; k < 8; ++k) {
    const int dx = k & 1, dy = (k >> 1) & 1, dz = (k >> 2) & 1;
    s.node[k] = g.node_index(i0[0] + dx, i0[1] + dy, i0[2] + dz);
    s.weight[k] = (dx ? fx : T(1) - fx) * (dy ? fy : T(1) - fy) * (dz ? fz : T(1) - fz);
  }
  return s;
}

template <typename T>
void trilinear_gather(const FeatureGrid<T>& g, const TrilinearStencil<T>& s, std::span<T> out) {
  const int ch = g.channels;
  std::fill(out.begin(), out.end(), T(0));
  for (int k = 0; k < 8; ++k) {
    const T w = s.weight[k];
    const T* v = g.values.data() + s.node[k] * ch;
    for (int c = 0; c < ch; ++c) out[c] += w * v[c];
  }
}

/// Trilinear interpolation of the eight surrounding nodes. Throws
/// Error(kDomain) for points outside the grid box.
template <typename T, typename P>
std::vector<T> trilinear_sample(const FeatureGrid<T>& g, const Vec3<P>& p) {
  std::vector<T> out(static_cast<std::size_t>(g.channels));
  trilinear_gather(g, trilinear_stencil(g, p), std::span<T>(out));
  return out;
}

/// Adds upstream * d(sample)/d(values) into `grad_values` (same layout as
/// g.values).
template <typename T>
void trilinear_scatter(const TrilinearStencil<T>& s, int channels, std::span<const T> upstream,
                       std::span<T> grad_values) {
  for (int k = 0; k < 8; ++k) {
    const T w = s.weight[k];
    if (w == T(0)) continue;
    T* gv = grad_values.data() + s.node[k] * channels;
    for (int c = 0; c < channels; ++c) gv[c] += w * upstream[c];
  }
}

/// upstream . d(sample)/d(p) in world units.
template <typename T>
Vec3<T> trilinear_point_gradient(const FeatureGrid<T>& g, const TrilinearStencil<T>& s,
                                 std::span<const T> upstream) {
  const int ch = g.channels;
  Vec3<T> grad{};
  for (int k = 0; k < 8; ++k) {
    const int d[3] = {k & 1, (k >> 1) & 1, (k >> 2) & 1};
    const T* v = g.values.data() + s.node[k] * ch;
    T proj = 0;
    for (int c = 0; c < ch; ++c) proj += upstream[c] * v[c];
    for (int a = 0; a < 3; ++a) {
      T dw = d[a] ? T(1) : T(-1);
      for (int b = 0; b < 3; ++b) {
        if (b == a) continue;
        dw *= d[b] ? s.frac[b] : T(1) - s.frac[b];
      }
      grad[a] += dw * proj * s.inv_spacing[a];
    }
  }
  return grad;
}

/// Backward pass of trilinear_sample: accumulates into grad_values and
/// returns the gradient w.r.t. the query point.
template <typename T, typename P>
Vec3<T> trilinear_backward(const FeatureGrid<T>& g, const Vec3<P>& p, std::span<const T> upstream,
                           std::span<T> grad_values) {
  check(grad_values.size() == g.values.size(), ErrorCategory::kConfig,
        "gradient buffer does not match grid size");
  const auto s = trilinear_stencil(g, p);
  trilinear_scatter(s, g.channels, upstream, grad_values);
  return trilinear_point_gradient(g, s, upstream);
}

}  // namespace voxcodec
