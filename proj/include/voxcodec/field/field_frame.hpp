// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voxcodec/field/feature_grid.hpp"

namespace voxcodec {

enum class FrameType : std::uint8_t { kI = 0, kP = 1 };

/// Grid shapes of a frame: one coefficient grid plus the basis scales.
struct FieldLayout {
  Dims coeff_dims = cube(32);
  std::vector<Dims> basis_dims = {cube(32), cube(16), cube(8)};
  int channels = 4;
  Aabb box;

  std::size_t grid_count() const { return 1 + basis_dims.size(); }
  Dims dims_of(std::size_t g) const { return g == 0 ? coeff_dims : basis_dims[g - 1]; }
  friend bool operator==(const FieldLayout&, const FieldLayout&) = default;
};

/// One frame's explicit representation. For P-frames the grids hold the
/// residual against the previous reconstruction, for I-frames the absolute
/// values. Grid 0 is the coefficient grid, grids 1.. the bases (finest first).
template <typename T>
struct FieldFrame {
  FeatureGrid<T> coeff;
  std::vector<FeatureGrid<T>> bases;
  std::vector<T> qsteps;
  FrameType frame_type = FrameType::kI;
  std::uint32_t frame_index = 0;

  FieldFrame() = default;
  explicit FieldFrame(const FieldLayout& layout, T qstep = T(0.02))
      : coeff(layout.coeff_dims, layout.channels, layout.box) {
    for (const auto& d : layout.basis_dims) bases.emplace_back(d, layout.channels, layout.box);
    qsteps.assign(grid_count(), qstep);
    validate();
  }

  std::size_t grid_count() const { return 1 + bases.size(); }
  int channels() const { return coeff.channels; }
  const Aabb& box() const { return coeff.box; }

  FeatureGrid<T>& grid(std::size_t g) { return g == 0 ? coeff : bases[g - 1]; }
  const FeatureGrid<T>& grid(std::size_t g) const { return g == 0 ? coeff : bases[g - 1]; }

  FieldLayout layout() const {
    FieldLayout l;
    l.coeff_dims = coeff.dims;
    l.basis_dims.clear();
    for (const auto& b : bases) l.basis_dims.push_back(b.dims);
    l.channels = coeff.channels;
    l.box = coeff.box;
    return l;
  }

  void validate() const {
    check(!bases.empty(), ErrorCategory::kConfig, "field frame needs at least one basis grid");
    for (const auto& b : bases) {
      check(b.channels == coeff.channels, ErrorCategory::kConfig,
            "basis grid channel count differs from coefficient grid");
      check(b.box == coeff.box, ErrorCategory::kConfig, "basis grid box differs from coefficient grid");
    }
    check(qsteps.size() == grid_count(), ErrorCategory::kConfig,
          "need one quantization step per grid");
    for (T q : qsteps) check(q > T(0), ErrorCategory::kConfig, "quantization steps must be positive");
  }

  template <typename U>
  FieldFrame<U> cast() const {
    FieldFrame<U> f;
    f.coeff = coeff.template cast<U>();
    for (const auto& b : bases) f.bases.push_back(b.template cast<U>());
    f.qsteps.assign(qsteps.begin(), qsteps.end());
    f.frame_type = frame_type;
    f.frame_index = frame_index;
    return f;
  }
};

/// Per-grid trilinear stencils of one query point, reused by the backward pass.
template <typename T>
struct FusedSample {
  std::vector<TrilinearStencil<T>> stencils;  // one per grid
  std::vector<T> coeff;                       // coefficient feature
  std::vector<T> basis_mean;                  // mean basis feature
  std::vector<T> fused;
};

/// coeff(x) (.) mean_k basis_k(x), with stencils kept for the backward pass.
template <typename T, typename P>
void fuse_features(const FieldFrame<T>& f, const Vec3<P>& p, FusedSample<T>& out) {
  const int ch = f.channels();
  const std::size_t ng = f.grid_count();
  out.stencils.resize(ng);
  out.coeff.assign(ch, T(0));
  out.basis_mean.assign(ch, T(0));
  out.fused.resize(ch);
  T tmp[64];
  check(ch <= 64, ErrorCategory::kConfig, "at most 64 feature channels supported");
  out.stencils[0] = trilinear_stencil(f.coeff, p);
  trilinear_gather(f.coeff, out.stencils[0], std::span<T>(out.coeff));
  const T inv = T(1) / static_cast<T>(f.bases.size());
  for (std::size_t b = 0; b < f.bases.size(); ++b) {
    out.stencils[b + 1] = trilinear_stencil(f.bases[b], p);
    trilinear_gather(f.bases[b], out.stencils[b + 1], std::span<T>(tmp, ch));
    for (int c = 0; c < ch; ++c) out.basis_mean[c] += tmp[c] * inv;
  }
  for (int c = 0; c < ch; ++c) out.fused[c] = out.coeff[c] * out.basis_mean[c];
}

template <typename T, typename P>
std::vector<T> fuse_features(const FieldFrame<T>& f, const Vec3<P>& p) {
  FusedSample<T> s;
  fuse_features(f, p, s);
  return s.fused;
}

/// Gradient buffers shaped like a FieldFrame's grids.
template <typename T>
struct FieldGrad {
  std::vector<std::vector<T>> grids;

  FieldGrad() = default;
  explicit FieldGrad(const FieldFrame<T>& f) { reset(f); }

  void reset(const FieldFrame<T>& f) {
    grids.resize(f.grid_count());
    for (std::size_t g = 0; g < f.grid_count(); ++g) grids[g].assign(f.grid(g).size(), T(0));
  }
  void zero() {
    for (auto& g : grids) std::fill(g.begin(), g.end(), T(0));
  }
  /// Sums another buffer in; merge order is fixed by the caller.
  void merge(const FieldGrad& o) {
    for (std::size_t g = 0; g < grids.size(); ++g)
      for (std::size_t i = 0; i < grids[g].size(); ++i) grids[g][i] += o.grids[g][i];
  }
};

/// Scatters d(loss)/d(fused) back onto all grids.
template <typename T>
void fuse_backward(const FieldFrame<T>& f, const FusedSample<T>& s, std::span<const T> upstream,
                   FieldGrad<T>& grad) {
  const int ch = f.channels();
  T g_coeff[64];
  T g_basis[64];
  const T inv = T(1) / static_cast<T>(f.bases.size());
  for (int c = 0; c < ch; ++c) {
    g_coeff[c] = upstream[c] * s.basis_mean[c];
    g_basis[c] = upstream[c] * s.coeff[c] * inv;
  }
  trilinear_scatter(s.stencils[0], ch, std::span<const T>(g_coeff, ch), std::span<T>(grad.grids[0]));
  for (std::size_t b = 0; b < f.bases.size(); ++b) {
    trilinear_scatter(s.stencils[b + 1], ch, std::span<const T>(g_basis, ch),
                      std::span<T>(grad.grids[b + 1]));
  }
}

}  // namespace voxcodec
