// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "voxcodec/field/field_frame.hpp"
#include "voxcodec/field/occupancy.hpp"
#include "voxcodec/render/camera.hpp"
#include "voxcodec/render/render_mlp.hpp"

namespace voxcodec {

template <typename T>
struct SamplePoint {
  Vec3<T> x;
  T delta = 0;  // segment length represented by the sample
  T t = 0;      // depth along the ray
};

struct RenderSettings {
  double step = 2.0 * std::sqrt(3.0) / 256.0;
  std::array<double, 3> background{0.0, 0.0, 0.0};
  /// Stop marching once transmittance drops below this (0 disables).
  double min_transmittance = 0.0;

  static RenderSettings for_box(const Aabb& box, double steps_per_diagonal = 256.0) {
    RenderSettings s;
    s.step = box.diagonal() / steps_per_diagonal;
    return s;
  }
};

/// Entry/exit depths of a ray against a box; false if it misses.
template <typename T>
bool intersect_box(const Ray<T>& ray, const Aabb& box, double& t0, double& t1) {
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double o = static_cast<double>(ray.origin[a]);
    const double d = static_cast<double>(ray.dir[a]);
    if (d == 0.0) {
      if (o < box.lo[a] || o > box.hi[a]) return false;
      continue;
    }
    double ta = (box.lo[a] - o) / d;
    double tb = (box.hi[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t1 > t0;
}

/// Uniform samples at segment midpoints t0 + (k + 1/2) step inside the box;
/// samples in unoccupied cells are dropped. Every retained sample represents
/// its own segment, so delta == step.
template <typename T>
void sample_ray(const Ray<T>& ray, const OccupancyGrid& occ, double step, std::vector<SamplePoint<T>>& out) {
  check(step > 0.0, ErrorCategory::kDomain, "sampling step must be positive");
  out.clear();
  double t0, t1;
  if (!intersect_box(ray, occ.box, t0, t1)) return;
  for (double t = t0 + 0.5 * step; t < t1; t += step) {
    const Vec3d pd{static_cast<double>(ray.origin.x) + t * static_cast<double>(ray.dir.x),
                   static_cast<double>(ray.origin.y) + t * static_cast<double>(ray.dir.y),
                   static_cast<double>(ray.origin.z) + t * static_cast<double>(ray.dir.z)};
    if (!occ.box.contains(pd) || !occ.occupied(pd)) continue;
    out.push_back({pd.template cast<T>(), static_cast<T>(step), static_cast<T>(t)});
  }
}

template <typename T>
std::vector<SamplePoint<T>> sample_ray(const Ray<T>& ray, const OccupancyGrid& occ, double step) {
  std::vector<SamplePoint<T>> out;
  sample_ray(ray, occ, step, out);
  return out;
}

/// Intermediates of one rendered ray, reused across rays to avoid
/// reallocation.
template <typename T>
struct RayTrace {
  typename RenderMLP<T>::RayTerm ray_term;
  std::vector<FusedSample<T>> fused;
  std::vector<typename RenderMLP<T>::Activations> act;
  std::vector<T> alpha;
  std::vector<T> trans;  // transmittance before each sample
  std::vector<T> delta;
  std::size_t used = 0;  // samples actually composited
  T trans_final = 1;
  std::array<T, 3> color{};

  T weight(std::size_t i) const { return trans[i] * alpha[i]; }
  T weight_sum() const { return T(1) - trans_final; }
};

/// Composites C = sum_i T_i a_i c_i + T_final * background with
/// a_i = 1 - exp(-sigma_i delta_i), T_i = prod_{j<i} (1 - a_j).
template <typename T>
std::array<T, 3> render_ray(const std::vector<SamplePoint<T>>& samples, const FieldFrame<T>& frame,
                            const RenderMLP<T>& mlp, const Ray<T>& ray, const RenderSettings& rs,
                            RayTrace<T>& tr) {
  const std::size_t n = samples.size();
  if (tr.fused.size() < n) tr.fused.resize(n);
  if (tr.act.size() < n) tr.act.resize(n);
  tr.alpha.resize(n);
  tr.trans.resize(n);
  tr.delta.resize(n);
  tr.used = 0;
  tr.color = {T(0), T(0), T(0)};
  if (n > 0) mlp.prepare_ray(ray.dir, tr.ray_term);
  T trans = 1;
  const T min_t = static_cast<T>(rs.min_transmittance);
  for (std::size_t i = 0; i < n; ++i) {
    if (min_t > T(0) && trans < min_t) break;
    auto& fs = tr.fused[i];
    auto& a = tr.act[i];
    fuse_features(frame, samples[i].x, fs);
    mlp.forward(std::span<const T>(fs.fused), tr.ray_term, a);
    const T alpha = T(1) - std::exp(-a.sigma * samples[i].delta);
    tr.alpha[i] = alpha;
    tr.trans[i] = trans;
    tr.delta[i] = samples[i].delta;
    const T w = trans * alpha;
    for (int c = 0; c < 3; ++c) tr.color[c] += w * a.color[c];
    trans *= T(1) - alpha;
    tr.used = i + 1;
  }
  tr.trans_final = trans;
  for (int c = 0; c < 3; ++c) tr.color[c] += trans * static_cast<T>(rs.background[c]);
  return tr.color;
}

template <typename T>
std::array<T, 3> render_ray(const std::vector<SamplePoint<T>>& samples, const FieldFrame<T>& frame,
                            const RenderMLP<T>& mlp, const Ray<T>& ray, const RenderSettings& rs) {
  RayTrace<T> tr;
  return render_ray(samples, frame, mlp, ray, rs, tr);
}

/// Reusable buffers for render_backward.
template <typename T>
struct BackwardScratch {
  std::vector<T> grad_feature;
  std::vector<T> dz2_sum;
  std::vector<T> mlp_scratch;
  std::vector<T> mlp_sink;  // MLP gradient target when the caller does not want one
};

/// Backward of render_ray for the trace in `tr`: given d(loss)/d(color),
/// accumulates d(loss)/d(grid values) into `field_grad` and
/// d(loss)/d(MLP params) into `mlp_grad` (either may be skipped by passing an
/// empty span / null pointer).
template <typename T>
void render_backward(const FieldFrame<T>& frame, const RenderMLP<T>& mlp, const RayTrace<T>& tr,
                     const std::array<T, 3>& d_color, const RenderSettings& rs,
                     FieldGrad<T>* field_grad, std::span<T> mlp_grad, BackwardScratch<T>& s) {
  if (tr.used == 0) return;
  const int ch = frame.channels();
  s.grad_feature.resize(ch);
  s.dz2_sum.assign(mlp.hidden(), T(0));
  std::span<T> mg = mlp_grad;
  if (mg.empty()) {
    s.mlp_sink.resize(mlp.params().size());
    mg = std::span<T>(s.mlp_sink);
  }
  // suffix[i] = sum_{j>i} w_j c_j + T_final * bg
  std::array<T, 3> suffix;
  for (int c = 0; c < 3; ++c) suffix[c] = tr.trans_final * static_cast<T>(rs.background[c]);
  for (std::size_t ii = tr.used; ii-- > 0;) {
    const auto& a = tr.act[ii];
    const T w = tr.weight(ii);
    const T t_next = tr.trans[ii] * (T(1) - tr.alpha[ii]);
    T d_sigma = 0;
    std::array<T, 3> d_c;
    for (int c = 0; c < 3; ++c) {
      d_c[c] = d_color[c] * w;
      d_sigma += d_color[c] * tr.delta[ii] * (t_next * a.color[c] - suffix[c]);
    }
    for (int c = 0; c < 3; ++c) suffix[c] += w * a.color[c];
    const auto& fs = tr.fused[ii];
    mlp.backward(std::span<const T>(fs.fused), a, d_sigma, d_c, mg, std::span<T>(s.grad_feature),
                 std::span<T>(s.dz2_sum), s.mlp_scratch);
    if (field_grad) fuse_backward(frame, fs, std::span<const T>(s.grad_feature), *field_grad);
  }
  mlp.finish_ray(tr.ray_term, std::span<const T>(s.dz2_sum), mg);
}

/// Renders every pixel of `cam`; returns row-major RGB.
template <typename T>
std::vector<float> render_view(const FieldFrame<T>& frame, const RenderMLP<T>& mlp,
                               const OccupancyGrid& occ, const Camera& cam, const RenderSettings& rs) {
  std::vector<float> rgb(static_cast<std::size_t>(cam.width) * cam.height * 3);
  RayTrace<T> tr;
  std::vector<SamplePoint<T>> samples;
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) {
      const auto rd = pixel_ray(cam, {r, c});
      const Ray<T> ray{rd.origin.template cast<T>(), rd.dir.template cast<T>(), rd.pixel};
      sample_ray(ray, occ, rs.step, samples);
      const auto col = render_ray(samples, frame, mlp, ray, rs, tr);
      const std::size_t o = (static_cast<std::size_t>(r) * cam.width + c) * 3;
      for (int k = 0; k < 3; ++k) rgb[o + k] = static_cast<float>(col[k]);
    }
  return rgb;
}

}  // namespace voxcodec
