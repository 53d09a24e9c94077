// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "voxcodec/common.hpp"

namespace voxcodec {

/// Pinhole camera. Camera frame: +x right, +y down, +z forward.
/// `rotation` maps camera axes to world axes (row-major 3x3),
/// `position` is the camera center in world units.
struct Camera {
  double focal = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3d position{};

  Vec3d to_world(const Vec3d& v) const {
    const auto& r = rotation;
    return {r[0] * v.x + r[1] * v.y + r[2] * v.z, r[3] * v.x + r[4] * v.y + r[5] * v.z,
            r[6] * v.x + r[7] * v.y + r[8] * v.z};
  }
  Vec3d to_camera(const Vec3d& v) const {
    const auto& r = rotation;
    return {r[0] * v.x + r[3] * v.y + r[6] * v.z, r[1] * v.x + r[4] * v.y + r[7] * v.z,
            r[2] * v.x + r[5] * v.y + r[8] * v.z};
  }
  Vec3d forward() const { return {rotation[2], rotation[5], rotation[8]}; }

  void validate() const {
    check(focal > 0.0, ErrorCategory::kConfig, "camera focal length must be positive");
    check(width > 0 && height > 0, ErrorCategory::kConfig, "camera image size must be positive");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double d = 0;
        for (int k = 0; k < 3; ++k) d += rotation[k * 3 + i] * rotation[k * 3 + j];
        check(std::abs(d - (i == j ? 1.0 : 0.0)) < 1e-9, ErrorCategory::kConfig,
              "camera rotation is not orthonormal");
      }
  }

  friend bool operator==(const Camera&, const Camera&) = default;
};

/// Camera at `eye` looking at `target`, world `up` used to fix roll.
inline Camera look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up, int width, int height,
                      double focal) {
  const Vec3d f = normalized(target - eye);
  Vec3d r = normalized(cross(f, up));
  const Vec3d d = cross(f, r);  // image-down direction
  Camera cam;
  cam.focal = focal;
  cam.width = width;
  cam.height = height;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.rotation = {r.x, d.x, f.x, r.y, d.y, f.y, r.z, d.z, f.z};
  cam.position = eye;
  return cam;
}

struct Pixel {
  int row = 0;
  int col = 0;
};

template <typename T>
struct Ray {
  Vec3<T> origin;
  Vec3<T> dir;  // unit length
  Pixel pixel;
};

/// Ray through the center of `px`.
inline Ray<double> pixel_ray(const Camera& cam, Pixel px) {
  check(px.row >= 0 && px.row < cam.height && px.col >= 0 && px.col < cam.width,
        ErrorCategory::kDomain, "pixel outside image bounds");
  const Vec3d dc{(px.col + 0.5 - cam.cx) / cam.focal, (px.row + 0.5 - cam.cy) / cam.focal, 1.0};
  return {cam.position, normalized(cam.to_world(dc)), px};
}

inline std::vector<Ray<double>> generate_rays(const Camera& cam, const std::vector<Pixel>& pixels) {
  std::vector<Ray<double>> rays;
  rays.reserve(pixels.size());
  for (const auto& p : pixels) rays.push_back(pixel_ray(cam, p));
  return rays;
}

inline std::vector<Pixel> all_pixels(const Camera& cam) {
  std::vector<Pixel> px;
  px.reserve(static_cast<std::size_t>(cam.width) * cam.height);
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) px.push_back({r, c});
  return px;
}

}  // namespace voxcodec
