// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "voxcodec/common.hpp"
#include "voxcodec/render/camera.hpp"
#include "voxcodec/render/volume_render.hpp"
#include "voxcodec/scene/image.hpp"
#include "voxcodec/train/config.hpp"

namespace voxcodec {

enum class PrimitiveKind { kSphere, kBox };

/// Soft-edged primitive. Center moves as
///   c(t) = center + velocity * t + amplitude * sin(2 pi frequency t).
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kSphere;
  Vec3d center;
  double radius = 0.5;   // sphere
  Vec3d half{0.3, 0.3, 0.3};  // box half extents
  std::array<double, 3> color{1.0, 1.0, 1.0};
  double density = 20.0;
  double edge = 0.05;    // width of the density ramp
  Vec3d velocity;
  Vec3d amplitude;
  double frequency = 0.0;

  Vec3d center_at(double t) const {
    const double s = std::sin(2.0 * std::numbers::pi * frequency * t);
    return center + velocity * t + amplitude * s;
  }

  /// Signed distance to the surface at frame t (negative inside).
  double sdf(const Vec3d& p, double t) const {
    const Vec3d d = p - center_at(t);
    if (kind == PrimitiveKind::kSphere) return norm(d) - radius;
    const Vec3d q{std::abs(d.x) - half.x, std::abs(d.y) - half.y, std::abs(d.z) - half.z};
    const Vec3d qp{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
    return norm(qp) + std::min(std::max(q.x, std::max(q.y, q.z)), 0.0);
  }

  double density_at(const Vec3d& p, double t) const {
    const double u = std::clamp(0.5 - sdf(p, t) / edge, 0.0, 1.0);
    return density * u * u * (3.0 - 2.0 * u);
  }

  /// Half extent of the support along each axis.
  Vec3d reach() const {
    const double e = 0.5 * edge;
    if (kind == PrimitiveKind::kSphere) return {radius + e, radius + e, radius + e};
    return {half.x + e, half.y + e, half.z + e};
  }
};

/// Scene, camera rig and image settings of a synthetic dataset.
struct SceneSpec {
  int frames = 8;
  Aabb box{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
  std::array<double, 3> background{0.0, 0.0, 0.0};
  int width = 64;
  int height = 64;
  int cameras = 8;
  int test_cameras = 2;
  double camera_radius = 3.2;
  double fov_deg = 50.0;
  double elevation_deg = 20.0;
  double gt_steps_per_diagonal = 1024.0;
  std::vector<Primitive> primitives;

  void validate() const {
    const auto cfg = ErrorCategory::kConfig;
    check(frames >= 1, cfg, "scene needs at least one frame");
    check(width >= 1 && height >= 1, cfg, "bad resolution");
    check(cameras >= 1 && test_cameras >= 0, cfg, "bad camera counts");
    check(fov_deg > 0.0 && fov_deg < 180.0, cfg, "fov out of range");
    check(gt_steps_per_diagonal >= 512.0, cfg, "ground truth needs at least 512 steps per diagonal");
    for (int a = 0; a < 3; ++a) check(box.hi[a] > box.lo[a], cfg, "empty scene box");
    check(camera_radius > 0.5 * box.diagonal(), cfg, "cameras must sit outside the scene box");
    for (const auto& p : primitives) {
      check(p.density >= 0.0, cfg, "primitive density must be non-negative");
      check(p.edge > 0.0, cfg, "primitive edge width must be positive");
      for (double c : p.color) check(c >= 0.0 && c <= 1.0, cfg, "primitive color outside [0, 1]");
      const Vec3d r = p.reach();
      for (int t = 0; t < frames; ++t) {
        const Vec3d c = p.center_at(t);
        for (int a = 0; a < 3; ++a)
          check(c[a] - r[a] >= box.lo[a] && c[a] + r[a] <= box.hi[a], cfg,
                "primitive leaves the scene box at frame " + std::to_string(t));
      }
    }
  }
};

/// Analytic density and density-weighted color at frame t.
inline double scene_density(const SceneSpec& s, const Vec3d& p, double t, std::array<double, 3>* color = nullptr) {
  double sigma = 0.0;
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (const auto& pr : s.primitives) {
    const double d = pr.density_at(p, t);
    if (d <= 0.0) continue;
    sigma += d;
    for (int k = 0; k < 3; ++k) c[k] += d * pr.color[k];
  }
  if (color) {
    for (int k = 0; k < 3; ++k) (*color)[k] = sigma > 0.0 ? c[k] / sigma : 0.0;
  }
  return sigma;
}

/// Ring rig: training cameras evenly spaced in azimuth at alternating
/// elevations, test cameras offset by half a spacing.
inline std::vector<Camera> ring_cameras(const SceneSpec& s, int count, double azimuth_offset,
                                        double elevation_deg, bool alternate) {
  std::vector<Camera> cams;
  const Vec3d target = (s.box.lo + s.box.hi) * 0.5;
  const double focal = 0.5 * s.width / std::tan(0.5 * s.fov_deg * std::numbers::pi / 180.0);
  for (int i = 0; i < count; ++i) {
    const double az = 2.0 * std::numbers::pi * (i + azimuth_offset) / count;
    double el = elevation_deg;
    if (alternate && (i % 2 == 1)) el = -0.5 * elevation_deg;
    const double e = el * std::numbers::pi / 180.0;
    const Vec3d eye = target + Vec3d{std::cos(e) * std::cos(az), std::sin(e), std::cos(e) * std::sin(az)} * s.camera_radius;
    cams.push_back(look_at(eye, target, Vec3d{0.0, 1.0, 0.0}, s.width, s.height, focal));
  }
  return cams;
}

/// Training cameras first, then test cameras.
inline std::vector<Camera> scene_cameras(const SceneSpec& s) {
  auto cams = ring_cameras(s, s.cameras, 0.0, s.elevation_deg, true);
  if (s.test_cameras > 0) {
    auto test = ring_cameras(s, s.test_cameras, 0.5, 0.5 * s.elevation_deg, false);
    cams.insert(cams.end(), test.begin(), test.end());
  }
  return cams;
}

/// Dense ray march of the analytic field (midpoint rule).
inline Image render_ground_truth(const SceneSpec& s, const Camera& cam, int frame) {
  Image im(cam.width, cam.height);
  const double step = s.box.diagonal() / s.gt_steps_per_diagonal;
  const double t = static_cast<double>(frame);
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) {
      const auto ray = pixel_ray(cam, {r, c});
      std::array<double, 3> acc{0.0, 0.0, 0.0};
      double trans = 1.0;
      double t0, t1;
      if (!s.primitives.empty() && intersect_box(ray, s.box, t0, t1)) {
        for (double d = t0 + 0.5 * step; d < t1 && trans > 1e-7; d += step) {
          std::array<double, 3> col;
          const double sigma = scene_density(s, ray.origin + ray.dir * d, t, &col);
          if (sigma <= 0.0) continue;
          const double alpha = 1.0 - std::exp(-sigma * step);
          for (int k = 0; k < 3; ++k) acc[k] += trans * alpha * col[k];
          trans *= 1.0 - alpha;
        }
      }
      for (int k = 0; k < 3; ++k) im.at(r, c, k) = static_cast<float>(acc[k] + trans * s.background[k]);
    }
  return im;
}

namespace detail {

inline std::vector<double> parse_reals(const std::string& key, const std::string& text, char sep) {
  std::vector<double> out;
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), sep, ' ');
  std::istringstream in(norm);
  std::string tok;
  while (in >> tok) out.push_back(parse_number<double>(key, tok));
  return out;
}

inline Vec3d parse_vec3(const std::string& key, const std::string& text, char sep) {
  const auto v = parse_reals(key, text, sep);
  check(v.size() == 3, ErrorCategory::kConfig, key + " needs 3 values");
  return {v[0], v[1], v[2]};
}

inline Primitive parse_primitive(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  Primitive p;
  if (kind == "sphere") p.kind = PrimitiveKind::kSphere;
  else if (kind == "box") p.kind = PrimitiveKind::kBox;
  else throw Error(ErrorCategory::kConfig, "unknown primitive '" + kind + "'");
  std::string field;
  while (in >> field) {
    const auto eq = field.find('=');
    check(eq != std::string::npos, ErrorCategory::kConfig, "primitive field needs key=value: " + field);
    const std::string k = field.substr(0, eq), v = field.substr(eq + 1);
    if (k == "center") p.center = parse_vec3(k, v, ',');
    else if (k == "radius") p.radius = parse_number<double>(k, v);
    else if (k == "half") p.half = parse_vec3(k, v, ',');
    else if (k == "color") {
      const auto c = parse_vec3(k, v, ',');
      p.color = {c.x, c.y, c.z};
    } else if (k == "density") p.density = parse_number<double>(k, v);
    else if (k == "edge") p.edge = parse_number<double>(k, v);
    else if (k == "velocity") p.velocity = parse_vec3(k, v, ',');
    else if (k == "amplitude") p.amplitude = parse_vec3(k, v, ',');
    else if (k == "frequency") p.frequency = parse_number<double>(k, v);
    else throw Error(ErrorCategory::kConfig, "unknown primitive field '" + k + "'");
  }
  return p;
}

}  // namespace detail

/// Scene text format: `key = value` lines, `#` comments; `primitive = ...`
/// lines add sphere/box primitives (see samples/).
inline SceneSpec parse_scene(std::istream& in) {
  using detail::parse_number;
  SceneSpec s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    check(eq != std::string::npos, ErrorCategory::kConfig,
          "scene line " + std::to_string(lineno) + ": expected key = value");
    const std::string k = detail::trim(line.substr(0, eq));
    const std::string v = detail::trim(line.substr(eq + 1));
    if (k == "frames") s.frames = parse_number<int>(k, v);
    else if (k == "box") {
      const auto b = detail::parse_reals(k, v, ' ');
      check(b.size() == 6, ErrorCategory::kConfig, "box needs 6 values");
      s.box = {{b[0], b[1], b[2]}, {b[3], b[4], b[5]}};
    } else if (k == "background") {
      const auto c = detail::parse_vec3(k, v, ' ');
      s.background = {c.x, c.y, c.z};
    } else if (k == "resolution") {
      const auto r = detail::parse_reals(k, v, ' ');
      check(r.size() == 2, ErrorCategory::kConfig, "resolution needs width and height");
      s.width = static_cast<int>(r[0]);
      s.height = static_cast<int>(r[1]);
    } else if (k == "cameras") s.cameras = parse_number<int>(k, v);
    else if (k == "test_cameras") s.test_cameras = parse_number<int>(k, v);
    else if (k == "camera_radius") s.camera_radius = parse_number<double>(k, v);
    else if (k == "fov_deg") s.fov_deg = parse_number<double>(k, v);
    else if (k == "elevation_deg") s.elevation_deg = parse_number<double>(k, v);
    else if (k == "gt_steps_per_diagonal") s.gt_steps_per_diagonal = parse_number<double>(k, v);
    else if (k == "primitive") s.primitives.push_back(detail::parse_primitive(v));
    else throw Error(ErrorCategory::kConfig, "unknown scene key '" + k + "'");
  }
  s.validate();
  return s;
}

inline SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream f(path);
  check(static_cast<bool>(f), ErrorCategory::kUsage, "cannot open scene spec " + path.string());
  return parse_scene(f);
}

}  // namespace voxcodec
