// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "voxcodec/common.hpp"
#include "voxcodec/render/camera.hpp"
#include "voxcodec/scene/image.hpp"
#include "voxcodec/scene/synthetic.hpp"

namespace voxcodec {

/// Cameras plus per-frame, per-camera images. Camera indices [0, train)
/// are training views, the rest test views.
struct MultiViewDataset {
  int width = 0;
  int height = 0;
  int frames = 0;
  int train_cameras = 0;
  Aabb box;
  std::array<double, 3> background{0.0, 0.0, 0.0};
  std::vector<Camera> cameras;
  std::vector<std::vector<Image>> images;  // [frame][camera]

  int test_cameras() const { return static_cast<int>(cameras.size()) - train_cameras; }
  bool is_test(int cam) const { return cam >= train_cameras; }
};

inline MultiViewDataset generate_dataset(const SceneSpec& spec) {
  spec.validate();
  MultiViewDataset d;
  d.width = spec.width;
  d.height = spec.height;
  d.frames = spec.frames;
  d.train_cameras = spec.cameras;
  d.box = spec.box;
  d.background = spec.background;
  d.cameras = scene_cameras(spec);
  d.images.resize(spec.frames);
  for (int t = 0; t < spec.frames; ++t)
    for (const auto& cam : d.cameras) d.images[t].push_back(render_ground_truth(spec, cam, t));
  return d;
}

inline std::filesystem::path frame_image_path(const std::filesystem::path& dir, int frame, int cam) {
  return dir / ("frame_" + std::to_string(frame)) / ("cam_" + std::to_string(cam) + ".ppm");
}

namespace detail {

inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream f(path);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(f, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    check(eq != std::string::npos, ErrorCategory::kFormat, "malformed line in " + path.string());
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& k) {
  const auto it = kv.find(k);
  check(it != kv.end(), ErrorCategory::kFormat, "manifest is missing '" + k + "'");
  return it->second;
}

}  // namespace detail

/// Writes manifest.txt, cameras.txt and frame_{t}/cam_{c}.ppm.
inline void save_dataset(const MultiViewDataset& d, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  using detail::fmt_real;
  fs::create_directories(dir);
  {
    std::ofstream m(dir / "manifest.txt");
    check(static_cast<bool>(m), ErrorCategory::kIo, "cannot write manifest in " + dir.string());
    m << "format = voxcodec-dataset 1\n"
      << "width = " << d.width << "\nheight = " << d.height << "\nframes = " << d.frames
      << "\ncameras = " << d.cameras.size() << "\ntrain_cameras = " << d.train_cameras
      << "\nbackground = " << fmt_real(d.background[0]) << ' ' << fmt_real(d.background[1]) << ' '
      << fmt_real(d.background[2]) << "\nbox = ";
    for (int a = 0; a < 3; ++a) m << fmt_real(d.box.lo[a]) << ' ';
    for (int a = 0; a < 3; ++a) m << fmt_real(d.box.hi[a]) << (a < 2 ? " " : "\n");
  }
  {
    std::ofstream c(dir / "cameras.txt");
    check(static_cast<bool>(c), ErrorCategory::kIo, "cannot write cameras in " + dir.string());
    c << "# index width height focal cx cy r00 r01 r02 r10 r11 r12 r20 r21 r22 px py pz\n";
    for (std::size_t i = 0; i < d.cameras.size(); ++i) {
      const auto& cam = d.cameras[i];
      c << i << ' ' << cam.width << ' ' << cam.height << ' ' << fmt_real(cam.focal) << ' ' << fmt_real(cam.cx)
        << ' ' << fmt_real(cam.cy);
      for (double r : cam.rotation) c << ' ' << fmt_real(r);
      c << ' ' << fmt_real(cam.position.x) << ' ' << fmt_real(cam.position.y) << ' ' << fmt_real(cam.position.z)
        << '\n';
    }
  }
  for (int t = 0; t < d.frames; ++t) {
    fs::create_directories(dir / ("frame_" + std::to_string(t)));
    for (std::size_t c = 0; c < d.cameras.size(); ++c)
      save_image(frame_image_path(dir, t, static_cast<int>(c)), d.images[t][c]);
  }
}

inline std::vector<Camera> load_cameras(const std::filesystem::path& path) {
  std::ifstream f(path);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot open " + path.string());
  std::vector<Camera> cams;
  std::string line;
  while (std::getline(f, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (detail::trim(line).empty()) continue;
    std::istringstream in(line);
    std::size_t idx;
    Camera c;
    in >> idx >> c.width >> c.height >> c.focal >> c.cx >> c.cy;
    for (double& r : c.rotation) in >> r;
    in >> c.position.x >> c.position.y >> c.position.z;
    check(static_cast<bool>(in) && idx == cams.size(), ErrorCategory::kFormat,
          "malformed camera row in " + path.string());
    c.validate();
    cams.push_back(c);
  }
  return cams;
}

/// Reads a dataset directory. With `load_images` false only metadata and
/// cameras are read.
inline MultiViewDataset load_dataset(const std::filesystem::path& dir, bool load_images = true) {
  namespace fs = std::filesystem;
  check(fs::is_directory(dir), ErrorCategory::kIo, "dataset directory not found: " + dir.string());
  const auto kv = detail::read_key_values(dir / "manifest.txt");
  using detail::parse_number;
  using detail::require_key;
  check(require_key(kv, "format") == "voxcodec-dataset 1", ErrorCategory::kFormat, "unknown dataset format");
  MultiViewDataset d;
  d.width = parse_number<int>("width", require_key(kv, "width"));
  d.height = parse_number<int>("height", require_key(kv, "height"));
  d.frames = parse_number<int>("frames", require_key(kv, "frames"));
  d.train_cameras = parse_number<int>("train_cameras", require_key(kv, "train_cameras"));
  const int ncam = parse_number<int>("cameras", require_key(kv, "cameras"));
  const auto bg = detail::parse_reals("background", require_key(kv, "background"), ' ');
  const auto box = detail::parse_reals("box", require_key(kv, "box"), ' ');
  check(bg.size() == 3 && box.size() == 6, ErrorCategory::kFormat, "bad background/box in manifest");
  d.background = {bg[0], bg[1], bg[2]};
  d.box = {{box[0], box[1], box[2]}, {box[3], box[4], box[5]}};
  d.cameras = load_cameras(dir / "cameras.txt");
  check(static_cast<int>(d.cameras.size()) == ncam && d.train_cameras >= 1 && d.train_cameras <= ncam,
        ErrorCategory::kFormat, "camera count mismatch");
  if (load_images) {
    d.images.resize(d.frames);
    for (int t = 0; t < d.frames; ++t)
      for (int c = 0; c < ncam; ++c) {
        auto im = load_image(frame_image_path(dir, t, c));
        check(im.width == d.width && im.height == d.height, ErrorCategory::kFormat,
              "image size differs from manifest");
        d.images[t].push_back(std::move(im));
      }
  }
  return d;
}

}  // namespace voxcodec
