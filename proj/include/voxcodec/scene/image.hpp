// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "voxcodec/common.hpp"

namespace voxcodec {

/// Row-major RGB image with values in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;

  Image() = default;
  Image(int w, int h, float fill = 0.0f) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  float& at(int row, int col, int c) { return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + c]; }
  float at(int row, int col, int c) const { return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + c]; }
  bool same_size(const Image& o) const { return width == o.width && height == o.height; }
  friend bool operator==(const Image&, const Image&) = default;
};

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

/// Rounds every value to the 8-bit grid a saved image would hold.
inline Image quantize8(const Image& im) {
  Image out = im;
  for (auto& v : out.rgb) v = static_cast<float>(to_byte(v)) / 255.0f;
  return out;
}

/// Binary PPM (P6, maxval 255).
inline void save_image(const std::filesystem::path& path, const Image& im) {
  std::ofstream f(path, std::ios::binary);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot write " + path.string());
  f << "P6\n" << im.width << ' ' << im.height << "\n255\n";
  std::vector<std::uint8_t> bytes(im.rgb.size());
  std::transform(im.rgb.begin(), im.rgb.end(), bytes.begin(), to_byte);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  check(static_cast<bool>(f), ErrorCategory::kIo, "write failed: " + path.string());
}

namespace detail {
inline int ppm_int(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  check(c != EOF && std::isdigit(c), ErrorCategory::kFormat, "malformed PPM header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    check(v < (1L << 24), ErrorCategory::kFormat, "PPM dimension too large");
    c = in.get();
  }
  // exactly one whitespace byte follows the last header field
  check(c != EOF && std::isspace(c), ErrorCategory::kFormat, "malformed PPM header");
  return static_cast<int>(v);
}
}  // namespace detail

inline Image load_image(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot open " + path.string());
  char magic[2] = {};
  f.read(magic, 2);
  check(f && magic[0] == 'P' && magic[1] == '6', ErrorCategory::kFormat, "not a P6 image: " + path.string());
  const int w = detail::ppm_int(f);
  const int h = detail::ppm_int(f);
  const int maxval = detail::ppm_int(f);
  check(w > 0 && h > 0 && maxval == 255, ErrorCategory::kFormat, "unsupported PPM: " + path.string());
  Image im(w, h);
  std::vector<std::uint8_t> bytes(im.rgb.size());
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  check(f.gcount() == static_cast<std::streamsize>(bytes.size()), ErrorCategory::kFormat,
        "truncated PPM: " + path.string());
  for (std::size_t i = 0; i < bytes.size(); ++i) im.rgb[i] = static_cast<float>(bytes[i]) / 255.0f;
  return im;
}

}  // namespace voxcodec
