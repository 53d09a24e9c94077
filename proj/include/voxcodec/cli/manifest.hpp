// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "voxcodec/field/field_frame.hpp"

namespace voxcodec {

/// Per-frame line of a run report. Byte counts are exact section sizes in
/// the written stream.
struct FrameRecord {
  std::uint32_t frame = 0;
  FrameType type = FrameType::kI;
  std::uint32_t group = 0;
  std::size_t bytes = 0;  // header + payload
  std::size_t header_bytes = 0;
  std::size_t occ_bytes = 0;
  std::size_t mlp_bytes = 0;
  std::size_t entropy_bytes = 0;
  std::vector<std::size_t> grid_bytes;
  double model_bits = 0.0;  // estimated grid bits
  std::vector<float> qsteps;
  double train_psnr = 0.0;
  double train_ssim = 0.0;
  double test_psnr = 0.0;
  double test_ssim = 0.0;
  double train_seconds = 0.0;
  double code_seconds = 0.0;
};

struct RunManifest {
  std::string dataset;
  std::string config;  // effective settings, parse_config format
  std::size_t stream_bytes = 0;
  std::size_t sequence_header_bytes = 0;
  std::vector<FrameRecord> frames;

  double mean_bytes(int type = -1) const {
    double s = 0.0;
    int n = 0;
    for (const auto& f : frames)
      if (type < 0 || static_cast<int>(f.type) == type) {
        s += static_cast<double>(f.bytes);
        ++n;
      }
    return n ? s / n : 0.0;
  }
  double mean_of(double FrameRecord::*field) const {
    double s = 0.0;
    for (const auto& f : frames) s += f.*field;
    return frames.empty() ? 0.0 : s / static_cast<double>(frames.size());
  }
};

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline char type_char(FrameType t) { return t == FrameType::kI ? 'I' : 'P'; }

}  // namespace detail

/// Human-readable report. Contains no timing so that reruns compare equal.
inline std::string manifest_text(const RunManifest& m) {
  using detail::fmt;
  std::ostringstream o;
  o << "# voxcodec run manifest 1\n"
    << "dataset = " << m.dataset << "\n"
    << "stream_bytes = " << m.stream_bytes << "\n"
    << "sequence_header_bytes = " << m.sequence_header_bytes << "\n"
    << "frames = " << m.frames.size() << "\n"
    << "mean_frame_bytes = " << fmt("%.1f", m.mean_bytes()) << "\n"
    << "mean_i_frame_bytes = " << fmt("%.1f", m.mean_bytes(0)) << "\n"
    << "mean_p_frame_bytes = " << fmt("%.1f", m.mean_bytes(1)) << "\n"
    << "mean_train_psnr = " << fmt("%.4f", m.mean_of(&FrameRecord::train_psnr)) << "\n"
    << "mean_test_psnr = " << fmt("%.4f", m.mean_of(&FrameRecord::test_psnr)) << "\n"
    << "\n[config]\n"
    << m.config << "\n[frames]\n";
  o << "# frame type group bytes header occ mlp entropy grids... train_psnr train_ssim test_psnr test_ssim qsteps...\n";
  for (const auto& f : m.frames) {
    o << f.frame << ' ' << detail::type_char(f.type) << ' ' << f.group << ' ' << f.bytes << ' ' << f.header_bytes
      << ' ' << f.occ_bytes << ' ' << f.mlp_bytes << ' ' << f.entropy_bytes;
    for (auto g : f.grid_bytes) o << ' ' << g;
    o << ' ' << fmt("%.4f", f.train_psnr) << ' ' << fmt("%.5f", f.train_ssim) << ' ' << fmt("%.4f", f.test_psnr)
      << ' ' << fmt("%.5f", f.test_ssim);
    for (float q : f.qsteps) o << ' ' << fmt("%.6g", q);
    o << '\n';
  }
  return o.str();
}

/// One row per frame; grid columns are grid0_bytes, grid1_bytes, ...
inline std::string manifest_csv(const RunManifest& m) {
  using detail::fmt;
  std::ostringstream o;
  const std::size_t ng = m.frames.empty() ? 0 : m.frames.front().grid_bytes.size();
  o << "frame,type,group,bytes,header_bytes,occ_bytes,mlp_bytes,entropy_bytes";
  for (std::size_t g = 0; g < ng; ++g) o << ",grid" << g << "_bytes";
  o << ",model_bits,train_psnr,train_ssim,test_psnr,test_ssim";
  for (std::size_t g = 0; g < ng; ++g) o << ",q" << g;
  o << '\n';
  for (const auto& f : m.frames) {
    o << f.frame << ',' << detail::type_char(f.type) << ',' << f.group << ',' << f.bytes << ',' << f.header_bytes
      << ',' << f.occ_bytes << ',' << f.mlp_bytes << ',' << f.entropy_bytes;
    for (auto g : f.grid_bytes) o << ',' << g;
    o << ',' << fmt("%.1f", f.model_bits) << ',' << fmt("%.4f", f.train_psnr) << ',' << fmt("%.5f", f.train_ssim)
      << ',' << fmt("%.4f", f.test_psnr) << ',' << fmt("%.5f", f.test_ssim);
    for (float q : f.qsteps) o << ',' << fmt("%.6g", q);
    o << '\n';
  }
  return o.str();
}

inline std::string timing_text(const RunManifest& m) {
  std::ostringstream o;
  o << "# frame train_seconds code_seconds\n";
  double tt = 0.0, tc = 0.0;
  for (const auto& f : m.frames) {
    o << f.frame << ' ' << detail::fmt("%.3f", f.train_seconds) << ' ' << detail::fmt("%.3f", f.code_seconds) << '\n';
    tt += f.train_seconds;
    tc += f.code_seconds;
  }
  o << "total " << detail::fmt("%.3f", tt) << ' ' << detail::fmt("%.3f", tc) << '\n';
  return o.str();
}

}  // namespace voxcodec
