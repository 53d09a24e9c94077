// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lzma.h>

#include <cstdint>
#include <span>
#include <vector>

#include "voxcodec/field/occupancy.hpp"

namespace voxcodec {

namespace detail {

inline std::vector<std::uint8_t> lzma_run(lzma_stream& s, std::span<const std::uint8_t> in) {
  std::vector<std::uint8_t> out;
  std::uint8_t buf[4096];
  s.next_in = in.data();
  s.avail_in = in.size();
  lzma_ret ret = LZMA_OK;
  while (ret == LZMA_OK) {
    s.next_out = buf;
    s.avail_out = sizeof(buf);
    ret = lzma_code(&s, LZMA_FINISH);
    out.insert(out.end(), buf, buf + (sizeof(buf) - s.avail_out));
  }
  lzma_end(&s);
  check(ret == LZMA_STREAM_END, ErrorCategory::kFormat, "lzma stream error");
  return out;
}

}  // namespace detail

/// LZMA "alone" (.lzma) container around raw bytes.
inline std::vector<std::uint8_t> lzma_compress(std::span<const std::uint8_t> in) {
  lzma_options_lzma opt;
  check(!lzma_lzma_preset(&opt, 9), ErrorCategory::kConfig, "lzma preset unavailable");
  lzma_stream s = LZMA_STREAM_INIT;
  check(lzma_alone_encoder(&s, &opt) == LZMA_OK, ErrorCategory::kConfig, "lzma encoder init failed");
  return detail::lzma_run(s, in);
}

inline std::vector<std::uint8_t> lzma_decompress(std::span<const std::uint8_t> in) {
  lzma_stream s = LZMA_STREAM_INIT;
  check(lzma_alone_decoder(&s, UINT64_MAX) == LZMA_OK, ErrorCategory::kConfig,
        "lzma decoder init failed");
  auto out = detail::lzma_run(s, in);
  return out;
}

/// Packs 8 cells per byte (raster order, LSB first) and LZMA-compresses.
inline std::vector<std::uint8_t> encode_occupancy(const OccupancyGrid& occ) {
  const auto packed = pack_occupancy(occ);
  return lzma_compress(packed);
}

inline OccupancyGrid decode_occupancy(std::span<const std::uint8_t> bytes, Dims dims, Aabb box) {
  const auto packed = lzma_decompress(bytes);
  return unpack_occupancy(packed, dims, box);
}

}  // namespace voxcodec
