// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <vector>

#include "voxcodec/codec/bitstream.hpp"
#include "voxcodec/codec/byte_io.hpp"
#include "voxcodec/field/field_frame.hpp"
#include "voxcodec/field/occupancy.hpp"
#include "voxcodec/render/render_mlp.hpp"

namespace voxcodec {

/// Everything a renderer needs for one decoded frame. Written by `decode`
/// as `frame_{t}.vxf` (magic "VXFD"; see docs/bitstream.md).
struct DecodedField {
  SequenceHeader seq;
  std::uint32_t frame_index = 0;
  FrameType type = FrameType::kI;
  FieldFrame<float> field;
  OccupancyGrid occ;
  RenderMLP<float> mlp;
};

inline constexpr std::uint16_t kFieldFileVersion = 1;

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  check(static_cast<bool>(f), ErrorCategory::kIo, "write failed for " + path.string());
}

inline std::vector<std::uint8_t> serialize_field(const DecodedField& d) {
  ByteWriter w;
  w.tag("VXFD");
  w.u16(kFieldFileVersion);
  write_sequence_header(w, d.seq);
  w.u32(d.frame_index);
  w.u8(static_cast<std::uint8_t>(d.type));
  const auto& box = d.field.box();
  for (int a = 0; a < 3; ++a) w.f64(box.lo[a]);
  for (int a = 0; a < 3; ++a) w.f64(box.hi[a]);
  w.u16(static_cast<std::uint16_t>(d.field.grid_count()));
  for (std::size_t g = 0; g < d.field.grid_count(); ++g) {
    detail::write_dims(w, d.field.grid(g).dims);
    w.f32(d.field.qsteps[g]);
    for (float v : d.field.grid(g).values) w.f32(v);
  }
  detail::write_dims(w, d.occ.dims);
  w.bytes(pack_occupancy(d.occ));
  w.u32(static_cast<std::uint32_t>(d.mlp.params().size()));
  for (float v : d.mlp.params()) w.f32(v);
  return w.take();
}

inline DecodedField parse_field(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  check(r.tag("VXFD"), ErrorCategory::kFormat, "not a decoded field file");
  check(r.u16() == kFieldFileVersion, ErrorCategory::kFormat, "unsupported field file version");
  DecodedField d;
  d.seq = read_sequence_header(r);
  d.frame_index = r.u32();
  const std::uint8_t type = r.u8();
  check(type <= 1, ErrorCategory::kFormat, "bad frame type");
  d.type = static_cast<FrameType>(type);
  Aabb box;
  for (int a = 0; a < 3; ++a) box.lo[a] = r.f64();
  for (int a = 0; a < 3; ++a) box.hi[a] = r.f64();
  const std::uint16_t ng = r.u16();
  check(ng >= 2, ErrorCategory::kFormat, "field needs a coefficient and a basis grid");
  FieldLayout layout;
  layout.channels = d.seq.channels;
  layout.box = box;
  layout.basis_dims.clear();
  std::vector<float> qsteps;
  std::vector<std::vector<float>> values;
  for (std::uint16_t g = 0; g < ng; ++g) {
    const Dims dims = detail::read_dims(r);
    if (g == 0) layout.coeff_dims = dims;
    else layout.basis_dims.push_back(dims);
    qsteps.push_back(r.f32());
    std::vector<float> v(dims.count() * static_cast<std::size_t>(layout.channels));
    check(r.remaining() >= v.size() * 4, ErrorCategory::kFormat, "field file truncated");
    for (float& x : v) x = r.f32();
    values.push_back(std::move(v));
  }
  d.field = FieldFrame<float>(layout);
  for (std::size_t g = 0; g < ng; ++g) {
    d.field.grid(g).values = std::move(values[g]);
    d.field.qsteps[g] = qsteps[g];
  }
  d.field.frame_type = d.type;
  d.field.frame_index = d.frame_index;
  d.field.validate();
  const Dims od = detail::read_dims(r);
  d.occ = unpack_occupancy(r.bytes((od.count() + 7) / 8), od, box);
  d.mlp = RenderMLP<float>(d.seq.channels, d.seq.mlp_hidden, d.seq.dir_freqs);
  const std::uint32_t np = r.u32();
  check(np == d.mlp.params().size(), ErrorCategory::kFormat, "MLP size differs from the sequence header");
  for (float& x : d.mlp.params()) x = r.f32();
  check(r.remaining() == 0, ErrorCategory::kFormat, "trailing bytes in field file");
  return d;
}

}  // namespace voxcodec
