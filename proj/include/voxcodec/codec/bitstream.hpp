// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "voxcodec/codec/byte_io.hpp"
#include "voxcodec/codec/grid_coder.hpp"
#include "voxcodec/codec/occupancy_coder.hpp"
#include "voxcodec/codec/param_coder.hpp"
#include "voxcodec/entropy/entropy_model.hpp"
#include "voxcodec/field/field_frame.hpp"
#include "voxcodec/field/occupancy.hpp"
#include "voxcodec/render/render_mlp.hpp"

namespace voxcodec {

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint8_t kFlagInheritedMlp = 1;

/// Stream-wide parameters written once before the frames.
struct SequenceHeader {
  std::uint32_t frame_count = 0;
  std::uint32_t group_size = 1;
  std::uint16_t mlp_hidden = 64;
  std::uint16_t dir_freqs = 4;
  std::uint16_t channels = 4;
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
  double step = 0.0;
  friend bool operator==(const SequenceHeader&, const SequenceHeader&) = default;
};

struct GridInfo {
  Dims dims;
  std::uint16_t channels = 0;
  float qstep = 0.0f;
};

struct FrameHeader {
  FrameType type = FrameType::kI;
  std::uint8_t flags = 0;
  std::uint32_t frame_index = 0;
  std::uint32_t group_id = 0;
  Aabb box;
  Dims occ_dims;
  std::vector<GridInfo> grids;
  // section lengths
  std::uint32_t occ_bytes = 0;
  std::uint32_t mlp_bytes = 0;
  std::uint32_t entropy_bytes = 0;
  std::vector<std::uint32_t> grid_bytes;
  std::uint32_t header_bytes = 0;

  bool inherits_mlp() const { return (flags & kFlagInheritedMlp) != 0; }
  std::size_t payload_bytes() const {
    std::size_t n = occ_bytes + mlp_bytes + entropy_bytes;
    for (auto g : grid_bytes) n += g;
    return n;
  }
  std::size_t frame_bytes() const { return header_bytes + payload_bytes(); }
};

/// Everything the encoder transmits for one frame.
struct FrameArtifacts {
  FrameType type = FrameType::kI;
  std::uint32_t frame_index = 0;
  std::uint32_t group_id = 0;
  Aabb box;
  OccupancyGrid occ;
  const RenderMLP<float>* mlp = nullptr;  // I-frames only
  ImplicitEntropyModel<float> entropy;
  std::vector<IntTensor> ints;           // coefficient first, then bases
  std::vector<float> qsteps;
};

/// Decoder-side state carried between frames.
struct DecodeBuffer {
  bool has_frame = false;
  std::uint32_t frame_index = 0;
  std::uint32_t group_id = 0;
  FieldFrame<float> recon;           // absolute dequantised grids
  std::vector<IntTensor> ints;       // coded integers (temporal context)
  std::optional<RenderMLP<float>> mlp;
};

struct DecodedFrame {
  FrameHeader header;
  FieldFrame<float> recon;
  OccupancyGrid occ;
  RenderMLP<float> mlp;
  ImplicitEntropyModel<float> entropy;
  std::vector<IntTensor> ints;
};

/// Grid values from integers: q * k for I-frames, prev + q * k for P-frames.
/// Shared by the trainer and the decoder so both hold the same floats.
inline void dequantize_grid(const IntTensor& ints, float q, const FeatureGrid<float>* prev,
                            FeatureGrid<float>& out) {
  check(ints.size() == out.size(), ErrorCategory::kConfig, "integer tensor / grid size mismatch");
  for (std::size_t i = 0; i < ints.size(); ++i) {
    const float v = static_cast<float>(ints.values[i]) * q;
    out.values[i] = prev ? prev->values[i] + v : v;
  }
}

inline FieldFrame<float> reconstruct_frame(const FieldLayout& layout, FrameType type, std::uint32_t index,
                                           const std::vector<IntTensor>& ints,
                                           const std::vector<float>& qsteps,
                                           const FieldFrame<float>* prev) {
  FieldFrame<float> f(layout);
  check(ints.size() == f.grid_count() && qsteps.size() == f.grid_count(), ErrorCategory::kConfig,
        "grid count mismatch");
  check(type == FrameType::kI || prev != nullptr, ErrorCategory::kConsistency,
        "P-frame needs the previous reconstruction");
  for (std::size_t g = 0; g < f.grid_count(); ++g) {
    dequantize_grid(ints[g], qsteps[g], prev ? &prev->grid(g) : nullptr, f.grid(g));
  }
  f.qsteps = qsteps;
  f.frame_type = type;
  f.frame_index = index;
  return f;
}

inline void write_sequence_header(ByteWriter& w, const SequenceHeader& h) {
  w.tag("VXCS");
  w.u16(kFormatVersion);
  w.u32(h.frame_count);
  w.u32(h.group_size);
  w.u16(h.mlp_hidden);
  w.u16(h.dir_freqs);
  w.u16(h.channels);
  for (float b : h.background) w.f32(b);
  w.f64(h.step);
}

inline SequenceHeader read_sequence_header(ByteReader& r) {
  check(r.tag("VXCS"), ErrorCategory::kFormat, "bad sequence magic");
  check(r.u16() == kFormatVersion, ErrorCategory::kFormat, "unsupported stream version");
  SequenceHeader h;
  h.frame_count = r.u32();
  h.group_size = r.u32();
  h.mlp_hidden = r.u16();
  h.dir_freqs = r.u16();
  h.channels = r.u16();
  for (float& b : h.background) b = r.f32();
  h.step = r.f64();
  check(h.group_size >= 1 && h.channels >= 1 && h.mlp_hidden >= 1 && h.step > 0.0,
        ErrorCategory::kFormat, "invalid sequence header");
  return h;
}

namespace detail {

inline void write_dims(ByteWriter& w, Dims d) {
  w.u16(static_cast<std::uint16_t>(d.x));
  w.u16(static_cast<std::uint16_t>(d.y));
  w.u16(static_cast<std::uint16_t>(d.z));
}

inline Dims read_dims(ByteReader& r) {
  Dims d;
  d.x = r.u16();
  d.y = r.u16();
  d.z = r.u16();
  check(d.x >= 1 && d.y >= 1 && d.z >= 1, ErrorCategory::kFormat, "zero grid dimension");
  return d;
}

inline std::uint32_t section_size(std::size_t n) {
  check(n <= UINT32_MAX, ErrorCategory::kFormat, "section too large");
  return static_cast<std::uint32_t>(n);
}

}  // namespace detail

/// Serialises one frame: header, occupancy, render MLP (I-frames), entropy
/// model, grid payloads.
inline std::vector<std::uint8_t> encode_frame(const FrameArtifacts& a, const DecodeBuffer& buffer,
                                              FrameHeader* header_out = nullptr) {
  const bool is_i = a.type == FrameType::kI;
  check(is_i == (a.mlp != nullptr), ErrorCategory::kConfig, "render MLP is sent with I-frames only");
  check(a.ints.size() == a.qsteps.size() && !a.ints.empty(), ErrorCategory::kConfig,
        "one quantisation step per grid");
  check(is_i || (buffer.has_frame && buffer.ints.size() == a.ints.size()), ErrorCategory::kConsistency,
        "P-frame needs the previous frame in the buffer");

  const auto occ_bytes = encode_occupancy(a.occ);
  std::vector<std::uint8_t> mlp_bytes;
  if (is_i) mlp_bytes = encode_params(std::span<const float>(a.mlp->params()), a.mlp->tensors());
  const auto ent_bytes = encode_params(std::span<const float>(a.entropy.params()), a.entropy.tensors());

  // The decoder sees the transmitted (dequantised) entropy model.
  ImplicitEntropyModel<float> model;
  decode_params(std::span<const std::uint8_t>(ent_bytes), model.tensors(), std::span<float>(model.params()));

  std::vector<std::vector<std::uint8_t>> grids;
  for (std::size_t g = 0; g < a.ints.size(); ++g)
    grids.push_back(encode_grid(a.ints[g], model, is_i ? nullptr : &buffer.ints[g]));

  FrameHeader h;
  h.type = a.type;
  h.flags = is_i ? 0 : kFlagInheritedMlp;
  h.frame_index = a.frame_index;
  h.group_id = a.group_id;
  h.box = a.box;
  h.occ_dims = a.occ.dims;
  h.occ_bytes = detail::section_size(occ_bytes.size());
  h.mlp_bytes = detail::section_size(mlp_bytes.size());
  h.entropy_bytes = detail::section_size(ent_bytes.size());
  for (std::size_t g = 0; g < a.ints.size(); ++g) {
    h.grids.push_back({a.ints[g].dims, static_cast<std::uint16_t>(a.ints[g].channels), a.qsteps[g]});
    h.grid_bytes.push_back(detail::section_size(grids[g].size()));
  }

  ByteWriter w;
  w.tag("VXCF");
  w.u16(kFormatVersion);
  const std::size_t len_at = w.size();
  w.u32(0);
  w.u8(static_cast<std::uint8_t>(h.type));
  w.u8(h.flags);
  w.u32(h.frame_index);
  w.u32(h.group_id);
  for (int k = 0; k < 3; ++k) w.f64(h.box.lo[k]);
  for (int k = 0; k < 3; ++k) w.f64(h.box.hi[k]);
  detail::write_dims(w, h.occ_dims);
  w.u8(static_cast<std::uint8_t>(h.grids.size()));
  w.u8(0);
  for (const auto& gi : h.grids) {
    detail::write_dims(w, gi.dims);
    w.u16(gi.channels);
    w.f32(gi.qstep);
  }
  w.u32(h.occ_bytes);
  w.u32(h.mlp_bytes);
  w.u32(h.entropy_bytes);
  for (auto n : h.grid_bytes) w.u32(n);
  h.header_bytes = detail::section_size(w.size());
  w.patch_u32(len_at, h.header_bytes);

  w.bytes(occ_bytes);
  w.bytes(mlp_bytes);
  w.bytes(ent_bytes);
  for (const auto& g : grids) w.bytes(g);
  if (header_out) *header_out = h;
  return w.take();
}

inline FrameHeader read_frame_header(ByteReader& r) {
  const std::size_t start = r.position();
  check(r.tag("VXCF"), ErrorCategory::kFormat, "bad frame magic");
  check(r.u16() == kFormatVersion, ErrorCategory::kFormat, "unsupported frame version");
  FrameHeader h;
  h.header_bytes = r.u32();
  const std::uint8_t type = r.u8();
  check(type <= 1, ErrorCategory::kFormat, "unknown frame type");
  h.type = static_cast<FrameType>(type);
  h.flags = r.u8();
  check((h.flags & ~kFlagInheritedMlp) == 0, ErrorCategory::kFormat, "unknown frame flags");
  check(h.inherits_mlp() == (h.type == FrameType::kP), ErrorCategory::kFormat,
        "inherited-MLP flag must be set exactly on P-frames");
  h.frame_index = r.u32();
  h.group_id = r.u32();
  for (int k = 0; k < 3; ++k) h.box.lo[k] = r.f64();
  for (int k = 0; k < 3; ++k) h.box.hi[k] = r.f64();
  h.occ_dims = detail::read_dims(r);
  const int ng = r.u8();
  r.u8();
  check(ng >= 2, ErrorCategory::kFormat, "frame needs a coefficient and a basis grid");
  for (int g = 0; g < ng; ++g) {
    GridInfo gi;
    gi.dims = detail::read_dims(r);
    gi.channels = r.u16();
    gi.qstep = r.f32();
    check(gi.channels >= 1 && std::isfinite(gi.qstep) && gi.qstep > 0.0f, ErrorCategory::kFormat,
          "invalid grid descriptor");
    h.grids.push_back(gi);
  }
  h.occ_bytes = r.u32();
  h.mlp_bytes = r.u32();
  h.entropy_bytes = r.u32();
  for (int g = 0; g < ng; ++g) h.grid_bytes.push_back(r.u32());
  check(r.position() - start == h.header_bytes, ErrorCategory::kFormat, "frame header length mismatch");
  check(h.inherits_mlp() == (h.mlp_bytes == 0), ErrorCategory::kFormat,
        "render MLP section present on a P-frame or missing on an I-frame");
  return h;
}

/// Decodes one frame and advances the buffer. On error the buffer is left
/// untouched.
inline DecodedFrame decode_frame(ByteReader& r, const SequenceHeader& seq, DecodeBuffer& buffer) {
  DecodedFrame d;
  d.header = read_frame_header(r);
  const FrameHeader& h = d.header;
  check(r.remaining() >= h.payload_bytes(), ErrorCategory::kFormat, "frame payload truncated");
  const bool is_i = h.type == FrameType::kI;
  check(is_i || buffer.has_frame, ErrorCategory::kConsistency,
        "P-frame without a previous frame in the decode buffer");

  FieldLayout layout;
  layout.box = h.box;
  layout.channels = h.grids[0].channels;
  layout.coeff_dims = h.grids[0].dims;
  layout.basis_dims.clear();
  for (std::size_t g = 1; g < h.grids.size(); ++g) {
    check(h.grids[g].channels == layout.channels, ErrorCategory::kFormat, "grid channel mismatch");
    layout.basis_dims.push_back(h.grids[g].dims);
  }
  check(layout.channels == seq.channels, ErrorCategory::kFormat, "channel count differs from sequence");
  if (!is_i) {
    check(buffer.recon.layout() == layout, ErrorCategory::kFormat, "P-frame layout differs from buffer");
    check(buffer.group_id == h.group_id, ErrorCategory::kFormat, "P-frame crosses a group boundary");
  }

  d.occ = decode_occupancy(r.bytes(h.occ_bytes), h.occ_dims, h.box);
  if (is_i) {
    d.mlp = RenderMLP<float>(layout.channels, seq.mlp_hidden, seq.dir_freqs);
    decode_params(r.bytes(h.mlp_bytes), d.mlp.tensors(), std::span<float>(d.mlp.params()));
  } else {
    check(buffer.mlp.has_value(), ErrorCategory::kConsistency, "no group render MLP in buffer");
    d.mlp = *buffer.mlp;
  }
  decode_params(r.bytes(h.entropy_bytes), d.entropy.tensors(), std::span<float>(d.entropy.params()));

  std::vector<float> qsteps;
  for (std::size_t g = 0; g < h.grids.size(); ++g) {
    const IntTensor* prev = is_i ? nullptr : &buffer.ints[g];
    d.ints.push_back(decode_grid(r.bytes(h.grid_bytes[g]), h.grids[g].dims, h.grids[g].channels, d.entropy, prev));
    qsteps.push_back(h.grids[g].qstep);
  }
  d.recon = reconstruct_frame(layout, h.type, h.frame_index, d.ints, qsteps, is_i ? nullptr : &buffer.recon);

  buffer.has_frame = true;
  buffer.frame_index = h.frame_index;
  buffer.group_id = h.group_id;
  buffer.recon = d.recon;
  buffer.ints = d.ints;
  buffer.mlp = d.mlp;
  return d;
}

inline DecodedFrame decode_frame(std::span<const std::uint8_t> bytes, const SequenceHeader& seq,
                                 DecodeBuffer& buffer) {
  ByteReader r(bytes);
  auto d = decode_frame(r, seq, buffer);
  return d;
}

}  // namespace voxcodec
