// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "voxcodec/codec/bitstream.hpp"
#include "voxcodec/entropy/entropy_model.hpp"
#include "voxcodec/field/field_frame.hpp"
#include "voxcodec/field/occupancy.hpp"
#include "voxcodec/render/camera.hpp"
#include "voxcodec/render/render_mlp.hpp"
#include "voxcodec/render/volume_render.hpp"
#include "voxcodec/scene/image.hpp"
#include "voxcodec/train/adam.hpp"
#include "voxcodec/train/config.hpp"
#include "voxcodec/train/loss.hpp"
#include "voxcodec/train/quantization.hpp"

namespace voxcodec {

struct TrainView {
  Camera camera;
  Image image;
};

/// Output of one trained and coded frame.
struct FrameResult {
  FrameType type = FrameType::kI;
  std::uint32_t frame_index = 0;
  std::uint32_t group_id = 0;
  FieldFrame<float> recon;  // decoder-exact absolute grids
  std::vector<IntTensor> ints;
  std::vector<float> qsteps;
  RenderMLP<float> mlp;
  ImplicitEntropyModel<float> entropy;
  OccupancyGrid occ;
  std::vector<LossReport> history;
  double mean_abs_values = 0.0;  // mean |G| (I) or |R| (P) before quantisation
  double model_bits = 0.0;       // estimated grid bits, hard integers
  std::vector<std::uint8_t> bytes;
  FrameHeader header;
  double train_seconds = 0.0;
  double code_seconds = 0.0;
};

inline FrameType frame_type_for(std::uint32_t index, int group_size) {
  return index % static_cast<std::uint32_t>(group_size) == 0 ? FrameType::kI : FrameType::kP;
}

/// Optional per-iteration observer: (iteration, report).
using TrainObserver = std::function<void(int, const LossReport&)>;

/// Trains frames in order, codes each one, and keeps the decode buffer.
class SequenceTrainer {
 public:
  SequenceTrainer(const TrainConfig& cfg, const Aabb& box, std::array<double, 3> background,
                  std::uint32_t frame_count)
      : cfg_(cfg), box_(box), layout_(cfg.layout(box)) {
    cfg_.validate();
    rs_ = RenderSettings::for_box(box, cfg.steps_per_diagonal);
    rs_.background = background;
    rs_.min_transmittance = cfg.min_transmittance;
    seq_.frame_count = frame_count;
    seq_.group_size = static_cast<std::uint32_t>(cfg.group_size);
    seq_.mlp_hidden = static_cast<std::uint16_t>(cfg.mlp_hidden);
    seq_.dir_freqs = static_cast<std::uint16_t>(cfg.dir_freqs);
    seq_.channels = static_cast<std::uint16_t>(cfg.channels);
    for (int c = 0; c < 3; ++c) seq_.background[c] = static_cast<float>(background[c]);
    seq_.step = rs_.step;
  }

  const SequenceHeader& sequence_header() const { return seq_; }
  const RenderSettings& render_settings() const { return rs_; }
  const DecodeBuffer& buffer() const { return buffer_; }
  const TrainConfig& config() const { return cfg_; }

  void set_observer(TrainObserver obs) { observer_ = std::move(obs); }

  /// Trains, codes and verifies one frame. P-frames need the previous frame
  /// of the same group in the buffer.
  FrameResult train_frame(const std::vector<TrainView>& views, std::uint32_t frame_index, FrameType type);

 private:
  struct RaySet {
    std::vector<Ray<float>> rays;
    std::vector<std::array<float, 3>> target;
  };

  static RaySet collect_rays(const std::vector<TrainView>& views) {
    RaySet rs;
    for (const auto& v : views) {
      check(v.image.width == v.camera.width && v.image.height == v.camera.height, ErrorCategory::kConfig,
            "view image size differs from its camera");
      for (int r = 0; r < v.camera.height; ++r)
        for (int c = 0; c < v.camera.width; ++c) {
          const auto rd = pixel_ray(v.camera, {r, c});
          rs.rays.push_back({rd.origin.cast<float>(), rd.dir.cast<float>(), rd.pixel});
          rs.target.push_back({v.image.at(r, c, 0), v.image.at(r, c, 1), v.image.at(r, c, 2)});
        }
    }
    check(!rs.rays.empty(), ErrorCategory::kConfig, "no training views");
    return rs;
  }

  OccupancyGrid occupancy_of(const FieldFrame<float>& f, const RenderMLP<float>& mlp) const {
    return dilate_occupancy(build_occupancy(f, mlp, layout_.coeff_dims, cfg_.occ_threshold), cfg_.occ_dilate);
  }

  TrainConfig cfg_;
  Aabb box_;
  FieldLayout layout_;
  RenderSettings rs_;
  SequenceHeader seq_;
  DecodeBuffer buffer_;          // trainer side
  DecodeBuffer decoder_buffer_;  // independent decoder run for verification
  std::optional<ImplicitEntropyModel<float>> last_entropy_;
  std::uint32_t group_id_ = 0;
  TrainObserver observer_;
};

inline FrameResult SequenceTrainer::train_frame(const std::vector<TrainView>& views, std::uint32_t frame_index,
                                                FrameType type) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  const bool is_p = type == FrameType::kP;
  check(!is_p || (buffer_.has_frame && buffer_.mlp.has_value()), ErrorCategory::kConsistency,
        "P-frame requested without a previous frame in the decode buffer");
  if (!is_p && buffer_.has_frame) ++group_id_;

  std::seed_seq sseq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                     frame_index, 0x5eedu};
  std::mt19937_64 rng(sseq);

  const std::size_t ng = layout_.grid_count();
  const int ch = layout_.channels;
  const FieldFrame<float>* prev = is_p ? &buffer_.recon : nullptr;

  // Grid values v (absolute on I-frames, residual on P-frames); q = exp(s).
  std::vector<std::vector<float>> val(ng);
  std::vector<float> s(ng);
  {
    std::uniform_real_distribution<double> u(-cfg_.grid_init, cfg_.grid_init);
    for (std::size_t g = 0; g < ng; ++g) {
      const double q0 = is_p ? static_cast<double>(prev->qsteps[g]) : cfg_.qstep_init;
      s[g] = static_cast<float>(std::log(q0));
      const double offset = (!is_p && g > 0) ? cfg_.basis_offset : 0.0;
      val[g].resize(layout_.dims_of(g).count() * static_cast<std::size_t>(ch));
      for (auto& v : val[g]) v = static_cast<float>(offset + u(rng));
    }
  }

  RenderMLP<float> mlp;
  if (is_p) {
    mlp = *buffer_.mlp;
  } else {
    mlp = RenderMLP<float>(ch, cfg_.mlp_hidden, cfg_.dir_freqs);
    mlp.initialize(rng, static_cast<float>(cfg_.density_bias));
  }
  ImplicitEntropyModel<float> entropy;
  if (is_p && last_entropy_) entropy = *last_entropy_;  // I-frames restart with q
  else entropy.initialize(rng, static_cast<float>(cfg_.entropy_log_b_init));

  const RaySet rays = collect_rays(views);
  const int iters = is_p ? cfg_.iters_p : cfg_.iters_i;

  FieldFrame<float> render(layout_);
  std::vector<IntTensor> cur(ng);
  for (std::size_t g = 0; g < ng; ++g) cur[g] = IntTensor(layout_.dims_of(g), ch);
  std::size_t total_voxels = 0;
  std::vector<std::size_t> grid_start(ng + 1, 0);
  for (std::size_t g = 0; g < ng; ++g) {
    grid_start[g] = total_voxels;
    total_voxels += val[g].size();
  }
  grid_start[ng] = total_voxels;

  auto refresh_render = [&]() {
    for (std::size_t g = 0; g < ng; ++g) {
      const float q = std::exp(s[g]);
      auto& vals = render.grid(g).values;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const std::int32_t k = quantize_latent(val[g][i] / q);
        cur[g].values[i] = k;
        const float v = static_cast<float>(k) * q;
        vals[i] = prev ? prev->grid(g).values[i] + v : v;
      }
      render.qsteps[g] = q;
    }
  };

  OccupancyGrid occ(layout_.coeff_dims, box_, true);
  if (is_p) occ = occupancy_of(*prev, mlp);

  FieldGrad<float> fgrad(render);
  std::vector<float> mlp_grad(mlp.params().size());
  std::vector<float> ent_grad(entropy.params().size());
  std::vector<std::vector<float>> gval(ng);
  for (std::size_t g = 0; g < ng; ++g) gval[g].resize(val[g].size());
  std::vector<float> gs(ng);

  std::vector<AdamState<float>> adam_y(ng);
  for (std::size_t g = 0; g < ng; ++g) adam_y[g].reset(val[g].size());
  AdamState<float> adam_s(ng), adam_mlp(mlp.params().size()), adam_ent(entropy.params().size());

  RayTrace<float> tr;
  BackwardScratch<float> scratch;
  std::vector<SamplePoint<float>> samples;
  std::uniform_int_distribution<std::size_t> pick_ray(0, rays.rays.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_voxel(0, total_voxels - 1);
  std::uniform_real_distribution<double> noise(-0.5, 0.5);
  typename ImplicitEntropyModel<float>::Activations eact;
  std::array<float, kContextWidth> ctx;

  FrameResult res;
  res.type = type;
  res.frame_index = frame_index;
  res.group_id = group_id_;
  res.history.reserve(static_cast<std::size_t>(iters));

  const double lam = cfg_.lambda;

  for (int it = 0; it < iters; ++it) {
    const double progress = iters > 1 ? static_cast<double>(it) / (iters - 1) : 0.0;
    const double lr_mult = std::pow(cfg_.lr_final_ratio, progress);
    refresh_render();
    if (!is_p && it >= cfg_.occ_warmup && (it - cfg_.occ_warmup) % cfg_.occ_interval == 0)
      occ = occupancy_of(render, mlp);
    else if (is_p && it > 0 && it % cfg_.occ_interval == 0)
      occ = occupancy_of(render, mlp);

    fgrad.zero();
    std::fill(mlp_grad.begin(), mlp_grad.end(), 0.0f);
    std::fill(ent_grad.begin(), ent_grad.end(), 0.0f);
    for (auto& g : gval) std::fill(g.begin(), g.end(), 0.0f);
    std::fill(gs.begin(), gs.end(), 0.0f);

    // Distortion.
    double sq = 0.0;
    const float dscale = 2.0f / (3.0f * static_cast<float>(cfg_.batch_rays));
    for (int b = 0; b < cfg_.batch_rays; ++b) {
      const std::size_t ri = pick_ray(rng);
      const auto& ray = rays.rays[ri];
      sample_ray(ray, occ, rs_.step, samples);
      const auto col = render_ray(samples, render, mlp, ray, rs_, tr);
      std::array<float, 3> dc;
      for (int c = 0; c < 3; ++c) {
        const float d = col[c] - rays.target[ri][c];
        sq += static_cast<double>(d) * d;
        dc[c] = dscale * d;
      }
      render_backward(render, mlp, tr, dc, rs_, &fgrad, is_p ? std::span<float>() : std::span<float>(mlp_grad),
                      scratch);
    }
    const double mse_val = sq / (3.0 * cfg_.batch_rays);

    // Rate on a random voxel subset (contexts from hard integers).
    double bits = 0.0;
    const double rscale = lam / cfg_.rate_samples;
    for (int k = 0; k < cfg_.rate_samples; ++k) {
      const std::size_t gi = pick_voxel(rng);
      std::size_t g = 0;
      while (gi >= grid_start[g + 1]) ++g;
      const std::size_t i = gi - grid_start[g];
      const auto& t = cur[g];
      VoxelPos p;
      p.c = static_cast<int>(i % ch);
      std::size_t node = i / ch;
      p.x = static_cast<int>(node % t.dims.x);
      node /= t.dims.x;
      p.y = static_cast<int>(node % t.dims.y);
      p.z = static_cast<int>(node / t.dims.y);
      gather_context(t, is_p ? &buffer_.ints[g] : nullptr, p, std::span<float>(ctx));
      const double q = std::exp(static_cast<double>(s[g]));
      const double yq = static_cast<double>(val[g][i]) / q;
      const double yt = yq + noise(rng);
      const LaplaceParams lp = entropy.predict(std::span<const float>(ctx), eact);
      const RateGrad rg = rate_bits_grad(yt, lp);
      bits += rg.bits;
      if (rg.floored) continue;
      gval[g][i] += static_cast<float>(rscale * rg.d_v / q);
      gs[g] -= static_cast<float>(rscale * rg.d_v * yq);
      entropy.backward(std::span<const float>(ctx), eact, lp, rscale * rg.d_mu, rscale * rg.d_b,
                       std::span<float>(ent_grad));
    }
    const double rate_mean = bits / cfg_.rate_samples;

    // Residual magnitude (P-frames), STE and step gradients.
    double reg_sum = 0.0;
    const double reg_scale = lam * cfg_.alpha / static_cast<double>(total_voxels);
    for (std::size_t g = 0; g < ng; ++g) {
      const float q = std::exp(s[g]);
      const auto& fg = fgrad.grids[g];
      const double dq = qstep_gradient_ste(std::span<const float>(val[g]), std::span<const std::int32_t>(cur[g].values),
                                           q, std::span<const float>(fg));
      for (std::size_t i = 0; i < val[g].size(); ++i) {
        gval[g][i] += fg[i];
        if (is_p) {
          reg_sum += std::abs(static_cast<double>(val[g][i]));
          const float sg = val[g][i] > 0.0f ? 1.0f : (val[g][i] < 0.0f ? -1.0f : 0.0f);
          gval[g][i] += static_cast<float>(reg_scale) * sg;
        }
      }
      gs[g] += static_cast<float>(q * dq);
    }
    const double reg_mean = reg_sum / static_cast<double>(total_voxels);

    const LossReport rep = total_loss(mse_val, rate_mean, reg_mean, lam, cfg_.alpha, is_p);
    res.history.push_back(rep);
    if (observer_) observer_(it, rep);

    for (std::size_t g = 0; g < ng; ++g)
      adam_step(std::span<float>(val[g]), std::span<const float>(gval[g]), adam_y[g], cfg_.lr_grid * lr_mult);
    if (cfg_.adaptive_q)
      adam_step(std::span<float>(s), std::span<const float>(gs), adam_s, cfg_.lr_q * lr_mult);
    if (!is_p)
      adam_step(std::span<float>(mlp.params()), std::span<const float>(mlp_grad), adam_mlp, cfg_.lr_mlp * lr_mult);
    adam_step(std::span<float>(entropy.params()), std::span<const float>(ent_grad), adam_ent,
              cfg_.lr_entropy * lr_mult);
    for (float v : s) check(std::isfinite(v), ErrorCategory::kDiverged, "quantization step diverged");
  }
  const auto t_trained = clock::now();

  // Final integers and the transmitted (dequantised) networks.
  refresh_render();
  res.ints = cur;
  res.qsteps.resize(ng);
  double abs_sum = 0.0;
  for (std::size_t g = 0; g < ng; ++g) {
    res.qsteps[g] = std::exp(s[g]);
    for (float v : val[g]) abs_sum += std::abs(static_cast<double>(v));
  }
  res.mean_abs_values = abs_sum / static_cast<double>(total_voxels);
  if (!is_p) snap_params(std::span<float>(mlp.params()), mlp.tensors());
  snap_params(std::span<float>(entropy.params()), entropy.tensors());
  res.mlp = mlp;
  res.entropy = entropy;
  res.recon = reconstruct_frame(layout_, type, frame_index, res.ints, res.qsteps, prev);
  res.occ = occupancy_of(res.recon, mlp);
  for (std::size_t g = 0; g < ng; ++g)
    res.model_bits += estimate_grid_bits(res.ints[g], entropy, is_p ? &buffer_.ints[g] : nullptr);

  FrameArtifacts art;
  art.type = type;
  art.frame_index = frame_index;
  art.group_id = group_id_;
  art.box = box_;
  art.occ = res.occ;
  art.mlp = is_p ? nullptr : &res.mlp;
  art.entropy = entropy;
  art.ints = res.ints;
  art.qsteps = res.qsteps;
  res.bytes = encode_frame(art, buffer_, &res.header);

  // Decode independently and require bit-identical state.
  const DecodedFrame dec = decode_frame(std::span<const std::uint8_t>(res.bytes), seq_, decoder_buffer_);
  check(dec.ints == res.ints, ErrorCategory::kConsistency, "decoded integers differ from encoder");
  check(dec.mlp == res.mlp && dec.entropy == res.entropy, ErrorCategory::kConsistency,
        "decoded networks differ from encoder");
  for (std::size_t g = 0; g < ng; ++g)
    check(dec.recon.grid(g).values == res.recon.grid(g).values, ErrorCategory::kConsistency,
          "decoded reconstruction differs from the trainer buffer");
  check(dec.occ == res.occ, ErrorCategory::kConsistency, "decoded occupancy differs");

  buffer_.has_frame = true;
  buffer_.frame_index = frame_index;
  buffer_.group_id = group_id_;
  buffer_.recon = res.recon;
  buffer_.ints = res.ints;
  buffer_.mlp = res.mlp;
  last_entropy_ = entropy;

  const auto t_done = clock::now();
  res.train_seconds = std::chrono::duration<double>(t_trained - t_start).count();
  res.code_seconds = std::chrono::duration<double>(t_done - t_trained).count();
  return res;
}

struct SequenceResult {
  SequenceHeader header;
  std::vector<FrameResult> frames;
  std::vector<std::uint8_t> bytes;  // sequence header + frames
};

/// Trains and codes frames in order; frames 0, G, 2G, ... are I-frames.
/// `views_of(t)` supplies the training views of frame t.
inline SequenceResult train_sequence(const std::function<std::vector<TrainView>(std::uint32_t)>& views_of,
                                     std::uint32_t frame_count, const TrainConfig& cfg, const Aabb& box,
                                     std::array<double, 3> background, TrainObserver observer = {}) {
  check(frame_count >= 1, ErrorCategory::kConfig, "sequence has no frames");
  SequenceTrainer trainer(cfg, box, background, frame_count);
  if (observer) trainer.set_observer(observer);
  SequenceResult out;
  out.header = trainer.sequence_header();
  ByteWriter w;
  write_sequence_header(w, out.header);
  for (std::uint32_t t = 0; t < frame_count; ++t) {
    auto fr = trainer.train_frame(views_of(t), t, frame_type_for(t, cfg.group_size));
    w.bytes(fr.bytes);
    out.frames.push_back(std::move(fr));
  }
  out.bytes = w.take();
  return out;
}

/// Decodes a whole stream.
inline std::vector<DecodedFrame> decode_sequence(std::span<const std::uint8_t> bytes, SequenceHeader* header = nullptr) {
  ByteReader r(bytes);
  const SequenceHeader seq = read_sequence_header(r);
  DecodeBuffer buf;
  std::vector<DecodedFrame> frames;
  for (std::uint32_t t = 0; t < seq.frame_count; ++t) frames.push_back(decode_frame(r, seq, buf));
  check(r.remaining() == 0, ErrorCategory::kFormat, "trailing bytes after the last frame");
  if (header) *header = seq;
  return frames;
}

}  // namespace voxcodec
