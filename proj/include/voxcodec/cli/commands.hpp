// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "voxcodec/cli/field_file.hpp"
#include "voxcodec/cli/manifest.hpp"
#include "voxcodec/scene/dataset.hpp"
#include "voxcodec/scene/metrics.hpp"
#include "voxcodec/train/trainer.hpp"

namespace voxcodec {

namespace fs = std::filesystem;

/// Render settings a decoder derives from the stream alone.
inline RenderSettings stream_render_settings(const SequenceHeader& seq) {
  RenderSettings rs;
  rs.step = seq.step;
  for (int c = 0; c < 3; ++c) rs.background[c] = seq.background[c];
  rs.min_transmittance = 1e-4;
  return rs;
}

/// Renders one decoded frame and rounds to 8-bit levels, as written to disk.
inline Image render_decoded(const FieldFrame<float>& field, const RenderMLP<float>& mlp, const OccupancyGrid& occ,
                            const Camera& cam, const RenderSettings& rs) {
  Image im(cam.width, cam.height);
  im.rgb = render_view(field, mlp, occ, cam, rs);
  return quantize8(im);
}

// ---------------------------------------------------------------- generate

inline MultiViewDataset cmd_generate(const fs::path& spec_file, const fs::path& out_dir) {
  const SceneSpec spec = load_scene(spec_file);
  auto d = generate_dataset(spec);
  save_dataset(d, out_dir);
  return d;
}

// ------------------------------------------------------------------ encode

struct EncodeOptions {
  fs::path dataset;
  fs::path out;  // bitstream; reports go next to it
  TrainConfig config;
  int frames = 0;  // 0: all frames of the dataset
  std::ostream* log = nullptr;
};

inline fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.txt"); }
inline fs::path csv_path(const fs::path& out) { return fs::path(out.string() + ".csv"); }
inline fs::path timing_path(const fs::path& out) { return fs::path(out.string() + ".timing.txt"); }

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot write " + path.string());
  f << text;
  check(static_cast<bool>(f), ErrorCategory::kIo, "write failed for " + path.string());
}

struct ViewScores {
  double train_psnr = 0, train_ssim = 0, test_psnr = 0, test_ssim = 0;
};

inline ViewScores score_frame(const MultiViewDataset& d, int frame, const FieldFrame<float>& field,
                              const RenderMLP<float>& mlp, const OccupancyGrid& occ, const RenderSettings& rs) {
  ViewScores s;
  int ntrain = 0, ntest = 0;
  for (std::size_t c = 0; c < d.cameras.size(); ++c) {
    const Image im = render_decoded(field, mlp, occ, d.cameras[c], rs);
    const Image& gt = d.images[frame][c];
    const double p = psnr(im, gt), q = ssim(im, gt);
    if (d.is_test(static_cast<int>(c))) {
      s.test_psnr += p;
      s.test_ssim += q;
      ++ntest;
    } else {
      s.train_psnr += p;
      s.train_ssim += q;
      ++ntrain;
    }
  }
  if (ntrain) s.train_psnr /= ntrain, s.train_ssim /= ntrain;
  if (ntest) s.test_psnr /= ntest, s.test_ssim /= ntest;
  return s;
}

}  // namespace detail

/// Trains and codes the dataset, writes the stream plus manifest, CSV and
/// timing reports. Quality is measured on the decoder's reconstruction.
inline RunManifest cmd_encode(const EncodeOptions& opt) {
  opt.config.validate();
  const MultiViewDataset d = load_dataset(opt.dataset);
  check(opt.frames >= 0 && opt.frames <= d.frames, ErrorCategory::kConfig,
        "requested " + std::to_string(opt.frames) + " frames, dataset has " + std::to_string(d.frames));
  const auto frame_count = static_cast<std::uint32_t>(opt.frames ? opt.frames : d.frames);

  auto views_of = [&](std::uint32_t t) {
    std::vector<TrainView> v;
    for (int c = 0; c < d.train_cameras; ++c) v.push_back({d.cameras[c], d.images[t][c]});
    return v;
  };

  SequenceTrainer trainer(opt.config, d.box, d.background, frame_count);
  ByteWriter w;
  write_sequence_header(w, trainer.sequence_header());
  RunManifest m;
  m.dataset = opt.dataset.filename().string();
  if (m.dataset.empty()) m.dataset = opt.dataset.parent_path().filename().string();
  m.config = format_config(opt.config);
  m.sequence_header_bytes = w.size();
  std::vector<FrameResult> results;
  for (std::uint32_t t = 0; t < frame_count; ++t) {
    auto fr = trainer.train_frame(views_of(t), t, frame_type_for(t, opt.config.group_size));
    w.bytes(fr.bytes);
    FrameRecord rec;
    rec.frame = t;
    rec.type = fr.type;
    rec.group = fr.group_id;
    rec.bytes = fr.bytes.size();
    rec.header_bytes = fr.header.header_bytes;
    rec.occ_bytes = fr.header.occ_bytes;
    rec.mlp_bytes = fr.header.mlp_bytes;
    rec.entropy_bytes = fr.header.entropy_bytes;
    rec.grid_bytes.assign(fr.header.grid_bytes.begin(), fr.header.grid_bytes.end());
    rec.model_bits = fr.model_bits;
    rec.qsteps = fr.qsteps;
    rec.train_seconds = fr.train_seconds;
    rec.code_seconds = fr.code_seconds;
    m.frames.push_back(rec);
    if (opt.log)
      *opt.log << "frame " << t << ' ' << detail::type_char(fr.type) << ' ' << rec.bytes << " bytes, "
               << detail::fmt("%.1f", fr.train_seconds) << " s\n";
  }
  const auto stream = w.take();
  if (!opt.out.parent_path().empty()) fs::create_directories(opt.out.parent_path());
  write_file_bytes(opt.out, stream);
  m.stream_bytes = fs::file_size(opt.out);

  // Score what a decoder sees: re-read the file and decode it.
  SequenceHeader seq;
  const auto decoded = decode_sequence(std::span<const std::uint8_t>(read_file_bytes(opt.out)), &seq);
  check(decoded.size() == frame_count, ErrorCategory::kConsistency, "decoded frame count differs");
  const RenderSettings rs = stream_render_settings(seq);
  for (std::uint32_t t = 0; t < frame_count; ++t) {
    const auto& df = decoded[t];
    const auto s = detail::score_frame(d, static_cast<int>(t), df.recon, df.mlp, df.occ, rs);
    auto& rec = m.frames[t];
    rec.train_psnr = s.train_psnr;
    rec.train_ssim = s.train_ssim;
    rec.test_psnr = s.test_psnr;
    rec.test_ssim = s.test_ssim;
    check(df.header.frame_bytes() == rec.bytes, ErrorCategory::kConsistency, "decoded frame size differs");
  }

  std::size_t sum = m.sequence_header_bytes;
  for (const auto& f : m.frames) sum += f.bytes;
  check(sum == m.stream_bytes, ErrorCategory::kConsistency, "manifest byte sizes differ from the file size");

  detail::write_text(manifest_path(opt.out), manifest_text(m));
  detail::write_text(csv_path(opt.out), manifest_csv(m));
  detail::write_text(timing_path(opt.out), timing_text(m));
  return m;
}

// ------------------------------------------------------------------ decode

inline fs::path field_file_path(const fs::path& dir, std::uint32_t frame) {
  return dir / ("frame_" + std::to_string(frame) + ".vxf");
}

/// Decodes every frame and writes `frame_{t}.vxf` into `out_dir`.
inline std::vector<DecodedField> decode_stream_file(const fs::path& bitstream) {
  const auto bytes = read_file_bytes(bitstream);
  SequenceHeader seq;
  const auto frames = decode_sequence(std::span<const std::uint8_t>(bytes), &seq);
  std::vector<DecodedField> out;
  for (const auto& f : frames) {
    DecodedField d;
    d.seq = seq;
    d.frame_index = f.header.frame_index;
    d.type = f.header.type;
    d.field = f.recon;
    d.occ = f.occ;
    d.mlp = f.mlp;
    out.push_back(std::move(d));
  }
  return out;
}

inline std::size_t cmd_decode(const fs::path& bitstream, const fs::path& out_dir) {
  const auto fields = decode_stream_file(bitstream);
  fs::create_directories(out_dir);
  for (const auto& f : fields) write_file_bytes(field_file_path(out_dir, f.frame_index), serialize_field(f));
  return fields.size();
}

// ------------------------------------------------------------------ render

struct RenderOptions {
  fs::path input;    // bitstream file or a directory written by decode
  fs::path cameras;  // dataset directory or a cameras.txt file
  int frame = -1;    // -1: all frames
  int camera = -1;   // -1: all cameras
  fs::path out;      // images land in out/frame_{t}/cam_{c}.ppm
};

/// Renders decoded frames; returns the number of images written.
inline int cmd_render(const RenderOptions& opt) {
  const fs::path cam_file = fs::is_directory(opt.cameras) ? opt.cameras / "cameras.txt" : opt.cameras;
  const auto cams = load_cameras(cam_file);
  check(!cams.empty(), ErrorCategory::kConfig, "no cameras in " + cam_file.string());
  check(opt.camera >= -1 && opt.camera < static_cast<int>(cams.size()), ErrorCategory::kUsage,
        "unknown camera index " + std::to_string(opt.camera));

  std::vector<DecodedField> fields;
  if (fs::is_directory(opt.input)) {
    if (opt.frame >= 0) {
      const auto p = field_file_path(opt.input, static_cast<std::uint32_t>(opt.frame));
      check(fs::exists(p), ErrorCategory::kUsage, "unknown frame index " + std::to_string(opt.frame));
      fields.push_back(parse_field(std::span<const std::uint8_t>(read_file_bytes(p))));
    } else {
      for (std::uint32_t t = 0; fs::exists(field_file_path(opt.input, t)); ++t)
        fields.push_back(parse_field(std::span<const std::uint8_t>(read_file_bytes(field_file_path(opt.input, t)))));
      check(!fields.empty(), ErrorCategory::kIo, "no decoded frames in " + opt.input.string());
    }
  } else {
    fields = decode_stream_file(opt.input);
    if (opt.frame >= 0) {
      check(opt.frame < static_cast<int>(fields.size()), ErrorCategory::kUsage,
            "unknown frame index " + std::to_string(opt.frame));
      fields = {fields[static_cast<std::size_t>(opt.frame)]};
    }
  }

  int written = 0;
  for (const auto& f : fields) {
    const RenderSettings rs = stream_render_settings(f.seq);
    fs::create_directories(opt.out / ("frame_" + std::to_string(f.frame_index)));
    for (int c = 0; c < static_cast<int>(cams.size()); ++c) {
      if (opt.camera >= 0 && c != opt.camera) continue;
      save_image(frame_image_path(opt.out, static_cast<int>(f.frame_index), c),
                 render_decoded(f.field, f.mlp, f.occ, cams[c], rs));
      ++written;
    }
  }
  return written;
}

// ----------------------------------------------------------------- metrics

struct ImageScore {
  int frame = 0;
  int camera = 0;
  bool test = false;
  double psnr = 0.0;
  double ssim = 0.0;
};

/// Compares every rendered image that has a dataset counterpart.
inline std::vector<ImageScore> cmd_metrics(const fs::path& rendered_dir, const fs::path& dataset_dir) {
  const auto d = load_dataset(dataset_dir, false);
  std::vector<ImageScore> out;
  for (int t = 0; t < d.frames; ++t)
    for (int c = 0; c < static_cast<int>(d.cameras.size()); ++c) {
      const auto rp = frame_image_path(rendered_dir, t, c);
      if (!fs::exists(rp)) continue;
      const Image a = load_image(rp);
      const Image b = load_image(frame_image_path(dataset_dir, t, c));
      out.push_back({t, c, d.is_test(c), psnr(a, b), ssim(a, b)});
    }
  check(!out.empty(), ErrorCategory::kIo, "no rendered images match the dataset in " + rendered_dir.string());
  return out;
}

inline std::string format_metrics(const std::vector<ImageScore>& scores) {
  std::ostringstream o;
  o << "frame,camera,split,psnr,ssim\n";
  double sp[2] = {0, 0}, ss[2] = {0, 0};
  int n[2] = {0, 0};
  for (const auto& s : scores) {
    o << s.frame << ',' << s.camera << ',' << (s.test ? "test" : "train") << ',' << detail::fmt("%.4f", s.psnr)
      << ',' << detail::fmt("%.5f", s.ssim) << '\n';
    sp[s.test] += s.psnr;
    ss[s.test] += s.ssim;
    ++n[s.test];
  }
  for (int k = 0; k < 2; ++k)
    if (n[k])
      o << "mean," << n[k] << ',' << (k ? "test" : "train") << ',' << detail::fmt("%.4f", sp[k] / n[k]) << ','
        << detail::fmt("%.5f", ss[k] / n[k]) << '\n';
  return o.str();
}

// ------------------------------------------------------------ sweep/bdrate

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace detail

/// Reads (rate, psnr) pairs from a CSV with a header row.
inline std::vector<RdPoint> load_rd_curve(const fs::path& csv, const std::string& rate_col = "bytes_per_frame",
                                          const std::string& psnr_col = "test_psnr") {
  std::ifstream f(csv);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot open " + csv.string());
  std::string line;
  check(static_cast<bool>(std::getline(f, line)), ErrorCategory::kFormat, "empty CSV " + csv.string());
  const auto head = detail::split_csv(line);
  int ri = -1, pi = -1;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (head[i] == rate_col) ri = static_cast<int>(i);
    if (head[i] == psnr_col) pi = static_cast<int>(i);
  }
  check(ri >= 0 && pi >= 0, ErrorCategory::kFormat,
        csv.string() + " lacks columns '" + rate_col + "' and '" + psnr_col + "'");
  std::vector<RdPoint> out;
  while (std::getline(f, line)) {
    if (detail::trim(line).empty()) continue;
    const auto row = detail::split_csv(line);
    check(row.size() == head.size(), ErrorCategory::kFormat, "ragged row in " + csv.string());
    out.push_back({detail::parse_number<double>(rate_col, row[ri]), detail::parse_number<double>(psnr_col, row[pi])});
  }
  return out;
}

inline double cmd_bdrate(const fs::path& a, const fs::path& b, const std::string& rate_col = "bytes_per_frame",
                         const std::string& psnr_col = "test_psnr") {
  return bd_rate(load_rd_curve(a, rate_col, psnr_col), load_rd_curve(b, rate_col, psnr_col));
}

struct SweepPoint {
  double lambda = 0.0;
  RunManifest manifest;
};

inline std::string format_sweep(const std::vector<SweepPoint>& pts) {
  std::ostringstream o;
  o << "lambda,bytes_per_frame,i_frame_bytes,p_frame_bytes,train_psnr,test_psnr,train_ssim,test_ssim\n";
  for (const auto& p : pts) {
    const auto& m = p.manifest;
    o << detail::fmt("%g", p.lambda) << ',' << detail::fmt("%.1f", m.mean_bytes()) << ','
      << detail::fmt("%.1f", m.mean_bytes(0)) << ',' << detail::fmt("%.1f", m.mean_bytes(1)) << ','
      << detail::fmt("%.4f", m.mean_of(&FrameRecord::train_psnr)) << ','
      << detail::fmt("%.4f", m.mean_of(&FrameRecord::test_psnr)) << ','
      << detail::fmt("%.5f", m.mean_of(&FrameRecord::train_ssim)) << ','
      << detail::fmt("%.5f", m.mean_of(&FrameRecord::test_ssim)) << '\n';
  }
  return o.str();
}

/// Encodes once per lambda into out_dir and writes out_dir/sweep.csv.
inline std::vector<SweepPoint> cmd_sweep(EncodeOptions base, const std::vector<double>& lambdas,
                                         const fs::path& out_dir) {
  check(!lambdas.empty(), ErrorCategory::kUsage, "sweep needs at least one lambda");
  fs::create_directories(out_dir);
  std::vector<SweepPoint> pts;
  for (double l : lambdas) {
    base.config.lambda = l;
    base.out = out_dir / ("lambda_" + detail::fmt("%g", l) + ".vxc");
    if (base.log) *base.log << "lambda " << l << '\n';
    pts.push_back({l, cmd_encode(base)});
  }
  detail::write_text(out_dir / "sweep.csv", format_sweep(pts));
  return pts;
}

}  // namespace voxcodec
