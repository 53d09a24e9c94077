// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

// voxcodec command-line tool: generate | encode | decode | render | metrics |
// bdrate | sweep.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "voxcodec/cli/commands.hpp"

namespace {

using namespace voxcodec;

struct TrainFlags {
  std::string config_file;
  std::optional<double> lambda, alpha;
  std::optional<int> group_size, iters_i, iters_p;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid_dims;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "training config file (key = value lines)")->check(CLI::ExistingFile);
    app->add_option("--lambda", lambda, "rate-distortion trade-off");
    app->add_option("--alpha", alpha, "residual regularization multiplier");
    app->add_option("--group-size", group_size, "frames per group (1: all I-frames)");
    app->add_option("--iters-i", iters_i, "iterations per I-frame");
    app->add_option("--iters-p", iters_p, "iterations per P-frame");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--grid-dims", grid_dims, "coefficient and basis dims, e.g. 32,32,16,8");
    app->add_option("--set", sets, "any config key, as key=value (repeatable)");
  }

  // Precedence: flags > config file > defaults.
  TrainConfig resolve() const {
    TrainConfig c;
    if (!config_file.empty()) c = load_config(config_file, c);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      check(eq != std::string::npos, ErrorCategory::kUsage, "--set expects key=value, got '" + kv + "'");
      apply_setting(c, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    if (lambda) c.lambda = *lambda;
    if (alpha) c.alpha = *alpha;
    if (group_size) c.group_size = *group_size;
    if (iters_i) c.iters_i = *iters_i;
    if (iters_p) c.iters_p = *iters_p;
    if (seed) c.seed = *seed;
    if (grid_dims) parse_grid_dims(*grid_dims, c);
    c.validate();
    return c;
  }
};

int fail(const std::string& category, const std::string& msg) {
  std::fprintf(stderr, "error: %s: %s\n", category.c_str(), msg.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxcodec: learned volumetric video codec"};
  app.require_subcommand(1);

  std::string spec_file, dataset, out, input, cameras, a_csv, b_csv;
  std::string rate_col = "bytes_per_frame", psnr_col = "test_psnr";
  int frames = 0, frame = -1, camera = -1;
  bool quiet = false;
  std::vector<double> lambdas = {7e-4, 1e-3, 2e-3, 5e-3};
  TrainFlags enc_flags, sweep_flags;

  auto* gen = app.add_subcommand("generate", "render a synthetic multi-view dataset from a scene file");
  gen->add_option("spec", spec_file, "scene file")->required();
  gen->add_option("--out", out, "output dataset directory")->required();

  auto* enc = app.add_subcommand("encode", "train and encode a dataset");
  enc->add_option("dataset", dataset, "dataset directory")->required();
  enc->add_option("--out", out, "output bitstream")->required();
  enc->add_option("--frames", frames, "encode only the first N frames");
  enc->add_flag("--quiet", quiet, "no per-frame progress");
  enc_flags.add(enc);

  auto* dec = app.add_subcommand("decode", "decode a bitstream into per-frame field files");
  dec->add_option("bitstream", input, "input bitstream")->required();
  dec->add_option("--out", out, "output directory")->required();

  auto* ren = app.add_subcommand("render", "render decoded frames");
  ren->add_option("input", input, "bitstream or decoded directory")->required();
  ren->add_option("--cameras", cameras, "dataset directory or cameras.txt")->required();
  ren->add_option("--frame", frame, "frame index (default: all)");
  ren->add_option("--camera", camera, "camera index (default: all)");
  ren->add_option("--out", out, "output image directory")->required();

  auto* met = app.add_subcommand("metrics", "PSNR/SSIM of rendered images against a dataset");
  met->add_option("rendered", input, "rendered image directory")->required();
  met->add_option("dataset", dataset, "dataset directory")->required();
  met->add_option("--out", out, "also write the table to this CSV file");

  auto* bdr = app.add_subcommand("bdrate", "BD-rate of curve B against curve A");
  bdr->add_option("a", a_csv, "reference curve CSV")->required();
  bdr->add_option("b", b_csv, "test curve CSV")->required();
  bdr->add_option("--rate-col", rate_col, "rate column name");
  bdr->add_option("--psnr-col", psnr_col, "quality column name");

  auto* swp = app.add_subcommand("sweep", "encode at several lambdas and tabulate the RD points");
  swp->add_option("dataset", dataset, "dataset directory")->required();
  swp->add_option("--out", out, "output directory")->required();
  swp->add_option("--lambdas", lambdas, "lambda values")->delimiter(',');
  swp->add_option("--frames", frames, "encode only the first N frames");
  swp->add_flag("--quiet", quiet, "no per-frame progress");
  sweep_flags.add(swp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*gen) {
      const auto d = cmd_generate(spec_file, out);
      std::printf("wrote %d frames x %zu cameras to %s\n", d.frames, d.cameras.size(), out.c_str());
    } else if (*enc) {
      EncodeOptions o;
      o.dataset = dataset;
      o.out = out;
      o.config = enc_flags.resolve();
      o.frames = frames;
      o.log = quiet ? nullptr : &std::cerr;
      const auto m = cmd_encode(o);
      std::printf("%zu bytes, %zu frames, mean train PSNR %.2f dB, mean test PSNR %.2f dB\n", m.stream_bytes,
                  m.frames.size(), m.mean_of(&FrameRecord::train_psnr), m.mean_of(&FrameRecord::test_psnr));
    } else if (*dec) {
      const auto n = cmd_decode(input, out);
      std::printf("decoded %zu frames to %s\n", n, out.c_str());
    } else if (*ren) {
      RenderOptions o;
      o.input = input;
      o.cameras = cameras;
      o.frame = frame;
      o.camera = camera;
      o.out = out;
      std::printf("wrote %d images to %s\n", cmd_render(o), out.c_str());
    } else if (*met) {
      const auto text = format_metrics(cmd_metrics(input, dataset));
      std::fputs(text.c_str(), stdout);
      if (!out.empty()) {
        std::ofstream f(out);
        check(static_cast<bool>(f << text), ErrorCategory::kIo, "cannot write " + out);
      }
    } else if (*bdr) {
      std::printf("%.4f\n", cmd_bdrate(a_csv, b_csv, rate_col, psnr_col));
    } else if (*swp) {
      EncodeOptions o;
      o.dataset = dataset;
      o.config = sweep_flags.resolve();
      o.frames = frames;
      o.log = quiet ? nullptr : &std::cerr;
      std::fputs(format_sweep(cmd_sweep(o, lambdas, out)).c_str(), stdout);
    }
  } catch (const Error& e) {
    return fail(std::string(category_name(e.category())), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
