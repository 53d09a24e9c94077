// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "voxcodec/common.hpp"
#include "voxcodec/field/field_frame.hpp"

namespace voxcodec {

/// Training/coding knobs. Text form: one `key = value` per line, `#` starts a
/// comment.
struct TrainConfig {
  double lambda = 1e-3;
  double alpha = 10.0;
  int group_size = 20;
  int iters_i = 300;
  int iters_p = 100;
  double lr_grid = 1e-1;
  double lr_mlp = 1e-3;
  double lr_q = 5e-2;        // on log q
  double lr_entropy = 1e-2;
  double entropy_log_b_init = 3.0;  // initial log scale of a fresh entropy model
  double lr_final_ratio = 0.1;  // exponential decay target at the last iteration
  int batch_rays = 256;
  int rate_samples = 4096;   // voxels per iteration for the rate estimate
  std::uint64_t seed = 0;
  int coeff_dim = 32;
  std::vector<int> basis_dims = {32, 16, 8};
  int channels = 4;
  double qstep_init = 0.02;
  bool adaptive_q = true;
  double grid_init = 1e-2;
  double basis_offset = 1.0;     // I-frame basis grids start at offset + U(-init, init)
  double density_bias = -1.0;    // initial density logit
  double occ_threshold = 1e-2;
  int occ_dilate = 1;
  int occ_interval = 50;
  int occ_warmup = 100;
  double steps_per_diagonal = 256.0;
  double min_transmittance = 1e-4;
  int mlp_hidden = 64;
  int dir_freqs = 4;

  FieldLayout layout(const Aabb& box) const {
    FieldLayout l;
    l.coeff_dims = cube(coeff_dim);
    l.basis_dims.clear();
    for (int d : basis_dims) l.basis_dims.push_back(cube(d));
    l.channels = channels;
    l.box = box;
    return l;
  }

  void validate() const {
    const auto cfg = ErrorCategory::kConfig;
    check(lambda > 0.0, cfg, "lambda must be positive");
    check(alpha >= 0.0, cfg, "alpha must be non-negative");
    check(group_size >= 1, cfg, "group_size must be at least 1");
    check(iters_i >= 1 && iters_p >= 0, cfg, "iteration counts out of range");
    check(lr_grid > 0.0 && lr_mlp >= 0.0 && lr_q >= 0.0 && lr_entropy >= 0.0, cfg, "bad learning rate");
    check(lr_final_ratio > 0.0 && lr_final_ratio <= 1.0, cfg, "lr_final_ratio must be in (0, 1]");
    check(batch_rays >= 1 && rate_samples >= 1, cfg, "batch sizes must be positive");
    check(coeff_dim >= 2 && !basis_dims.empty(), cfg, "need a coefficient grid and at least one basis");
    for (int d : basis_dims) check(d >= 2 && d <= 1024, cfg, "basis dimension out of range");
    check(coeff_dim <= 1024, cfg, "coefficient dimension out of range");
    check(basis_dims.size() <= 16, cfg, "too many basis grids");
    check(channels >= 1 && channels <= 64, cfg, "channels must be in [1, 64]");
    check(qstep_init > 0.0, cfg, "qstep_init must be positive");
    check(occ_threshold >= 0.0 && occ_dilate >= 0 && occ_interval >= 1 && occ_warmup >= 0, cfg,
          "bad occupancy settings");
    check(steps_per_diagonal >= 1.0, cfg, "steps_per_diagonal must be >= 1");
    check(mlp_hidden >= 1 && dir_freqs >= 0, cfg, "bad MLP shape");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  check(res.ec == std::errc() && res.ptr == end, ErrorCategory::kConfig,
        "bad value for " + key + ": '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error(ErrorCategory::kConfig, "bad boolean for " + key + ": '" + v + "'");
}

}  // namespace detail

/// "C,B1,B2,..." -> coefficient dim C and cubic basis dims.
inline void parse_grid_dims(const std::string& text, TrainConfig& cfg) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(detail::parse_number<int>("grid_dims", detail::trim(item)));
  check(dims.size() >= 2, ErrorCategory::kConfig, "grid_dims needs a coefficient and at least one basis dim");
  cfg.coeff_dim = dims[0];
  cfg.basis_dims.assign(dims.begin() + 1, dims.end());
}

inline std::string format_grid_dims(const TrainConfig& cfg) {
  std::string s = std::to_string(cfg.coeff_dim);
  for (int d : cfg.basis_dims) s += "," + std::to_string(d);
  return s;
}

/// Applies one key/value pair; unknown keys are configuration errors.
inline void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  const auto& k = key;
  const auto& v = value;
  if (k == "lambda") c.lambda = parse_number<double>(k, v);
  else if (k == "alpha") c.alpha = parse_number<double>(k, v);
  else if (k == "group_size") c.group_size = parse_number<int>(k, v);
  else if (k == "iters_i") c.iters_i = parse_number<int>(k, v);
  else if (k == "iters_p") c.iters_p = parse_number<int>(k, v);
  else if (k == "lr_grid") c.lr_grid = parse_number<double>(k, v);
  else if (k == "lr_mlp") c.lr_mlp = parse_number<double>(k, v);
  else if (k == "lr_q") c.lr_q = parse_number<double>(k, v);
  else if (k == "lr_entropy") c.lr_entropy = parse_number<double>(k, v);
  else if (k == "entropy_log_b_init") c.entropy_log_b_init = parse_number<double>(k, v);
  else if (k == "lr_final_ratio") c.lr_final_ratio = parse_number<double>(k, v);
  else if (k == "batch_rays") c.batch_rays = parse_number<int>(k, v);
  else if (k == "rate_samples") c.rate_samples = parse_number<int>(k, v);
  else if (k == "seed") c.seed = parse_number<std::uint64_t>(k, v);
  else if (k == "grid_dims") parse_grid_dims(v, c);
  else if (k == "channels") c.channels = parse_number<int>(k, v);
  else if (k == "qstep_init") c.qstep_init = parse_number<double>(k, v);
  else if (k == "adaptive_q") c.adaptive_q = detail::parse_bool(k, v);
  else if (k == "grid_init") c.grid_init = parse_number<double>(k, v);
  else if (k == "basis_offset") c.basis_offset = parse_number<double>(k, v);
  else if (k == "density_bias") c.density_bias = parse_number<double>(k, v);
  else if (k == "occ_threshold") c.occ_threshold = parse_number<double>(k, v);
  else if (k == "occ_dilate") c.occ_dilate = parse_number<int>(k, v);
  else if (k == "occ_interval") c.occ_interval = parse_number<int>(k, v);
  else if (k == "occ_warmup") c.occ_warmup = parse_number<int>(k, v);
  else if (k == "steps_per_diagonal") c.steps_per_diagonal = parse_number<double>(k, v);
  else if (k == "min_transmittance") c.min_transmittance = parse_number<double>(k, v);
  else if (k == "mlp_hidden") c.mlp_hidden = parse_number<int>(k, v);
  else if (k == "dir_freqs") c.dir_freqs = parse_number<int>(k, v);
  else throw Error(ErrorCategory::kConfig, "unknown config key '" + k + "'");
}

inline TrainConfig parse_config(std::istream& in, TrainConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    check(eq != std::string::npos, ErrorCategory::kConfig,
          "line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

inline TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {}) {
  std::ifstream f(path);
  check(static_cast<bool>(f), ErrorCategory::kIo, "cannot open config " + path.string());
  return parse_config(f, base);
}

/// Effective settings in the same text form parse_config reads.
inline std::string format_config(const TrainConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "lambda = " << c.lambda << "\nalpha = " << c.alpha << "\ngroup_size = " << c.group_size
    << "\niters_i = " << c.iters_i << "\niters_p = " << c.iters_p << "\nlr_grid = " << c.lr_grid
    << "\nlr_mlp = " << c.lr_mlp << "\nlr_q = " << c.lr_q << "\nlr_entropy = " << c.lr_entropy
    << "\nentropy_log_b_init = " << c.entropy_log_b_init << "\nlr_final_ratio = " << c.lr_final_ratio << "\nbatch_rays = " << c.batch_rays
    << "\nrate_samples = " << c.rate_samples << "\nseed = " << c.seed
    << "\ngrid_dims = " << format_grid_dims(c) << "\nchannels = " << c.channels
    << "\nqstep_init = " << c.qstep_init << "\nadaptive_q = " << (c.adaptive_q ? "true" : "false")
    << "\ngrid_init = " << c.grid_init << "\nbasis_offset = " << c.basis_offset
    << "\ndensity_bias = " << c.density_bias << "\nocc_threshold = " << c.occ_threshold
    << "\nocc_dilate = " << c.occ_dilate << "\nocc_interval = " << c.occ_interval
    << "\nocc_warmup = " << c.occ_warmup << "\nsteps_per_diagonal = " << c.steps_per_diagonal
    << "\nmin_transmittance = " << c.min_transmittance << "\nmlp_hidden = " << c.mlp_hidden
    << "\ndir_freqs = " << c.dir_freqs << "\n";
  return o.str();
}

}  // namespace voxcodec
