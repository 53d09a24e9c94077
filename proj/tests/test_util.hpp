// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "voxcodec/field/field_frame.hpp"
#include "voxcodec/render/render_mlp.hpp"

namespace vt {

using Rng = std::mt19937_64;

inline double rel_err(double analytic, double numeric) {
  const double d = std::abs(analytic - numeric);
  const double s = std::max(std::abs(analytic), std::abs(numeric));
  return s < 1e-10 ? d : d / s;
}

inline voxcodec::Aabb unit_box() { return {{0, 0, 0}, {1, 1, 1}}; }

/// Small random frame: coefficient values around 0, bases around 1.
template <typename T>
voxcodec::FieldFrame<T> random_frame(Rng& rng, int coeff = 4, std::vector<int> bases = {4, 3}, int ch = 2,
                                     voxcodec::Aabb box = unit_box()) {
  voxcodec::FieldLayout l;
  l.coeff_dims = voxcodec::cube(coeff);
  l.basis_dims.clear();
  for (int b : bases) l.basis_dims.push_back(voxcodec::cube(b));
  l.channels = ch;
  l.box = box;
  voxcodec::FieldFrame<T> f(l);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : f.coeff.values) v = static_cast<T>(u(rng));
  for (auto& b : f.bases)
    for (auto& v : b.values) v = static_cast<T>(1.0 + 0.5 * u(rng));
  return f;
}

template <typename T>
voxcodec::RenderMLP<T> random_mlp(Rng& rng, int in, int hidden = 8, int freqs = 2, T density_bias = T(0.5)) {
  voxcodec::RenderMLP<T> m(in, hidden, freqs);
  m.initialize(rng, density_bias);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& p : m.params())
    if (p == T(0)) p = static_cast<T>(u(rng));  // non-zero biases exercise every path
  return m;
}

/// Category of the voxcodec::Error thrown by f, or nullopt if none.
template <typename F>
std::optional<voxcodec::ErrorCategory> error_of(F&& f) {
  try {
    f();
  } catch (const voxcodec::Error& e) {
    return e.category();
  }
  return std::nullopt;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("voxcodec_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace vt
