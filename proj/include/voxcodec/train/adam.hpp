// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "voxcodec/common.hpp"

namespace voxcodec {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// Moment buffers and step count for one parameter vector.
template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  long step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, T(0)), v(n, T(0)) {}
  void reset(std::size_t n) {
    m.assign(n, T(0));
    v.assign(n, T(0));
    step = 0;
  }
};

/// One bias-corrected Adam update in place.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& st, double lr,
               const AdamConfig& cfg = {}) {
  check(params.size() == grads.size() && st.m.size() == params.size(), ErrorCategory::kConfig,
        "adam: shape mismatch");
  ++st.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T a = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(cfg.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    st.m[i] = b1 * st.m[i] + (T(1) - b1) * g;
    st.v[i] = b2 * st.v[i] + (T(1) - b2) * g * g;
    params[i] -= a * st.m[i] / (std::sqrt(st.v[i] * inv_c2) + eps);
  }
}

}  // namespace voxcodec
