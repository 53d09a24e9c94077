// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "voxcodec/codec/cdf_table.hpp"
#include "voxcodec/common.hpp"

namespace voxcodec {

/// Integer symbol of a latent (value / q), clamped to the coding alphabet.
template <typename T>
std::int32_t quantize_latent(T y) {
  const double r = std::nearbyint(std::clamp(static_cast<double>(y), double(kAlphabetMin), double(kAlphabetMax)));
  return static_cast<std::int32_t>(r);
}

/// Both quantisation paths of one grid.
template <typename T>
struct SimulatedQuantization {
  std::vector<T> noisy;        // rate path: v / q + u, u ~ U(-1/2, 1/2)
  std::vector<std::int32_t> ints;
  std::vector<T> dequantized;  // render path: q * round(v / q)
};

/// `values` are real grid values, q the step. With `rng` null the noise is
/// omitted (evaluation mode).
template <typename T, typename Rng = std::mt19937_64>
SimulatedQuantization<T> simulate_quantization(std::span<const T> values, T q, Rng* rng = nullptr) {
  check(q > T(0) && std::isfinite(static_cast<double>(q)), ErrorCategory::kDomain,
        "quantization step must be positive");
  SimulatedQuantization<T> out;
  out.noisy.resize(values.size());
  out.ints.resize(values.size());
  out.dequantized.resize(values.size());
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T y = values[i] / q;
    out.noisy[i] = rng ? static_cast<T>(static_cast<double>(y) + u(*rng)) : y;
    out.ints[i] = quantize_latent(y);
    out.dequantized[i] = static_cast<T>(out.ints[i]) * q;
  }
  return out;
}

/// d/dq of a loss through the decoded values q * k (integers held fixed),
/// given the loss gradient w.r.t. those values.
template <typename T>
double qstep_gradient(std::span<const std::int32_t> ints, std::span<const T> grad_values) {
  check(ints.size() == grad_values.size(), ErrorCategory::kDomain, "qstep_gradient: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < ints.size(); ++i) s += static_cast<double>(ints[i]) * grad_values[i];
  return s;
}

/// Training surrogate for d/dq of q * round(v / q): product rule with the
/// rounding treated as identity, i.e. sum (round(v/q) - v/q) * g.
template <typename T>
double qstep_gradient_ste(std::span<const T> values, std::span<const std::int32_t> ints, T q,
                          std::span<const T> grad_values) {
  check(values.size() == ints.size() && ints.size() == grad_values.size(), ErrorCategory::kDomain,
        "qstep_gradient_ste: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < ints.size(); ++i)
    s += (static_cast<double>(ints[i]) - static_cast<double>(values[i] / q)) * grad_values[i];
  return s;
}

}  // namespace voxcodec
