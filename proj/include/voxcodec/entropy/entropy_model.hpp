// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "voxcodec/entropy/context.hpp"
#include "voxcodec/entropy/laplace.hpp"
#include "voxcodec/render/render_mlp.hpp"

namespace voxcodec {

/// Per-frame context -> (mu, log b) perceptron:
///   h = relu(W1 ctx + b1),  [mu, log b] = W2 h + b2.
/// Trained alongside the grids, then transmitted with the frame.
template <typename T>
class ImplicitEntropyModel {
 public:
  static constexpr int kHidden = 32;
  static constexpr int kInputs = kContextWidth;

  ImplicitEntropyModel() : params_(kParamCount, T(0)) {}

  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }

  std::vector<TensorSlice> tensors() const {
    return {{kW1, std::size_t(kHidden) * kInputs}, {kB1, kHidden}, {kW2, 2 * kHidden}, {kB2, 2}};
  }

  /// He-uniform first layer; the output weights start at zero so the initial
  /// prediction is mu = 0, b = exp(log_b) everywhere (b = 1 by default).
  template <typename Rng>
  void initialize(Rng& rng, T log_b = T(0)) {
    std::fill(params_.begin(), params_.end(), T(0));
    const double a = std::sqrt(6.0 / kInputs);
    std::uniform_real_distribution<double> u(-a, a);
    for (std::size_t i = 0; i < std::size_t(kHidden) * kInputs; ++i)
      params_[kW1 + i] = static_cast<T>(u(rng));
    params_[kB2 + 1] = log_b;
  }

  struct Activations {
    std::array<T, kHidden> h{};
    T mu_raw = 0;
    T log_b = 0;
    bool b_clamped = false;
  };

  /// Fixed-order evaluation; the same arithmetic runs on both coder sides.
  LaplaceParams predict(std::span<const T> ctx, Activations& a) const {
    const T* w1 = params_.data() + kW1;
    const T* b1 = params_.data() + kB1;
    for (int j = 0; j < kHidden; ++j) {
      T acc = b1[j];
      const T* wr = w1 + std::size_t(j) * kInputs;
      for (int k = 0; k < kInputs; ++k) acc += wr[k] * ctx[k];
      a.h[j] = acc > T(0) ? acc : T(0);
    }
    const T* w2 = params_.data() + kW2;
    T mu = params_[kB2], lb = params_[kB2 + 1];
    for (int k = 0; k < kHidden; ++k) {
      mu += w2[k] * a.h[k];
      lb += w2[kHidden + k] * a.h[k];
    }
    a.mu_raw = mu;
    a.log_b = lb;
    if (!std::isfinite(static_cast<double>(mu)) || !std::isfinite(static_cast<double>(lb))) {
      throw Error(ErrorCategory::kDiverged, "entropy model produced a non-finite output");
    }
    const double b = std::exp(static_cast<double>(lb));
    a.b_clamped = !(b > kScaleMin && b < kScaleMax);
    return {static_cast<double>(mu), std::clamp(b, kScaleMin, kScaleMax)};
  }

  LaplaceParams predict(std::span<const T> ctx) const {
    Activations a;
    return predict(ctx, a);
  }

  /// Accumulates d(loss)/d(params) given d(loss)/d(mu) and d(loss)/d(b).
  void backward(std::span<const T> ctx, const Activations& a, const LaplaceParams& p, double d_mu,
                double d_b, std::span<T> grad) const {
    const T g_mu = static_cast<T>(d_mu);
    const T g_lb = a.b_clamped ? T(0) : static_cast<T>(d_b * p.b);
    if (g_mu == T(0) && g_lb == T(0)) return;
    const T* w2 = params_.data() + kW2;
    T* gw2 = grad.data() + kW2;
    grad[kB2] += g_mu;
    grad[kB2 + 1] += g_lb;
    T* gw1 = grad.data() + kW1;
    T* gb1 = grad.data() + kB1;
    for (int j = 0; j < kHidden; ++j) {
      gw2[j] += g_mu * a.h[j];
      gw2[kHidden + j] += g_lb * a.h[j];
      if (a.h[j] <= T(0)) continue;
      const T dh = g_mu * w2[j] + g_lb * w2[kHidden + j];
      gb1[j] += dh;
      T* gr = gw1 + std::size_t(j) * kInputs;
      for (int k = 0; k < kInputs; ++k) gr[k] += dh * ctx[k];
    }
  }

  template <typename U>
  ImplicitEntropyModel<U> cast() const {
    ImplicitEntropyModel<U> m;
    std::copy(params_.begin(), params_.end(), m.params().begin());
    return m;
  }

  friend bool operator==(const ImplicitEntropyModel& a, const ImplicitEntropyModel& b) {
    return a.params_ == b.params_;
  }

  static constexpr std::size_t kW1 = 0;
  static constexpr std::size_t kB1 = kW1 + std::size_t(kHidden) * kInputs;
  static constexpr std::size_t kW2 = kB1 + kHidden;
  static constexpr std::size_t kB2 = kW2 + 2 * kHidden;
  static constexpr std::size_t kParamCount = kB2 + 2;

 private:
  std::vector<T> params_;
};

/// predict_params: model output for one context, validated.
template <typename T>
LaplaceParams predict_params(const ImplicitEntropyModel<T>& model, std::span<const T> ctx) {
  return model.predict(ctx);
}

}  // namespace voxcodec
