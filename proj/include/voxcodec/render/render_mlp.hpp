// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "voxcodec/common.hpp"

namespace voxcodec {

template <typename T>
inline T softplus(T x) {
  return x > T(20) ? x : std::log1p(std::exp(x));
}

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

/// Offset/length of one parameter tensor inside a flat parameter vector.
struct TensorSlice {
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// sin/cos of 2^k * pi * d for k < freqs, per component.
template <typename T>
void encode_direction(const Vec3<T>& d, int freqs, std::span<T> out) {
  std::size_t i = 0;
  for (int k = 0; k < freqs; ++k) {
    const T w = static_cast<T>(std::ldexp(std::numbers::pi, k));
    for (int a = 0; a < 3; ++a) {
      out[i++] = std::sin(w * d[a]);
      out[i++] = std::cos(w * d[a]);
    }
  }
}

/// Tiny feature -> (color, density) network shared by the frames of a group.
///
///   h1 = relu(W1 f + b1)
///   sigma = softplus(w_s . h1 + b_s)                (view independent)
///   h2 = relu(W2 [h1; enc(d)] + b2)
///   c = logistic(W3 h2 + b3)
///
/// All weights live in one flat vector so optimizers and the parameter coder
/// can treat the network as a list of tensors.
template <typename T>
class RenderMLP {
 public:
  RenderMLP() = default;
  RenderMLP(int in_features, int hidden = 64, int dir_freqs = 4)
      : in_(in_features), hidden_(hidden), freqs_(dir_freqs) {
    check(in_ > 0 && hidden_ > 0 && freqs_ >= 0, ErrorCategory::kConfig, "bad render MLP shape");
    std::size_t off = 0;
    auto take = [&](std::size_t n) {
      TensorSlice s{off, n};
      off += n;
      return s;
    };
    w1_ = take(std::size_t(hidden_) * in_);
    b1_ = take(hidden_);
    ws_ = take(hidden_);
    bs_ = take(1);
    w2_ = take(std::size_t(hidden_) * (hidden_ + dir_width()));
    b2_ = take(hidden_);
    w3_ = take(std::size_t(3) * hidden_);
    b3_ = take(3);
    params_.assign(off, T(0));
  }

  int in_features() const { return in_; }
  int hidden() const { return hidden_; }
  int dir_freqs() const { return freqs_; }
  int dir_width() const { return 6 * freqs_; }

  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }

  std::vector<TensorSlice> tensors() const { return {w1_, b1_, ws_, bs_, w2_, b2_, w3_, b3_}; }

  /// He-uniform weights, zero biases, density bias at `density_bias`.
  template <typename Rng>
  void initialize(Rng& rng, T density_bias = T(0)) {
    std::fill(params_.begin(), params_.end(), T(0));
    auto fill = [&](TensorSlice s, int fan_in) {
      const double a = std::sqrt(6.0 / fan_in);
      std::uniform_real_distribution<double> u(-a, a);
      for (std::size_t i = 0; i < s.size; ++i) params_[s.offset + i] = static_cast<T>(u(rng));
    };
    fill(w1_, in_);
    fill(ws_, hidden_);
    fill(w2_, hidden_ + dir_width());
    fill(w3_, hidden_);
    params_[bs_.offset] = density_bias;
  }

  /// Per-ray precomputation: the direction part of layer 2 plus its bias.
  struct RayTerm {
    std::vector<T> enc;
    std::vector<T> dir_term;
  };

  void prepare_ray(const Vec3<T>& d, RayTerm& rt) const {
    const int dw = dir_width();
    rt.enc.resize(dw);
    encode_direction(d, freqs_, std::span<T>(rt.enc));
    rt.dir_term.resize(hidden_);
    const T* w2 = params_.data() + w2_.offset;
    const T* b2 = params_.data() + b2_.offset;
    const int row = hidden_ + dw;
    for (int j = 0; j < hidden_; ++j) {
      T acc = b2[j];
      const T* wr = w2 + std::size_t(j) * row + hidden_;
      for (int k = 0; k < dw; ++k) acc += wr[k] * rt.enc[k];
      rt.dir_term[j] = acc;
    }
  }

  /// Activations kept for the backward pass of one sample.
  struct Activations {
    std::vector<T> h1;  // post-relu (zero where inactive)
    std::vector<T> h2;
    T z_sigma = 0;
    T sigma = 0;
    std::array<T, 3> color{};
  };

  T density(std::span<const T> feature, std::vector<T>& h1_scratch) const {
    layer1(feature, h1_scratch);
    return softplus(density_logit(h1_scratch));
  }

  void forward(std::span<const T> feature, const RayTerm& rt, Activations& a) const {
    layer1(feature, a.h1);
    a.z_sigma = density_logit(a.h1);
    a.sigma = softplus(a.z_sigma);
    a.h2.resize(hidden_);
    const T* w2 = params_.data() + w2_.offset;
    const int row = hidden_ + dir_width();
    for (int j = 0; j < hidden_; ++j) {
      T acc = rt.dir_term[j];
      const T* wr = w2 + std::size_t(j) * row;
      for (int k = 0; k < hidden_; ++k) acc += wr[k] * a.h1[k];
      a.h2[j] = acc > T(0) ? acc : T(0);
    }
    const T* w3 = params_.data() + w3_.offset;
    const T* b3 = params_.data() + b3_.offset;
    for (int c = 0; c < 3; ++c) {
      T acc = b3[c];
      const T* wr = w3 + std::size_t(c) * hidden_;
      for (int k = 0; k < hidden_; ++k) acc += wr[k] * a.h2[k];
      a.color[c] = sigmoid(acc);
    }
  }

  /// Backward of one sample given d(loss)/d(sigma) and d(loss)/d(color).
  /// Accumulates weight gradients into `grad` (same layout as params()),
  /// writes d(loss)/d(feature) into `grad_feature`, and adds this sample's
  /// layer-2 pre-activation gradient into `dz2_sum` (the direction weights
  /// are settled once per ray by finish_ray).
  void backward(std::span<const T> feature, const Activations& a, T d_sigma,
                const std::array<T, 3>& d_color, std::span<T> grad, std::span<T> grad_feature,
                std::span<T> dz2_sum, std::vector<T>& scratch) const {
    const int row = hidden_ + dir_width();
    scratch.assign(std::size_t(2) * hidden_, T(0));
    T* dz2 = scratch.data();
    T* dh1 = scratch.data() + hidden_;

    const T* w3 = params_.data() + w3_.offset;
    T* gw3 = grad.data() + w3_.offset;
    T* gb3 = grad.data() + b3_.offset;
    for (int c = 0; c < 3; ++c) {
      const T dz3 = d_color[c] * a.color[c] * (T(1) - a.color[c]);
      if (dz3 == T(0)) continue;
      gb3[c] += dz3;
      const T* wr = w3 + std::size_t(c) * hidden_;
      T* gr = gw3 + std::size_t(c) * hidden_;
      for (int k = 0; k < hidden_; ++k) {
        gr[k] += dz3 * a.h2[k];
        dz2[k] += dz3 * wr[k];
      }
    }
    for (int k = 0; k < hidden_; ++k)
      if (a.h2[k] <= T(0)) dz2[k] = T(0);

    const T* w2 = params_.data() + w2_.offset;
    T* gw2 = grad.data() + w2_.offset;
    T* gb2 = grad.data() + b2_.offset;
    for (int j = 0; j < hidden_; ++j) {
      const T g = dz2[j];
      if (g == T(0)) continue;
      gb2[j] += g;
      dz2_sum[j] += g;
      const T* wr = w2 + std::size_t(j) * row;
      T* gr = gw2 + std::size_t(j) * row;
      for (int k = 0; k < hidden_; ++k) {
        gr[k] += g * a.h1[k];
        dh1[k] += g * wr[k];
      }
    }

    const T dzs = d_sigma * sigmoid(a.z_sigma);
    const T* ws = params_.data() + ws_.offset;
    T* gws = grad.data() + ws_.offset;
    grad[bs_.offset] += dzs;
    for (int k = 0; k < hidden_; ++k) {
      gws[k] += dzs * a.h1[k];
      dh1[k] += dzs * ws[k];
    }

    const T* w1 = params_.data() + w1_.offset;
    T* gw1 = grad.data() + w1_.offset;
    T* gb1 = grad.data() + b1_.offset;
    std::fill(grad_feature.begin(), grad_feature.end(), T(0));
    for (int j = 0; j < hidden_; ++j) {
      if (a.h1[j] <= T(0)) continue;
      const T g = dh1[j];
      gb1[j] += g;
      const T* wr = w1 + std::size_t(j) * in_;
      T* gr = gw1 + std::size_t(j) * in_;
      for (int k = 0; k < in_; ++k) {
        gr[k] += g * feature[k];
        grad_feature[k] += g * wr[k];
      }
    }
  }

  /// Direction-weight gradient for a whole ray: dz2_sum (x) enc(d).
  void finish_ray(const RayTerm& rt, std::span<const T> dz2_sum, std::span<T> grad) const {
    const int row = hidden_ + dir_width();
    T* gw2 = grad.data() + w2_.offset;
    for (int j = 0; j < hidden_; ++j) {
      const T g = dz2_sum[j];
      if (g == T(0)) continue;
      T* gr = gw2 + std::size_t(j) * row + hidden_;
      for (int k = 0; k < dir_width(); ++k) gr[k] += g * rt.enc[k];
    }
  }

  template <typename U>
  RenderMLP<U> cast() const {
    RenderMLP<U> m(in_, hidden_, freqs_);
    std::copy(params_.begin(), params_.end(), m.params().begin());
    return m;
  }

  friend bool operator==(const RenderMLP& a, const RenderMLP& b) {
    return a.in_ == b.in_ && a.hidden_ == b.hidden_ && a.freqs_ == b.freqs_ &&
           a.params_ == b.params_;
  }

 private:
  void layer1(std::span<const T> f, std::vector<T>& h1) const {
    h1.resize(hidden_);
    const T* w1 = params_.data() + w1_.offset;
    const T* b1 = params_.data() + b1_.offset;
    for (int j = 0; j < hidden_; ++j) {
      T acc = b1[j];
      const T* wr = w1 + std::size_t(j) * in_;
      for (int k = 0; k < in_; ++k) acc += wr[k] * f[k];
      h1[j] = acc > T(0) ? acc : T(0);
    }
  }

  T density_logit(const std::vector<T>& h1) const {
    const T* ws = params_.data() + ws_.offset;
    T acc = params_[bs_.offset];
    for (int k = 0; k < hidden_; ++k) acc += ws[k] * h1[k];
    return acc;
  }

  int in_ = 4;
  int hidden_ = 64;
  int freqs_ = 4;
  TensorSlice w1_, b1_, ws_, bs_, w2_, b2_, w3_, b3_;
  std::vector<T> params_;
};

}  // namespace voxcodec
