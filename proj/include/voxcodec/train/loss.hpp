// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>

#include "voxcodec/common.hpp"

namespace voxcodec {

struct LossReport {
  double distortion = 0.0;  // MSE over sampled rays and channels
  double rate = 0.0;        // mean bits per voxel
  double reg = 0.0;         // mean |residual| (P-frames)
  double total = 0.0;
};

inline LossReport total_loss(double mse, double rate_mean, double reg_mean, double lambda,
                             double alpha, bool p_frame) {
  LossReport r;
  r.distortion = mse;
  r.rate = rate_mean;
  r.reg = p_frame ? reg_mean : 0.0;
  r.total = mse + lambda * (rate_mean + alpha * r.reg);
  check(std::isfinite(r.total), ErrorCategory::kDiverged, "non-finite training loss");
  return r;
}

inline double mse(std::span<const float> a, std::span<const float> b) {
  check(a.size() == b.size() && !a.empty(), ErrorCategory::kDomain, "mse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

inline LossReport total_loss(std::span<const float> rendered, std::span<const float> truth,
                             double rate_mean, double reg_mean, double lambda, double alpha, bool p_frame) {
  return total_loss(mse(rendered, truth), rate_mean, reg_mean, lambda, alpha, p_frame);
}

}  // namespace voxcodec
