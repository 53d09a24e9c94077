// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace voxcodec {

inline constexpr double kScaleMin = 1e-3;
inline constexpr double kScaleMax = 1e4;
inline constexpr double kMassFloor = 1e-9;
inline constexpr int kScaleTableSize = 256;
inline constexpr double kLocationLattice = 64.0;  // mu is snapped to multiples of 1/64

/// Location/scale of a Laplace distribution over the (continuous) voxel
/// value; integer symbols take the mass of [v - 1/2, v + 1/2].
struct LaplaceParams {
  double mu = 0.0;
  double b = 1.0;
  friend bool operator==(const LaplaceParams&, const LaplaceParams&) = default;
};

inline double laplace_cdf(double x, double mu, double b) {
  const double z = (x - mu) / b;
  return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

inline double laplace_pdf(double x, double mu, double b) {
  return 0.5 / b * std::exp(-std::abs(x - mu) / b);
}

/// Mass of [lo, hi] evaluated on whichever side avoids cancellation.
inline double laplace_interval_mass(double lo, double hi, double mu, double b) {
  if (hi <= mu) return 0.5 * (std::exp((hi - mu) / b) - std::exp((lo - mu) / b));
  if (lo >= mu) return 0.5 * (std::exp(-(lo - mu) / b) - std::exp(-(hi - mu) / b));
  return 1.0 - 0.5 * std::exp((lo - mu) / b) - 0.5 * std::exp(-(hi - mu) / b);
}

/// -log2 of the mass of [v - 1/2, v + 1/2], mass floored at 1e-9.
inline double rate_bits(double v, const LaplaceParams& p) {
  const double m = laplace_interval_mass(v - 0.5, v + 0.5, p.mu, p.b);
  return -std::log2(std::max(m, kMassFloor));
}

struct RateGrad {
  double bits = 0.0;
  double d_v = 0.0;
  double d_mu = 0.0;
  double d_b = 0.0;
  bool floored = false;
};

/// rate_bits and its partial derivatives; all zero in the floored regime.
inline RateGrad rate_bits_grad(double v, const LaplaceParams& p) {
  RateGrad g;
  const double lo = v - 0.5, hi = v + 0.5;
  const double m = laplace_interval_mass(lo, hi, p.mu, p.b);
  if (!(m > kMassFloor)) {
    g.bits = -std::log2(kMassFloor);
    g.floored = true;
    return g;
  }
  g.bits = -std::log2(m);
  const double p_hi = laplace_pdf(hi, p.mu, p.b);
  const double p_lo = laplace_pdf(lo, p.mu, p.b);
  const double dm_dv = p_hi - p_lo;
  // dF(x)/db = -(x - mu) / b * pdf(x)
  const double dm_db = -(hi - p.mu) / p.b * p_hi + (lo - p.mu) / p.b * p_lo;
  const double k = -1.0 / (m * std::numbers::ln2);
  g.d_v = k * dm_dv;
  g.d_mu = -g.d_v;
  g.d_b = k * dm_db;
  return g;
}

/// Geometric scale lattice b_k = 1e-3 * 1e7^(k/255), k = 0..255.
inline const std::array<double, kScaleTableSize>& scale_table() {
  static const std::array<double, kScaleTableSize> table = [] {
    std::array<double, kScaleTableSize> t{};
    const double ratio = std::log(kScaleMax / kScaleMin) / (kScaleTableSize - 1);
    for (int k = 0; k < kScaleTableSize; ++k) t[k] = kScaleMin * std::exp(ratio * k);
    t.front() = kScaleMin;
    t.back() = kScaleMax;
    return t;
  }();
  return table;
}

/// Index of the table entry nearest to b (absolute distance, ties to the
/// lower index).
inline int nearest_scale_index(double b) {
  const auto& t = scale_table();
  if (!(b > t.front())) return 0;
  if (b >= t.back()) return kScaleTableSize - 1;
  const auto it = std::upper_bound(t.begin(), t.end(), b);
  const int hi = static_cast<int>(it - t.begin());
  const int lo = hi - 1;
  return (b - t[lo]) <= (t[hi] - b) ? lo : hi;
}

inline double discretize_location(double mu) {
  const double clamped = std::clamp(mu, -32768.0, 32767.0);
  return std::round(clamped * kLocationLattice) / kLocationLattice;
}

/// Snaps mu to multiples of 1/64 and b to the nearest scale-table entry.
/// Idempotent.
inline LaplaceParams discretize_params(const LaplaceParams& p) {
  return {discretize_location(p.mu), scale_table()[nearest_scale_index(p.b)]};
}

}  // namespace voxcodec
