// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "voxcodec/common.hpp"
#include "voxcodec/scene/image.hpp"

namespace voxcodec {

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) over all channels; +inf for identical images.
inline double psnr(const Image& a, const Image& b) {
  check(a.same_size(b), ErrorCategory::kDomain, "psnr: image sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
    s += d * d;
  }
  if (s == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(static_cast<double>(a.rgb.size()) / s);
}

/// Mean SSIM over channels: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, valid region only. Images smaller than the
/// window use a window clipped to the image.
inline double ssim(const Image& a, const Image& b) {
  check(a.same_size(b), ErrorCategory::kDomain, "ssim: image sizes differ");
  constexpr int kRadius = 5;
  constexpr double kSigma = 1.5;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const int rx = std::min(kRadius, (a.width - 1) / 2);
  const int ry = std::min(kRadius, (a.height - 1) / 2);
  std::vector<double> wx(2 * rx + 1), wy(2 * ry + 1);
  auto gauss = [&](std::vector<double>& w, int r) {
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += w[i + r] = std::exp(-0.5 * i * i / (kSigma * kSigma));
    for (auto& v : w) v /= sum;
  };
  gauss(wx, rx);
  gauss(wy, ry);
  double total = 0.0;
  long count = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = ry; y < a.height - ry; ++y)
      for (int x = rx; x < a.width - rx; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int j = -ry; j <= ry; ++j)
          for (int i = -rx; i <= rx; ++i) {
            const double w = wy[j + ry] * wx[i + rx];
            const double va = a.at(y + j, x + i, c), vb = b.at(y + j, x + i, c);
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
  return total / static_cast<double>(count);
}

struct RdPoint {
  double rate = 0.0;  // any positive rate unit, same for both curves
  double psnr = 0.0;
};

namespace detail {

/// Least-squares cubic log10(rate) = p(psnr); coefficients low order first.
inline Eigen::Vector4d fit_log_rate(const std::vector<RdPoint>& c) {
  Eigen::MatrixXd a(c.size(), 4);
  Eigen::VectorXd y(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    check(c[i].rate > 0.0 && std::isfinite(c[i].psnr), ErrorCategory::kDomain, "bd_rate: invalid curve point");
    for (int k = 0; k < 4; ++k) a(static_cast<Eigen::Index>(i), k) = std::pow(c[i].psnr, k);
    y(static_cast<Eigen::Index>(i)) = std::log10(c[i].rate);
  }
  return a.colPivHouseholderQr().solve(y);
}

inline double poly_integral(const Eigen::Vector4d& p, double lo, double hi) {
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += p(k) / (k + 1) * (std::pow(hi, k + 1) - std::pow(lo, k + 1));
  return s;
}

}  // namespace detail

/// Average rate difference of curve b relative to curve a in percent
/// (negative: b needs fewer bits at equal quality) over the overlapping
/// quality interval.
inline double bd_rate(const std::vector<RdPoint>& a, const std::vector<RdPoint>& b) {
  check(a.size() >= 4 && b.size() >= 4, ErrorCategory::kDomain, "bd_rate needs at least 4 points per curve");
  const auto pa = detail::fit_log_rate(a);
  const auto pb = detail::fit_log_rate(b);
  auto range = [](const std::vector<RdPoint>& c) {
    auto [lo, hi] = std::minmax_element(c.begin(), c.end(), [](auto& x, auto& y) { return x.psnr < y.psnr; });
    return std::pair{lo->psnr, hi->psnr};
  };
  const auto [alo, ahi] = range(a);
  const auto [blo, bhi] = range(b);
  const double lo = std::max(alo, blo), hi = std::min(ahi, bhi);
  check(hi > lo, ErrorCategory::kDomain, "bd_rate: curves do not overlap in quality");
  const double avg = (detail::poly_integral(pb, lo, hi) - detail::poly_integral(pa, lo, hi)) / (hi - lo);
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

}  // namespace voxcodec
