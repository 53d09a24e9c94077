// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "voxcodec/field/occupancy.hpp"

using namespace voxcodec;

namespace {

FeatureGrid<double> random_grid(vt::Rng& rng, Dims d, int ch, Aabb box = vt::unit_box()) {
  FeatureGrid<double> g(d, ch, box);
  fill_uniform(g, 1.0, rng);
  return g;
}

Vec3d random_point(vt::Rng& rng, const Aabb& box) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3d p;
  for (int a = 0; a < 3; ++a) p[a] = box.lo[a] + u(rng) * (box.hi[a] - box.lo[a]);
  return p;
}

}  // namespace

TEST(Trilinear, ExactAtNodes) {
  vt::Rng rng(1);
  const auto g = random_grid(rng, {4, 3, 5}, 3, {{-1, 0, 2}, {2, 1, 4}});
  for (int z = 0; z < 5; ++z)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 4; ++x) {
        const auto f = trilinear_sample(g, g.node_position(x, y, z));
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(f[c], g.at(x, y, z, c), 1e-14);
      }
}

TEST(Trilinear, ConstantGrid) {
  FeatureGrid<double> g(cube(5), 2, vt::unit_box(), 3.5);
  vt::Rng rng(2);
  for (int i = 0; i < 50; ++i)
    for (double v : trilinear_sample(g, random_point(rng, g.box))) EXPECT_DOUBLE_EQ(v, 3.5);
}

TEST(Trilinear, MidpointBetweenTwoNodes) {
  FeatureGrid<double> g(cube(2), 1, vt::unit_box());
  g.at(0, 0, 0, 0) = 1.0;
  g.at(1, 0, 0, 0) = 3.0;
  // weights (1 - u) and u with u = 0.5 along x, y = z = 0 on-node
  const double expected = 0.5 * 1.0 + 0.5 * 3.0;
  EXPECT_DOUBLE_EQ(trilinear_sample(g, Vec3d{0.5, 0.0, 0.0})[0], expected);
  EXPECT_DOUBLE_EQ(expected, 2.0);
}

TEST(Trilinear, OutOfBoxIsAnError) {
  FeatureGrid<double> g(cube(3), 1, vt::unit_box());
  try {
    trilinear_sample(g, Vec3d{1.01, 0.5, 0.5});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kDomain);
  }
  EXPECT_THROW(trilinear_sample(g, Vec3d{0.5, -1e-9, 0.5}), Error);
  EXPECT_NO_THROW(trilinear_sample(g, Vec3d{1.0, 1.0, 0.0}));
}

TEST(Trilinear, AxisSweepIsPiecewiseLinear) {
  vt::Rng rng(3);
  const auto g = random_grid(rng, {6, 4, 4}, 2);
  const int y = 2, z = 1;
  for (int k = 0; k <= 500; ++k) {
    const double xw = k / 500.0;
    const double u = xw * 5.0;
    const int i = std::min(4, static_cast<int>(std::floor(u)));
    const double t = u - i;
    const auto p = g.node_position(0, y, z);
    const auto f = trilinear_sample(g, Vec3d{xw, p.y, p.z});
    for (int c = 0; c < 2; ++c) {
      const double lin = (1 - t) * g.at(i, y, z, c) + t * g.at(i + 1, y, z, c);
      EXPECT_NEAR(f[c], lin, 1e-12);
    }
  }
}

TEST(TrilinearBackward, NodeQueryScattersToThatNodeOnly) {
  vt::Rng rng(4);
  const auto g = random_grid(rng, cube(3), 2);
  std::vector<double> grad(g.size(), 0.0);
  const std::vector<double> up{0.7, -1.3};
  trilinear_backward(g, g.node_position(1, 2, 0), std::span<const double>(up), std::span<double>(grad));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const std::size_t node = i / 2;
    if (node == g.node_index(1, 2, 0)) EXPECT_DOUBLE_EQ(grad[i], up[i % 2]);
    else EXPECT_EQ(grad[i], 0.0);
  }
}

TEST(TrilinearBackward, ZeroUpstreamGivesZero) {
  vt::Rng rng(5);
  const auto g = random_grid(rng, cube(4), 3);
  std::vector<double> grad(g.size(), 0.0);
  const std::vector<double> up(3, 0.0);
  const auto gp = trilinear_backward(g, Vec3d{0.3, 0.6, 0.9}, std::span<const double>(up), std::span<double>(grad));
  for (double v : grad) EXPECT_EQ(v, 0.0);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(gp[a], 0.0);
}

TEST(TrilinearBackward, MatchesFiniteDifferences) {
  vt::Rng rng(6);
  auto g = random_grid(rng, {5, 4, 3}, 2, {{-1, -1, -1}, {1, 2, 0.5}});
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3d p = random_point(rng, g.box);
    const std::vector<double> up{u(rng), u(rng)};
    auto loss = [&](const FeatureGrid<double>& gg, const Vec3d& q) {
      const auto f = trilinear_sample(gg, q);
      return up[0] * f[0] + up[1] * f[1];
    };
    std::vector<double> grad(g.size(), 0.0);
    const auto gp = trilinear_backward(g, p, std::span<const double>(up), std::span<double>(grad));
    const double h = 1e-6;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = g.values[i];
      g.values[i] = v + h;
      const double lp = loss(g, p);
      g.values[i] = v - h;
      const double lm = loss(g, p);
      g.values[i] = v;
      const double fd = (lp - lm) / (2 * h);
      if (std::abs(fd) < 1e-9 && std::abs(grad[i]) < 1e-9) continue;
      EXPECT_LT(vt::rel_err(grad[i], fd), 1e-6) << "value " << i;
    }
    for (int a = 0; a < 3; ++a) {
      Vec3d pp = p, pm = p;
      pp[a] += h;
      pm[a] -= h;
      if (!g.box.contains(pp) || !g.box.contains(pm)) continue;
      EXPECT_LT(vt::rel_err(gp[a], (loss(g, pp) - loss(g, pm)) / (2 * h)), 1e-6) << "axis " << a;
    }
  }
}

TEST(TrilinearBackward, AccumulatesAdditively) {
  vt::Rng rng(7);
  const auto g = random_grid(rng, cube(3), 1);
  const std::vector<double> up{1.0};
  const Vec3d a{0.2, 0.3, 0.4}, b{0.8, 0.1, 0.6};
  std::vector<double> both(g.size(), 0.0), ga(g.size(), 0.0), gb(g.size(), 0.0);
  trilinear_backward(g, a, std::span<const double>(up), std::span<double>(both));
  trilinear_backward(g, b, std::span<const double>(up), std::span<double>(both));
  trilinear_backward(g, a, std::span<const double>(up), std::span<double>(ga));
  trilinear_backward(g, b, std::span<const double>(up), std::span<double>(gb));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(both[i], ga[i] + gb[i]);
}

TEST(Fuse, UnitBasesGiveCoefficient) {
  vt::Rng rng(8);
  auto f = vt::random_frame<double>(rng);
  for (auto& b : f.bases) std::fill(b.values.begin(), b.values.end(), 1.0);
  const Vec3d p{0.31, 0.72, 0.05};
  const auto fused = fuse_features(f, p);
  const auto coeff = trilinear_sample(f.coeff, p);
  for (int c = 0; c < f.channels(); ++c) EXPECT_DOUBLE_EQ(fused[c], coeff[c]);
}

TEST(Fuse, ZeroCoefficientGivesZero) {
  vt::Rng rng(9);
  auto f = vt::random_frame<double>(rng);
  std::fill(f.coeff.values.begin(), f.coeff.values.end(), 0.0);
  for (double v : fuse_features(f, Vec3d{0.5, 0.5, 0.5})) EXPECT_EQ(v, 0.0);
}

TEST(Fuse, HadamardWithBasisMean) {
  FieldLayout l;
  l.coeff_dims = cube(2);
  l.basis_dims = {cube(2), cube(2)};
  l.channels = 2;
  l.box = vt::unit_box();
  FieldFrame<double> f(l);
  for (std::size_t i = 0; i < f.coeff.values.size(); ++i) f.coeff.values[i] = 2.0;
  // basis means (0.5, 3) from (0, 6) and (1, 0)
  for (std::size_t n = 0; n < f.bases[0].node_count(); ++n) {
    f.bases[0].values[n * 2] = 0.0;
    f.bases[0].values[n * 2 + 1] = 6.0;
    f.bases[1].values[n * 2] = 1.0;
    f.bases[1].values[n * 2 + 1] = 0.0;
  }
  const auto fused = fuse_features(f, Vec3d{0.4, 0.4, 0.4});
  EXPECT_DOUBLE_EQ(fused[0], 1.0);
  EXPECT_DOUBLE_EQ(fused[1], 6.0);
}

TEST(Fuse, GradientMatchesFiniteDifferences) {
  vt::Rng rng(10);
  auto f = vt::random_frame<double>(rng, 3, {3, 2}, 2);
  const Vec3d p{0.37, 0.61, 0.23};
  const std::vector<double> up{0.9, -0.4};
  auto loss = [&]() {
    const auto v = fuse_features(f, p);
    return up[0] * v[0] + up[1] * v[1];
  };
  FusedSample<double> fs;
  fuse_features(f, p, fs);
  FieldGrad<double> grad(f);
  fuse_backward(f, fs, std::span<const double>(up), grad);
  const double h = 1e-6;
  for (std::size_t g = 0; g < f.grid_count(); ++g)
    for (std::size_t i = 0; i < f.grid(g).size(); ++i) {
      auto& v = f.grid(g).values[i];
      const double v0 = v;
      v = v0 + h;
      const double lp = loss();
      v = v0 - h;
      const double lm = loss();
      v = v0;
      const double fd = (lp - lm) / (2 * h);
      if (std::abs(fd) < 1e-9 && std::abs(grad.grids[g][i]) < 1e-9) continue;
      EXPECT_LT(vt::rel_err(grad.grids[g][i], fd), 1e-5) << "grid " << g << " value " << i;
    }
}

TEST(FieldFrame, ChannelMismatchIsAConfigError) {
  FieldLayout l;
  l.coeff_dims = cube(2);
  l.basis_dims = {cube(2)};
  l.channels = 2;
  FieldFrame<float> f(l);
  f.bases[0] = FeatureGrid<float>(cube(2), 3, l.box);
  try {
    f.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kConfig);
  }
}

TEST(FieldFrame, QstepsPositiveAndCounted) {
  FieldLayout l;
  FieldFrame<float> f(l);
  EXPECT_EQ(f.qsteps.size(), 1 + l.basis_dims.size());
  f.qsteps[1] = 0.0f;
  EXPECT_THROW(f.validate(), Error);
  f.qsteps.pop_back();
  f.qsteps[1] = 0.1f;
  EXPECT_THROW(f.validate(), Error);
}

namespace {

// 1-channel field: coefficient delta at one node, unit bases. MLP reads
// channel 0 through a single relu unit: sigma = softplus(h - 1000).
struct SpikeField {
  FieldFrame<double> frame;
  RenderMLP<double> mlp;
};

SpikeField spike_field(double spike) {
  FieldLayout l;
  l.coeff_dims = cube(5);  // nodes at 0, .25, .5, .75, 1
  l.basis_dims = {cube(2)};
  l.channels = 1;
  l.box = vt::unit_box();
  SpikeField s{FieldFrame<double>(l), RenderMLP<double>(1, 1, 0)};
  for (auto& v : s.frame.bases[0].values) v = 1.0;
  s.frame.coeff.at(1, 1, 1, 0) = spike;  // cell (0,0,0) center of a 2^3 occupancy grid
  auto& p = s.mlp.params();
  const auto t = s.mlp.tensors();  // w1 b1 ws bs w2 b2 w3 b3
  p[t[0].offset] = 1.0;
  p[t[2].offset] = 1.0;
  p[t[3].offset] = -1000.0;
  return s;
}

}  // namespace

TEST(Occupancy, ZeroDensityGivesEmptyGrid) {
  const auto s = spike_field(0.0);
  const auto occ = build_occupancy(s.frame, s.mlp, cube(2), 1e-4);
  EXPECT_EQ(occ.count_set(), 0u);
}

TEST(Occupancy, SingleOpaqueCell) {
  OccupancyGrid probe(cube(2), vt::unit_box());
  const double delta = probe.cell_diagonal();
  const double sigma = 20.0 / delta;
  const auto s = spike_field(1000.0 + std::log(std::expm1(sigma)));  // softplus^-1
  const auto occ = build_occupancy(s.frame, s.mlp, cube(2), 1e-4);
  EXPECT_EQ(occ.count_set(), 1u);
  EXPECT_EQ(occ.bits[occ.index(0, 0, 0)], 1);
}

TEST(Occupancy, ThresholdZeroSetsEveryCell) {
  const auto s = spike_field(0.0);
  const auto occ = build_occupancy(s.frame, s.mlp, {3, 2, 4}, 0.0);
  EXPECT_EQ(occ.count_set(), occ.bits.size());
}

TEST(Occupancy, PackingSixteenCellsIsTwoBytes) {
  OccupancyGrid occ({4, 2, 2}, vt::unit_box());
  EXPECT_EQ(pack_occupancy(occ).size(), 2u);
}

TEST(Occupancy, PackUnpackIsABijection) {
  vt::Rng rng(11);
  for (Dims d : {Dims{1, 1, 1}, Dims{3, 5, 7}, Dims{8, 8, 8}, Dims{2, 9, 1}}) {
    OccupancyGrid occ(d, vt::unit_box());
    std::bernoulli_distribution b(0.4);
    for (auto& v : occ.bits) v = b(rng) ? 1 : 0;
    const auto packed = pack_occupancy(occ);
    EXPECT_EQ(packed.size(), (d.count() + 7) / 8);
    EXPECT_EQ(unpack_occupancy(std::span<const std::uint8_t>(packed), d, occ.box), occ);
  }
}

TEST(Occupancy, NonZeroPaddingRejected) {
  std::vector<std::uint8_t> packed{0x00, 0x80};
  EXPECT_THROW(unpack_occupancy(std::span<const std::uint8_t>(packed), {3, 3, 1}, vt::unit_box()), Error);
}

TEST(Occupancy, DilationGrowsByChebyshevRadius) {
  OccupancyGrid occ(cube(5), vt::unit_box());
  occ.bits[occ.index(2, 2, 2)] = 1;
  EXPECT_EQ(dilate_occupancy(occ, 1).count_set(), 27u);
  EXPECT_EQ(dilate_occupancy(occ, 0), occ);
}
