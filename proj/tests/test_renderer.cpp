// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"
#include "voxcodec/render/camera.hpp"
#include "voxcodec/render/volume_render.hpp"
#include "voxcodec/train/quantization.hpp"

using namespace voxcodec;

namespace {

Ray<double> axis_ray(double y = 0.5, double z = 0.5) { return {{-1.0, y, z}, {1.0, 0.0, 0.0}, {}}; }

// One-channel field along x with f(x) = 2 - 4x; the MLP splits the sign of f
// into two hidden units so the sample at x = .25 is red and at x = .75 green,
// both with density logit z.
struct TwoColorScene {
  FieldFrame<double> frame;
  RenderMLP<double> mlp{1, 2, 0};
};

TwoColorScene two_color_scene(double z_logit) {
  FieldLayout l;
  l.coeff_dims = {3, 2, 2};
  l.basis_dims = {cube(2)};
  l.channels = 1;
  l.box = vt::unit_box();
  TwoColorScene s{FieldFrame<double>(l)};
  for (auto& v : s.frame.bases[0].values) v = 1.0;
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 3; ++x) s.frame.coeff.at(x, y, z, 0) = 2.0 - 2.0 * x;
  auto& p = s.mlp.params();
  const auto t = s.mlp.tensors();  // w1 b1 ws bs w2 b2 w3 b3
  p[t[0].offset + 0] = 1.0;        // h1_0 = relu(f)
  p[t[0].offset + 1] = -1.0;       // h1_1 = relu(-f)
  p[t[2].offset + 0] = z_logit;    // |f| = 1 at both samples
  p[t[2].offset + 1] = z_logit;
  p[t[4].offset + 0] = 1.0;  // w2 = identity (row width 2)
  p[t[4].offset + 3] = 1.0;
  // w3 rows: red 80 h2_0, green 80 h2_1, blue 0; biases -40
  p[t[6].offset + 0] = 80.0;
  p[t[6].offset + 3] = 80.0;
  for (int c = 0; c < 3; ++c) p[t[7].offset + c] = -40.0;
  return s;
}

OccupancyGrid full_occ(const Aabb& box = vt::unit_box(), Dims d = cube(4)) { return OccupancyGrid(d, box, true); }

RenderSettings settings(double step, std::array<double, 3> bg = {0, 0, 0}) {
  RenderSettings rs;
  rs.step = step;
  rs.background = bg;
  return rs;
}

}  // namespace

TEST(Camera, PrincipalPixelLooksForward) {
  const auto cam = look_at({3, 1, -2}, {0, 0, 0}, {0, 1, 0}, 9, 9, 10.0);
  const auto r = pixel_ray(cam, {4, 4});
  const auto f = cam.forward();
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(r.dir[a], f[a], 1e-12);
  EXPECT_NEAR(norm(r.dir), 1.0, 1e-12);
}

TEST(Camera, SymmetricPixelsMirror) {
  const auto cam = look_at({0, 0, -3}, {0, 0, 0}, {0, 1, 0}, 8, 6, 7.0);
  const auto a = cam.to_camera(pixel_ray(cam, {1, 2}).dir);
  const auto b = cam.to_camera(pixel_ray(cam, {4, 5}).dir);  // (5 - 1, 7 - 2)
  EXPECT_NEAR(a.x, -b.x, 1e-12);
  EXPECT_NEAR(a.y, -b.y, 1e-12);
  EXPECT_NEAR(a.z, b.z, 1e-12);
}

TEST(Camera, CornerPixelProjectsBack) {
  const auto cam = look_at({1, 2, -4}, {0, 0.5, 0}, {0, 1, 0}, 8, 8, 8.0);
  for (Pixel px : {Pixel{0, 0}, Pixel{7, 7}, Pixel{0, 7}, Pixel{3, 5}}) {
    const auto r = pixel_ray(cam, px);
    const Vec3d p = r.origin + r.dir * 2.5;
    // Independent pinhole projection of the world point.
    const Vec3d rel = p - cam.position;
    const auto& R = cam.rotation;  // columns: right, down, forward
    const double xc = R[0] * rel.x + R[3] * rel.y + R[6] * rel.z;
    const double yc = R[1] * rel.x + R[4] * rel.y + R[7] * rel.z;
    const double zc = R[2] * rel.x + R[5] * rel.y + R[8] * rel.z;
    EXPECT_NEAR(cam.focal * xc / zc + cam.cx, px.col + 0.5, 1e-9);
    EXPECT_NEAR(cam.focal * yc / zc + cam.cy, px.row + 0.5, 1e-9);
  }
}

TEST(Camera, OutOfBoundsPixel) {
  const auto cam = look_at({0, 0, -3}, {0, 0, 0}, {0, 1, 0}, 4, 4, 4.0);
  EXPECT_THROW(pixel_ray(cam, {4, 0}), Error);
  EXPECT_THROW(pixel_ray(cam, {0, -1}), Error);
}

TEST(Camera, RotationMustBeOrthonormal) {
  auto cam = look_at({0, 0, -3}, {0, 0, 0}, {0, 1, 0}, 4, 4, 4.0);
  EXPECT_NO_THROW(cam.validate());
  cam.rotation[0] *= 1.001;
  EXPECT_THROW(cam.validate(), Error);
}

TEST(SampleRay, EmptyOccupancy) {
  OccupancyGrid occ(cube(4), vt::unit_box(), false);
  EXPECT_TRUE(sample_ray(axis_ray(), occ, 0.25).empty());
}

TEST(SampleRay, UnitBoxQuarterSteps) {
  const auto s = sample_ray(axis_ray(), full_occ(), 0.25);
  // ray enters at t = 1 and leaves at t = 2
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(s[i].delta, 0.25);
    EXPECT_NEAR(s[i].t, 1.0 + 0.125 + 0.25 * i, 1e-12);
    EXPECT_NEAR(s[i].x.x, 0.125 + 0.25 * i, 1e-12);
    if (i) {
      EXPECT_GT(s[i].t, s[i - 1].t);
    }
  }
}

TEST(SampleRay, MissingRayIsEmpty) {
  const Ray<double> r{{-1, 2, 0.5}, {1, 0, 0}, {}};
  EXPECT_TRUE(sample_ray(r, full_occ(), 0.1).empty());
}

TEST(SampleRay, SkipsEmptyCells) {
  auto occ = full_occ(vt::unit_box(), {2, 1, 1});
  occ.bits[1] = 0;  // x > 0.5 empty
  const auto s = sample_ray(axis_ray(), occ, 0.25);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_LT(s[1].x.x, 0.5);
}

TEST(SampleRay, NonPositiveStepIsAnError) { EXPECT_THROW(sample_ray(axis_ray(), full_occ(), 0.0), Error); }

TEST(RenderRay, ZeroDensityGivesBackground) {
  auto s = two_color_scene(0.0);
  s.mlp.params()[s.mlp.tensors()[3].offset] = -1000.0;
  s.mlp.params()[s.mlp.tensors()[2].offset] = 0.0;
  s.mlp.params()[s.mlp.tensors()[2].offset + 1] = 0.0;
  const auto rs = settings(0.5, {0.2, 0.4, 0.6});
  const auto col = render_ray(sample_ray(axis_ray(), full_occ(), 0.5), s.frame, s.mlp, axis_ray(), rs);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(col[c], rs.background[c]);
}

TEST(RenderRay, EmptySamplesGiveBackground) {
  auto s = two_color_scene(1.0);
  const auto rs = settings(0.5, {0.3, 0.1, 0.9});
  const auto col = render_ray({}, s.frame, s.mlp, axis_ray(), rs);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(col[c], rs.background[c]);
}

TEST(RenderRay, OpaqueFirstHit) {
  const double step = 0.5;
  const double sigma = 50.0 / step;
  auto s = two_color_scene(sigma);  // softplus(x) = x above 20
  const auto col = render_ray(sample_ray(axis_ray(), full_occ(), step), s.frame, s.mlp, axis_ray(), settings(step));
  EXPECT_NEAR(col[0], 1.0, 1e-9);
  EXPECT_NEAR(col[1], 0.0, 1e-9);
  EXPECT_NEAR(col[2], 0.0, 1e-9);
}

TEST(RenderRay, TwoHalfOpaqueSamples) {
  const double step = 0.5;
  const double sigma = std::numbers::ln2 / step;
  auto s = two_color_scene(std::log(std::expm1(sigma)));  // softplus^-1
  RayTrace<double> tr;
  const auto samples = sample_ray(axis_ray(), full_occ(), step);
  ASSERT_EQ(samples.size(), 2u);
  const auto col = render_ray(samples, s.frame, s.mlp, axis_ray(), settings(step), tr);
  EXPECT_NEAR(tr.alpha[0], 0.5, 1e-12);
  EXPECT_NEAR(tr.alpha[1], 0.5, 1e-12);
  EXPECT_NEAR(col[0], 0.5, 1e-12);
  EXPECT_NEAR(col[1], 0.25, 1e-12);
  EXPECT_NEAR(col[2], 0.0, 1e-12);
}

TEST(RenderRay, WeightsAreBounded) {
  vt::Rng rng(21);
  const Aabb box{{-1, -1, -1}, {1, 1, 1}};
  const auto f = vt::random_frame<double>(rng, 5, {4, 3}, 2, box);
  const auto mlp = vt::random_mlp<double>(rng, 2, 8, 2, 3.0);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100; ++i) {
    const Vec3d o{3 * u(rng), 3 * u(rng), -4};
    const Vec3d target{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
    const Ray<double> r{o, normalized(target - o), {}};
    RayTrace<double> tr;
    render_ray(sample_ray(r, full_occ(box), 0.01), f, mlp, r, settings(0.01), tr);
    double sum = 0;
    for (std::size_t k = 0; k < tr.used; ++k) {
      EXPECT_GE(tr.weight(k), 0.0);
      EXPECT_LE(tr.weight(k), 1.0);
      sum += tr.weight(k);
    }
    EXPECT_LE(sum, 1.0 + 1e-9);
  }
}

TEST(RenderRay, ZeroDensitySampleInsertionInvariance) {
  // sigma = softplus(50 relu(f) - 1000) is exactly 0 wherever f <= 5.
  vt::Rng rng(22);
  FieldLayout l;
  l.coeff_dims = cube(6);
  l.basis_dims = {cube(2)};
  l.channels = 1;
  l.box = vt::unit_box();
  FieldFrame<double> f(l);
  for (auto& v : f.bases[0].values) v = 1.0;
  std::uniform_real_distribution<double> u(-30, 40);
  for (auto& v : f.coeff.values) v = u(rng);
  RenderMLP<double> mlp(1, 2, 1);
  mlp.initialize(rng);
  auto& p = mlp.params();
  const auto t = mlp.tensors();
  p[t[0].offset] = 1.0;
  p[t[0].offset + 1] = 0.3;
  p[t[2].offset] = 50.0;
  p[t[2].offset + 1] = 0.0;
  p[t[3].offset] = -1000.0;
  std::vector<double> h1;
  std::uniform_real_distribution<double> u01(0, 1);
  int inserted_total = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Ray<double> r = axis_ray(u01(rng), u01(rng));
    const auto base = sample_ray(r, full_occ(), 0.02);
    const auto c0 = render_ray(base, f, mlp, r, settings(0.02, {0.1, 0.2, 0.3}));
    auto more = base;
    for (int k = 0; k < 20; ++k) {
      const double tt = 1.0 + u01(rng);
      SamplePoint<double> sp{r.origin + r.dir * tt, 0.02, tt};
      const auto feat = fuse_features(f, sp.x);
      if (mlp.density(std::span<const double>(feat), h1) != 0.0) continue;
      const auto it = std::lower_bound(more.begin(), more.end(), tt, [](const auto& a, double v) { return a.t < v; });
      more.insert(it, sp);
      ++inserted_total;
    }
    const auto c1 = render_ray(more, f, mlp, r, settings(0.02, {0.1, 0.2, 0.3}));
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(c0[c], c1[c], 1e-9);
  }
  EXPECT_GT(inserted_total, 50);
}

namespace {

struct GradCase {
  FieldFrame<double> frame;
  RenderMLP<double> mlp;
  std::vector<Ray<double>> rays;
  std::array<double, 3> up{0.8, -0.5, 0.3};
  RenderSettings rs;
  OccupancyGrid occ;

  double loss() const {
    double s = 0;
    for (const auto& r : rays) {
      const auto c = render_ray(sample_ray(r, occ, rs.step), frame, mlp, r, rs);
      for (int k = 0; k < 3; ++k) s += up[k] * c[k];
    }
    return s;
  }

  void backward(FieldGrad<double>& fg, std::vector<double>& mg) const {
    RayTrace<double> tr;
    BackwardScratch<double> scratch;
    for (const auto& r : rays) {
      render_ray(sample_ray(r, occ, rs.step), frame, mlp, r, rs, tr);
      render_backward(frame, mlp, tr, up, rs, &fg, std::span<double>(mg), scratch);
    }
  }
};

GradCase grad_case(unsigned seed) {
  vt::Rng rng(seed);
  GradCase g{vt::random_frame<double>(rng, 4, {4, 3}, 2), vt::random_mlp<double>(rng, 2, 6, 2, 1.0), {}, {0.8, -0.5, 0.3}, {}, {}};
  g.rs = settings(0.05, {0.2, 0.1, 0.4});
  g.occ = full_occ();
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 4; ++i) {
    const Vec3d o{u(rng), u(rng), -1.5};
    const Vec3d target{u(rng), u(rng), 0.5};
    g.rays.push_back({o, normalized(target - o), {}});
  }
  return g;
}

}  // namespace

TEST(RenderBackward, ZeroUpstreamGivesZeroGradients) {
  auto g = grad_case(31);
  g.up = {0, 0, 0};
  FieldGrad<double> fg(g.frame);
  std::vector<double> mg(g.mlp.params().size(), 0.0);
  g.backward(fg, mg);
  for (const auto& v : fg.grids)
    for (double x : v) EXPECT_EQ(x, 0.0);
  for (double x : mg) EXPECT_EQ(x, 0.0);
}

TEST(RenderBackward, SingleSampleColorWeight) {
  // d C / d c_1 = T_1 a_1; through the output bias: T_1 a_1 c (1 - c).
  auto g = grad_case(32);
  const Ray<double> r = axis_ray(0.4, 0.6);
  const std::vector<SamplePoint<double>> one{{{0.5, 0.4, 0.6}, 0.3, 1.5}};
  RayTrace<double> tr;
  render_ray(one, g.frame, g.mlp, r, g.rs, tr);
  ASSERT_EQ(tr.used, 1u);
  EXPECT_DOUBLE_EQ(tr.trans[0], 1.0);
  std::vector<double> mg(g.mlp.params().size(), 0.0);
  BackwardScratch<double> scratch;
  render_backward(g.frame, g.mlp, tr, std::array<double, 3>{1.0, 0.0, 0.0}, g.rs, static_cast<FieldGrad<double>*>(nullptr), std::span<double>(mg), scratch);
  const double c = tr.act[0].color[0];
  EXPECT_NEAR(mg[g.mlp.tensors()[7].offset], tr.weight(0) * c * (1 - c), 1e-15);
}

TEST(RenderBackward, MatchesFiniteDifferences) {
  auto g = grad_case(33);
  FieldGrad<double> fg(g.frame);
  std::vector<double> mg(g.mlp.params().size(), 0.0);
  g.backward(fg, mg);
  const double h = 1e-4;
  auto fd = [&](double& v) {
    const double v0 = v;
    v = v0 + h;
    const double lp = g.loss();
    v = v0 - h;
    const double lm = g.loss();
    v = v0;
    return (lp - lm) / (2 * h);
  };
  int checked = 0;
  for (std::size_t k = 0; k < g.frame.grid_count(); ++k)
    for (std::size_t i = 0; i < g.frame.grid(k).size(); i += 3) {
      const double n = fd(g.frame.grid(k).values[i]);
      if (std::abs(n) < 1e-8 && std::abs(fg.grids[k][i]) < 1e-8) continue;
      EXPECT_LT(vt::rel_err(fg.grids[k][i], n), 1e-3) << "grid " << k << " value " << i;
      ++checked;
    }
  for (std::size_t i = 0; i < mg.size(); ++i) {
    const double n = fd(g.mlp.params()[i]);
    if (std::abs(n) < 1e-8 && std::abs(mg[i]) < 1e-8) continue;
    EXPECT_LT(vt::rel_err(mg[i], n), 1e-3) << "mlp param " << i;
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(RenderBackward, QstepGradientMatchesFiniteDifferences) {
  // Decoded values are q * k; with k held fixed the loss is smooth in q.
  auto g = grad_case(34);
  vt::Rng rng(35);
  std::uniform_int_distribution<int> ki(-40, 40);
  std::vector<std::vector<std::int32_t>> ints(g.frame.grid_count());
  std::vector<double> q{0.05, 0.02, 0.03};
  auto apply = [&]() {
    for (std::size_t k = 0; k < ints.size(); ++k)
      for (std::size_t i = 0; i < ints[k].size(); ++i) g.frame.grid(k).values[i] = q[k] * ints[k][i];
  };
  for (std::size_t k = 0; k < ints.size(); ++k) {
    ints[k].resize(g.frame.grid(k).size());
    for (auto& v : ints[k]) v = k == 0 ? ki(rng) : 40 + ki(rng) / 2;
  }
  apply();
  FieldGrad<double> fg(g.frame);
  std::vector<double> mg(g.mlp.params().size(), 0.0);
  g.backward(fg, mg);
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double analytic =
        qstep_gradient(std::span<const std::int32_t>(ints[k]), std::span<const double>(fg.grids[k]));
    const double q0 = q[k];
    const double h = 1e-4 * q0;
    q[k] = q0 + h;
    apply();
    const double lp = g.loss();
    q[k] = q0 - h;
    apply();
    const double lm = g.loss();
    q[k] = q0;
    apply();
    EXPECT_LT(vt::rel_err(analytic, (lp - lm) / (2 * h)), 1e-3) << "grid " << k;
  }
}

TEST(RenderView, DeterministicAndBackgroundOutsideBox) {
  vt::Rng rng(36);
  const auto f = vt::random_frame<float>(rng, 4, {4}, 2);
  const auto mlp = vt::random_mlp<float>(rng, 2);
  const auto cam = look_at({0.5, 0.5, -8}, {0.5, 0.5, 0.5}, {0, 1, 0}, 16, 16, 60.0);
  RenderSettings rs = settings(0.02, {0.25, 0.5, 0.75});
  const auto occ = full_occ();
  const auto a = render_view(f, mlp, occ, cam, rs);
  const auto b = render_view(f, mlp, occ, cam, rs);
  EXPECT_EQ(a, b);
  // corner pixel looks past the box
  for (int c = 0; c < 3; ++c) EXPECT_EQ(a[c], static_cast<float>(rs.background[c]));
}
