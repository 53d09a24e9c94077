// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "voxcodec/scene/dataset.hpp"
#include "voxcodec/scene/metrics.hpp"

using namespace voxcodec;

namespace {

SceneSpec small_spec() {
  SceneSpec s;
  s.frames = 2;
  s.width = s.height = 12;
  s.cameras = 3;
  s.test_cameras = 1;
  s.background = {0.1, 0.2, 0.3};
  s.gt_steps_per_diagonal = 512;
  return s;
}

Image random_image(vt::Rng& rng, int w, int h) {
  Image im(w, h);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  for (auto& v : im.rgb) v = u(rng);
  return im;
}

}  // namespace

TEST(SceneSpec, ParsesSceneFile) {
  std::istringstream in(
      "# comment\nframes = 5\nbox = -1 -1 -1 1 1 1\nbackground = 0.5 0.5 0.5\nresolution = 32 24\n"
      "cameras = 6\ntest_cameras = 2\n"
      "primitive = sphere center=0.1,0,0 radius=0.3 color=1,0,0 density=25 velocity=0.01,0,0\n"
      "primitive = box center=0,0,0 half=0.2,0.2,0.2 color=0,1,0 amplitude=0,0.1,0 frequency=0.1\n");
  const auto s = parse_scene(in);
  EXPECT_EQ(s.frames, 5);
  EXPECT_EQ(s.width, 32);
  EXPECT_EQ(s.height, 24);
  EXPECT_EQ(s.cameras, 6);
  EXPECT_EQ(s.test_cameras, 2);
  ASSERT_EQ(s.primitives.size(), 2u);
  EXPECT_EQ(s.primitives[0].kind, PrimitiveKind::kSphere);
  EXPECT_EQ(s.primitives[0].density, 25.0);
  EXPECT_EQ(s.primitives[1].kind, PrimitiveKind::kBox);
  EXPECT_EQ(s.primitives[1].frequency, 0.1);
  EXPECT_NO_THROW(s.validate());
}

TEST(SceneSpec, RejectsBadInput) {
  std::istringstream unknown("frames = 2\nwobble = 3\n");
  EXPECT_EQ(vt::error_of([&] { parse_scene(unknown); }), ErrorCategory::kConfig);
  std::istringstream kind("primitive = cone center=0,0,0\n");
  EXPECT_EQ(vt::error_of([&] { parse_scene(kind); }), ErrorCategory::kConfig);
  auto s = small_spec();
  Primitive p;
  p.radius = 0.3;
  p.center = {0.6, 0, 0};
  p.velocity = {0.1, 0, 0};  // leaves the box by frame 1
  s.primitives.push_back(p);
  EXPECT_EQ(vt::error_of([&] { s.validate(); }), ErrorCategory::kConfig);
  s.primitives[0].velocity = {};
  s.primitives[0].density = -1;
  EXPECT_EQ(vt::error_of([&] { s.validate(); }), ErrorCategory::kConfig);
  EXPECT_EQ(vt::error_of([] { load_scene("/nonexistent/scene.txt"); }), ErrorCategory::kUsage);
}

TEST(SceneSpec, ToySampleIsValid) {
  const auto s = load_scene(std::filesystem::path(VOXCODEC_SAMPLES_DIR) / "toy_scene.txt");
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.width, 64);
  EXPECT_EQ(s.cameras, 8);
  EXPECT_EQ(s.test_cameras, 2);
}

TEST(Dataset, EmptySceneIsBackground) {
  const auto d = generate_dataset(small_spec());
  ASSERT_EQ(d.cameras.size(), 4u);
  for (const auto& frame : d.images)
    for (const auto& im : frame)
      for (int r = 0; r < im.height; ++r)
        for (int c = 0; c < im.width; ++c)
          for (int k = 0; k < 3; ++k) ASSERT_EQ(im.at(r, c, k), static_cast<float>(d.background[k]));
}

TEST(Dataset, OpaqueSphereShowsItsColor) {
  auto s = small_spec();
  s.width = s.height = 11;  // odd, so a pixel centre lies on the optical axis
  Primitive p;
  p.radius = 0.4;
  p.density = 1000.0;
  p.color = {0.9, 0.5, 0.25};
  s.primitives.push_back(p);
  const auto d = generate_dataset(s);
  for (const auto& im : d.images[0])
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(im.at(5, 5, k), p.color[k], 1e-3);
}

TEST(Dataset, StaticSceneFramesIdentical) {
  auto s = small_spec();
  Primitive p;
  p.center = {0.2, -0.1, 0.0};
  s.primitives.push_back(p);
  const auto d = generate_dataset(s);
  EXPECT_EQ(d.images[0], d.images[1]);
  const auto again = generate_dataset(s);
  EXPECT_EQ(again.images, d.images);
}

TEST(Dataset, MovingSceneFramesDiffer) {
  auto s = small_spec();
  Primitive p;
  p.velocity = {0.1, 0, 0};
  s.primitives.push_back(p);
  const auto d = generate_dataset(s);
  EXPECT_NE(d.images[0], d.images[1]);
}

TEST(Dataset, SaveLoadRoundTrip) {
  auto s = small_spec();
  Primitive p;
  s.primitives.push_back(p);
  const auto d = generate_dataset(s);
  const auto dir = vt::temp_dir("dataset");
  save_dataset(d, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "frame_1" / "cam_3.ppm"));
  const auto back = load_dataset(dir);
  EXPECT_EQ(back.width, d.width);
  EXPECT_EQ(back.frames, d.frames);
  EXPECT_EQ(back.train_cameras, d.train_cameras);
  EXPECT_EQ(back.background, d.background);
  EXPECT_EQ(back.box.lo.x, d.box.lo.x);
  ASSERT_EQ(back.cameras.size(), d.cameras.size());
  for (std::size_t c = 0; c < d.cameras.size(); ++c) {
    EXPECT_EQ(back.cameras[c].rotation, d.cameras[c].rotation);
    EXPECT_EQ(back.cameras[c].position.z, d.cameras[c].position.z);
    EXPECT_EQ(back.images[1][c], quantize8(d.images[1][c]));
  }
  EXPECT_EQ(load_dataset(dir, false).images.size(), 0u);
  EXPECT_EQ(vt::error_of([&] { load_dataset(dir / "nope"); }), ErrorCategory::kIo);
}

TEST(Image, PpmRoundTrip) {
  vt::Rng rng(1);
  const auto im = random_image(rng, 7, 5);
  const auto path = vt::temp_dir("ppm") / "a.ppm";
  save_image(path, im);
  const auto back = load_image(path);
  EXPECT_EQ(back.width, 7);
  EXPECT_EQ(back.height, 5);
  for (std::size_t i = 0; i < im.rgb.size(); ++i) EXPECT_LE(std::abs(back.rgb[i] - im.rgb[i]), 1.0f / 255.0f);
  EXPECT_EQ(back, quantize8(im));
}

TEST(Image, BlackFileLayout) {
  const auto path = vt::temp_dir("ppm_black") / "b.ppm";
  save_image(path, Image(10, 4));
  const std::string header = "P6\n10 4\n255\n";
  EXPECT_EQ(std::filesystem::file_size(path), header.size() + 3 * 10 * 4);
  std::ifstream f(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  for (std::size_t i = header.size(); i < bytes.size(); ++i) ASSERT_EQ(bytes[i], '\0');
}

TEST(Image, MalformedFiles) {
  const auto dir = vt::temp_dir("ppm_bad");
  {
    std::ofstream(dir / "p3.ppm") << "P3\n1 1\n255\n0 0 0\n";
    std::ofstream f(dir / "short.ppm", std::ios::binary);
    f << "P6\n4 4\n255\n" << std::string(10, 'x');
  }
  EXPECT_EQ(vt::error_of([&] { load_image(dir / "p3.ppm"); }), ErrorCategory::kFormat);
  EXPECT_EQ(vt::error_of([&] { load_image(dir / "short.ppm"); }), ErrorCategory::kFormat);
  EXPECT_EQ(vt::error_of([&] { load_image(dir / "missing.ppm"); }), ErrorCategory::kIo);
}

TEST(Metrics, PsnrOfUniformOffset) {
  Image a(8, 8, 0.3f), b(8, 8, 0.4f);
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-5);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
}

TEST(Metrics, IdenticalImages) {
  vt::Rng rng(2);
  const auto a = random_image(rng, 16, 16);
  EXPECT_EQ(psnr(a, a), kPsnrInfinity);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Metrics, SizeMismatch) {
  EXPECT_EQ(vt::error_of([] { psnr(Image(2, 2), Image(2, 3)); }), ErrorCategory::kDomain);
  EXPECT_EQ(vt::error_of([] { ssim(Image(2, 2), Image(3, 2)); }), ErrorCategory::kDomain);
}

TEST(Metrics, SsimBoundsAndOrdering) {
  vt::Rng rng(3);
  const auto a = random_image(rng, 20, 20);
  auto slightly = a;
  std::normal_distribution<float> n(0.f, 0.02f);
  for (auto& v : slightly.rgb) v += n(rng);
  auto other = random_image(rng, 20, 20);
  Image inverted = a;
  for (auto& v : inverted.rgb) v = 1.f - v;
  for (const Image* b : {&slightly, &other, &inverted}) {
    const double s = ssim(a, *b);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(s, ssim(*b, a), 1e-12);
  }
  EXPECT_GT(ssim(a, slightly), ssim(a, other));
  EXPECT_LT(ssim(a, inverted), 0.0);
}

TEST(Metrics, SsimMatchesConstantImageClosedForm) {
  // Flat images: variances vanish, SSIM = (2 ab + c1) / (a^2 + b^2 + c1).
  const double a = 0.4, b = 0.6, c1 = 1e-4;
  EXPECT_NEAR(ssim(Image(16, 16, 0.4f), Image(16, 16, 0.6f)), (2 * a * b + c1) / (a * a + b * b + c1), 1e-6);
}

TEST(Metrics, BdRate) {
  const std::vector<RdPoint> a{{100, 30}, {150, 32}, {230, 34}, {400, 36}, {700, 37.5}};
  EXPECT_NEAR(bd_rate(a, a), 0.0, 1e-9);
  auto b = a;
  for (auto& p : b) p.rate *= 0.8;
  EXPECT_NEAR(bd_rate(a, b), -20.0, 1e-8);
  // antisymmetric in log-rate
  auto c = a;
  const double bump[] = {0.3, -0.2, 0.5, 0.1, -0.4};
  for (std::size_t i = 0; i < c.size(); ++i) c[i].psnr += bump[i];
  const double ab = bd_rate(a, c), ba = bd_rate(c, a);
  EXPECT_NEAR(std::log1p(ab / 100), -std::log1p(ba / 100), 0.02);
  EXPECT_EQ(vt::error_of([&] { bd_rate({a.begin(), a.begin() + 3}, a); }), ErrorCategory::kDomain);
  const std::vector<RdPoint> far{{100, 50}, {150, 51}, {230, 52}, {400, 53}};
  EXPECT_EQ(vt::error_of([&] { bd_rate(a, far); }), ErrorCategory::kDomain);
}
