// Copyright 2026 The regmosaic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "regmosaic/imaging.hpp"

#include <numeric>

#include <gtest/gtest.h>

#include "regmosaic/error.hpp"
#include "regmosaic/synth.hpp"
#include "test_util.hpp"

namespace regmosaic {
namespace {

TEST(GrayImage, ValidatesSizeAndRange) {
  EXPECT_THROW(GrayImage(2, 2, std::vector<double>(3, 0.0)), Error);
  EXPECT_THROW(GrayImage(1, 1, std::vector<double>{256.0}), Error);
  EXPECT_THROW(GrayImage(1, 1, std::vector<double>{std::nan("")}), Error);
  EXPECT_THROW(GrayImage(-1, 2), Error);
  const GrayImage img(3, 2, 7.0);
  EXPECT_EQ(img.size(), 6u);
  EXPECT_EQ(img.center_x(), 1.0);
  EXPECT_EQ(img.center_y(), 0.5);
}

TEST(SampleBilinear, ExactOnLattice) {
  const auto img = test::uniform_noise(8, 6, 3);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(*sample_bilinear(img, x, y), img.at(x, y));
}

TEST(SampleBilinear, ReproducesLinearRamp) {
  const auto img = test::ramp_image(10, 10, 2.0, 3.0, 1.0);
  const auto v = sample_bilinear(img, 4.25, 7.5);
  ASSERT_TRUE(v);
  EXPECT_NEAR(*v, 1.0 + 2.0 * 4.25 + 3.0 * 7.5, 1e-12);
}

TEST(SampleBilinear, OutsideReturnsNothing) {
  const GrayImage img(4, 4, 1.0);
  EXPECT_FALSE(sample_bilinear(img, -0.01, 1));
  EXPECT_FALSE(sample_bilinear(img, 3.01, 1));
  EXPECT_FALSE(sample_bilinear(img, 1, 3.5));
  EXPECT_TRUE(sample_bilinear(img, 3.0, 3.0));
}

TEST(SampleBilinear, GradientMatchesFiniteDifferencesInsideCells) {
  const auto img = test::uniform_noise(12, 12, 9);
  for (double x : {1.3, 5.7, 9.2}) {
    for (double y : {2.6, 4.1, 10.4}) {
      const auto s = sample_bilinear_with_gradient(img, x, y);
      ASSERT_TRUE(s);
      const double h = 1e-6;
      const double fx = (*sample_bilinear(img, x + h, y) - *sample_bilinear(img, x - h, y)) / (2 * h);
      const double fy = (*sample_bilinear(img, x, y + h) - *sample_bilinear(img, x, y - h)) / (2 * h);
      EXPECT_NEAR(s->dx, fx, 1e-5);
      EXPECT_NEAR(s->dy, fy, 1e-5);
      EXPECT_EQ(s->value, *sample_bilinear(img, x, y));
    }
  }
}

TEST(SampleBilinear, MidpointAndBoundary) {
  const GrayImage img(2, 2, std::vector<double>{0, 100, 100, 200});
  EXPECT_EQ(*sample_bilinear(img, 0.5, 0.5), 100.0);
  EXPECT_FALSE(sample_bilinear(img, -0.5, 0));
}

TEST(SampleBilinear, GradientOnLatticeLinesIsTheMeanOfOneSidedSlopes) {
  const GrayImage img(3, 3, std::vector<double>{0, 10, 40, 0, 20, 60, 0, 30, 90});
  const auto s = sample_bilinear_with_gradient(img, 1.0, 1.0);
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->dx, 0.5 * ((20 - 0) + (60 - 20)));
  EXPECT_DOUBLE_EQ(s->dy, 0.5 * ((20 - 10) + (30 - 20)));
  const auto edge = sample_bilinear_with_gradient(img, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(edge->dx, 10.0);
}

TEST(Warp, IdentityReproducesTheImage) {
  const auto img = test::uniform_noise(32, 24, 1);
  const auto w = warp(img, Homography::identity(), 32, 24);
  EXPECT_EQ(w.image, img);
  EXPECT_EQ(w.valid_count(), img.size());
}

TEST(Warp, IntegerShiftIsExactAndMasksTheBorder) {
  const auto img = test::uniform_noise(20, 20, 2);
  const auto w = warp(img, Homography::translation(3, 2), 20, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) {
      const bool inside = x + 3 < 20 && y + 2 < 20;
      ASSERT_EQ(w.valid(x, y), inside);
      EXPECT_EQ(w.image.at(x, y), inside ? img.at(x + 3, y + 2) : 0.0);
    }
  }
}

TEST(Warp, RoundTripStaysBelowOneGrayLevel) {
  const auto ref = procedural_texture(256, 256, 4);
  ViewpointChange v;
  v.tx = 3.3;
  v.ty = -2.1;
  v.phi = 0.05;
  v.tz_as_scale = 1.03;
  const auto h = viewpoint_to_homography(v);
  const auto there = warp(ref, h, 256, 256);
  const auto back = warp(there.image, invert(h), 256, 256);
  double sum = 0.0;
  int n = 0;
  for (int y = 32; y < 224; ++y) {
    for (int x = 32; x < 224; ++x) {
      if (!back.valid(x, y)) continue;
      sum += std::abs(back.image.at(x, y) - ref.at(x, y));
      ++n;
    }
  }
  ASSERT_GT(n, 30000);
  EXPECT_LT(sum / n, 1.0);
}

TEST(Warp, TranslationMasksTheRightmostColumns) {
  const auto img = test::uniform_noise(100, 100, 6);
  const auto w = warp(img, Homography::translation(10, 0), 100, 100);
  for (int y = 0; y < 100; y += 11) {
    for (int x = 0; x < 100; ++x) EXPECT_EQ(w.valid(x, y), x < 90);
  }
}

TEST(Pyramid, SingleLevelIsTheInput) {
  const auto img = test::uniform_noise(40, 40, 2);
  const auto p = pyramid(img, 1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], img);
}

TEST(JointHistogram, SelfPairingIsDiagonal) {
  const auto img = test::uniform_noise(64, 64, 5);
  const auto j = joint_histogram(img, WarpedImage{img, std::vector<std::uint8_t>(img.size(), 1)}, 64);
  double off_diagonal = 0.0;
  for (int a = 0; a < 64; ++a)
    for (int b = 0; b < 64; ++b) off_diagonal += a == b ? 0.0 : j.at(a, b);
  EXPECT_EQ(off_diagonal, 0.0);
  EXPECT_EQ(j.total, 4096.0);
}

TEST(Histogram, IndependentNoiseMarginalsAreNearSixBits) {
  const auto a = test::uniform_noise(256, 256, 11), b = test::uniform_noise(256, 256, 12);
  const auto j = joint_histogram(a, WarpedImage{b, std::vector<std::uint8_t>(b.size(), 1)}, 64);
  auto entropy = [](const std::vector<double>& h) {
    double total = 0, e = 0;
    for (double c : h) total += c;
    for (double c : h)
      if (c > 0) e -= c / total * std::log2(c / total);
    return e;
  };
  EXPECT_NEAR(entropy(j.marginal_a()), 6.0, 0.1);
  EXPECT_NEAR(entropy(j.marginal_b()), 6.0, 0.1);
}

TEST(Warp, OutputSizeMayDiffer) {
  const GrayImage img(10, 10, 5.0);
  const auto w = warp(img, Homography::identity(), 4, 6);
  EXPECT_EQ(w.image.width(), 4);
  EXPECT_EQ(w.image.height(), 6);
  EXPECT_EQ(w.valid_count(), 24u);
  EXPECT_EQ(w.image.at(2, 3), 5.0);
}

TEST(Gradient, ConstantIsZeroRampIsExact) {
  const auto c = gradient(test::constant_image(5, 5, 100));
  for (double v : c.gx) EXPECT_EQ(v, 0.0);
  for (double v : c.gy) EXPECT_EQ(v, 0.0);
  const auto r = gradient(test::ramp_image(6, 5, 2.0, -3.0, 50.0));
  for (double v : r.gx) EXPECT_NEAR(v, 2.0, 1e-12);
  for (double v : r.gy) EXPECT_NEAR(v, -3.0, 1e-12);
}

TEST(Gradient, CentralDifferencesInside) {
  const auto img = test::uniform_noise(7, 7, 5);
  const auto g = gradient(img);
  EXPECT_DOUBLE_EQ(g.gx[3 * 7 + 3], 0.5 * (img.at(4, 3) - img.at(2, 3)));
  EXPECT_DOUBLE_EQ(g.gy[3 * 7 + 3], 0.5 * (img.at(3, 4) - img.at(3, 2)));
  EXPECT_DOUBLE_EQ(g.gx[3 * 7 + 0], img.at(1, 3) - img.at(0, 3));
}

TEST(Gradient, TooSmallThrows) {
  try {
    gradient(GrayImage(2, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImageTooSmall);
  }
}

TEST(Pyramid, SizesAndConstantPreserved) {
  const auto p = pyramid(test::constant_image(256, 128, 42.0), 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[1].width(), 128);
  EXPECT_EQ(p[2].width(), 64);
  EXPECT_EQ(p[2].height(), 32);
  for (double v : p[2].data()) EXPECT_NEAR(v, 42.0, 1e-12);
}

TEST(Pyramid, HalvesCenteredCoordinates) {
  // Linear ramp: interior level-1 pixel i must equal the ramp at 2i + 0.5.
  const auto p = pyramid(test::ramp_image(128, 128, 1.0, 0.5), 2);
  for (int y = 2; y < 62; y += 7)
    for (int x = 2; x < 62; x += 5)
      EXPECT_NEAR(p[1].at(x, y), (2 * x + 0.5) + 0.5 * (2 * y + 0.5), 1e-10);
}

TEST(Pyramid, MeanApproximatelyPreserved) {
  const auto tex = procedural_texture(256, 256, 6);
  const auto p = pyramid(tex, 3);
  auto mean = [](const GrayImage& g) {
    const auto d = g.data();
    return std::accumulate(d.begin(), d.end(), 0.0) / d.size();
  };
  EXPECT_NEAR(mean(p[1]), mean(tex), 1.0);
  EXPECT_NEAR(mean(p[2]), mean(tex), 1.0);
}

TEST(Pyramid, RejectsTooSmallAndZeroLevels) {
  EXPECT_THROW(pyramid(GrayImage(100, 100), 3), Error);
  EXPECT_NO_THROW(pyramid(GrayImage(128, 128), 3));
  EXPECT_THROW(pyramid(GrayImage(64, 64), 0), Error);
}

TEST(Histogram, BinBoundaries) {
  EXPECT_EQ(intensity_bin(0.0, 64), 0);
  EXPECT_EQ(intensity_bin(3.999, 64), 0);
  EXPECT_EQ(intensity_bin(4.0, 64), 1);
  EXPECT_EQ(intensity_bin(255.0, 64), 63);
  EXPECT_EQ(intensity_bin(255.0, 1), 0);
}

TEST(Histogram, CountsAndMask) {
  const auto img = test::uniform_noise(16, 16, 7);
  const auto h = histogram(img, {}, 64);
  EXPECT_EQ(std::accumulate(h.begin(), h.end(), 0.0), 256.0);
  std::vector<std::uint8_t> mask(256, 0);
  for (int i = 0; i < 100; ++i) mask[i] = 1;
  const auto hm = histogram(img, mask, 64);
  EXPECT_EQ(std::accumulate(hm.begin(), hm.end(), 0.0), 100.0);
  EXPECT_THROW(histogram(img, std::vector<std::uint8_t>(3, 1), 64), Error);
}

TEST(JointHistogram, MarginalsMatchSingleHistograms) {
  const auto a = test::uniform_noise(32, 32, 1);
  const auto w = warp(test::uniform_noise(32, 32, 2), Homography::translation(1.5, 0), 32, 32);
  const auto j = joint_histogram(a, w, 32);
  EXPECT_EQ(j.total, static_cast<double>(w.valid_count()));
  EXPECT_EQ(j.marginal_a(), histogram(a, w.mask, 32));
  EXPECT_EQ(j.marginal_b(), histogram(w.image, w.mask, 32));
}

TEST(JointHistogram, EmptyOverlapAndMismatch) {
  const GrayImage a(8, 8, 1.0);
  const auto none = warp(a, Homography::translation(100, 0), 8, 8);
  try {
    joint_histogram(a, none, 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyOverlap);
  }
  const auto other = warp(a, Homography::identity(), 4, 4);
  EXPECT_THROW(joint_histogram(a, other, 16), Error);
}

TEST(Luminance, Weights) {
  EXPECT_DOUBLE_EQ(luminance(255, 255, 255), 255.0);
  EXPECT_DOUBLE_EQ(luminance(100, 0, 0), 29.9);
}

}  // namespace
}  // namespace regmosaic
