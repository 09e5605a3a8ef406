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


#include "regmosaic/register_qd.hpp"

#include <thread>

#include <gtest/gtest.h>

#include "regmosaic/error.hpp"
#include "regmosaic/eval.hpp"
#include "regmosaic/synth.hpp"
#include "test_util.hpp"

namespace regmosaic {
namespace {

using test::kDeg;

const GrayImage& fixture() {
  static const GrayImage tex = procedural_texture(1024, 1024, 1);
  return tex;
}

double pair_error(const ViewpointChange& v, const QDOptions& opts = {}) {
  const auto p = make_pair(fixture(), v, 256);
  const auto r = register_qd(p.target, p.source, Homography::identity(), opts);
  return mean_registration_error(p.truth, r.theta_hat, 256, 256);
}

GrayImage offset(const GrayImage& img, double c) {
  std::vector<double> d(img.data().begin(), img.data().end());
  for (double& v : d) v += c;
  return GrayImage(img.width(), img.height(), std::move(d));
}

TEST(Ssd, ImageVersusItselfIsZero) {
  const auto img = test::uniform_noise(64, 64, 1);
  EXPECT_EQ(ssd(img, img, Homography::identity()), 0.0);
}

TEST(Ssd, ConstantOffsetSquares) {
  EXPECT_EQ(ssd(GrayImage(32, 32, 100.0), GrayImage(32, 32, 110.0), Homography::identity()), 100.0);
}

TEST(Ssd, UsesOnlyTheOverlap) {
  const GrayImage t(40, 40, 10.0), s(40, 40, 20.0);
  EXPECT_EQ(ssd(t, s, Homography::translation(25, 0)), 100.0);
  try {
    ssd(t, s, Homography::translation(100, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyOverlap);
  }
}

TEST(Ssd, MinimalAtTheTruthAlongAScan) {
  ViewpointChange v;
  v.tx = 6;
  const auto p = make_pair(fixture(), v, 256);
  double best = 1e300, best_tx = 0;
  for (double tx = 0; tx <= 12; tx += 0.5) {
    const double c = ssd(p.target, p.source, Homography::translation(tx, 0));
    if (c < best) {
      best = c;
      best_tx = tx;
    }
  }
  EXPECT_EQ(best_tx, 6.0);
  EXPECT_LT(best, 1e-18);
}

TEST(RegisterQd, IdenticalImagesStayAtIdentity) {
  const auto img = procedural_texture(256, 256, 2);
  const auto r = register_qd(img, img, Homography::identity());
  EXPECT_LT(max_corner_displacement(r.theta_hat, Homography::identity(), 256, 256), 1e-3);
  EXPECT_LE(r.iterations, 2);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(std::isfinite(r.final_score));
}

TEST(RegisterQd, TranslationAtTheTableLimit) {
  ViewpointChange v;
  v.tx = 25;
  EXPECT_LE(pair_error(v), 1.0);
  v.tx = -25;
  v.ty = 0;
  EXPECT_LE(pair_error(v), 1.0);
  ViewpointChange w;
  w.ty = 25;
  EXPECT_LE(pair_error(w), 1.0);
}

TEST(RegisterQd, ScaleFifteenPercent) {
  ViewpointChange v;
  v.tz_as_scale = 1.15;
  EXPECT_LE(pair_error(v), 1.0);
  v.tz_as_scale = 0.85;
  EXPECT_LE(pair_error(v), 1.0);
}

TEST(RegisterQd, RotationAndTiltInsideTheColumn) {
  for (double deg : {-10.0, 10.0}) {
    ViewpointChange v;
    v.phi = deg * kDeg;
    EXPECT_LE(pair_error(v), 1.0) << "phi " << deg;
  }
  ViewpointChange v;
  v.psi = 10 * kDeg;
  v.alpha = -10 * kDeg;
  EXPECT_LE(pair_error(v), 1.0);
}

TEST(RegisterQd, GeneralSmallMotionIsSubPixel) {
  ViewpointChange v;
  v.tx = 4.3;
  v.ty = -2.7;
  v.phi = 1.5 * kDeg;
  v.tz_as_scale = 1.02;
  v.psi = 1 * kDeg;
  EXPECT_LT(pair_error(v), 0.05);
}

TEST(RegisterQd, FinalCostNotAboveInitialCost) {
  for (double tx : {3.0, 8.0, 15.0}) {
    ViewpointChange v;
    v.tx = tx;
    v.phi = 2 * kDeg;
    const auto p = make_pair(fixture(), v, 256);
    const auto r = register_qd(p.target, p.source, Homography::identity());
    EXPECT_LE(r.final_score, ssd(p.target, p.source, Homography::identity()));
    EXPECT_NEAR(r.final_score, ssd(p.target, p.source, r.theta_hat), 1e-9 * (1 + r.final_score));
    EXPECT_LE(r.total_iterations, 3 * QDOptions{}.max_iterations_per_level +
                                      QDOptions{}.translation_init_iterations);
  }
}

TEST(RegisterQd, EquivariantUnderIntensityOffset) {
  ViewpointChange v;
  v.tx = 7;
  v.ty = 3;
  v.phi = 3 * kDeg;
  auto p = make_pair(procedural_texture(1024, 1024, 3), v, 256);
  // Keep intensities inside [0, 255] after the shift.
  std::vector<double> t(p.target.data().begin(), p.target.data().end());
  std::vector<double> s(p.source.data().begin(), p.source.data().end());
  for (double& x : t) x *= 0.8;
  for (double& x : s) x *= 0.8;
  const GrayImage target(256, 256, t), source(256, 256, s);
  const auto a = register_qd(target, source, Homography::identity());
  const auto b = register_qd(offset(target, 40.0), offset(source, 40.0), Homography::identity());
  EXPECT_LT(test::max_abs_diff(a.theta_hat.matrix(), b.theta_hat.matrix()), 1e-9);
  EXPECT_EQ(a.converged, b.converged);
}

TEST(RegisterQd, InitIsHonoured) {
  ViewpointChange v;
  v.tx = 60;
  const auto p = make_pair(fixture(), v, 256);
  const auto r = register_qd(p.target, p.source, Homography::translation(58, 1));
  EXPECT_LT(mean_registration_error(p.truth, r.theta_hat, 256, 256), 0.05);
}

TEST(RegisterQd, FarOutsideCaptureIsNotConverged) {
  ViewpointChange v;
  v.tx = 200;
  const auto p = make_pair(procedural_texture(1024, 1024, 1), v, 256);
  try {
    const auto r = register_qd(p.target, p.source, Homography::identity());
    EXPECT_FALSE(r.converged);
  } catch (const Error& e) {
    SUCCEED() << e.what();
  }
}

TEST(RegisterQd, TexturelessOverlapIsSingularHessian) {
  try {
    register_qd(GrayImage(128, 128, 90.0), GrayImage(128, 128, 90.0), Homography::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularHessian);
  }
}

TEST(RegisterQd, PyramidShrinksForSmallImagesButNotBelowTheFloor) {
  const auto img = test::uniform_noise(64, 64, 4);
  const auto r = register_qd(img, img, Homography::identity());
  EXPECT_LT(max_corner_displacement(r.theta_hat, Homography::identity(), 64, 64), 1e-3);
  const auto tiny = test::uniform_noise(16, 16, 4);
  try {
    register_qd(tiny, tiny, Homography::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImageTooSmall);
  }
}

TEST(RegisterQd, ConcurrentCallsAgreeWithSerial) {
  ViewpointChange v;
  v.tx = 9;
  v.phi = 2 * kDeg;
  const auto p = make_pair(fixture(), v, 256);
  const auto serial = register_qd(p.target, p.source, Homography::identity());
  std::vector<RegistrationResult> out(3);
  std::vector<std::thread> threads;
  for (auto& r : out)
    threads.emplace_back([&] { r = register_qd(p.target, p.source, Homography::identity()); });
  for (auto& t : threads) t.join();
  for (const auto& r : out) EXPECT_EQ(r.theta_hat.matrix(), serial.theta_hat.matrix());
}

}  // namespace
}  // namespace regmosaic
