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

#include "regmosaic/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "regmosaic/error.hpp"

namespace regmosaic {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateDivisor: return "DegenerateDivisor";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::DisplacementTooLarge: return "DisplacementTooLarge";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

Homography::Homography() : m_(Eigen::Matrix3d::Identity()) {}

Homography::Homography(const Eigen::Matrix3d& m, const GeometryTolerances& tol) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "homography has non-finite entries");
  }
  if (std::abs(m(2, 2)) < tol.divisor_floor) {
    throw Error(ErrorCode::DegenerateDivisor,
                "homography (3,3) entry below divisor floor");
  }
  m_ = m / m(2, 2);
  m_(2, 2) = 1.0;
  if (std::abs(m_.determinant()) < tol.determinant_floor) {
    throw Error(ErrorCode::SingularTransform, "homography is singular");
  }
}

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Vector8d Homography::entries() const {
  Vector8d e;
  e << m_(0, 0), m_(0, 1), m_(0, 2), m_(1, 0), m_(1, 1), m_(1, 2), m_(2, 0),
      m_(2, 1);
  return e;
}

Homography params_to_matrix(const TransformParams& p) {
  if (!(p.f > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scale factor f must be positive");
  }
  const double c = std::cos(p.phi);
  const double s = std::sin(p.phi);
  Eigen::Matrix3d m;
  m << p.f * c, -p.sx * s, p.tx,
       p.sy * s, p.f * c, p.ty,
       p.a31, p.a32, 1.0;
  return Homography(m);
}

std::optional<TransformParams> matrix_to_params(const Homography& h, double tol) {
  const auto& m = h.matrix();
  const double scale = std::max({1.0, std::abs(m(0, 0)), std::abs(m(1, 0))});
  if (std::abs(m(0, 0) - m(1, 1)) > tol * scale ||
      std::abs(m(0, 1) + m(1, 0)) > tol * scale) {
    return std::nullopt;
  }
  TransformParams p;
  p.tx = m(0, 2);
  p.ty = m(1, 2);
  p.a31 = m(2, 0);
  p.a32 = m(2, 1);
  p.f = std::hypot(m(0, 0), m(1, 0));
  if (!(p.f > 0.0)) return std::nullopt;
  p.phi = std::atan2(m(1, 0), m(0, 0));
  p.sx = p.f;
  p.sy = p.f;
  return p;
}

std::optional<Point2> try_apply(const Homography& h, double x, double y,
                                double divisor_floor) {
  const auto& m = h.matrix();
  const double w = m(2, 0) * x + m(2, 1) * y + 1.0;
  if (!(std::abs(w) >= divisor_floor)) return std::nullopt;
  const double u = m(0, 0) * x + m(0, 1) * y + m(0, 2);
  const double v = m(1, 0) * x + m(1, 1) * y + m(1, 2);
  return Point2{u / w, v / w};
}

Point2 apply(const Homography& h, double x, double y, double divisor_floor) {
  auto p = try_apply(h, x, y, divisor_floor);
  if (!p) {
    throw Error(ErrorCode::DegenerateDivisor,
                "point maps to infinity under the homography");
  }
  return *p;
}

Homography compose(const Homography& h1, const Homography& h2,
                   const GeometryTolerances& tol) {
  return Homography(h1.matrix() * h2.matrix(), tol);
}

Homography invert(const Homography& h, const GeometryTolerances& tol) {
  const double det = h.matrix().determinant();
  if (!(std::abs(det) >= tol.determinant_floor)) {
    throw Error(ErrorCode::SingularTransform, "cannot invert singular homography");
  }
  Eigen::Matrix3d inv = h.matrix().inverse();
  if (std::abs(inv(2, 2)) < tol.divisor_floor) {
    throw Error(ErrorCode::DegenerateDivisor,
                "inverse homography maps the origin to infinity");
  }
  return Homography(inv, tol);
}

namespace {

Eigen::Matrix3d camera_tilt(double psi, double alpha, double focal) {
  // Rotation about the vertical axis by psi, then about the horizontal axis
  // by -alpha; the minus sign gives a32 = -tan(alpha) / focal.
  const double cp = std::cos(psi), sp = std::sin(psi);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  Eigen::Matrix3d ry;
  ry << cp, 0, sp,
        0, 1, 0,
        -sp, 0, cp;
  Eigen::Matrix3d rx;
  rx << 1, 0, 0,
        0, ca, sa,
        0, -sa, ca;
  const Eigen::Matrix3d k = Eigen::Vector3d(focal, focal, 1.0).asDiagonal();
  const Eigen::Matrix3d k_inv =
      Eigen::Vector3d(1.0 / focal, 1.0 / focal, 1.0).asDiagonal();
  Eigen::Matrix3d h = k * rx * ry * k_inv;
  h /= h(2, 2);

  // Re-center: the image center must stay fixed.
  Eigen::Matrix3d recenter = Eigen::Matrix3d::Identity();
  recenter(0, 2) = -h(0, 2);
  recenter(1, 2) = -h(1, 2);
  return recenter * h;
}

}  // namespace

Homography viewpoint_to_homography(const ViewpointChange& v) {
  if (!(v.focal > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "focal length must be positive");
  }
  if (!(v.tz_as_scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scale factor must be positive");
  }
  const double half_pi = std::acos(0.0);
  if (!(std::abs(v.psi) < half_pi) || !(std::abs(v.alpha) < half_pi)) {
    throw Error(ErrorCode::InvalidArgument,
                "out-of-plane angles must lie in (-90, 90) degrees");
  }
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 2) = v.tx;
  t(1, 2) = v.ty;
  const double c = std::cos(v.phi), s = std::sin(v.phi);
  Eigen::Matrix3d r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  const Eigen::Matrix3d scale =
      Eigen::Vector3d(v.tz_as_scale, v.tz_as_scale, 1.0).asDiagonal();
  return Homography(t * r * scale * camera_tilt(v.psi, v.alpha, v.focal));
}

Homography increment(const Vector8d& d, double scale) {
  Eigen::Matrix3d m;
  m << 1.0 + d[0], d[1], scale * d[2],
       d[3], 1.0 + d[4], scale * d[5],
       d[6] / scale, d[7] / scale, 1.0;
  return Homography(m);
}

Jacobian2x8 apply_jacobian(const Homography& h, double x, double y) {
  const auto& m = h.matrix();
  const double w = m(2, 0) * x + m(2, 1) * y + 1.0;
  const double u = m(0, 0) * x + m(0, 1) * y + m(0, 2);
  const double v = m(1, 0) * x + m(1, 1) * y + m(1, 2);
  const double iw = 1.0 / w;
  const double xp = u * iw, yp = v * iw;
  Jacobian2x8 j;
  j << x * iw, y * iw, iw, 0, 0, 0, -xp * x * iw, -xp * y * iw,
       0, 0, 0, x * iw, y * iw, iw, -yp * x * iw, -yp * y * iw;
  return j;
}

Jacobian2x8 increment_jacobian(double x, double y, double scale) {
  const double is = 1.0 / scale;
  Jacobian2x8 j;
  j << x, y, scale, 0, 0, 0, -x * x * is, -x * y * is,
       0, 0, 0, x, y, scale, -x * y * is, -y * y * is;
  return j;
}

double max_corner_displacement(const Homography& a, const Homography& b,
                               int width, int height) {
  const double hx = 0.5 * (width - 1), hy = 0.5 * (height - 1);
  const Point2 corners[4] = {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
  double worst = 0.0;
  for (const auto& c : corners) {
    auto pa = try_apply(a, c.x, c.y);
    auto pb = try_apply(b, c.x, c.y);
    if (!pa || !pb) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::hypot(pa->x - pb->x, pa->y - pb->y));
  }
  return worst;
}

}  // namespace regmosaic
