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

#ifndef REGMOSAIC_GEOMETRY_HPP
#define REGMOSAIC_GEOMETRY_HPP

#include <optional>

#include <Eigen/Core>

namespace regmosaic {

using Vector8d = Eigen::Matrix<double, 8, 1>;
using Jacobian2x8 = Eigen::Matrix<double, 2, 8>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Floors used to reject degenerate projective maps.
struct GeometryTolerances {
  double divisor_floor = 1e-8;
  double determinant_floor = 1e-12;
};

/// The eight named parameters of the perspective model:
///
///   | f cos(phi)   -sx sin(phi)  tx |
///   | sy sin(phi)   f cos(phi)   ty |
///   | a31           a32          1  |
///
/// All transforms in this library act on centered pixel coordinates, i.e. the
/// origin is the image center ((w - 1) / 2, (h - 1) / 2) in raster terms.
struct TransformParams {
  double tx = 0.0;
  double ty = 0.0;
  double phi = 0.0;  // radians
  double f = 1.0;
  double sx = 1.0;
  double sy = 1.0;
  double a31 = 0.0;
  double a32 = 0.0;
};

/// Normalized 3x3 projective matrix, m(2, 2) == 1.
class Homography {
 public:
  Homography();

  /// Normalizes by m(2, 2). Throws DegenerateDivisor when that entry is below
  /// the divisor floor and SingularTransform when the normalized determinant
  /// is below the determinant floor.
  explicit Homography(const Eigen::Matrix3d& m,
                      const GeometryTolerances& tol = {});

  static Homography identity() { return Homography(); }
  static Homography translation(double tx, double ty);

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  /// The 8 free entries in row-major order (a11 a12 a13 a21 a22 a23 a31 a32).
  Vector8d entries() const;

 private:
  Eigen::Matrix3d m_;
};

Homography params_to_matrix(const TransformParams& p);

/// Reads the named parameters back. Only defined on the sub-family
/// sx == sy == f (a11 == a22 and a12 == -a21 within `tol`), where the
/// decomposition is unique.
std::optional<TransformParams> matrix_to_params(const Homography& h,
                                                double tol = 1e-12);

/// Maps (x, y) through h. Throws DegenerateDivisor when the homogeneous
/// divisor falls below the floor.
Point2 apply(const Homography& h, double x, double y,
             double divisor_floor = GeometryTolerances{}.divisor_floor);

/// Non-throwing variant used in per-pixel loops.
std::optional<Point2> try_apply(const Homography& h, double x, double y,
                                double divisor_floor =
                                    GeometryTolerances{}.divisor_floor);

/// compose(h1, h2) maps p to h1(h2(p)).
Homography compose(const Homography& h1, const Homography& h2,
                   const GeometryTolerances& tol = {});

Homography invert(const Homography& h, const GeometryTolerances& tol = {});

/// Simulated endoscope displacement.
///
/// The out-of-plane part is the homography K R K^-1 of a pinhole camera
/// (K = diag(focal, focal, 1)) rotated by psi about the vertical image axis
/// and by alpha about the horizontal image axis, followed by the translation
/// that brings the image center back onto itself. With that convention
/// a31 = -tan(psi) / focal exactly for a pure psi tilt, and likewise
/// a32 = -tan(alpha) / focal for a pure alpha tilt. The full map is
///
///   T(tx, ty) * R(phi) * scale(tz_as_scale) * Tilt(psi, alpha)
struct ViewpointChange {
  double tx = 0.0;
  double ty = 0.0;
  double tz_as_scale = 1.0;
  double phi = 0.0;
  double psi = 0.0;
  double alpha = 0.0;
  double focal = 256.0;
};

Homography viewpoint_to_homography(const ViewpointChange& v);

/// Local chart used by both optimizers. `delta` perturbs the matrix entries
/// (a11 - 1, a12, a13, a21, a22 - 1, a23, a31, a32) of a map expressed in
/// coordinates divided by `scale`; the returned homography acts on pixels.
Homography increment(const Vector8d& delta, double scale);

/// d apply(h, x, y) / d(a11 a12 a13 a21 a22 a23 a31 a32).
Jacobian2x8 apply_jacobian(const Homography& h, double x, double y);

/// Jacobian of the increment chart at delta = 0, in pixels per chart unit.
Jacobian2x8 increment_jacobian(double x, double y, double scale);

/// Largest displacement of the four corners of a w x h frame between the two
/// maps. Used as a step-size measure in pixels.
double max_corner_displacement(const Homography& a, const Homography& b,
                               int width, int height);

}  // namespace regmosaic

#endif  // REGMOSAIC_GEOMETRY_HPP
