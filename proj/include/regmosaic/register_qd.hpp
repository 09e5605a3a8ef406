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

#ifndef REGMOSAIC_REGISTER_QD_HPP
#define REGMOSAIC_REGISTER_QD_HPP

#include "regmosaic/imaging.hpp"
#include "regmosaic/registration.hpp"

namespace regmosaic {

struct QDOptions {
  int max_iterations_per_level = 50;
  /// Norm of the increment in the normalized chart (coordinates divided by
  /// half the larger image side).
  double step_norm_tolerance = 1e-4;
  int pyramid_levels = 3;
  /// Relative Levenberg term added to the Hessian diagonal.
  double hessian_damping = 1e-6;
  /// Translation-only iterations run first on the coarsest level.
  int translation_init_iterations = 10;
  /// Converged results must explain the overlap: final mean SSD at most this
  /// fraction of the summed intensity variances of the two images.
  double max_relative_residual = 0.25;
  /// ... and keep at least this fraction of target pixels in the overlap.
  double min_overlap_fraction = 0.25;
};

/// Mean squared intensity difference between target and T(source; theta)
/// over the valid overlap. Throws EmptyOverlap.
double ssd(const GrayImage& target, const GrayImage& source, const Homography& theta);

/// Inverse-compositional Gauss-Newton, coarse to fine. Throws EmptyOverlap,
/// SingularHessian (textureless overlap) and ImageTooSmall.
RegistrationResult register_qd(const GrayImage& target, const GrayImage& source,
                               const Homography& init, const QDOptions& opts = {});

}  // namespace regmosaic

#endif  // REGMOSAIC_REGISTER_QD_HPP
