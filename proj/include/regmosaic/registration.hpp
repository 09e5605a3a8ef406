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

#ifndef REGMOSAIC_REGISTRATION_HPP
#define REGMOSAIC_REGISTRATION_HPP

#include <string>

#include "regmosaic/geometry.hpp"

namespace regmosaic {

// Convention shared by every registration entry point: a transform theta maps
// centered source coordinates onto centered target coordinates, so the
// registered image T(source; theta) samples the source at theta^-1(p).

struct RegistrationResult {
  Homography theta_hat;
  /// Mean SSD for the quadratic-distance method, histogram MI in bits for the
  /// mutual-information method.
  double final_score = 0.0;
  /// Optimizer iterations at the working resolution (the finest pyramid level
  /// for the quadratic-distance method).
  int iterations = 0;
  /// All iterations, including coarse pyramid levels.
  int total_iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

}  // namespace regmosaic

#endif  // REGMOSAIC_REGISTRATION_HPP
