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

#ifndef REGMOSAIC_MOSAIC_HPP
#define REGMOSAIC_MOSAIC_HPP

#include <optional>
#include <string>
#include <vector>

#include "regmosaic/geometry.hpp"
#include "regmosaic/imaging.hpp"

namespace regmosaic {

/// globals[k] maps centered coordinates of frame k into centered coordinates
/// of frame 0.
struct GlobalChain {
  std::vector<Homography> globals;
};

/// pairwise[k] maps frame k+1 onto frame k.
GlobalChain chain(const std::vector<Homography>& pairwise);

struct CanvasGeometry {
  int width = 0;
  int height = 0;
  /// Raster position of frame 0's centered origin inside the canvas.
  Point2 origin_offset;
};

/// Bounding box of every warped frame corner, padded by one pixel on each
/// side and snapped to whole pixels.
CanvasGeometry canvas_bounds(const GlobalChain& chain, int frame_width, int frame_height);

enum class BlendMode { FirstWins, LastWins, Mean };

const char* to_string(BlendMode mode);
std::optional<BlendMode> blend_mode_from_string(const std::string& s);

struct Panorama {
  GrayImage canvas;
  Point2 origin_offset;
  std::vector<int> coverage;  // contributing frames per canvas pixel
  BlendMode mode = BlendMode::Mean;
};

/// Inverse-mapping render: every canvas pixel samples each frame through the
/// inverse of its global. `jobs` splits the canvas rows; output does not
/// depend on it.
Panorama composite(const std::vector<GrayImage>& frames, const GlobalChain& chain,
                   BlendMode mode = BlendMode::Mean, int jobs = 1);

}  // namespace regmosaic

#endif  // REGMOSAIC_MOSAIC_HPP
