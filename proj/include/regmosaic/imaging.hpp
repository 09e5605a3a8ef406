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

#ifndef REGMOSAIC_IMAGING_HPP
#define REGMOSAIC_IMAGING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "regmosaic/geometry.hpp"

namespace regmosaic {

/// Single-channel raster, row-major, intensities in [0, 255].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  /// Validates size and intensity range.
  GrayImage(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  double at(int x, int y) const { return data_[index(x, y)]; }
  void set(int x, int y, double v) { data_[index(x, y)] = v; }

  std::span<const double> data() const { return data_; }

  /// Raster position of the centered-coordinate origin.
  double center_x() const { return 0.5 * (width_ - 1); }
  double center_y() const { return 0.5 * (height_ - 1); }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Result of resampling: intensities under a false mask entry are zero and
/// must not take part in any similarity sum.
struct WarpedImage {
  GrayImage image;
  std::vector<std::uint8_t> mask;

  std::size_t valid_count() const;
  bool valid(int x, int y) const {
    return mask[static_cast<std::size_t>(y) * image.width() + x] != 0;
  }
};

struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
};

struct BilinearSample {
  double value;
  double dx;  // derivative of the interpolant along x
  double dy;
};

/// Bilinear interpolation at raster coordinates. Returns nothing when the
/// 4-neighbourhood is not inside the image, i.e. outside [0, w-1] x [0, h-1].
std::optional<double> sample_bilinear(const GrayImage& img, double x, double y);

/// Same as sample_bilinear plus the partial derivatives of the
/// piecewise-bilinear interpolant. On interior lattice lines, where the
/// interpolant is not differentiable, each derivative is the mean of the two
/// one-sided slopes.
std::optional<BilinearSample> sample_bilinear_with_gradient(const GrayImage& img,
                                                            double x, double y);

/// Output pixel p takes src at h(p). h is expressed in centered coordinates
/// of the output and source frames respectively.
WarpedImage warp(const GrayImage& src, const Homography& h, int out_w, int out_h);

/// Central differences inside, one-sided on the border. Needs 3x3 at least.
GradientField gradient(const GrayImage& img);

/// Level 0 is the input. Every next level is filtered with the [1 3 3 1] / 8
/// binomial kernel and decimated by two; level pixel i sits at 2i + 0.5 of its
/// parent, so centered coordinates scale by exactly 1/2 per level.
std::vector<GrayImage> pyramid(const GrayImage& img, int levels);

/// Counts over B x B bins; row index from the first image, column from the
/// second.
struct JointHistogram {
  int bins = 0;
  std::vector<double> counts;
  double total = 0.0;

  double at(int a, int b) const {
    return counts[static_cast<std::size_t>(a) * bins + b];
  }
  std::vector<double> marginal_a() const;
  std::vector<double> marginal_b() const;
};

int intensity_bin(double intensity, int bins);

/// Histogram of the pixels where `mask` is set (all pixels if mask is empty).
std::vector<double> histogram(const GrayImage& img,
                              std::span<const std::uint8_t> mask, int bins);

/// Throws DimensionMismatch and EmptyOverlap.
JointHistogram joint_histogram(const GrayImage& a, const WarpedImage& b, int bins);

/// Luminance of an interleaved RGB triple.
inline double luminance(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace regmosaic

#endif  // REGMOSAIC_IMAGING_HPP
