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

#include <algorithm>
#include <cmath>
#include <string>

#include "regmosaic/error.hpp"

namespace regmosaic {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative image size");
  }
  if (!(fill >= 0.0 && fill <= 255.0)) {
    throw Error(ErrorCode::InvalidArgument, "fill intensity outside [0, 255]");
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0 ||
      data_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::DimensionMismatch,
                "image data length does not match " + std::to_string(width) +
                    "x" + std::to_string(height));
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 255.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "intensity outside [0, 255] or not finite");
    }
  }
}

std::size_t WarpedImage::valid_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

namespace {

struct Cell {
  int x0, x1, y0, y1;
  double fx, fy;
};

std::optional<Cell> locate(const GrayImage& img, double x, double y) {
  const int w = img.width(), h = img.height();
  if (w == 0 || h == 0) return std::nullopt;
  if (!(x >= 0.0 && x <= w - 1.0 && y >= 0.0 && y <= h - 1.0)) {
    return std::nullopt;
  }
  Cell c;
  c.x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
  c.y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
  c.x1 = std::min(c.x0 + 1, w - 1);
  c.y1 = std::min(c.y0 + 1, h - 1);
  c.fx = x - c.x0;
  c.fy = y - c.y0;
  return c;
}

}  // namespace

std::optional<double> sample_bilinear(const GrayImage& img, double x, double y) {
  auto c = locate(img, x, y);
  if (!c) return std::nullopt;
  const double v00 = img.at(c->x0, c->y0), v10 = img.at(c->x1, c->y0);
  const double v01 = img.at(c->x0, c->y1), v11 = img.at(c->x1, c->y1);
  const double a = (1.0 - c->fx) * v00 + c->fx * v10;
  const double b = (1.0 - c->fx) * v01 + c->fx * v11;
  return (1.0 - c->fy) * a + c->fy * b;
}

std::optional<BilinearSample> sample_bilinear_with_gradient(const GrayImage& img,
                                                            double x, double y) {
  auto c = locate(img, x, y);
  if (!c) return std::nullopt;
  const double v00 = img.at(c->x0, c->y0), v10 = img.at(c->x1, c->y0);
  const double v01 = img.at(c->x0, c->y1), v11 = img.at(c->x1, c->y1);
  const double a = (1.0 - c->fx) * v00 + c->fx * v10;
  const double b = (1.0 - c->fx) * v01 + c->fx * v11;
  BilinearSample s;
  s.value = (1.0 - c->fy) * a + c->fy * b;
  s.dx = (1.0 - c->fy) * (v10 - v00) + c->fy * (v11 - v01);
  s.dy = b - a;
  // On a lattice line the interpolant has a kink; take the mean of the two
  // one-sided slopes there.
  if (c->fx == 0.0 && c->x0 > 0) {
    const double l0 = v00 - img.at(c->x0 - 1, c->y0), l1 = v01 - img.at(c->x0 - 1, c->y1);
    s.dx = 0.5 * (s.dx + (1.0 - c->fy) * l0 + c->fy * l1);
  }
  if (c->fy == 0.0 && c->y0 > 0) {
    const double up = (1.0 - c->fx) * img.at(c->x0, c->y0 - 1) + c->fx * img.at(c->x1, c->y0 - 1);
    s.dy = 0.5 * (s.dy + (a - up));
  }
  return s;
}

WarpedImage warp(const GrayImage& src, const Homography& h, int out_w, int out_h) {
  WarpedImage out{GrayImage(out_w, out_h),
                  std::vector<std::uint8_t>(static_cast<std::size_t>(out_w) * out_h, 0)};
  std::vector<double> data(static_cast<std::size_t>(out_w) * out_h, 0.0);
  const double ocx = 0.5 * (out_w - 1), ocy = 0.5 * (out_h - 1);
  const double scx = src.center_x(), scy = src.center_y();
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      auto p = try_apply(h, x - ocx, y - ocy);
      if (!p) continue;
      auto v = sample_bilinear(src, p->x + scx, p->y + scy);
      if (!v) continue;
      const auto i = static_cast<std::size_t>(y) * out_w + x;
      data[i] = *v;
      out.mask[i] = 1;
    }
  }
  out.image = GrayImage(out_w, out_h, std::move(data));
  return out;
}

GradientField gradient(const GrayImage& img) {
  const int w = img.width(), h = img.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorCode::ImageTooSmall, "gradient needs at least 3x3 pixels");
  }
  GradientField g{w, h, std::vector<double>(img.size()), std::vector<double>(img.size())};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      if (x == 0) {
        g.gx[i] = img.at(1, y) - img.at(0, y);
      } else if (x == w - 1) {
        g.gx[i] = img.at(w - 1, y) - img.at(w - 2, y);
      } else {
        g.gx[i] = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
      }
      if (y == 0) {
        g.gy[i] = img.at(x, 1) - img.at(x, 0);
      } else if (y == h - 1) {
        g.gy[i] = img.at(x, h - 1) - img.at(x, h - 2);
      } else {
        g.gy[i] = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
      }
    }
  }
  return g;
}

namespace {

GrayImage reduce(const GrayImage& img) {
  const int w = img.width(), h = img.height();
  const int ow = w / 2, oh = h / 2;
  constexpr double k[4] = {1.0 / 8, 3.0 / 8, 3.0 / 8, 1.0 / 8};
  auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi); };

  // Horizontal pass into a w/2 x h buffer, then vertical.
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < 4; ++t) s += k[t] * img.at(clampi(2 * x - 1 + t, w - 1), y);
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < 4; ++t) {
        s += k[t] * rows[static_cast<std::size_t>(clampi(2 * y - 1 + t, h - 1)) * ow + x];
      }
      out[static_cast<std::size_t>(y) * ow + x] = std::clamp(s, 0.0, 255.0);
    }
  }
  return GrayImage(ow, oh, std::move(out));
}

}  // namespace

std::vector<GrayImage> pyramid(const GrayImage& img, int levels) {
  if (levels < 1) {
    throw Error(ErrorCode::InvalidArgument, "pyramid needs at least one level");
  }
  const int shrink = 1 << (levels - 1);
  if (img.width() / shrink < 32 || img.height() / shrink < 32) {
    throw Error(ErrorCode::ImageTooSmall,
                "coarsest pyramid level would be smaller than 32x32");
  }
  std::vector<GrayImage> out;
  out.reserve(levels);
  out.push_back(img);
  for (int l = 1; l < levels; ++l) out.push_back(reduce(out.back()));
  return out;
}

int intensity_bin(double intensity, int bins) {
  const int b = static_cast<int>(std::floor(intensity * bins / 256.0));
  return std::clamp(b, 0, bins - 1);
}

std::vector<double> JointHistogram::marginal_a() const {
  std::vector<double> m(bins, 0.0);
  for (int a = 0; a < bins; ++a)
    for (int b = 0; b < bins; ++b) m[a] += at(a, b);
  return m;
}

std::vector<double> JointHistogram::marginal_b() const {
  std::vector<double> m(bins, 0.0);
  for (int a = 0; a < bins; ++a)
    for (int b = 0; b < bins; ++b) m[b] += at(a, b);
  return m;
}

std::vector<double> histogram(const GrayImage& img,
                              std::span<const std::uint8_t> mask, int bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "bins must be positive");
  if (!mask.empty() && mask.size() != img.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mask size differs from image");
  }
  std::vector<double> h(bins, 0.0);
  const auto data = img.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    h[intensity_bin(data[i], bins)] += 1.0;
  }
  return h;
}

JointHistogram joint_histogram(const GrayImage& a, const WarpedImage& b, int bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "bins must be positive");
  if (a.width() != b.image.width() || a.height() != b.image.height() ||
      b.mask.size() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "joint histogram needs equal sizes");
  }
  JointHistogram jh;
  jh.bins = bins;
  jh.counts.assign(static_cast<std::size_t>(bins) * bins, 0.0);
  const auto da = a.data();
  const auto db = b.image.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (!b.mask[i]) continue;
    const int ia = intensity_bin(da[i], bins);
    const int ib = intensity_bin(db[i], bins);
    jh.counts[static_cast<std::size_t>(ia) * bins + ib] += 1.0;
    jh.total += 1.0;
  }
  if (jh.total == 0.0) {
    throw Error(ErrorCode::EmptyOverlap, "no valid pixel in the overlap");
  }
  return jh;
}

}  // namespace regmosaic
