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

#include "regmosaic/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "regmosaic/error.hpp"

namespace regmosaic {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

constexpr double deg = std::numbers::pi / 180.0;

}  // namespace

GrayImage procedural_texture(int width, int height, std::uint64_t seed) {
  if (width < 64 || height < 64) {
    throw Error(ErrorCode::ImageTooSmall, "procedural texture needs at least 64x64");
  }
  struct Octave {
    int spacing;
    double amplitude;
  };
  constexpr Octave octaves[] = {{64, 1.0}, {32, 0.7}, {16, 0.5}, {8, 0.35}, {4, 0.25}};

  std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
  std::uint64_t state = seed;
  for (const auto& oct : octaves) {
    const int gw = width / oct.spacing + 2;
    const int gh = height / oct.spacing + 2;
    std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
    // Phase offset so octaves do not share lattice lines.
    const double ox = unit(splitmix64(state)) * oct.spacing;
    const double oy = unit(splitmix64(state)) * oct.spacing;
    for (auto& v : lattice) v = 2.0 * unit(splitmix64(state)) - 1.0;
    for (int y = 0; y < height; ++y) {
      const double gy = (y + oy) / oct.spacing;
      const int iy = static_cast<int>(gy);
      const double ty = fade(gy - iy);
      for (int x = 0; x < width; ++x) {
        const double gx = (x + ox) / oct.spacing;
        const int ix = static_cast<int>(gx);
        const double tx = fade(gx - ix);
        const auto at = [&](int i, int j) {
          return lattice[static_cast<std::size_t>(j) * gw + i];
        };
        const double a = at(ix, iy) + tx * (at(ix + 1, iy) - at(ix, iy));
        const double b = at(ix, iy + 1) + tx * (at(ix + 1, iy + 1) - at(ix, iy + 1));
        acc[static_cast<std::size_t>(y) * width + x] += oct.amplitude * (a + ty * (b - a));
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  const double lo_v = *lo, span = std::max(*hi - *lo, 1e-12);
  for (auto& v : acc) v = std::clamp(255.0 * (v - lo_v) / span, 0.0, 255.0);
  return GrayImage(width, height, std::move(acc));
}

GrayImage render_view(const GrayImage& ref, const Homography& frame_to_ref, int width,
                      int height) {
  const double fcx = 0.5 * (width - 1), fcy = 0.5 * (height - 1);
  const double rcx = ref.center_x(), rcy = ref.center_y();
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::optional<double> v;
      // The divisor must stay positive over the frame for the view to be a
      // proper perspective image of the reference plane.
      const auto& m = frame_to_ref.matrix();
      const double w = m(2, 0) * (x - fcx) + m(2, 1) * (y - fcy) + 1.0;
      if (w > 1e-8) {
        auto p = try_apply(frame_to_ref, x - fcx, y - fcy);
        if (p) v = sample_bilinear(ref, p->x + rcx, p->y + rcy);
      }
      if (!v) {
        throw Error(ErrorCode::DisplacementTooLarge,
                    "view leaves the reference texture");
      }
      data[static_cast<std::size_t>(y) * width + x] = *v;
    }
  }
  return GrayImage(width, height, std::move(data));
}

SyntheticPair make_pair(const GrayImage& ref, const ViewpointChange& v, int crop) {
  if (crop < 1 || crop > ref.width() || crop > ref.height()) {
    throw Error(ErrorCode::InvalidArgument, "crop does not fit the reference");
  }
  // Target crop aligned with the pixel grid so it needs no interpolation.
  const int x0 = (ref.width() - crop) / 2;
  const int y0 = (ref.height() - crop) / 2;
  const double shift_x = x0 + 0.5 * (crop - 1) - ref.center_x();
  const double shift_y = y0 + 0.5 * (crop - 1) - ref.center_y();
  const Homography to_ref = Homography::translation(shift_x, shift_y);

  SyntheticPair pair;
  pair.truth = viewpoint_to_homography(v);
  pair.target = render_view(ref, to_ref, crop, crop);
  pair.source = render_view(ref, compose(to_ref, pair.truth), crop, crop);
  return pair;
}

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Translate: return "translate";
    case SegmentKind::TranslateRotate: return "translate_rotate";
    case SegmentKind::TranslateScale: return "translate_scale";
    case SegmentKind::TranslateTilt: return "translate_tilt";
  }
  return "translate";
}

std::optional<SegmentKind> segment_kind_from_string(const std::string& s) {
  for (auto k : {SegmentKind::Translate, SegmentKind::TranslateRotate,
                 SegmentKind::TranslateScale, SegmentKind::TranslateTilt}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::vector<PathSegment> paper_path_preset() {
  return {
      {SegmentKind::Translate, 14, 10.0, 0.0, 0.0, 0.0},
      {SegmentKind::TranslateRotate, 10, 10.0, 2.0, 0.0, 90.0},
      {SegmentKind::TranslateScale, 10, 10.0, 0.0, -0.05, 90.0},
      {SegmentKind::TranslateTilt, 10, 10.0, 4.0, 0.0, 180.0},
  };
}

std::vector<PathSegment> realistic_path_preset() {
  return {
      {SegmentKind::Translate, 10, 5.0, 0.0, 0.0, 0.0},
      {SegmentKind::TranslateRotate, 10, 4.0, 1.0, 0.0, 90.0},
      {SegmentKind::TranslateScale, 10, 4.0, 0.0, 0.02, 90.0},
      {SegmentKind::TranslateTilt, 10, 4.0, 1.0, 0.0, 180.0},
  };
}

Sequence make_sequence(const GrayImage& ref, const std::vector<PathSegment>& segments,
                       const SequenceOptions& opts) {
  const double focal = opts.focal > 0.0 ? opts.focal : opts.frame_width;
  Sequence seq;
  seq.globals.push_back(Homography::translation(opts.start.x, opts.start.y));
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (seg.count < 1) throw Error(ErrorCode::InvalidArgument, "segment count must be >= 1");
    for (int i = 0; i < seg.count; ++i) {
      ViewpointChange v;
      v.tx = seg.step_px * std::cos(seg.direction_deg * deg);
      v.ty = seg.step_px * std::sin(seg.direction_deg * deg);
      v.focal = focal;
      switch (seg.kind) {
        case SegmentKind::Translate: break;
        case SegmentKind::TranslateRotate: v.phi = seg.step_deg * deg; break;
        case SegmentKind::TranslateScale: v.tz_as_scale = 1.0 + seg.step_scale; break;
        case SegmentKind::TranslateTilt: v.psi = seg.step_deg * deg; break;
      }
      const Homography step = viewpoint_to_homography(v);
      seq.truths.push_back(step);
      seq.globals.push_back(compose(seq.globals.back(), step));
      seq.segment_of_pair.push_back(s);
    }
  }
  seq.frames.reserve(seq.globals.size());
  for (const auto& g : seq.globals) {
    seq.frames.push_back(render_view(ref, g, opts.frame_width, opts.frame_height));
  }
  return seq;
}

}  // namespace regmosaic
