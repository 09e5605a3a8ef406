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

#include "regmosaic/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "regmosaic/error.hpp"

namespace regmosaic {

GlobalChain chain(const std::vector<Homography>& pairwise) {
  GlobalChain c;
  c.globals.reserve(pairwise.size() + 1);
  c.globals.push_back(Homography::identity());
  for (const auto& h : pairwise) c.globals.push_back(compose(c.globals.back(), h));
  return c;
}

namespace {

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(const Point2& p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
};

// Corners of a frame after its global, in centered frame-0 coordinates.
Box frame_box(const Homography& g, int w, int h) {
  const double hx = 0.5 * (w - 1), hy = 0.5 * (h - 1);
  Box b;
  for (const Point2& c : {Point2{-hx, -hy}, Point2{hx, -hy}, Point2{hx, hy}, Point2{-hx, hy}}) {
    b.add(apply(g, c.x, c.y));
  }
  return b;
}

}  // namespace

CanvasGeometry canvas_bounds(const GlobalChain& chain, int frame_width, int frame_height) {
  if (chain.globals.empty() || frame_width < 1 || frame_height < 1) {
    throw Error(ErrorCode::InvalidArgument, "canvas needs at least one frame");
  }
  Box all;
  for (const auto& g : chain.globals) {
    const Box b = frame_box(g, frame_width, frame_height);
    all.add({b.x0, b.y0});
    all.add({b.x1, b.y1});
  }
  const double cx = 0.5 * (frame_width - 1), cy = 0.5 * (frame_height - 1);
  const double lo_x = std::floor(all.x0 + cx), lo_y = std::floor(all.y0 + cy);
  const double hi_x = std::ceil(all.x1 + cx), hi_y = std::ceil(all.y1 + cy);
  CanvasGeometry geo;
  geo.width = static_cast<int>(hi_x - lo_x) + 3;
  geo.height = static_cast<int>(hi_y - lo_y) + 3;
  geo.origin_offset = {cx - lo_x + 1.0, cy - lo_y + 1.0};
  return geo;
}

const char* to_string(BlendMode mode) {
  switch (mode) {
    case BlendMode::FirstWins: return "first_wins";
    case BlendMode::LastWins: return "last_wins";
    case BlendMode::Mean: return "mean";
  }
  return "mean";
}

std::optional<BlendMode> blend_mode_from_string(const std::string& s) {
  for (auto m : {BlendMode::FirstWins, BlendMode::LastWins, BlendMode::Mean}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

Panorama composite(const std::vector<GrayImage>& frames, const GlobalChain& chain,
                   BlendMode mode, int jobs) {
  if (frames.empty() || frames.size() != chain.globals.size()) {
    throw Error(ErrorCode::InvalidArgument, "frames and chain lengths differ");
  }
  const int fw = frames.front().width(), fh = frames.front().height();
  for (const auto& f : frames) {
    if (f.width() != fw || f.height() != fh) {
      throw Error(ErrorCode::DimensionMismatch, "frames must share one size");
    }
  }
  const CanvasGeometry geo = canvas_bounds(chain, fw, fh);

  struct FrameView {
    Homography canvas_to_frame;
    int x0, y0, x1, y1;  // canvas rows/columns the frame can reach
  };
  std::vector<FrameView> views;
  views.reserve(frames.size());
  for (const auto& g : chain.globals) {
    const Box b = frame_box(g, fw, fh);
    FrameView v{invert(g),
                static_cast<int>(std::floor(b.x0 + geo.origin_offset.x)),
                static_cast<int>(std::floor(b.y0 + geo.origin_offset.y)),
                static_cast<int>(std::ceil(b.x1 + geo.origin_offset.x)),
                static_cast<int>(std::ceil(b.y1 + geo.origin_offset.y))};
    views.push_back(v);
  }

  const std::size_t n = static_cast<std::size_t>(geo.width) * geo.height;
  std::vector<double> data(n, 0.0);
  std::vector<int> coverage(n, 0);
  const double fcx = 0.5 * (fw - 1), fcy = 0.5 * (fh - 1);

  auto render_rows = [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < geo.width; ++x) {
        const double cx = x - geo.origin_offset.x, cy = y - geo.origin_offset.y;
        double sum = 0.0, chosen = 0.0;
        int count = 0;
        for (std::size_t k = 0; k < frames.size(); ++k) {
          const auto& v = views[k];
          if (x < v.x0 || x > v.x1 || y < v.y0 || y > v.y1) continue;
          auto q = try_apply(v.canvas_to_frame, cx, cy);
          if (!q) continue;
          auto s = sample_bilinear(frames[k], q->x + fcx, q->y + fcy);
          if (!s) continue;
          if (count == 0 || mode == BlendMode::LastWins) chosen = *s;
          sum += *s;
          ++count;
        }
        const auto i = static_cast<std::size_t>(y) * geo.width + x;
        coverage[i] = count;
        if (count > 0) data[i] = mode == BlendMode::Mean ? sum / count : chosen;
      }
    }
  };

  const int workers = std::clamp(jobs, 1, std::max(geo.height, 1));
  if (workers == 1) {
    render_rows(0, geo.height);
  } else {
    std::vector<std::thread> pool;
    const int stride = (geo.height + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int b = w * stride, e = std::min(geo.height, b + stride);
      if (b < e) pool.emplace_back(render_rows, b, e);
    }
    for (auto& t : pool) t.join();
  }

  Panorama p;
  for (auto& v : data) v = std::clamp(v, 0.0, 255.0);
  p.canvas = GrayImage(geo.width, geo.height, std::move(data));
  p.origin_offset = geo.origin_offset;
  p.coverage = std::move(coverage);
  p.mode = mode;
  return p;
}

}  // namespace regmosaic
