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

#ifndef REGMOSAIC_SYNTH_HPP
#define REGMOSAIC_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regmosaic/geometry.hpp"
#include "regmosaic/imaging.hpp"

namespace regmosaic {

/// Multi-octave value noise (lattice spacings 64, 32, 16, 8 and 4 px)
/// stretched to [0, 255]. Deterministic per seed on every platform.
GrayImage procedural_texture(int width, int height, std::uint64_t seed);

/// Frame of size w x h whose centered pixel s shows `ref` at
/// frame_to_ref(s), with frame_to_ref in centered coordinates of `ref`.
/// Throws DisplacementTooLarge if any pixel would fall outside `ref`.
GrayImage render_view(const GrayImage& ref, const Homography& frame_to_ref,
                      int width, int height);

struct SyntheticPair {
  GrayImage target;
  GrayImage source;
  Homography truth;  // source coordinates -> target coordinates
};

/// Target is the central crop x crop window of `ref`; the source is the same
/// window seen through viewpoint_to_homography(v).
SyntheticPair make_pair(const GrayImage& ref, const ViewpointChange& v, int crop);

enum class SegmentKind { Translate, TranslateRotate, TranslateScale, TranslateTilt };

const char* to_string(SegmentKind kind);
std::optional<SegmentKind> segment_kind_from_string(const std::string& s);

/// One stretch of the acquisition path. Every frame moves step_px along
/// direction_deg (measured in the previous frame, 0 = +x, 90 = +y) and adds
/// step_deg of in-plane rotation, step_scale of scale change (frame k+1
/// covers (1 + step_scale) times the extent of frame k) or step_deg of
/// out-of-plane tilt about the vertical axis, depending on `kind`.
struct PathSegment {
  SegmentKind kind = SegmentKind::Translate;
  int count = 1;
  double step_px = 10.0;
  double step_deg = 0.0;
  double step_scale = 0.0;
  double direction_deg = 0.0;
};

/// 14 translations of 10 px, then 10 x (10 px + 2 deg rotation),
/// 10 x (10 px + 5 % zoom) and 10 x (10 px + 4 deg tilt): 45 frames.
std::vector<PathSegment> paper_path_preset();

/// 40 pairs within the motions seen in real exams: at most 5 px, 1 deg and
/// 2 % per frame.
std::vector<PathSegment> realistic_path_preset();

struct Sequence {
  std::vector<GrayImage> frames;
  std::vector<Homography> truths;   // truths[k]: frame k+1 -> frame k
  std::vector<Homography> globals;  // globals[k]: frame k -> reference
  std::vector<std::size_t> segment_of_pair;
};

struct SequenceOptions {
  int frame_width = 256;
  int frame_height = 256;
  /// Frame 0 center in centered coordinates of the reference.
  Point2 start{-400.0, -400.0};
  double focal = 0.0;  // tilt focal length; 0 means frame width
};

/// Throws DisplacementTooLarge when the path leaves the reference.
Sequence make_sequence(const GrayImage& ref, const std::vector<PathSegment>& segments,
                       const SequenceOptions& opts = {});

/// On-disk description of a sequence; frames are PGM files relative to the
/// manifest.
struct SequenceManifest {
  int schema_version = 1;
  std::vector<std::string> frames;
  std::vector<Homography> truths;
  std::string source_texture;
  int frame_width = 0;
  int frame_height = 0;
  Homography frame0_to_reference;
  std::vector<PathSegment> segments;
};

}  // namespace regmosaic

#endif  // REGMOSAIC_SYNTH_HPP
