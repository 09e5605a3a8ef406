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

#ifndef REGMOSAIC_SERIALIZE_HPP
#define REGMOSAIC_SERIALIZE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "regmosaic/eval.hpp"
#include "regmosaic/mosaic.hpp"
#include "regmosaic/synth.hpp"

// JSON forms of the public types. Field names are listed in docs/schema.md.
// Readers throw Error(Parse) on missing or unknown fields and wrong types;
// option readers start from the defaults and accept partial objects.

namespace regmosaic {

using Json = nlohmann::json;

Json to_json(const Homography& h);
Homography homography_from_json(const Json& j);

Json to_json(const TransformParams& p);
TransformParams transform_params_from_json(const Json& j);

Json to_json(const ViewpointChange& v);
ViewpointChange viewpoint_from_json(const Json& j);

Json to_json(const PathSegment& s);
PathSegment path_segment_from_json(const Json& j);

Json to_json(const SequenceManifest& m);
SequenceManifest manifest_from_json(const Json& j);

Json to_json(const RegistrationResult& r);
RegistrationResult registration_result_from_json(const Json& j);

Json to_json(const QDOptions& o);
QDOptions qd_options_from_json(const Json& j, QDOptions base = {});

Json to_json(const MIOptions& o);
MIOptions mi_options_from_json(const Json& j, MIOptions base = {});

Json to_json(const RobustnessTable& t);
Json to_json(const AccuracyReport& r);
Json to_json(const std::vector<SpeedRow>& rows);

/// Canvas geometry, per-frame globals and blend mode of a panorama.
Json panorama_sidecar(const Panorama& p, const GlobalChain& chain);

/// Parses text; Parse on malformed input.
Json parse_json(const std::string& text);
Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

/// Pair index -> index of the segment that produced it.
std::vector<std::size_t> segment_labels(const std::vector<PathSegment>& segments);

/// Writes frame_NNN.pgm files and manifest.json into `dir`. Returns the
/// manifest path.
std::filesystem::path save_sequence(const std::filesystem::path& dir, const Sequence& seq,
                                    const std::vector<PathSegment>& segments,
                                    const std::string& source_texture);

struct LoadedSequence {
  SequenceManifest manifest;
  std::vector<GrayImage> frames;
};

/// Frames are resolved relative to the manifest's directory.
LoadedSequence load_sequence(const std::filesystem::path& manifest_path);

}  // namespace regmosaic

#endif  // REGMOSAIC_SERIALIZE_HPP
