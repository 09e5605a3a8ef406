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

#include "regmosaic/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "regmosaic/error.hpp"
#include "regmosaic/image_io.hpp"

namespace regmosaic {

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::Parse, what); }

// Field access that remembers which keys were read so leftovers can be
// reported as unknown.
class Fields {
 public:
  Fields(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) parse_error(what_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) parse_error(what_ + ": missing field '" + key + "'");
    return *it;
  }

  double number(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number()) parse_error(what_ + ": field '" + key + "' must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number_integer()) parse_error(what_ + ": field '" + key + "' must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_boolean()) parse_error(what_ + ": field '" + key + "' must be a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_string()) parse_error(what_ + ": field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  template <typename T>
  void optional(const std::string& key, T& out) {
    if (!has(key)) return;
    if constexpr (std::is_same_v<T, bool>) {
      out = boolean(key);
    } else if constexpr (std::is_integral_v<T>) {
      const Json& v = at(key);
      if (!v.is_number_integer()) parse_error(what_ + ": field '" + key + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() || v.get<long long>() >= 0) {
          out = v.get<T>();
        } else {
          parse_error(what_ + ": field '" + key + "' must be nonnegative");
        }
      } else {
        out = v.get<T>();
      }
    } else {
      out = number(key);
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) parse_error(what_ + ": unknown field '" + it.key() + "'");
    }
  }

 private:
  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

Json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

template <typename Fn>
Homography guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    parse_error(std::string("invalid homography: ") + e.what());
  }
}

}  // namespace

Json to_json(const Homography& h) {
  Json m = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.push_back(h(r, c));
  return {{"matrix", m}};
}

Homography homography_from_json(const Json& j) {
  Fields f(j, "homography");
  const Json& m = f.at("matrix");
  f.finish();
  if (!m.is_array() || m.size() != 9) parse_error("homography: 'matrix' must hold 9 numbers");
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) {
    if (!m[i].is_number()) parse_error("homography: 'matrix' must hold 9 numbers");
    a(i / 3, i % 3) = m[i].get<double>();
  }
  return guarded([&] { return Homography(a); });
}

Json to_json(const TransformParams& p) {
  return {{"tx", p.tx}, {"ty", p.ty}, {"phi", p.phi}, {"f", p.f},
          {"sx", p.sx}, {"sy", p.sy}, {"a31", p.a31}, {"a32", p.a32}};
}

TransformParams transform_params_from_json(const Json& j) {
  Fields f(j, "transform parameters");
  TransformParams p;
  p.tx = f.number("tx");
  p.ty = f.number("ty");
  p.phi = f.number("phi");
  p.f = f.number("f");
  p.sx = f.number("sx");
  p.sy = f.number("sy");
  p.a31 = f.number("a31");
  p.a32 = f.number("a32");
  f.finish();
  if (!(p.f > 0.0)) parse_error("transform parameters: f must be positive");
  return p;
}

Json to_json(const ViewpointChange& v) {
  return {{"tx", v.tx},   {"ty", v.ty},       {"tz_as_scale", v.tz_as_scale},
          {"phi", v.phi}, {"psi", v.psi},     {"alpha", v.alpha},
          {"focal", v.focal}};
}

ViewpointChange viewpoint_from_json(const Json& j) {
  Fields f(j, "viewpoint change");
  ViewpointChange v;
  f.optional("tx", v.tx);
  f.optional("ty", v.ty);
  f.optional("tz_as_scale", v.tz_as_scale);
  f.optional("phi", v.phi);
  f.optional("psi", v.psi);
  f.optional("alpha", v.alpha);
  f.optional("focal", v.focal);
  f.finish();
  return v;
}

Json to_json(const PathSegment& s) {
  return {{"kind", to_string(s.kind)},     {"count", s.count},
          {"step_px", s.step_px},          {"step_deg", s.step_deg},
          {"step_scale", s.step_scale},    {"direction_deg", s.direction_deg}};
}

PathSegment path_segment_from_json(const Json& j) {
  Fields f(j, "path segment");
  PathSegment s;
  const std::string kind = f.string("kind");
  auto k = segment_kind_from_string(kind);
  if (!k) parse_error("path segment: unknown kind '" + kind + "'");
  s.kind = *k;
  s.count = f.integer("count");
  f.optional("step_px", s.step_px);
  f.optional("step_deg", s.step_deg);
  f.optional("step_scale", s.step_scale);
  f.optional("direction_deg", s.direction_deg);
  f.finish();
  if (s.count < 1) parse_error("path segment: count must be at least 1");
  return s;
}

Json to_json(const SequenceManifest& m) {
  Json truths = Json::array(), segments = Json::array();
  for (const auto& t : m.truths) truths.push_back(to_json(t));
  for (const auto& s : m.segments) segments.push_back(to_json(s));
  return {{"schema", "regmosaic.sequence"},
          {"schema_version", m.schema_version},
          {"frames", m.frames},
          {"truths", truths},
          {"source_texture", m.source_texture},
          {"frame_width", m.frame_width},
          {"frame_height", m.frame_height},
          {"frame0_to_reference", to_json(m.frame0_to_reference)},
          {"segments", segments}};
}

SequenceManifest manifest_from_json(const Json& j) {
  Fields f(j, "sequence manifest");
  if (f.string("schema") != "regmosaic.sequence") parse_error("not a sequence manifest");
  SequenceManifest m;
  m.schema_version = f.integer("schema_version");
  if (m.schema_version != kSchemaVersion) {
    parse_error("unsupported manifest schema_version " + std::to_string(m.schema_version));
  }
  const Json& frames = f.at("frames");
  if (!frames.is_array()) parse_error("sequence manifest: 'frames' must be an array");
  for (const auto& x : frames) {
    if (!x.is_string()) parse_error("sequence manifest: frame entries must be strings");
    m.frames.push_back(x.get<std::string>());
  }
  const Json& truths = f.at("truths");
  if (!truths.is_array()) parse_error("sequence manifest: 'truths' must be an array");
  for (const auto& t : truths) m.truths.push_back(homography_from_json(t));
  m.source_texture = f.string("source_texture");
  m.frame_width = f.integer("frame_width");
  m.frame_height = f.integer("frame_height");
  m.frame0_to_reference = homography_from_json(f.at("frame0_to_reference"));
  const Json& segments = f.at("segments");
  if (!segments.is_array()) parse_error("sequence manifest: 'segments' must be an array");
  for (const auto& s : segments) m.segments.push_back(path_segment_from_json(s));
  f.finish();
  if (m.frames.empty() || m.truths.size() + 1 != m.frames.size()) {
    parse_error("sequence manifest: need exactly one truth per consecutive frame pair");
  }
  return m;
}

Json to_json(const RegistrationResult& r) {
  Json j = {{"theta_hat", to_json(r.theta_hat)},
            {"final_score", number_or_null(r.final_score)},
            {"iterations", r.iterations},
            {"total_iterations", r.total_iterations},
            {"converged", r.converged},
            {"stop_reason", r.stop_reason}};
  if (auto p = matrix_to_params(r.theta_hat, 1e-9)) {
    j["params"] = to_json(*p);
  } else {
    j["params"] = nullptr;
  }
  return j;
}

RegistrationResult registration_result_from_json(const Json& j) {
  Fields f(j, "registration result");
  RegistrationResult r;
  r.theta_hat = homography_from_json(f.at("theta_hat"));
  const Json& score = f.at("final_score");
  r.final_score = score.is_null() ? std::numeric_limits<double>::quiet_NaN() : f.number("final_score");
  r.iterations = f.integer("iterations");
  r.total_iterations = f.integer("total_iterations");
  r.converged = f.boolean("converged");
  r.stop_reason = f.string("stop_reason");
  f.at("params");
  f.finish();
  return r;
}

Json to_json(const QDOptions& o) {
  return {{"max_iterations_per_level", o.max_iterations_per_level},
          {"step_norm_tolerance", o.step_norm_tolerance},
          {"pyramid_levels", o.pyramid_levels},
          {"hessian_damping", o.hessian_damping},
          {"translation_init_iterations", o.translation_init_iterations},
          {"max_relative_residual", o.max_relative_residual},
          {"min_overlap_fraction", o.min_overlap_fraction}};
}

QDOptions qd_options_from_json(const Json& j, QDOptions o) {
  Fields f(j, "qd options");
  f.optional("max_iterations_per_level", o.max_iterations_per_level);
  f.optional("step_norm_tolerance", o.step_norm_tolerance);
  f.optional("pyramid_levels", o.pyramid_levels);
  f.optional("hessian_damping", o.hessian_damping);
  f.optional("translation_init_iterations", o.translation_init_iterations);
  f.optional("max_relative_residual", o.max_relative_residual);
  f.optional("min_overlap_fraction", o.min_overlap_fraction);
  f.finish();
  if (o.max_iterations_per_level < 1 || o.pyramid_levels < 1 || !(o.step_norm_tolerance > 0.0) ||
      !(o.hessian_damping >= 0.0) || o.translation_init_iterations < 0) {
    parse_error("qd options: values out of range");
  }
  return o;
}

Json to_json(const MIOptions& o) {
  return {{"sample_size_a", o.sample_size_a},
          {"sample_size_b", o.sample_size_b},
          {"parzen_sigma", o.parzen_sigma},
          {"learning_rates",
           {{"translation", o.learning_rates.translation},
            {"linear", o.learning_rates.linear},
            {"perspective", o.learning_rates.perspective}}},
          {"decay_offset", o.decay_offset},
          {"max_step_px", o.max_step_px},
          {"max_iterations", o.max_iterations},
          {"plateau_window", o.plateau_window},
          {"plateau_tolerance_px", o.plateau_tolerance_px},
          {"histogram_bins", o.histogram_bins},
          {"min_normalized_mi", o.min_normalized_mi},
          {"seed", o.seed}};
}

MIOptions mi_options_from_json(const Json& j, MIOptions o) {
  Fields f(j, "mi options");
  f.optional("sample_size_a", o.sample_size_a);
  f.optional("sample_size_b", o.sample_size_b);
  f.optional("parzen_sigma", o.parzen_sigma);
  if (f.has("learning_rates")) {
    Fields lr(f.at("learning_rates"), "mi learning rates");
    lr.optional("translation", o.learning_rates.translation);
    lr.optional("linear", o.learning_rates.linear);
    lr.optional("perspective", o.learning_rates.perspective);
    lr.finish();
  }
  f.optional("decay_offset", o.decay_offset);
  f.optional("max_step_px", o.max_step_px);
  f.optional("max_iterations", o.max_iterations);
  f.optional("plateau_window", o.plateau_window);
  f.optional("plateau_tolerance_px", o.plateau_tolerance_px);
  f.optional("histogram_bins", o.histogram_bins);
  f.optional("min_normalized_mi", o.min_normalized_mi);
  f.optional("seed", o.seed);
  f.finish();
  if (o.sample_size_a < 8 || o.sample_size_b < 8 || !(o.parzen_sigma > 0.0) ||
      !(o.learning_rates.translation > 0.0) || !(o.learning_rates.linear > 0.0) ||
      !(o.learning_rates.perspective > 0.0) || o.max_iterations < 1 || o.plateau_window < 1 ||
      o.histogram_bins < 2 || !(o.decay_offset > 0.0)) {
    parse_error("mi options: values out of range");
  }
  return o;
}

Json to_json(const RobustnessTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json row = {{"parameter", to_string(r.parameter)}, {"grid", r.grid}};
    row["passing_radius"] = r.passing_radius ? Json(*r.passing_radius) : Json(nullptr);
    rows.push_back(row);
  }
  return {{"schema", "regmosaic.robustness"},
          {"schema_version", kSchemaVersion},
          {"algorithm", t.algorithm},
          {"success_threshold_px", t.success_threshold},
          {"crop", t.crop},
          {"cells", t.cells.size()},
          {"rows", rows}};
}

Json to_json(const AccuracyReport& r) {
  Json errors = Json::array();
  for (double e : r.per_pair_error) errors.push_back(number_or_null(e));
  Json seg = Json::array();
  for (double m : segment_means(r)) seg.push_back(number_or_null(m));
  std::size_t failures = 0;
  for (double e : r.per_pair_error) failures += std::isfinite(e) ? 0 : 1;
  return {{"schema", "regmosaic.accuracy"},
          {"schema_version", kSchemaVersion},
          {"algorithm", r.algorithm},
          {"sequence", r.sequence},
          {"per_pair_error_px", errors},
          {"segment_of_pair", r.segment_of_pair},
          {"segment_mean_error_px", seg},
          {"failures", failures}};
}

Json to_json(const std::vector<SpeedRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"algorithm", r.algorithm},
                   {"pairs", r.pairs},
                   {"mean_iterations", r.mean_iterations},
                   {"mean_total_iterations", r.mean_total_iterations},
                   {"mean_seconds", r.mean_seconds},
                   {"mean_error_px", number_or_null(r.mean_error)}});
  }
  return {{"schema", "regmosaic.speed"}, {"schema_version", kSchemaVersion}, {"rows", out}};
}

Json panorama_sidecar(const Panorama& p, const GlobalChain& chain) {
  Json globals = Json::array();
  for (const auto& g : chain.globals) globals.push_back(to_json(g));
  std::size_t covered = 0;
  for (int c : p.coverage) covered += c > 0 ? 1 : 0;
  return {{"schema", "regmosaic.panorama"},
          {"schema_version", kSchemaVersion},
          {"width", p.canvas.width()},
          {"height", p.canvas.height()},
          {"origin_offset", {p.origin_offset.x, p.origin_offset.y}},
          {"blend_mode", to_string(p.mode)},
          {"covered_pixels", covered},
          {"globals", globals}};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    parse_error(std::string("malformed JSON: ") + e.what());
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<std::size_t> segment_labels(const std::vector<PathSegment>& segments) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < segments.size(); ++s) out.insert(out.end(), segments[s].count, s);
  return out;
}

std::filesystem::path save_sequence(const std::filesystem::path& dir, const Sequence& seq,
                                    const std::vector<PathSegment>& segments,
                                    const std::string& source_texture) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  SequenceManifest m;
  m.truths = seq.truths;
  m.source_texture = source_texture;
  m.frame_width = seq.frames.empty() ? 0 : seq.frames.front().width();
  m.frame_height = seq.frames.empty() ? 0 : seq.frames.front().height();
  m.frame0_to_reference = seq.globals.front();
  m.segments = segments;
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.pgm", k);
    write_pgm(dir / name, seq.frames[k]);
    m.frames.push_back(name);
  }
  const auto path = dir / "manifest.json";
  write_json(path, to_json(m));
  return path;
}

LoadedSequence load_sequence(const std::filesystem::path& manifest_path) {
  LoadedSequence out;
  out.manifest = manifest_from_json(read_json(manifest_path));
  const auto base = manifest_path.parent_path();
  for (const auto& f : out.manifest.frames) {
    GrayImage img = read_image(base / f);
    if (img.width() != out.manifest.frame_width || img.height() != out.manifest.frame_height) {
      throw Error(ErrorCode::DimensionMismatch, "frame " + f + " does not match the manifest size");
    }
    out.frames.push_back(std::move(img));
  }
  return out;
}

}  // namespace regmosaic
