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

#include "regmosaic/regmosaic.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "regmosaic/error.hpp"
#include "regmosaic/eval.hpp"
#include "regmosaic/image_io.hpp"
#include "regmosaic/pipeline.hpp"
#include "regmosaic/serialize.hpp"

struct rm_image {
  regmosaic::GrayImage img;
};

struct rm_result {
  regmosaic::RegistrationResult result;
  std::string algorithm;
};

namespace {

thread_local std::string last_error;

rm_status to_status(regmosaic::ErrorCode c) {
  using regmosaic::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return RM_ERR_INVALID_ARGUMENT;
    case ErrorCode::DegenerateDivisor: return RM_ERR_DEGENERATE_DIVISOR;
    case ErrorCode::SingularTransform: return RM_ERR_SINGULAR_TRANSFORM;
    case ErrorCode::ImageTooSmall: return RM_ERR_IMAGE_TOO_SMALL;
    case ErrorCode::DimensionMismatch: return RM_ERR_DIMENSION_MISMATCH;
    case ErrorCode::EmptyOverlap: return RM_ERR_EMPTY_OVERLAP;
    case ErrorCode::SingularHessian: return RM_ERR_SINGULAR_HESSIAN;
    case ErrorCode::DegenerateSamples: return RM_ERR_DEGENERATE_SAMPLES;
    case ErrorCode::DisplacementTooLarge: return RM_ERR_DISPLACEMENT_TOO_LARGE;
    case ErrorCode::Io: return RM_ERR_IO;
    case ErrorCode::Parse: return RM_ERR_PARSE;
  }
  return RM_ERR_INTERNAL;
}

rm_status fail(rm_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <typename Fn>
rm_status guard(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return RM_OK;
  } catch (const regmosaic::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RM_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw regmosaic::Error(regmosaic::ErrorCode::InvalidArgument, what);
}

regmosaic::Homography homography_from(const double* m) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = m[i];
  return regmosaic::Homography(a);
}

void homography_to(const regmosaic::Homography& h, double* m) {
  for (int i = 0; i < 9; ++i) m[i] = h(i / 3, i % 3);
}

regmosaic::Json parse_or_empty(const char* text) {
  if (!text || !*text) return regmosaic::Json::object();
  return regmosaic::parse_json(text);
}

template <typename Run>
rm_status run_pipeline(const char* config_json, char** summary_json, Run run) {
  return guard([&] {
    require(config_json != nullptr && summary_json != nullptr, "null argument");
    *summary_json = nullptr;
    const regmosaic::Json summary = run(regmosaic::parse_json(config_json));
    *summary_json = dup_string(summary.dump(2));
  });
}

}  // namespace

extern "C" {

const char* rm_version(void) { return "0.1.0"; }

const char* rm_status_name(rm_status status) {
  switch (status) {
    case RM_OK: return "ok";
    case RM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RM_ERR_DEGENERATE_DIVISOR: return "degenerate divisor";
    case RM_ERR_SINGULAR_TRANSFORM: return "singular transform";
    case RM_ERR_IMAGE_TOO_SMALL: return "image too small";
    case RM_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case RM_ERR_EMPTY_OVERLAP: return "empty overlap";
    case RM_ERR_SINGULAR_HESSIAN: return "singular hessian";
    case RM_ERR_DEGENERATE_SAMPLES: return "degenerate samples";
    case RM_ERR_DISPLACEMENT_TOO_LARGE: return "displacement too large";
    case RM_ERR_IO: return "i/o error";
    case RM_ERR_PARSE: return "parse error";
    case RM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rm_last_error(void) { return last_error.c_str(); }

void rm_string_free(char* s) { std::free(s); }

rm_status rm_image_create(int width, int height, const double* data, rm_image** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = nullptr;
    require(width >= 0 && height >= 0, "negative image size");
    std::vector<double> v(static_cast<std::size_t>(width) * height, 0.0);
    if (data) std::copy(data, data + v.size(), v.begin());
    *out = new rm_image{regmosaic::GrayImage(width, height, std::move(v))};
  });
}

rm_status rm_image_load(const char* path, rm_image** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new rm_image{regmosaic::read_image(path)};
  });
}

rm_status rm_image_save(const rm_image* img, const char* path) {
  return guard([&] {
    require(img != nullptr && path != nullptr, "null argument");
    regmosaic::write_image(path, img->img);
  });
}

rm_status rm_image_texture(int width, int height, uint64_t seed, rm_image** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = nullptr;
    *out = new rm_image{regmosaic::procedural_texture(width, height, seed)};
  });
}

int rm_image_width(const rm_image* img) { return img ? img->img.width() : 0; }
int rm_image_height(const rm_image* img) { return img ? img->img.height() : 0; }
const double* rm_image_data(const rm_image* img) {
  return img && !img->img.empty() ? img->img.data().data() : nullptr;
}
void rm_image_free(rm_image* img) { delete img; }

rm_status rm_make_pair(const rm_image* ref, const char* viewpoint_json, int crop,
                       rm_image** target, rm_image** source, double* truth) {
  return guard([&] {
    require(ref && target && source && truth, "null argument");
    *target = nullptr;
    *source = nullptr;
    const auto v = regmosaic::viewpoint_from_json(parse_or_empty(viewpoint_json));
    regmosaic::SyntheticPair p = regmosaic::make_pair(ref->img, v, crop);
    auto t = std::make_unique<rm_image>(rm_image{std::move(p.target)});
    auto s = std::make_unique<rm_image>(rm_image{std::move(p.source)});
    homography_to(p.truth, truth);
    *target = t.release();
    *source = s.release();
  });
}

rm_status rm_register(const rm_image* target, const rm_image* source, const char* algorithm,
                      const char* options_json, const double* init, rm_result** out) {
  return guard([&] {
    require(target && source && algorithm && out, "null argument");
    *out = nullptr;
    const auto algo = regmosaic::algorithm_from_string(algorithm);
    require(algo.has_value(), "algorithm must be \"qd\" or \"mi\"");
    const regmosaic::Json opts = parse_or_empty(options_json);
    const regmosaic::Homography h0 = init ? homography_from(init) : regmosaic::Homography();
    auto r = std::make_unique<rm_result>();
    r->algorithm = algorithm;
    if (*algo == regmosaic::Algorithm::QD) {
      r->result = regmosaic::register_qd(target->img, source->img, h0,
                                         regmosaic::qd_options_from_json(opts));
    } else {
      r->result = regmosaic::register_mi(target->img, source->img, h0,
                                         regmosaic::mi_options_from_json(opts));
    }
    *out = r.release();
  });
}

rm_status rm_result_matrix(const rm_result* r, double* m) {
  return guard([&] {
    require(r && m, "null argument");
    homography_to(r->result.theta_hat, m);
  });
}

int rm_result_converged(const rm_result* r) { return r && r->result.converged ? 1 : 0; }
int rm_result_iterations(const rm_result* r) { return r ? r->result.iterations : 0; }
double rm_result_score(const rm_result* r) { return r ? r->result.final_score : 0.0; }

rm_status rm_result_json(const rm_result* r, char** json) {
  return guard([&] {
    require(r && json, "null argument");
    *json = nullptr;
    regmosaic::Json j = regmosaic::to_json(r->result);
    j["algorithm"] = r->algorithm;
    *json = dup_string(j.dump(2));
  });
}

void rm_result_free(rm_result* r) { delete r; }

rm_status rm_mean_registration_error(const double* truth, const double* estimate, int width,
                                     int height, double* out) {
  return guard([&] {
    require(truth && estimate && out, "null argument");
    *out = regmosaic::mean_registration_error(homography_from(truth), homography_from(estimate),
                                              width, height);
  });
}

rm_status rm_run_synth(const char* config_json, char** summary_json) {
  return run_pipeline(config_json, summary_json, regmosaic::run_synth);
}
rm_status rm_run_register(const char* config_json, char** summary_json) {
  return run_pipeline(config_json, summary_json, regmosaic::run_register);
}
rm_status rm_run_mosaic(const char* config_json, char** summary_json) {
  return run_pipeline(config_json, summary_json, regmosaic::run_mosaic);
}
rm_status rm_run_eval_robustness(const char* config_json, char** summary_json) {
  return run_pipeline(config_json, summary_json, regmosaic::run_eval_robustness);
}
rm_status rm_run_eval_accuracy(const char* config_json, char** summary_json) {
  return run_pipeline(config_json, summary_json, regmosaic::run_eval_accuracy);
}
rm_status rm_run_eval_speed(const char* config_json, char** summary_json) {
  return run_pipeline(config_json, summary_json, regmosaic::run_eval_speed);
}

}  // extern "C"
