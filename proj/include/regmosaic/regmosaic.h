/*
 * Copyright 2026 The regmosaic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libregmosaic.
 *
 * Every function returns an rm_status. On failure the message of the most
 * recent error on the calling thread is available from rm_last_error().
 * Objects are opaque and owned by the caller once returned; release them with
 * the matching *_free function. Strings returned through char** must be
 * released with rm_string_free.
 *
 * Homographies travel as 9 doubles in row-major order, acting on centered
 * pixel coordinates (origin at the image center). A registration result maps
 * source coordinates onto target coordinates.
 */

#ifndef REGMOSAIC_H
#define REGMOSAIC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(REGMOSAIC_BUILDING_LIBRARY)
#    define RM_API __declspec(dllexport)
#  else
#    define RM_API __declspec(dllimport)
#  endif
#else
#  define RM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rm_status {
  RM_OK = 0,
  RM_ERR_INVALID_ARGUMENT = 1,
  RM_ERR_DEGENERATE_DIVISOR = 2,
  RM_ERR_SINGULAR_TRANSFORM = 3,
  RM_ERR_IMAGE_TOO_SMALL = 4,
  RM_ERR_DIMENSION_MISMATCH = 5,
  RM_ERR_EMPTY_OVERLAP = 6,
  RM_ERR_SINGULAR_HESSIAN = 7,
  RM_ERR_DEGENERATE_SAMPLES = 8,
  RM_ERR_DISPLACEMENT_TOO_LARGE = 9,
  RM_ERR_IO = 10,
  RM_ERR_PARSE = 11,
  RM_ERR_INTERNAL = 12
} rm_status;

typedef struct rm_image rm_image;
typedef struct rm_result rm_result;

RM_API const char* rm_version(void);
RM_API const char* rm_status_name(rm_status status);
/* Message of the last failure on this thread; empty when none. */
RM_API const char* rm_last_error(void);
RM_API void rm_string_free(char* s);

/* Images. Intensities are doubles in [0, 255], row-major. A null `data`
   gives a black image. */
RM_API rm_status rm_image_create(int width, int height, const double* data, rm_image** out);
RM_API rm_status rm_image_load(const char* path, rm_image** out);
/* PNG for a ".png" path, binary PGM otherwise. */
RM_API rm_status rm_image_save(const rm_image* img, const char* path);
RM_API rm_status rm_image_texture(int width, int height, uint64_t seed, rm_image** out);
RM_API int rm_image_width(const rm_image* img);
RM_API int rm_image_height(const rm_image* img);
/* Borrowed pointer, valid until the image is freed. */
RM_API const double* rm_image_data(const rm_image* img);
RM_API void rm_image_free(rm_image* img);

/* Synthetic pair from a viewpoint change given as JSON (fields tx, ty,
 * tz_as_scale, phi, psi, alpha in radians, focal). truth receives 9 doubles. */
RM_API rm_status rm_make_pair(const rm_image* ref, const char* viewpoint_json, int crop,
                              rm_image** target, rm_image** source, double* truth);

/* algorithm is "qd" or "mi"; options_json may be NULL for defaults; init may
 * be NULL for the identity. */
RM_API rm_status rm_register(const rm_image* target, const rm_image* source,
                             const char* algorithm, const char* options_json,
                             const double* init, rm_result** out);
RM_API rm_status rm_result_matrix(const rm_result* r, double* m);
RM_API int rm_result_converged(const rm_result* r);
RM_API int rm_result_iterations(const rm_result* r);
RM_API double rm_result_score(const rm_result* r);
RM_API rm_status rm_result_json(const rm_result* r, char** json);
RM_API void rm_result_free(rm_result* r);

/* Mean distance between homologous pixels of a width x height frame. */
RM_API rm_status rm_mean_registration_error(const double* truth, const double* estimate,
                                            int width, int height, double* out);

/* Whole runs configured by JSON; *summary_json receives the result summary,
 * including the resolved configuration. */
RM_API rm_status rm_run_synth(const char* config_json, char** summary_json);
RM_API rm_status rm_run_register(const char* config_json, char** summary_json);
RM_API rm_status rm_run_mosaic(const char* config_json, char** summary_json);
RM_API rm_status rm_run_eval_robustness(const char* config_json, char** summary_json);
RM_API rm_status rm_run_eval_accuracy(const char* config_json, char** summary_json);
RM_API rm_status rm_run_eval_speed(const char* config_json, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* REGMOSAIC_H */
