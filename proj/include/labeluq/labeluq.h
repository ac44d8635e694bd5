/*
 * Copyright 2026 The LabelUQ Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the LabelUQ library: label uncertainty of LiDAR boxes,
 * spatial uncertainty grids, JIoU metrics, uncertainty-aware losses and the
 * batch pipeline.
 *
 * Every function returns an lu_status. On failure a message is available
 * from lu_last_error() on the calling thread until its next call. Handles are
 * opaque and owned by the caller; free them with the matching *_free.
 */

#ifndef LABELUQ_LABELUQ_H_
#define LABELUQ_LABELUQ_H_

#include <stddef.h>

#if defined(LABELUQ_BUILDING_LIBRARY)
#define LU_API __attribute__((visibility("default")))
#else
#define LU_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lu_status {
  LU_OK = 0,
  LU_INVALID_ARGUMENT = 1,
  LU_PARSE_ERROR = 2,
  LU_IO_ERROR = 3,
  LU_RANK_DEFICIENT = 4,
  LU_COVERAGE_ERROR = 5,
  LU_GRID_MISMATCH = 6,
  LU_UNDEFINED = 7,
  LU_INTERNAL_ERROR = 8
} lu_status;

/* BEV box: center (c1, c2), length l along the heading, width w, yaw r. */
typedef struct lu_box {
  double c1, c2, l, w, r;
} lu_box;

/* Prior variances of (c1, c2, l, w, r); weight 0 is non-informative. */
typedef struct lu_prior {
  double variances[5];
  double weight;
} lu_prior;

typedef enum lu_sigma_mode { LU_SIGMA_FIXED = 0, LU_SIGMA_EM = 1 } lu_sigma_mode;

typedef struct lu_vb_config {
  int num_components;
  lu_sigma_mode sigma_mode;
  double sigma;
  int max_iters;
  double tol;
  int surface_samples;
} lu_vb_config;

typedef struct lu_grid_spec {
  double origin_x, origin_y;
  double resolution;
  int nx, ny;
} lu_grid_spec;

typedef struct lu_loss_input {
  double y_hat;
  double sigma2_hat;
  double y_bar;
  double sigma2_p;
} lu_loss_input;

/* Per-parameter label variances. */
typedef struct lu_param_variances {
  double dx, dy, log_l, log_w, sin_r, cos_r;
  double c1, c2, l, w, r;
} lu_param_variances;

typedef struct lu_posterior lu_posterior;
typedef struct lu_grid lu_grid;

LU_API const char* lu_version(void);
LU_API const char* lu_last_error(void);
LU_API const char* lu_status_name(lu_status status);

LU_API void lu_prior_default(lu_prior* prior);
LU_API void lu_vb_config_default(lu_vb_config* cfg);

/* Geometry. */
LU_API lu_status lu_rotated_iou(const lu_box* a, const lu_box* b, double* iou);

/* Label posterior from K BEV points given as interleaved (x, y) pairs. */
LU_API lu_status lu_infer(const double* points_xy, size_t num_points,
                          const lu_box* label, const lu_prior* prior,
                          const lu_vb_config* cfg, lu_posterior** out);
LU_API lu_status lu_posterior_prior_only(const lu_box* label, const lu_prior* prior,
                                         lu_posterior** out);
/* Posterior over phi = [c1, c2, l cos r, l sin r, w cos r, w sin r]; the
 * covariance is row-major 6x6. */
LU_API lu_status lu_posterior_from_phi(const double mean[6], const double cov[36],
                                       lu_posterior** out);
LU_API void lu_posterior_free(lu_posterior* post);
LU_API lu_status lu_posterior_phi(const lu_posterior* post, double mean[6], double cov[36]);
LU_API lu_status lu_posterior_label(const lu_posterior* post, lu_box* label);
LU_API lu_status lu_posterior_info(const lu_posterior* post, double* sigma2,
                                   int* iters_used, int* converged, int* num_points);
LU_API lu_status lu_posterior_variances(const lu_posterior* post, lu_param_variances* out);
/* Corners in the order (+,+), (-,+), (-,-), (+,-) of the unit box. */
LU_API lu_status lu_posterior_corner_variance(const lu_posterior* post, int corner,
                                              double* total_variance);

/* Spatial grids. */
LU_API lu_status lu_default_grid(const lu_posterior* post, double resolution,
                                 lu_grid_spec* spec);
LU_API lu_status lu_spatial_pg(const lu_posterior* post, const lu_grid_spec* spec,
                               int surface_samples, lu_grid** out);
LU_API lu_status lu_spatial_pdq(const lu_posterior* post, const lu_grid_spec* spec,
                                int draws, unsigned long long seed, lu_grid** out);
LU_API lu_status lu_uniform_box(const lu_box* box, const lu_grid_spec* spec, lu_grid** out);
LU_API void lu_grid_free(lu_grid* grid);
LU_API lu_status lu_grid_spec_of(const lu_grid* grid, lu_grid_spec* spec);
/* Borrowed pointer to nx * ny row-major values (row j is y index j). */
LU_API lu_status lu_grid_values(const lu_grid* grid, const double** values, size_t* count);
LU_API lu_status lu_grid_read(const char* path, lu_grid** out);
LU_API lu_status lu_grid_write(const lu_grid* grid, const char* path);
LU_API lu_status lu_grid_write_pgm(const lu_grid* grid, const char* path);

/* Metrics. lu_jiou resamples both grids onto their union grid. */
LU_API lu_status lu_prob_jaccard(const double* p, const double* q, size_t n, double* out);
LU_API lu_status lu_jiou(const lu_grid* a, const lu_grid* b, double* out);
LU_API lu_status lu_jiou_gt(const lu_posterior* post, double resolution, double* out);
LU_API lu_status lu_jiou_ratio(const lu_box* det, const lu_posterior* gt,
                               double resolution, double* out);

/* Losses; grad receives (d/dy_hat, d/dsigma2_hat) and may be NULL. */
LU_API lu_status lu_nll_loss(const lu_loss_input* in, double* loss, double grad[2]);
LU_API lu_status lu_kld_loss(const lu_loss_input* in, double* loss, double grad[2]);

/* Runs a pipeline command (infer, spatial, jiou, eval, synth, noise-study,
 * loss). overrides_json may be NULL. On success *summary_json receives a
 * JSON document to release with lu_string_free. */
LU_API lu_status lu_pipeline_run(const char* command, const char* config_json,
                                 const char* overrides_json, char** summary_json);
LU_API void lu_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* LABELUQ_LABELUQ_H_ */
