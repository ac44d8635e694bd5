// Copyright 2026 The LabelUQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "labeluq/labeluq.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.h"
#include "geometry.h"
#include "jiou.h"
#include "labelvb.h"
#include "losses.h"
#include "pipeline.h"
#include "spatialdist.h"

struct lu_posterior {
  labeluq::LabelPosterior post;
};

struct lu_grid {
  labeluq::SpatialGrid grid;
};

namespace {

using labeluq::ErrorCode;

thread_local std::string last_error;

static_assert(static_cast<int>(ErrorCode::kInvalidArgument) == LU_INVALID_ARGUMENT);
static_assert(static_cast<int>(ErrorCode::kParse) == LU_PARSE_ERROR);
static_assert(static_cast<int>(ErrorCode::kIo) == LU_IO_ERROR);
static_assert(static_cast<int>(ErrorCode::kRankDeficient) == LU_RANK_DEFICIENT);
static_assert(static_cast<int>(ErrorCode::kCoverage) == LU_COVERAGE_ERROR);
static_assert(static_cast<int>(ErrorCode::kGridMismatch) == LU_GRID_MISMATCH);
static_assert(static_cast<int>(ErrorCode::kUndefined) == LU_UNDEFINED);
static_assert(static_cast<int>(ErrorCode::kInternal) == LU_INTERNAL_ERROR);

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
lu_status Guard(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return LU_OK;
  } catch (const labeluq::Error& e) {
    last_error = e.what();
    return static_cast<lu_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("json: ") + e.what();
    return LU_PARSE_ERROR;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return LU_IO_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return LU_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return LU_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return LU_INTERNAL_ERROR;
  }
}

void NotNull(const void* p, const char* name) {
  labeluq::Require(p != nullptr, std::string(name) + " must not be NULL");
}

labeluq::BoxBev ToBox(const lu_box* b) {
  NotNull(b, "box");
  return labeluq::MakeBoxBev(b->c1, b->c2, b->l, b->w, b->r);
}

labeluq::PriorSpec ToPrior(const lu_prior* p) {
  labeluq::PriorSpec prior;
  if (p) {
    for (int i = 0; i < 5; ++i) prior.variances[i] = p->variances[i];
    prior.weight = p->weight;
  }
  return prior;
}

labeluq::VbConfig ToVb(const lu_vb_config* c) {
  labeluq::VbConfig cfg;
  if (c) {
    cfg.num_components = c->num_components;
    if (c->sigma_mode != LU_SIGMA_FIXED && c->sigma_mode != LU_SIGMA_EM) {
      labeluq::Fail(ErrorCode::kInvalidArgument, "unknown sigma mode");
    }
    cfg.sigma_mode = c->sigma_mode == LU_SIGMA_FIXED ? labeluq::SigmaMode::kFixed
                                                      : labeluq::SigmaMode::kEmFit;
    cfg.sigma = c->sigma;
    cfg.max_iters = c->max_iters;
    cfg.tol = c->tol;
    cfg.surface_samples = c->surface_samples;
  }
  return cfg;
}

labeluq::GridSpec ToSpec(const lu_grid_spec* s) {
  NotNull(s, "grid spec");
  labeluq::GridSpec spec;
  spec.origin = labeluq::Vec2(s->origin_x, s->origin_y);
  spec.resolution = s->resolution;
  spec.nx = s->nx;
  spec.ny = s->ny;
  labeluq::Validate(spec);
  return spec;
}

void FromSpec(const labeluq::GridSpec& spec, lu_grid_spec* out) {
  out->origin_x = spec.origin.x();
  out->origin_y = spec.origin.y();
  out->resolution = spec.resolution;
  out->nx = spec.nx;
  out->ny = spec.ny;
}

labeluq::LossInput ToLoss(const lu_loss_input* in) {
  NotNull(in, "loss input");
  return {in->y_hat, in->sigma2_hat, in->y_bar, in->sigma2_p};
}

nlohmann::json ParseJson(const char* text, const char* what) {
  if (!text || !*text) return nlohmann::json();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    labeluq::Fail(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

extern "C" {

const char* lu_version(void) { return "1.0.0"; }

const char* lu_last_error(void) { return last_error.c_str(); }

const char* lu_status_name(lu_status status) {
  switch (status) {
    case LU_OK:
      return "ok";
    case LU_INVALID_ARGUMENT:
      return "invalid argument";
    case LU_PARSE_ERROR:
      return "parse error";
    case LU_IO_ERROR:
      return "io error";
    case LU_RANK_DEFICIENT:
      return "rank deficient";
    case LU_COVERAGE_ERROR:
      return "coverage error";
    case LU_GRID_MISMATCH:
      return "grid mismatch";
    case LU_UNDEFINED:
      return "undefined";
    case LU_INTERNAL_ERROR:
      return "internal error";
  }
  return "unknown";
}

void lu_prior_default(lu_prior* prior) {
  if (!prior) return;
  const labeluq::PriorSpec p;
  for (int i = 0; i < 5; ++i) prior->variances[i] = p.variances[i];
  prior->weight = p.weight;
}

void lu_vb_config_default(lu_vb_config* cfg) {
  if (!cfg) return;
  const labeluq::VbConfig c;
  cfg->num_components = c.num_components;
  cfg->sigma_mode = c.sigma_mode == labeluq::SigmaMode::kFixed ? LU_SIGMA_FIXED : LU_SIGMA_EM;
  cfg->sigma = c.sigma;
  cfg->max_iters = c.max_iters;
  cfg->tol = c.tol;
  cfg->surface_samples = c.surface_samples;
}

lu_status lu_rotated_iou(const lu_box* a, const lu_box* b, double* iou) {
  return Guard([&] {
    NotNull(iou, "iou");
    *iou = labeluq::RotatedIou(ToBox(a), ToBox(b));
  });
}

lu_status lu_infer(const double* points_xy, size_t num_points, const lu_box* label,
                   const lu_prior* prior, const lu_vb_config* cfg, lu_posterior** out) {
  return Guard([&] {
    NotNull(out, "out");
    labeluq::Require(num_points == 0 || points_xy != nullptr, "points must not be NULL");
    std::vector<labeluq::Vec2> pts(num_points);
    for (size_t k = 0; k < num_points; ++k) {
      pts[k] = labeluq::Vec2(points_xy[2 * k], points_xy[2 * k + 1]);
    }
    auto* h = new lu_posterior{labeluq::InferPosterior(pts, ToBox(label), ToPrior(prior), ToVb(cfg))};
    *out = h;
  });
}

lu_status lu_posterior_prior_only(const lu_box* label, const lu_prior* prior,
                                  lu_posterior** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new lu_posterior{labeluq::PriorOnlyPosterior(ToBox(label), ToPrior(prior))};
  });
}

lu_status lu_posterior_from_phi(const double mean[6], const double cov[36],
                                lu_posterior** out) {
  return Guard([&] {
    NotNull(mean, "mean");
    NotNull(cov, "cov");
    NotNull(out, "out");
    labeluq::LabelPosterior p;
    for (int i = 0; i < 6; ++i) p.phi_mean[i] = mean[i];
    for (int i = 0; i < 36; ++i) p.phi_cov(i / 6, i % 6) = cov[i];
    labeluq::Require(p.phi_cov.isApprox(p.phi_cov.transpose(), 1e-12) ||
                         p.phi_cov.isZero(0.0),
                     "covariance must be symmetric");
    p.label = labeluq::BoxFromFeature(p.phi_mean);
    p.converged = true;
    *out = new lu_posterior{p};
  });
}

void lu_posterior_free(lu_posterior* post) { delete post; }

lu_status lu_posterior_phi(const lu_posterior* post, double mean[6], double cov[36]) {
  return Guard([&] {
    NotNull(post, "posterior");
    if (mean) {
      for (int i = 0; i < 6; ++i) mean[i] = post->post.phi_mean[i];
    }
    if (cov) {
      for (int i = 0; i < 36; ++i) cov[i] = post->post.phi_cov(i / 6, i % 6);
    }
  });
}

lu_status lu_posterior_label(const lu_posterior* post, lu_box* label) {
  return Guard([&] {
    NotNull(post, "posterior");
    NotNull(label, "label");
    const labeluq::BoxBev& b = post->post.label;
    *label = {b.c1, b.c2, b.l, b.w, b.r};
  });
}

lu_status lu_posterior_info(const lu_posterior* post, double* sigma2, int* iters_used,
                            int* converged, int* num_points) {
  return Guard([&] {
    NotNull(post, "posterior");
    if (sigma2) *sigma2 = post->post.sigma2;
    if (iters_used) *iters_used = post->post.iters_used;
    if (converged) *converged = post->post.converged ? 1 : 0;
    if (num_points) *num_points = post->post.num_points;
  });
}

lu_status lu_posterior_variances(const lu_posterior* post, lu_param_variances* out) {
  return Guard([&] {
    NotNull(post, "posterior");
    NotNull(out, "out");
    const labeluq::ParamVariances v = labeluq::PropagateVariances(post->post);
    *out = {v.dx, v.dy, v.log_l, v.log_w, v.sin_r, v.cos_r, v.c1, v.c2, v.l, v.w, v.r};
  });
}

lu_status lu_posterior_corner_variance(const lu_posterior* post, int corner,
                                       double* total_variance) {
  return Guard([&] {
    NotNull(post, "posterior");
    NotNull(total_variance, "total_variance");
    *total_variance = labeluq::CornerTotalVariance(post->post, corner);
  });
}

lu_status lu_default_grid(const lu_posterior* post, double resolution, lu_grid_spec* spec) {
  return Guard([&] {
    NotNull(post, "posterior");
    NotNull(spec, "spec");
    FromSpec(labeluq::DefaultGrid(post->post.phi(), resolution), spec);
  });
}

lu_status lu_spatial_pg(const lu_posterior* post, const lu_grid_spec* spec,
                        int surface_samples, lu_grid** out) {
  return Guard([&] {
    NotNull(post, "posterior");
    NotNull(out, "out");
    *out = new lu_grid{labeluq::SpatialPg(post->post, ToSpec(spec), surface_samples)};
  });
}

lu_status lu_spatial_pdq(const lu_posterior* post, const lu_grid_spec* spec, int draws,
                         unsigned long long seed, lu_grid** out) {
  return Guard([&] {
    NotNull(post, "posterior");
    NotNull(out, "out");
    *out = new lu_grid{labeluq::SpatialPdq(labeluq::BoxSampler::Gaussian(post->post.phi()),
                                           ToSpec(spec), draws, seed)};
  });
}

lu_status lu_uniform_box(const lu_box* box, const lu_grid_spec* spec, lu_grid** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new lu_grid{labeluq::UniformBoxGrid(ToBox(box), ToSpec(spec))};
  });
}

void lu_grid_free(lu_grid* grid) { delete grid; }

lu_status lu_grid_spec_of(const lu_grid* grid, lu_grid_spec* spec) {
  return Guard([&] {
    NotNull(grid, "grid");
    NotNull(spec, "spec");
    FromSpec(grid->grid.spec, spec);
  });
}

lu_status lu_grid_values(const lu_grid* grid, const double** values, size_t* count) {
  return Guard([&] {
    NotNull(grid, "grid");
    NotNull(values, "values");
    NotNull(count, "count");
    *values = grid->grid.values.data();
    *count = grid->grid.values.size();
  });
}

lu_status lu_grid_read(const char* path, lu_grid** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new lu_grid{labeluq::ReadGrid(path)};
  });
}

lu_status lu_grid_write(const lu_grid* grid, const char* path) {
  return Guard([&] {
    NotNull(grid, "grid");
    NotNull(path, "path");
    labeluq::WriteGrid(path, grid->grid);
  });
}

lu_status lu_grid_write_pgm(const lu_grid* grid, const char* path) {
  return Guard([&] {
    NotNull(grid, "grid");
    NotNull(path, "path");
    labeluq::WritePgm(path, grid->grid);
  });
}

lu_status lu_prob_jaccard(const double* p, const double* q, size_t n, double* out) {
  return Guard([&] {
    NotNull(p, "p");
    NotNull(q, "q");
    NotNull(out, "out");
    *out = labeluq::ProbJaccard(std::span<const double>(p, n), std::span<const double>(q, n));
  });
}

lu_status lu_jiou(const lu_grid* a, const lu_grid* b, double* out) {
  return Guard([&] {
    NotNull(a, "a");
    NotNull(b, "b");
    NotNull(out, "out");
    const auto [ra, rb] = labeluq::ResampleToCommon(a->grid, b->grid);
    *out = labeluq::Jiou(ra, rb).value;
  });
}

lu_status lu_jiou_gt(const lu_posterior* post, double resolution, double* out) {
  return Guard([&] {
    NotNull(post, "posterior");
    NotNull(out, "out");
    const labeluq::GridSpec spec = labeluq::DefaultGrid(post->post.phi(), resolution);
    *out = labeluq::JiouGt(post->post.label, post->post, spec).value;
  });
}

lu_status lu_jiou_ratio(const lu_box* det, const lu_posterior* gt, double resolution,
                        double* out) {
  return Guard([&] {
    NotNull(gt, "posterior");
    NotNull(out, "out");
    const labeluq::BoxBev d = ToBox(det);
    const labeluq::GridSpec base = labeluq::DefaultGrid(gt->post.phi(), resolution);
    const auto db = labeluq::BoxBounds(d);
    const labeluq::Vec2 up = base.upper();
    const labeluq::GridSpec spec = labeluq::AlignedGrid(
        {std::min(db[0], base.origin.x()), std::min(db[1], base.origin.y()),
         std::max(db[2], up.x()), std::max(db[3], up.y())},
        resolution, 0.0);
    *out = labeluq::JiouRatio(d, gt->post, spec).value;
  });
}

lu_status lu_nll_loss(const lu_loss_input* in, double* loss, double grad[2]) {
  return Guard([&] {
    const labeluq::LossInput li = ToLoss(in);
    if (loss) *loss = labeluq::NllLoss(li);
    if (grad) {
      const auto g = labeluq::NllGradient(li);
      grad[0] = g.d_y_hat;
      grad[1] = g.d_sigma2_hat;
    }
  });
}

lu_status lu_kld_loss(const lu_loss_input* in, double* loss, double grad[2]) {
  return Guard([&] {
    const labeluq::LossInput li = ToLoss(in);
    if (loss) *loss = labeluq::KldLoss(li);
    if (grad) {
      const auto g = labeluq::KldGradient(li);
      grad[0] = g.d_y_hat;
      grad[1] = g.d_sigma2_hat;
    }
  });
}

lu_status lu_pipeline_run(const char* command, const char* config_json,
                          const char* overrides_json, char** summary_json) {
  return Guard([&] {
    NotNull(command, "command");
    const labeluq::RunConfig cfg = labeluq::ParseRunConfig(
        ParseJson(config_json, "config"), ParseJson(overrides_json, "overrides"));
    const std::string summary = labeluq::RunCommand(command, cfg).dump();
    if (summary_json) {
      char* s = static_cast<char*>(std::malloc(summary.size() + 1));
      if (!s) throw std::bad_alloc();
      std::memcpy(s, summary.c_str(), summary.size() + 1);
      *summary_json = s;
    }
  });
}

void lu_string_free(char* s) { std::free(s); }

}  // extern "C"
