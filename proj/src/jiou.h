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

// Probabilistic Jaccard index and the JIoU family of box metrics.

#ifndef LABELUQ_JIOU_H_
#define LABELUQ_JIOU_H_

#include <span>
#include <string>
#include <utility>

#include "geometry.h"
#include "labelvb.h"
#include "spatialdist.h"

namespace labeluq {

enum class MetricKind { kIou, kJiou, kJiouGt, kJiouRatio };

std::string MetricName(MetricKind kind);
MetricKind ParseMetricKind(const std::string& name);

struct MetricValue {
  double value = 0.0;
  MetricKind kind = MetricKind::kIou;
};

// Masses below this are treated as zero.
inline constexpr double kSupportThreshold = 1e-12;

// J(p, q) = sum over the shared support of 1 / sum_j max(p_j / p_i, q_j / q_i).
// Inputs are renormalized; runs in O(N log N).
double ProbJaccard(std::span<const double> p, std::span<const double> q);

// Both grids must share a GridSpec.
MetricValue Jiou(const SpatialGrid& a, const SpatialGrid& b);

// Rebins both grids onto their union grid.
std::pair<SpatialGrid, SpatialGrid> ResampleToCommon(const SpatialGrid& a,
                                                     const SpatialGrid& b);

// JIoU between the uniform label box and p_G of its posterior.
MetricValue JiouGt(const BoxBev& label, const LabelPosterior& posterior,
                   const GridSpec& grid, int surface_samples = 1024);

// JIoU(uniform(det), p_G(gt)) / JIoU-GT, clamped to [0, 1]. Throws kUndefined
// when JIoU-GT is zero.
MetricValue JiouRatio(const BoxBev& det, const LabelPosterior& gt_posterior,
                      const GridSpec& grid, int surface_samples = 1024);

// Same, from precomputed grids on one spec.
MetricValue JiouRatio(const SpatialGrid& det_uniform, const SpatialGrid& gt_pg,
                      const SpatialGrid& gt_uniform);

}  // namespace labeluq

#endif  // LABELUQ_JIOU_H_
