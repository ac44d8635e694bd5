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

#include "jiou.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "error.h"

namespace labeluq {

namespace {

std::vector<double> Normalized(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) {
    Require(x >= 0.0 && std::isfinite(x), "cell masses must be finite and non-negative");
    total += x;
  }
  Require(total > 0.0, "cell masses sum to zero");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i] / total;
    out[i] = x < kSupportThreshold ? 0.0 : x;
  }
  return out;
}

}  // namespace

std::string MetricName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kIou:
      return "iou";
    case MetricKind::kJiou:
      return "jiou";
    case MetricKind::kJiouGt:
      return "jiou_gt";
    case MetricKind::kJiouRatio:
      return "jiou_ratio";
  }
  return "unknown";
}

MetricKind ParseMetricKind(const std::string& name) {
  for (MetricKind k : {MetricKind::kIou, MetricKind::kJiou, MetricKind::kJiouGt,
                       MetricKind::kJiouRatio}) {
    if (MetricName(k) == name) return k;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown metric '" + name + "'");
}

double ProbJaccard(std::span<const double> p_in, std::span<const double> q_in) {
  Require(p_in.size() == q_in.size(), "distributions must have the same length");
  Require(!p_in.empty(), "distributions must be non-empty");
  const std::vector<double> p = Normalized(p_in), q = Normalized(q_in);

  // Cells sorted by t = q / p; t = inf where only q has mass.
  std::vector<std::size_t> order;
  std::vector<double> t(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0 && q[j] == 0.0) continue;
    t[j] = p[j] > 0.0 ? q[j] / p[j] : std::numeric_limits<double>::infinity();
    order.push_back(j);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });

  const std::size_t n = order.size();
  // prefix_p[k] = sum of p over order[0..k), suffix_q[k] = sum of q over order[k..n).
  std::vector<double> prefix_p(n + 1, 0.0), suffix_q(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix_p[k + 1] = prefix_p[k] + p[order[k]];
  for (std::size_t k = n; k-- > 0;) suffix_q[k] = suffix_q[k + 1] + q[order[k]];

  double j_total = 0.0;
  std::size_t k = 0;
  while (k < n) {
    // Group of equal t: both branches agree there, so it goes to the p side.
    std::size_t end = k + 1;
    while (end < n && t[order[end]] == t[order[k]]) ++end;
    for (std::size_t g = k; g < end; ++g) {
      const std::size_t i = order[g];
      if (p[i] == 0.0 || q[i] == 0.0) continue;
      const double denom = prefix_p[end] / p[i] + suffix_q[end] / q[i];
      j_total += 1.0 / denom;
    }
    k = end;
  }
  return std::clamp(j_total, 0.0, 1.0);
}

MetricValue Jiou(const SpatialGrid& a, const SpatialGrid& b) {
  if (!(a.spec == b.spec)) {
    Fail(ErrorCode::kGridMismatch, "JIoU inputs must share a grid; resample first");
  }
  return {ProbJaccard(a.values, b.values), MetricKind::kJiou};
}

std::pair<SpatialGrid, SpatialGrid> ResampleToCommon(const SpatialGrid& a,
                                                     const SpatialGrid& b) {
  if (a.spec == b.spec) return {a, b};
  const GridSpec common = UnionGrid(a.spec, b.spec);
  return {Resample(a, common), Resample(b, common)};
}

MetricValue JiouGt(const BoxBev& label, const LabelPosterior& posterior,
                   const GridSpec& grid, int surface_samples) {
  const SpatialGrid uniform = UniformBoxGrid(label, grid);
  const SpatialGrid pg = SpatialPg(posterior, grid, surface_samples);
  return {Jiou(uniform, pg).value, MetricKind::kJiouGt};
}

MetricValue JiouRatio(const SpatialGrid& det_uniform, const SpatialGrid& gt_pg,
                      const SpatialGrid& gt_uniform) {
  const double gt = Jiou(gt_uniform, gt_pg).value;
  if (!(gt > 0.0)) Fail(ErrorCode::kUndefined, "JIoU-Ratio undefined: JIoU-GT is zero");
  const double ratio = Jiou(det_uniform, gt_pg).value / gt;
  return {std::clamp(ratio, 0.0, 1.0), MetricKind::kJiouRatio};
}

MetricValue JiouRatio(const BoxBev& det, const LabelPosterior& gt_posterior,
                      const GridSpec& grid, int surface_samples) {
  return JiouRatio(UniformBoxGrid(det, grid), SpatialPg(gt_posterior, grid, surface_samples),
                   UniformBoxGrid(gt_posterior.label, grid));
}

}  // namespace labeluq
