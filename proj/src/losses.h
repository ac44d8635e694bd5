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

// Uncertainty-aware regression losses and per-parameter label variances.

#ifndef LABELUQ_LOSSES_H_
#define LABELUQ_LOSSES_H_

#include <array>
#include <string>
#include <vector>

#include "geometry.h"
#include "labelvb.h"

namespace labeluq {

struct LossInput {
  double y_hat = 0.0;
  double sigma2_hat = 1.0;
  double y_bar = 0.0;
  double sigma2_p = 0.0;
};

struct LossGradient {
  double d_y_hat = 0.0;
  double d_sigma2_hat = 0.0;
};

// 0.5 log(s2_hat) + (y_bar - y_hat)^2 / (2 s2_hat).
double NllLoss(const LossInput& in);
LossGradient NllGradient(const LossInput& in);

// log(s_hat / s_p) + (s2_p + (y_bar - y_hat)^2) / (2 s2_hat). Requires
// sigma2_p > 0; use NllLoss for a delta label.
double KldLoss(const LossInput& in);
LossGradient KldGradient(const LossInput& in);

// Second moments of V = A(xi) phi under a Gaussian phi, where
// A(xi) = [xi3 I2 | xi1 I2 | xi2 R90] stacks center, length and width axes.
Eigen::Vector2d MomentMean(const PhiGaussian& phi, const Eigen::Vector3d& xi);
Eigen::Matrix2d MomentSecond(const PhiGaussian& phi, const Eigen::Vector3d& xi);

struct ParameterMoments {
  double e_l2 = 0.0;
  double e_w2 = 0.0;
  double var_c1 = 0.0;
  double var_c2 = 0.0;
  double cov_c12 = 0.0;
};

ParameterMoments RecoverParameterMoments(const PhiGaussian& phi);
ParameterMoments RecoverParameterMoments(const LabelPosterior& posterior);

// 3D variant over phi = [c1, c2, c3, l cos r, l sin r, w cos r, w sin r, h]
// with xi in R^4 (three unit axes, then the center weight).
struct Phi3dGaussian {
  Feature3d mean = Feature3d::Zero();
  Eigen::Matrix<double, 8, 8> cov = Eigen::Matrix<double, 8, 8>::Zero();
};

struct ParameterMoments3d {
  double e_l2 = 0.0;
  double e_w2 = 0.0;
  double e_h2 = 0.0;
  Eigen::Matrix3d center_cov = Eigen::Matrix3d::Zero();
};

Eigen::Matrix3d MomentSecond(const Phi3dGaussian& phi, const Eigen::Vector4d& xi);
ParameterMoments3d RecoverParameterMoments(const Phi3dGaussian& phi);

struct ParamVariances {
  double dx = 0.0;
  double dy = 0.0;
  double log_l = 0.0;
  double log_w = 0.0;
  double sin_r = 0.0;
  double cos_r = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double l = 0.0;
  double w = 0.0;
  double r = 0.0;
};

// Regression targets in network order: dx, dy, log l, log w, sin r, cos r.
inline constexpr std::array<const char*, 6> kTargetNames = {
    "dx", "dy", "log_l", "log_w", "sin_r", "cos_r"};
std::array<double, 6> TargetVariances(const ParamVariances& v);

// Throws kInvalidArgument when a mean extent is below 1e-3 m.
ParamVariances PropagateVariances(const PhiGaussian& phi);
ParamVariances PropagateVariances(const LabelPosterior& posterior);

// Per-object inputs for the label-variance table.
struct LossTableObject {
  std::string id;
  bool has_posterior = false;
  LabelPosterior posterior;
  std::size_t num_points = 0;
  double hull_iou = 0.0;
};

struct LossTableConfig {
  // Heuristic variances are base * scale, with scale 1 / (1 + log10(1 + K))
  // for num_points and 1 - hull IoU (floored) for covx_hull.
  std::array<double, 6> heuristic_base = {1e-2, 1e-2, 1e-2, 1e-2, 1e-2, 1e-2};
  std::vector<double> fixed = {1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};
};

inline constexpr double kHeuristicFloor = 1e-6;

struct LossTableRow {
  std::string id;
  std::string parameter;
  std::string method;
  double sigma2_p = 0.0;
};

std::vector<LossTableRow> BuildLossTable(const std::vector<LossTableObject>& objects,
                                         const LossTableConfig& cfg);
// Comma-separated with a header line.
std::string LossTableToCsv(const std::vector<LossTableRow>& rows);

}  // namespace labeluq

#endif  // LABELUQ_LOSSES_H_
