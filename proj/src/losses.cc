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

#include "losses.h"

#include <algorithm>
#include <cmath>

#include "error.h"
#include "io_util.h"

namespace labeluq {

namespace {

constexpr double kMinExtent = 1e-3;

void CheckPredicted(const LossInput& in) {
  Require(in.sigma2_hat > 0.0 && std::isfinite(in.sigma2_hat),
          "predicted variance must be positive");
}

void CheckLabel(const LossInput& in) {
  Require(in.sigma2_p > 0.0 && std::isfinite(in.sigma2_p),
          "KLD loss needs a positive label variance; use the NLL loss for sigma2_p = 0");
}

Eigen::Matrix<double, 2, 6> MomentMap(const Eigen::Vector3d& xi) {
  Eigen::Matrix<double, 2, 6> a;
  a << xi[2], 0, xi[0], 0, 0, -xi[1],
       0, xi[2], 0, xi[0], xi[1], 0;
  return a;
}

Eigen::Matrix<double, 3, 8> MomentMap3d(const Eigen::Vector4d& xi) {
  Eigen::Matrix<double, 3, 8> a;
  a << xi[3], 0, 0, xi[0], 0, 0, -xi[2], 0,
       0, xi[3], 0, 0, xi[0], xi[2], 0, 0,
       0, 0, xi[3], 0, 0, 0, 0, xi[1];
  return a;
}

// Mean length of a 2D Gaussian vector to second order, and the variance
// across its mean direction.
struct PolarMoments {
  double norm = 0.0;
  double along = 0.0;
  double across = 0.0;
};

PolarMoments Polar(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
  PolarMoments m;
  m.norm = mean.norm();
  if (m.norm < kMinExtent) {
    Fail(ErrorCode::kInvalidArgument, "variance propagation is singular for extents below 1e-3 m");
  }
  const Eigen::Vector2d perp(-mean.y() / m.norm, mean.x() / m.norm);
  const Eigen::Vector2d dir = mean / m.norm;
  m.along = std::max(dir.dot(cov * dir), 0.0);
  m.across = std::max(perp.dot(cov * perp), 0.0);
  return m;
}

}  // namespace

double NllLoss(const LossInput& in) {
  CheckPredicted(in);
  const double r = in.y_bar - in.y_hat;
  return 0.5 * std::log(in.sigma2_hat) + r * r / (2.0 * in.sigma2_hat);
}

LossGradient NllGradient(const LossInput& in) {
  CheckPredicted(in);
  const double r = in.y_bar - in.y_hat;
  const double s2 = in.sigma2_hat;
  return {(in.y_hat - in.y_bar) / s2, 0.5 / s2 - r * r / (2.0 * s2 * s2)};
}

double KldLoss(const LossInput& in) {
  CheckPredicted(in);
  CheckLabel(in);
  const double r = in.y_bar - in.y_hat;
  return 0.5 * std::log(in.sigma2_hat) - 0.5 * std::log(in.sigma2_p) +
         (in.sigma2_p + r * r) / (2.0 * in.sigma2_hat);
}

LossGradient KldGradient(const LossInput& in) {
  CheckPredicted(in);
  CheckLabel(in);
  const double r = in.y_bar - in.y_hat;
  const double s2 = in.sigma2_hat;
  return {(in.y_hat - in.y_bar) / s2, 0.5 / s2 - (in.sigma2_p + r * r) / (2.0 * s2 * s2)};
}

Eigen::Vector2d MomentMean(const PhiGaussian& phi, const Eigen::Vector3d& xi) {
  return MomentMap(xi) * phi.mean;
}

Eigen::Matrix2d MomentSecond(const PhiGaussian& phi, const Eigen::Vector3d& xi) {
  const auto a = MomentMap(xi);
  return a * (phi.cov + phi.mean * phi.mean.transpose()) * a.transpose();
}

ParameterMoments RecoverParameterMoments(const PhiGaussian& phi) {
  ParameterMoments m;
  m.e_l2 = MomentSecond(phi, Eigen::Vector3d(1, 0, 0)).trace();
  m.e_w2 = MomentSecond(phi, Eigen::Vector3d(0, 1, 0)).trace();
  const Eigen::Vector3d xi_c(0, 0, 1);
  const Eigen::Vector2d mc = MomentMean(phi, xi_c);
  const Eigen::Matrix2d cc = MomentSecond(phi, xi_c) - mc * mc.transpose();
  m.var_c1 = std::max(cc(0, 0), 0.0);
  m.var_c2 = std::max(cc(1, 1), 0.0);
  m.cov_c12 = cc(0, 1);
  return m;
}

ParameterMoments RecoverParameterMoments(const LabelPosterior& posterior) {
  return RecoverParameterMoments(posterior.phi());
}

Eigen::Matrix3d MomentSecond(const Phi3dGaussian& phi, const Eigen::Vector4d& xi) {
  const auto a = MomentMap3d(xi);
  return a * (phi.cov + phi.mean * phi.mean.transpose()) * a.transpose();
}

ParameterMoments3d RecoverParameterMoments(const Phi3dGaussian& phi) {
  ParameterMoments3d m;
  m.e_l2 = MomentSecond(phi, Eigen::Vector4d(1, 0, 0, 0)).trace();
  m.e_h2 = MomentSecond(phi, Eigen::Vector4d(0, 1, 0, 0)).trace();
  m.e_w2 = MomentSecond(phi, Eigen::Vector4d(0, 0, 1, 0)).trace();
  const Eigen::Vector4d xi_c(0, 0, 0, 1);
  const Eigen::Vector3d mc = MomentMap3d(xi_c) * phi.mean;
  m.center_cov = MomentSecond(phi, xi_c) - mc * mc.transpose();
  return m;
}

std::array<double, 6> TargetVariances(const ParamVariances& v) {
  return {v.dx, v.dy, v.log_l, v.log_w, v.sin_r, v.cos_r};
}

ParamVariances PropagateVariances(const PhiGaussian& phi) {
  const ParameterMoments mom = RecoverParameterMoments(phi);
  const PolarMoments pl = Polar(phi.mean.segment<2>(2), phi.cov.block<2, 2>(2, 2));
  const PolarMoments pw = Polar(phi.mean.segment<2>(4), phi.cov.block<2, 2>(4, 4));
  const double r_bar = std::atan2(phi.mean[3], phi.mean[2]);

  ParamVariances v;
  v.c1 = mom.var_c1;
  v.c2 = mom.var_c2;
  v.dx = v.c1;
  v.dy = v.c2;
  // |x| ~ norm + a + b^2 / (2 norm) for along/across offsets (a, b).
  v.l = pl.along + pl.across * pl.across / (2.0 * pl.norm * pl.norm);
  v.w = pw.along + pw.across * pw.across / (2.0 * pw.norm * pw.norm);
  v.r = pl.across / (pl.norm * pl.norm);
  v.log_l = v.l / (pl.norm * pl.norm);
  v.log_w = v.w / (pw.norm * pw.norm);
  const double c = std::cos(r_bar), s = std::sin(r_bar);
  v.sin_r = c * c * v.r;
  v.cos_r = s * s * v.r;
  return v;
}

ParamVariances PropagateVariances(const LabelPosterior& posterior) {
  return PropagateVariances(posterior.phi());
}

std::vector<LossTableRow> BuildLossTable(const std::vector<LossTableObject>& objects,
                                         const LossTableConfig& cfg) {
  for (double b : cfg.heuristic_base) Require(b >= 0.0, "heuristic base variances must be >= 0");
  for (double f : cfg.fixed) Require(f > 0.0, "fixed label variances must be positive");
  std::vector<LossTableRow> rows;
  for (const LossTableObject& obj : objects) {
    if (obj.has_posterior) {
      const auto ours = TargetVariances(PropagateVariances(obj.posterior));
      for (int i = 0; i < 6; ++i) rows.push_back({obj.id, kTargetNames[i], "ours", ours[i]});
    }
    const double np_scale = HeuristicNumPoints(obj.num_points);
    const double hull_scale = std::max(1.0 - obj.hull_iou, kHeuristicFloor);
    for (int i = 0; i < 6; ++i) {
      rows.push_back({obj.id, kTargetNames[i], "num_points",
                      std::max(cfg.heuristic_base[i] * np_scale, kHeuristicFloor)});
    }
    for (int i = 0; i < 6; ++i) {
      rows.push_back({obj.id, kTargetNames[i], "covx_hull",
                      std::max(cfg.heuristic_base[i] * hull_scale, kHeuristicFloor)});
    }
    for (double f : cfg.fixed) {
      for (int i = 0; i < 6; ++i) {
        rows.push_back({obj.id, kTargetNames[i], "fixed=" + FormatDouble(f), f});
      }
    }
  }
  return rows;
}

std::string LossTableToCsv(const std::vector<LossTableRow>& rows) {
  std::string out = "object_id,parameter,method,sigma2_p\n";
  for (const LossTableRow& r : rows) {
    out += r.id + "," + r.parameter + "," + r.method + "," + FormatDouble(r.sigma2_p) + "\n";
  }
  return out;
}

}  // namespace labeluq
