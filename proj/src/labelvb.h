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

// Label uncertainty from an object's LiDAR points.
//
// Each point is modelled as a mixture over its M nearest locations on the
// annotated box boundary. Mean-field variational Bayes alternates the
// registration softmax, the observation-noise update and the Gaussian
// posterior over the linear feature vector phi(y). The annotated box is the
// posterior mean and is never moved.

#ifndef LABELUQ_LABELVB_H_
#define LABELUQ_LABELVB_H_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "geometry.h"

namespace labeluq {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

// Diagonal prior over [c1, c2, l, w, r], scaled by 1/weight.
struct PriorSpec {
  std::array<double, 5> variances = {0.44 * 0.44, 0.11 * 0.11, 0.25 * 0.25,
                                     0.25 * 0.25, 0.17 * 0.17};
  // 0 means a non-informative prior (zero precision).
  double weight = 1.0;
};

enum class SigmaMode { kFixed, kEmFit };

struct VbConfig {
  int num_components = 3;
  SigmaMode sigma_mode = SigmaMode::kEmFit;
  // Fixed-mode noise std, and the starting value in EM mode (m).
  double sigma = 0.2;
  int max_iters = 100;
  double tol = 1e-6;
  // Unit-box samples used downstream by the spatial distribution.
  int surface_samples = 1024;
};

void Validate(const PriorSpec& prior);
void Validate(const VbConfig& cfg);

inline constexpr double kSigma2Floor = 1e-6;
// Prior variance placed on the non-rectangular (shear) direction of phi.
inline constexpr double kShearVariance = 1e-6;

// Gaussian over phi; the common currency for spatial distributions.
struct PhiGaussian {
  FeatureBev mean = FeatureBev::Zero();
  Mat6 cov = Mat6::Zero();
};

struct LabelPosterior {
  BoxBev label;
  FeatureBev phi_mean = FeatureBev::Zero();
  Mat6 phi_cov = Mat6::Zero();
  double sigma2 = 0.0;
  Eigen::MatrixXd registration;  // K x M
  int iters_used = 0;
  bool converged = false;
  int num_points = 0;

  PhiGaussian phi() const { return {phi_mean, phi_cov}; }
};

// Softmax over squared distances to the M nearest surface points of `label`.
Eigen::MatrixXd RegistrationProbs(std::span<const Vec2> points,
                                  const BoxBev& label, int m, double sigma2);

// Noise update: sum_k sum_m phi_km |x_k - v_km|^2 / K, floored at
// kSigma2Floor. Residuals to the nearest boundary point are one-dimensional,
// so the normalizer is the point count.
double EmSigma2(std::span<const Vec2> points, const BoxBev& label,
                const Eigen::MatrixXd& registration);

// First-order propagation of the [c1, c2, l, w, r] prior into phi space.
// Throws for weight 0; use PriorPhiPrecision there.
Mat6 PriorPhiCovariance(const PriorSpec& prior, const BoxBev& label);
Mat6 PriorPhiPrecision(const PriorSpec& prior, const BoxBev& label);

// G diag(variances) G^T with G = d phi / d [c1, c2, l, w, r] at `box`.
Mat6 PhiCovarianceFromBox(const BoxBev& box, const std::array<double, 5>& variances);

LabelPosterior InferPosterior(std::span<const Vec2> points, const BoxBev& label,
                              const PriorSpec& prior, const VbConfig& cfg);

// Posterior equal to the prior; used for objects without points.
LabelPosterior PriorOnlyPosterior(const BoxBev& label, const PriorSpec& prior);

// Conjugate update for an axis-aligned box with fixed point-to-surface
// assignments. Parameters are y = [c1, c2, l, w]; every observation says
// "this point coordinate equals coeffs . y + offset up to N(0, sigma^2)".
struct LinearObservation {
  Vec4 coeffs = Vec4::Zero();
  double value = 0.0;
};

struct Gaussian4 {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Zero();
};

Gaussian4 ClosedFormAxisAligned(std::span<const LinearObservation> observations,
                                double sigma, const Vec4& prior_mean,
                                const Vec4& prior_variances);

// Builds the two coordinate observations of a point generated by the box
// location at unit offset (su, sv) in {-0.5, 0, 0.5}^2 ("corner" reading),
// for a box parameterized by its min corner (c1, c2) and extents (l, w):
// x = c1 + (su + 0.5) l, y = c2 + (sv + 0.5) w.
std::array<LinearObservation, 2> MinCornerObservation(const Vec2& point,
                                                      double su, double sv);
// Same for the center parameterization: x = c1 + su l, y = c2 + sv w.
std::array<LinearObservation, 2> CenterObservation(const Vec2& point, double su,
                                                   double sv);

double HeuristicNumPoints(std::size_t num_points);
// IoU between the label and the convex hull of the points; 0 when the hull is
// degenerate.
double HeuristicConvexHull(std::span<const Vec2> points, const BoxBev& label);

}  // namespace labeluq

#endif  // LABELUQ_LABELVB_H_
