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

#include "labelvb.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "error.h"

namespace labeluq {

namespace {

constexpr double kPivotThreshold = 1e-10;

struct Anchor {
  Vec2 unit;
  double dist2;
};

// Registration anchors are computed once from the annotated label.
std::vector<Anchor> ComputeAnchors(std::span<const Vec2> points,
                                   const BoxBev& label, int m) {
  std::vector<Anchor> anchors;
  anchors.reserve(points.size() * m);
  for (const Vec2& x : points) {
    for (const SurfacePoint& sp : NearestSurfacePoints(x, label, m)) {
      anchors.push_back({sp.unit, sp.distance * sp.distance});
    }
  }
  return anchors;
}

Eigen::MatrixXd Softmax(const std::vector<Anchor>& anchors, int k_count, int m,
                        double sigma2) {
  Eigen::MatrixXd reg(k_count, m);
  for (int k = 0; k < k_count; ++k) {
    double best = -1e300;
    for (int j = 0; j < m; ++j) {
      reg(k, j) = -anchors[k * m + j].dist2 / (2.0 * sigma2);
      best = std::max(best, reg(k, j));
    }
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      reg(k, j) = std::exp(reg(k, j) - best);
      total += reg(k, j);
    }
    reg.row(k) /= total;
  }
  return reg;
}

double WeightedResidual(const std::vector<Anchor>& anchors,
                        const Eigen::MatrixXd& reg) {
  const int m = static_cast<int>(reg.cols());
  double sum = 0.0;
  for (int k = 0; k < reg.rows(); ++k) {
    for (int j = 0; j < m; ++j) sum += reg(k, j) * anchors[k * m + j].dist2;
  }
  return std::max(sum / static_cast<double>(reg.rows()), kSigma2Floor);
}

// Columns of d phi / d [c1, c2, l, w, r] at the label.
Eigen::Matrix<double, 6, 5> PhiJacobian(const BoxBev& label) {
  const double c = std::cos(label.r), s = std::sin(label.r);
  Eigen::Matrix<double, 6, 5> g = Eigen::Matrix<double, 6, 5>::Zero();
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  g(2, 2) = c;
  g(3, 2) = s;
  g(4, 3) = c;
  g(5, 3) = s;
  g(2, 4) = -label.l * s;
  g(3, 4) = label.l * c;
  g(4, 4) = -label.w * s;
  g(5, 4) = label.w * c;
  return g;
}

// Unit direction in phi space orthogonal to every rectangle perturbation.
FeatureBev ShearDirection(const BoxBev& label) {
  const double c = std::cos(label.r), s = std::sin(label.r);
  FeatureBev n;
  n << 0, 0, -s * label.w, c * label.w, s * label.l, -c * label.l;
  return n.normalized();
}

Mat6 UnscaledPriorCovariance(const PriorSpec& prior, const BoxBev& label) {
  const FeatureBev n = ShearDirection(label);
  return PhiCovarianceFromBox(label, prior.variances) +
         kShearVariance * n * n.transpose();
}

}  // namespace

Mat6 PhiCovarianceFromBox(const BoxBev& box, const std::array<double, 5>& variances) {
  const auto g = PhiJacobian(box);
  Eigen::Matrix<double, 5, 1> d;
  for (int i = 0; i < 5; ++i) {
    Require(variances[i] >= 0.0, "box parameter variances must be >= 0");
    d[i] = variances[i];
  }
  return g * d.asDiagonal() * g.transpose();
}

void Validate(const PriorSpec& prior) {
  for (double v : prior.variances) {
    Require(v > 0.0 && std::isfinite(v), "prior variances must be positive");
  }
  Require(prior.weight >= 0.0 && std::isfinite(prior.weight),
          "prior weight must be >= 0");
}

void Validate(const VbConfig& cfg) {
  Require(cfg.num_components >= 1 && cfg.num_components <= 4,
          "mixture components must be in [1, 4]");
  Require(cfg.sigma > 0.0, "sigma must be positive");
  Require(cfg.max_iters >= 1, "max_iters must be >= 1");
  Require(cfg.tol > 0.0, "tol must be positive");
  Require(cfg.surface_samples >= 1, "surface_samples must be >= 1");
}

Eigen::MatrixXd RegistrationProbs(std::span<const Vec2> points,
                                  const BoxBev& label, int m, double sigma2) {
  Require(!points.empty(), "registration needs at least one point");
  Require(sigma2 > 0.0, "sigma2 must be positive");
  return Softmax(ComputeAnchors(points, label, m), static_cast<int>(points.size()),
                 m, sigma2);
}

double EmSigma2(std::span<const Vec2> points, const BoxBev& label,
                const Eigen::MatrixXd& registration) {
  Require(!points.empty(), "sigma update needs at least one point");
  Require(registration.rows() == static_cast<Eigen::Index>(points.size()),
          "registration rows must match the point count");
  const int m = static_cast<int>(registration.cols());
  return WeightedResidual(ComputeAnchors(points, label, m), registration);
}

Mat6 PriorPhiCovariance(const PriorSpec& prior, const BoxBev& label) {
  Validate(prior);
  Require(prior.weight > 0.0, "prior covariance is unbounded for weight 0");
  return UnscaledPriorCovariance(prior, label) / prior.weight;
}

Mat6 PriorPhiPrecision(const PriorSpec& prior, const BoxBev& label) {
  Validate(prior);
  if (prior.weight == 0.0) return Mat6::Zero();
  const Mat6 cov = UnscaledPriorCovariance(prior, label);
  Mat6 precision = cov.llt().solve(Mat6::Identity()) * prior.weight;
  return 0.5 * (precision + precision.transpose());
}

LabelPosterior InferPosterior(std::span<const Vec2> points, const BoxBev& label,
                              const PriorSpec& prior, const VbConfig& cfg) {
  Validate(prior);
  Validate(cfg);
  Require(!points.empty(), "posterior inference needs at least one point");
  const int k_count = static_cast<int>(points.size());
  const int m = cfg.num_components;
  const std::vector<Anchor> anchors = ComputeAnchors(points, label, m);

  LabelPosterior post;
  post.label = label;
  post.phi_mean = FeatureVector(label);
  post.num_points = k_count;

  double sigma2 = cfg.sigma * cfg.sigma;
  Eigen::MatrixXd reg;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    Eigen::MatrixXd next = Softmax(anchors, k_count, m, sigma2);
    const double reg_change =
        reg.size() == 0 ? 1e300 : (next - reg).cwiseAbs().maxCoeff();
    reg = std::move(next);
    post.iters_used = it;
    if (cfg.sigma_mode == SigmaMode::kFixed) {
      post.converged = true;
      break;
    }
    const double updated = WeightedResidual(anchors, reg);
    const double sigma_change = std::abs(updated - sigma2) / sigma2;
    sigma2 = updated;
    if (sigma_change < cfg.tol && reg_change < cfg.tol) {
      post.converged = true;
      break;
    }
  }
  post.sigma2 = sigma2;
  post.registration = reg;

  Mat6 precision = PriorPhiPrecision(prior, label);
  for (int k = 0; k < k_count; ++k) {
    for (int j = 0; j < m; ++j) {
      const JacobianBev jac = Jacobian(anchors[k * m + j].unit);
      precision += (reg(k, j) / sigma2) * jac.transpose() * jac;
    }
  }

  const Eigen::LDLT<Mat6> ldlt(precision);
  const double max_diag = precision.diagonal().cwiseAbs().maxCoeff();
  int null_dim = 0;
  for (int i = 0; i < 6; ++i) {
    if (std::abs(ldlt.vectorD()[i]) <= kPivotThreshold * max_diag) ++null_dim;
  }
  if (null_dim > 0 || max_diag == 0.0) {
    throw RankDeficientError(
        "posterior precision is singular: null-space dimension " +
            std::to_string(std::max(null_dim, 1)),
        std::max(null_dim, 1));
  }
  Mat6 cov = ldlt.solve(Mat6::Identity());
  post.phi_cov = 0.5 * (cov + cov.transpose());
  return post;
}

LabelPosterior PriorOnlyPosterior(const BoxBev& label, const PriorSpec& prior) {
  LabelPosterior post;
  post.label = label;
  post.phi_mean = FeatureVector(label);
  post.phi_cov = PriorPhiCovariance(prior, label);
  post.sigma2 = kSigma2Floor;
  post.converged = true;
  return post;
}

Gaussian4 ClosedFormAxisAligned(std::span<const LinearObservation> observations,
                                double sigma, const Vec4& prior_mean,
                                const Vec4& prior_variances) {
  Require(sigma > 0.0, "sigma must be positive");
  Require((prior_variances.array() > 0.0).all(), "prior variances must be positive");
  Mat4 precision = prior_variances.cwiseInverse().asDiagonal();
  const double inv_s2 = 1.0 / (sigma * sigma);
  for (const LinearObservation& o : observations) {
    precision += inv_s2 * o.coeffs * o.coeffs.transpose();
  }
  Gaussian4 g;
  g.mean = prior_mean;
  const Mat4 cov = precision.ldlt().solve(Mat4::Identity());
  g.cov = 0.5 * (cov + cov.transpose());
  return g;
}

std::array<LinearObservation, 2> MinCornerObservation(const Vec2& point,
                                                      double su, double sv) {
  std::array<LinearObservation, 2> obs;
  obs[0].coeffs << 1.0, 0.0, su + 0.5, 0.0;
  obs[0].value = point.x();
  obs[1].coeffs << 0.0, 1.0, 0.0, sv + 0.5;
  obs[1].value = point.y();
  return obs;
}

std::array<LinearObservation, 2> CenterObservation(const Vec2& point, double su,
                                                   double sv) {
  std::array<LinearObservation, 2> obs;
  obs[0].coeffs << 1.0, 0.0, su, 0.0;
  obs[0].value = point.x();
  obs[1].coeffs << 0.0, 1.0, 0.0, sv;
  obs[1].value = point.y();
  return obs;
}

double HeuristicNumPoints(std::size_t num_points) {
  return 1.0 / (1.0 + std::log10(1.0 + static_cast<double>(num_points)));
}

double HeuristicConvexHull(std::span<const Vec2> points, const BoxBev& label) {
  if (points.size() < 3) return 0.0;
  try {
    return PolygonIou(ConvexHull(points), BoxPolygon(label));
  } catch (const Error&) {
    return 0.0;
  }
}

}  // namespace labeluq
