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


// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails. Tolerances are pinned below.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "evalkit.h"
#include "geometry.h"
#include "jiou.h"
#include "labelvb.h"
#include "losses.h"
#include "spatialdist.h"
#include "synthscene.h"
#include "test_support.h"

namespace labeluq {
namespace {

// Pinned tolerances.
constexpr double kEigenRatioMin = 2.5;
constexpr double kEigenRatioMax = 4.5;
constexpr double kJaccardTol = 1e-12;
constexpr double kIouReductionTol = 0.02;
constexpr double kTwoBoxPgTol = 0.02;
constexpr double kTwoBoxPdqMax = 0.15;
constexpr double kMonteCarloTvMax = 0.05;
constexpr double kNormalizationTol = 1e-3;
constexpr double kSigmaRecoveryTol = 0.20;
constexpr double kGradientRelTol = 1e-6;
constexpr double kMomentRelTol = 0.01;
constexpr double kDeltaApTol = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Worst |sum - 1| over every p_G grid built by the run.
double worst_normalization = 0.0;
int normalized_grids = 0;

SpatialGrid TrackPg(SpatialGrid g) {
  worst_normalization = std::max(worst_normalization, std::abs(g.Sum() - 1.0));
  ++normalized_grids;
  return g;
}

std::string Fmt(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Oracles.

// O(N^2) probabilistic Jaccard straight from its definition.
double BruteJaccard(std::vector<double> p, std::vector<double> q) {
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  for (double& v : p) v /= sp;
  for (double& v : q) v /= sq;
  double j = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0 || q[i] <= 0.0) continue;
    double denom = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) denom += std::max(p[k] / p[i], q[k] / q[i]);
    j += 1.0 / denom;
  }
  return j;
}

using Polygon = std::vector<Vec2>;

Polygon Corners(const BoxBev& b) {
  Polygon poly;
  for (const Vec2& u : {Vec2(0.5, 0.5), Vec2(-0.5, 0.5), Vec2(-0.5, -0.5), Vec2(0.5, -0.5)}) {
    const double c = std::cos(b.r), s = std::sin(b.r);
    const double x = u.x() * b.l, y = u.y() * b.w;
    poly.emplace_back(b.c1 + c * x - s * y, b.c2 + s * x + c * y);
  }
  return poly;
}

double Shoelace(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * std::abs(a);
}

// Sutherland-Hodgman clip of `subject` by the counter-clockwise `clip`.
double IntersectionArea(Polygon subject, const Polygon& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Vec2 a = clip[e], b = clip[(e + 1) % clip.size()];
    auto side = [&](const Vec2& p) {
      return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    };
    Polygon out;
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Vec2 p = subject[i], q = subject[(i + 1) % subject.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) out.push_back(p + (q - p) * (sp / (sp - sq)));
    }
    subject = std::move(out);
  }
  return subject.size() < 3 ? 0.0 : Shoelace(subject);
}

double OracleIou(const BoxBev& a, const BoxBev& b) {
  const double inter = IntersectionArea(Corners(a), Corners(b));
  return inter / (a.l * a.w + b.l * b.w - inter);
}

// Spearman correlation of the values against their index.
double SpearmanAgainstIndex(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = 0.5 * (i + j);
    i = j;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rank[i] - i) * (rank[i] - i);
  return 1.0 - 6.0 * d2 / (n * (static_cast<double>(n) * n - 1.0));
}

// ---------------------------------------------------------------------------
// Shared synthetic fixture.

struct SynthObject {
  BoxBev box;
  std::vector<Vec2> points;
  double distance = 0.0;
};

std::vector<SynthObject> SynthObjects(int frames, int per_frame, double range_noise,
                                      std::uint64_t seed) {
  std::vector<SynthObject> out;
  for (int f = 0; f < frames; ++f) {
    SceneConfig cfg;
    cfg.placement.count = per_frame;
    cfg.range_noise = range_noise;
    cfg.seed = seed + f;
    for (SceneObject& o : GenerateScene(cfg).objects) {
      if (o.points.empty()) continue;
      out.push_back({o.box, std::move(o.points), o.distance});
    }
  }
  return out;
}

GroundTruthRecord DeltaGt(const std::string& frame, const BoxBev& box) {
  GroundTruthRecord g;
  g.frame = frame;
  g.box = box;
  g.posterior.label = box;
  g.posterior.phi_mean = FeatureVector(box);
  g.distance = box.center().norm();
  return g;
}

DetectionRecord Det(const std::string& frame, const BoxBev& box, double score) {
  DetectionRecord d;
  d.frame = frame;
  d.box = box;
  d.score = score;
  return d;
}

// ---------------------------------------------------------------------------
// Criteria.

Outcome ClosedFormExample() {
  std::vector<LinearObservation> obs;
  for (const auto& o : MinCornerObservation(Vec2(1.8, 0.0), 0.5, -0.5)) obs.push_back(o);
  for (const auto& o : MinCornerObservation(Vec2(1.8, 0.9), 0.5, 0.5)) obs.push_back(o);
  for (const auto& o : MinCornerObservation(Vec2(0.0, 0.9), -0.5, 0.5)) obs.push_back(o);
  const Gaussian4 g =
      ClosedFormAxisAligned(obs, 0.2, Vec4(0, 0, 1.8, 0.9), Vec4::Constant(100.0 * 100.0));
  const Vec4 ev = Eigen::SelfAdjointEigenSolver<Mat4>(g.cov).eigenvalues();
  const double lo = std::sqrt(ev.minCoeff()), hi = std::sqrt(ev.maxCoeff());
  Mat4 printed;
  printed << 0.04, 0, -0.04, 0, 0, 0.04, 0, -0.04, -0.04, 0, 0.06, 0, 0, -0.04, 0, 0.06;
  const double cov_err = (g.cov - printed).cwiseAbs().maxCoeff();
  const double ratio = hi / lo;
  return {lo < hi && ratio >= kEigenRatioMin && ratio <= kEigenRatioMax,
          Fmt("std %.4f vs %.4f, ratio %.3f in [%.1f, %.1f]; max |cov - printed| %.1e", lo, hi,
              ratio, kEigenRatioMin, kEigenRatioMax, cov_err)};
}

Outcome JaccardMatchesBruteForce() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = size(rng);
    std::vector<double> p(n), q(n);
    for (int i = 0; i < n; ++i) {
      // Zeros and repeated values exercise the tie handling.
      const double r = u(rng);
      p[i] = r < 0.2 ? 0.0 : (r < 0.4 ? 0.5 : u(rng));
      q[i] = u(rng) < 0.2 ? 0.0 : (u(rng) < 0.2 ? p[i] : u(rng));
    }
    p[0] = std::max(p[0], 0.1);
    q[0] = std::max(q[0], 0.1);
    worst = std::max(worst, std::abs(ProbJaccard(p, q) - BruteJaccard(p, q)));
  }
  return {worst <= kJaccardTol, Fmt("max |fast - brute| %.2e <= %.0e", worst, kJaccardTol)};
}

Outcome JiouReducesToIou() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> shift(0.0, 1.0), turn(0.0, 0.5);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const BoxBev a = testing::RandomVehicle(rng, 10.0);
    const BoxBev b = MakeBoxBev(a.c1 + shift(rng), a.c2 + shift(rng), a.l + 0.3 * shift(rng),
                                a.w + 0.1 * shift(rng), a.r + turn(rng));
    const auto ba = BoxBounds(a), bb = BoxBounds(b);
    const GridSpec g = AlignedGrid({std::min(ba[0], bb[0]), std::min(ba[1], bb[1]),
                                    std::max(ba[2], bb[2]), std::max(ba[3], bb[3])},
                                   0.05, 0.2);
    const double j = Jiou(UniformBoxGrid(a, g), UniformBoxGrid(b, g)).value;
    worst = std::max(worst, std::abs(j - OracleIou(a, b)));
  }
  return {worst <= kIouReductionTol,
          Fmt("max |JIoU - polygon IoU| %.4f <= %.2f", worst, kIouReductionTol)};
}

Outcome TwoBoxLabel() {
  const BoxBev small = MakeBoxBev(0, 0, 2, 1, 0);
  const BoxBev large = MakeBoxBev(8, 0, 6, 3, 0);
  const GridSpec g = AlignedGrid({-1, -1.5, 11, 1.5}, 0.05, 0.5);
  const std::vector<std::pair<BoxBev, double>> mix = {{small, 0.5}, {large, 0.5}};
  const SpatialGrid pred = UniformBoxGrid(small, g);
  const double pg = Jiou(TrackPg(SpatialPgDiscrete(mix, g)), pred).value;
  const SpatialGrid pdq_grid =
      SpatialPdq(BoxSampler::Discrete({small, large}, {0.5, 0.5}), g, 2000, 4);
  const double pdq = Jiou(pdq_grid, pred).value;
  return {std::abs(pg - 0.5) <= kTwoBoxPgTol && pdq <= kTwoBoxPdqMax,
          Fmt("p_G JIoU %.4f (0.5 +- %.2f), membership JIoU %.4f <= %.2f", pg, kTwoBoxPgTol, pdq,
              kTwoBoxPdqMax)};
}

// Posteriors from VB inference on synthetic objects of varying point density.
std::vector<LabelPosterior> RegressionPosteriors(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabelPosterior> out;
  PriorSpec prior;
  for (int i = 0; i < count; ++i) {
    const BoxBev box = testing::RandomVehicle(rng, 15.0);
    prior.weight = (i % 3 == 0) ? 0.2 : 1.0;
    const int per_edge = 3 + 4 * i;
    const auto pts =
        testing::EdgePoints(box, {Edge::kFront, Edge::kLeft}, per_edge, 0.1, seed + i);
    out.push_back(InferPosterior(pts, box, prior, VbConfig{}));
  }
  // Two prior-only posteriors carry the widest spread.
  if (count >= 2) {
    out[count - 1] = PriorOnlyPosterior(out[count - 1].label, prior);
    out[count - 2] = PriorOnlyPosterior(out[count - 2].label, PriorSpec{{0.5, 0.5, 0.3, 0.2, 0.1}, 1.0});
  }
  return out;
}

Outcome MonteCarloEquivalence() {
  const auto posts = RegressionPosteriors(10, 303);
  double worst = 0.0;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const PhiGaussian phi = posts[i].phi();
    const GridSpec spec = DefaultGrid(phi, 0.1);
    TrackPg(SpatialPg(phi, spec, 1024));
    TrackPg(MonteCarloPg(phi, spec, 1000, 1));
    worst = std::max(worst, MonteCarloPgDistance(phi, spec, 100000, 3030 + i));
  }
  return {worst <= kMonteCarloTvMax,
          Fmt("max TV(p_G, 1e5-draw Monte Carlo) %.4f <= %.2f over 10 posteriors", worst,
              kMonteCarloTvMax)};
}

struct Trend {
  std::vector<double> means;
  std::vector<int> counts;
};

bool NonDecreasing(const std::vector<double>& v) {
  return std::is_sorted(v.begin(), v.end());
}

bool NonIncreasing(const std::vector<double>& v) {
  return std::is_sorted(v.rbegin(), v.rend());
}

std::string Join(const std::vector<double>& v, const char* fmt = "%.4f") {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + Fmt(fmt, x);
  return s;
}

Outcome CornerAndDistanceTrends() {
  const auto objs = SynthObjects(40, 8, 0.02, 404);
  const Vec2 sensor = Vec2::Zero();
  std::vector<double> corner_tv(4, 0.0);
  struct Row {
    double distance;
    double log_points;
    double jiou_gt;
  };
  std::vector<Row> rows;
  for (const SynthObject& o : objs) {
    const LabelPosterior post = InferPosterior(o.points, o.box, PriorSpec{}, VbConfig{});
    const auto corners = BoxCorners(o.box);
    std::vector<std::pair<double, int>> order;
    for (int c = 0; c < 4; ++c) order.push_back({(corners[c].point - sensor).norm(), c});
    std::sort(order.begin(), order.end());
    for (int rank = 0; rank < 4; ++rank) {
      corner_tv[rank] += CornerTotalVariance(post, order[rank].second) / objs.size();
    }
    const GridSpec spec = DefaultGrid(post.phi(), 0.1);
    const SpatialGrid pg = TrackPg(SpatialPg(post, spec, 1024));
    rows.push_back({o.distance, std::log10(static_cast<double>(o.points.size())),
                    Jiou(UniformBoxGrid(o.box, spec), pg).value});
  }
  // Distance bands of 10 m; point-count quartiles on a log scale.
  std::map<int, std::pair<double, int>> bands;
  for (const Row& r : rows) {
    auto& b = bands[static_cast<int>(r.distance / 10.0)];
    b.first += r.jiou_gt;
    ++b.second;
  }
  std::vector<double> band_means;
  for (const auto& [k, v] : bands) {
    if (v.second >= 5) band_means.push_back(v.first / v.second);
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.log_points < b.log_points; });
  std::vector<double> count_means(4, 0.0);
  for (int q = 0; q < 4; ++q) {
    const std::size_t lo = rows.size() * q / 4, hi = rows.size() * (q + 1) / 4;
    for (std::size_t i = lo; i < hi; ++i) count_means[q] += rows[i].jiou_gt / (hi - lo);
  }
  const bool ok = objs.size() >= 100 && NonDecreasing(corner_tv) && NonIncreasing(band_means) &&
                  NonDecreasing(count_means);
  return {ok, Fmt("%zu objects; corner TV near->far [%s]; JIoU-GT by 10 m band [%s]; "
                  "by log point-count quartile [%s]",
                  objs.size(), Join(corner_tv, "%.2e").c_str(), Join(band_means).c_str(),
                  Join(count_means).c_str())};
}

Outcome SigmaRecovery() {
  const double injected = 0.2;
  const auto objs = SynthObjects(30, 8, injected, 505);
  double sum = 0.0;
  int n = 0;
  for (const SynthObject& o : objs) {
    if (n == 100) break;
    if (o.points.size() < 5) continue;
    const LabelPosterior post = InferPosterior(o.points, o.box, PriorSpec{}, VbConfig{});
    sum += std::sqrt(post.sigma2);
    ++n;
  }
  const double mean = sum / n;
  const double rel = mean / injected - 1.0;
  return {n >= 100 && std::abs(rel) <= kSigmaRecoveryTol,
          Fmt("mean sigma %.4f over %d objects, injected %.2f, relative error %+.3f (|.| <= %.2f)",
              mean, n, injected, rel, kSigmaRecoveryTol)};
}

Outcome NoiseStudyTrend() {
  Scene all;
  int frame = 0;
  int with_points = 0;
  while (with_points < 100) {
    SceneConfig cfg;
    cfg.placement.count = 8;
    cfg.seed = 606 + frame++;
    for (SceneObject& o : GenerateScene(cfg).objects) {
      with_points += !o.points.empty();
      all.objects.push_back(std::move(o));
    }
  }
  NoiseSpec spec;
  spec.seed = 606;
  const NoiseStudyResult r = NoiseStudy(all, spec, PriorSpec{}, VbConfig{}, {});
  std::vector<double> means;
  for (const NoiseStudyRow& row : r.rows) means.push_back(row.mean_normalized_jiou_gt);
  const double rho = SpearmanAgainstIndex(means);
  const bool strict = std::adjacent_find(means.begin(), means.end(),
                                         std::less_equal<double>()) == means.end();
  const int used = r.rows.empty() ? 0 : r.rows[0].objects;
  return {means.size() == 5 && used >= 100 && means[0] == 1.0 && rho == -1.0 && strict,
          Fmt("%d objects; normalized JIoU-GT [%s]; Spearman %.2f", used, Join(means).c_str(),
              rho)};
}

Outcome LossGradients() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> y(-5.0, 5.0), s2(0.01, 4.0);
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
  };
  auto central = [](double (*loss)(const LossInput&), LossInput in) {
    const double hy = 1e-6 * std::max(1.0, std::abs(in.y_hat));
    const double hs = 1e-6 * in.sigma2_hat;
    LossInput a = in, b = in;
    a.y_hat += hy;
    b.y_hat -= hy;
    LossGradient g;
    g.d_y_hat = (loss(a) - loss(b)) / (2 * hy);
    a = b = in;
    a.sigma2_hat += hs;
    b.sigma2_hat -= hs;
    g.d_sigma2_hat = (loss(a) - loss(b)) / (2 * hs);
    return g;
  };
  double worst = 0.0, worst_stationary = 0.0;
  for (int t = 0; t < 1000; ++t) {
    LossInput in{y(rng), s2(rng), y(rng), s2(rng)};
    const LossGradient na = NllGradient(in), nn = central(NllLoss, in);
    const LossGradient ka = KldGradient(in), kn = central(KldLoss, in);
    worst = std::max({worst, rel(na.d_y_hat, nn.d_y_hat), rel(na.d_sigma2_hat, nn.d_sigma2_hat),
                      rel(ka.d_y_hat, kn.d_y_hat), rel(ka.d_sigma2_hat, kn.d_sigma2_hat)});
    // KLD is minimized over sigma2_hat at sigma2_p + residual^2.
    const double r = in.y_bar - in.y_hat;
    in.sigma2_hat = in.sigma2_p + r * r;
    const double at = KldLoss(in);
    LossInput up = in, down = in;
    up.sigma2_hat *= 1.01;
    down.sigma2_hat *= 0.99;
    worst_stationary = std::max(worst_stationary, std::abs(KldGradient(in).d_sigma2_hat));
    if (!(KldLoss(up) > at && KldLoss(down) > at)) worst_stationary = 1.0;
  }
  return {worst <= kGradientRelTol && worst_stationary <= 1e-12,
          Fmt("max relative gradient error %.2e <= %.0e; max |dKLD/dsigma2| at optimum %.1e",
              worst, kGradientRelTol, worst_stationary)};
}

Outcome MomentRecovery() {
  const auto posts = RegressionPosteriors(10, 808);
  std::mt19937_64 rng(808);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  const int draws = 1000000;
  for (const LabelPosterior& post : posts) {
    const Mat6 lower = Eigen::LLT<Mat6>(post.phi_cov).matrixL();
    double l2 = 0, w2 = 0, s1 = 0, s2 = 0, q1 = 0, q2 = 0;
    for (int d = 0; d < draws; ++d) {
      FeatureBev z;
      for (int k = 0; k < 6; ++k) z[k] = n01(rng);
      const FeatureBev phi = post.phi_mean + lower * z;
      l2 += phi.segment<2>(2).squaredNorm();
      w2 += phi.segment<2>(4).squaredNorm();
      s1 += phi[0];
      s2 += phi[1];
      q1 += phi[0] * phi[0];
      q2 += phi[1] * phi[1];
    }
    const double var1 = q1 / draws - (s1 / draws) * (s1 / draws);
    const double var2 = q2 / draws - (s2 / draws) * (s2 / draws);
    const ParameterMoments m = RecoverParameterMoments(post);
    worst = std::max({worst, std::abs(m.e_l2 / (l2 / draws) - 1.0),
                      std::abs(m.e_w2 / (w2 / draws) - 1.0), std::abs(m.var_c1 / var1 - 1.0),
                      std::abs(m.var_c2 / var2 - 1.0)});
  }
  return {worst <= kMomentRelTol,
          Fmt("max relative error vs 1e6-draw Monte Carlo %.4f <= %.2f over 10 posteriors", worst,
              kMomentRelTol)};
}

Outcome EvaluationSanity() {
  EvalConfig cfg;
  cfg.surface_samples = 256;

  // Perfect detections on uncertain labels.
  std::vector<GroundTruthRecord> gts;
  std::vector<DetectionRecord> dets;
  for (int f = 0; f < 3; ++f) {
    for (int k = 0; k < 3; ++k) {
      const BoxBev b = MakeBoxBev(10.0 * k, 5.0 * f, 4.5, 1.8, 0.3 * k);
      GroundTruthRecord g = DeltaGt("p" + std::to_string(f), b);
      g.posterior = testing::LShapePosterior(b, 3 * f + k, 0.5);
      gts.push_back(g);
      dets.push_back(Det(g.frame, b, 0.5 + 0.05 * k));
    }
  }
  const EvalReport perfect = Evaluate(dets, gts, cfg);
  double worst_perfect = 0.0;
  for (const MetricReport& m : perfect.metrics) {
    worst_perfect = std::max(worst_perfect, std::abs(m.map - 1.0));
  }

  // Delta posteriors: JIoU reduces to IoU up to grid resolution. Matching is
  // discontinuous at each threshold, so the detector jitter is kept at a
  // realistic 0.15 m and the per-pair gap is reported alongside.
  cfg.resolution = 0.05;
  double worst_delta = 0.0, worst_pair = 0.0;
  for (int fixture = 0; fixture < 20; ++fixture) {
    std::mt19937_64 rng(909 + fixture);
    std::normal_distribution<double> jitter(0.0, 0.15);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::vector<GroundTruthRecord> g2;
    std::vector<DetectionRecord> d2;
    for (int k = 0; k < 16; ++k) {
      const BoxBev b = MakeBoxBev(12.0 * (k % 4), 12.0 * (k / 4), 4.5, 1.8, 0.4 * k);
      g2.push_back(DeltaGt("d", b));
      d2.push_back(Det("d", MakeBoxBev(b.c1 + jitter(rng), b.c2 + jitter(rng), b.l, b.w,
                                        b.r + 0.1 * jitter(rng)),
                       score(rng)));
    }
    const PairScorer pairs(g2, cfg);
    for (std::size_t k = 0; k < d2.size(); ++k) {
      worst_pair = std::max(worst_pair, std::abs(pairs.Score(MetricKind::kIou, d2[k].box, k) -
                                                 pairs.Score(MetricKind::kJiou, d2[k].box, k)));
    }
    const EvalReport r = Evaluate(d2, g2, cfg);
    double iou = 0, jiou = 0;
    for (const MetricReport& m : r.metrics) {
      if (m.kind == MetricKind::kIou) iou = m.map;
      if (m.kind == MetricKind::kJiou) jiou = m.map;
    }
    worst_delta = std::max(worst_delta, std::abs(iou - jiou));
  }

  // Zero predictive variance leaves recall unchanged.
  cfg.resolution = 0.1;
  for (DetectionRecord& d : dets) {
    d.box.c1 += 0.3;
    d.variances = std::array<double, 6>{};
  }
  const PairScorer scorer(gts, cfg);
  const auto gain = ComputeRecallGain(dets, gts, scorer, cfg.thresholds);
  double worst_gain = 0.0;
  for (const RecallGain& g : gain) worst_gain = std::max(worst_gain, std::abs(g.gain));

  return {worst_perfect == 0.0 && worst_delta <= kDeltaApTol && worst_gain == 0.0 &&
              gain.size() == cfg.thresholds.size(),
          Fmt("perfect mAP max |1 - mAP| %.1e; delta fixtures max |JIoU-AP - IoU-AP| %.4f <= "
              "%.2f (per pair %.4f); zero-variance max |gain| %.1e",
              worst_perfect, worst_delta, kDeltaApTol, worst_pair, worst_gain)};
}

Outcome Normalization() {
  // Extra fixtures beyond those already tracked by the other criteria.
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 20; ++i) {
    const BoxBev box = testing::RandomVehicle(rng, 30.0);
    const LabelPosterior post = (i % 2) ? testing::LShapePosterior(box, i)
                                        : PriorOnlyPosterior(box, PriorSpec{});
    for (double res : {0.05, 0.1, 0.2}) {
      TrackPg(SpatialPg(post, DefaultGrid(post.phi(), res), 1024));
    }
  }
  return {worst_normalization <= kNormalizationTol,
          Fmt("max |sum - 1| %.2e <= %.0e over %d p_G grids", worst_normalization,
              kNormalizationTol, normalized_grids)};
}

}  // namespace
}  // namespace labeluq

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  using labeluq::Outcome;
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  // Normalization runs last so it covers the grids built by the others.
  const Criterion criteria[] = {
      {1, "closed-form three-point example", labeluq::ClosedFormExample},
      {2, "probabilistic Jaccard vs brute force", labeluq::JaccardMatchesBruteForce},
      {3, "JIoU reduces to IoU", labeluq::JiouReducesToIou},
      {4, "two-box label vs small-box prediction", labeluq::TwoBoxLabel},
      {5, "v*-integrated vs Monte Carlo p_G", labeluq::MonteCarloEquivalence},
      {7, "corner and JIoU-GT trends", labeluq::CornerAndDistanceTrends},
      {8, "noise scale recovery", labeluq::SigmaRecovery},
      {9, "label noise study", labeluq::NoiseStudyTrend},
      {10, "loss gradients", labeluq::LossGradients},
      {11, "moment recovery", labeluq::MomentRecovery},
      {12, "evaluation sanity", labeluq::EvaluationSanity},
      {6, "p_G normalization", labeluq::Normalization},
  };
  int failures = 0;
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
