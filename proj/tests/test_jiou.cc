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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "error.h"
#include "test_support.h"

namespace labeluq {
namespace {

// Direct O(N^2) evaluation of the probabilistic Jaccard index.
double BruteJaccard(std::vector<double> p, std::vector<double> q) {
  double sp = 0, sq = 0;
  for (double v : p) sp += v;
  for (double v : q) sq += v;
  for (double& v : p) v /= sp;
  for (double& v : q) v /= sq;
  double j = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0 || q[i] <= 0) continue;
    double denom = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      denom += std::max(p[k] / p[i], q[k] / q[i]);
    }
    j += 1.0 / denom;
  }
  return j;
}

std::vector<double> RandomMass(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 9);
  std::vector<double> v(n);
  for (double& x : v) {
    const int c = pick(rng);
    x = c == 0 ? 0.0 : (c == 1 ? 0.25 : u(rng));  // zeros and ties
  }
  v[0] = 1.0;
  return v;
}

TEST(ProbJaccard, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(1, 200);
  for (int t = 0; t < 300; ++t) {
    const int n = size(rng);
    const auto p = RandomMass(rng, n), q = RandomMass(rng, n);
    EXPECT_NEAR(ProbJaccard(p, q), BruteJaccard(p, q), 1e-12);
  }
}

TEST(ProbJaccard, IdentityAndDisjoint) {
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4, 0.0};
  EXPECT_NEAR(ProbJaccard(p, p), 1.0, 1e-15);
  const std::vector<double> a = {1, 1, 0, 0}, b = {0, 0, 1, 1};
  EXPECT_EQ(ProbJaccard(a, b), 0.0);
}

TEST(ProbJaccard, ScaleInvariantAndSymmetric) {
  std::mt19937_64 rng(2);
  const auto p = RandomMass(rng, 50), q = RandomMass(rng, 50);
  std::vector<double> p3 = p;
  for (double& v : p3) v *= 3.0;
  EXPECT_NEAR(ProbJaccard(p, q), ProbJaccard(p3, q), 1e-14);
  EXPECT_NEAR(ProbJaccard(p, q), ProbJaccard(q, p), 1e-14);
}

TEST(ProbJaccard, UniformSetsReduceToJaccard) {
  // Indicator masses: |A n B| / |A u B|.
  const std::vector<double> a = {1, 1, 1, 1, 0, 0}, b = {0, 0, 1, 1, 1, 1};
  EXPECT_NEAR(ProbJaccard(a, b), 2.0 / 6.0, 1e-15);
}

TEST(ProbJaccard, RejectsBadInput) {
  const std::vector<double> a = {1, 2}, b = {1, 2, 3};
  EXPECT_THROW(ProbJaccard(a, b), Error);
  const std::vector<double> z = {0, 0};
  EXPECT_THROW(ProbJaccard(z, a), Error);
  const std::vector<double> neg = {1, -1};
  EXPECT_THROW(ProbJaccard(neg, a), Error);
}

TEST(Jiou, MismatchedGridsThrow) {
  const BoxBev box = MakeBoxBev(0, 0, 2, 1, 0);
  const SpatialGrid a = UniformBoxGrid(box, AlignedGrid(BoxBounds(box), 0.1, 0.5));
  const SpatialGrid b = UniformBoxGrid(box, AlignedGrid(BoxBounds(box), 0.1, 0.6));
  try {
    Jiou(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridMismatch);
  }
}

TEST(Jiou, UniformBoxesReduceToIou) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shift(-1.5, 1.5), ang(-0.5, 0.5);
  for (int t = 0; t < 20; ++t) {
    const BoxBev a = testing::RandomVehicle(rng, 5.0);
    const BoxBev b = MakeBoxBev(a.c1 + shift(rng), a.c2 + shift(rng), a.l * 0.9,
                                a.w * 1.1, a.r + ang(rng));
    const auto ba = BoxBounds(a), bb = BoxBounds(b);
    const GridSpec g = AlignedGrid({std::min(ba[0], bb[0]), std::min(ba[1], bb[1]),
                                    std::max(ba[2], bb[2]), std::max(ba[3], bb[3])},
                                   0.05, 0.2);
    const double jiou = Jiou(UniformBoxGrid(a, g), UniformBoxGrid(b, g)).value;
    EXPECT_NEAR(jiou, RotatedIou(a, b), 0.02);
  }
}

TEST(Jiou, TwoBoxLabelAgainstSmallBox) {
  const BoxBev small = MakeBoxBev(0, 0, 2, 1, 0);
  const BoxBev large = MakeBoxBev(8, 0, 6, 3, 0);
  const GridSpec g = AlignedGrid({-1, -1.5, 11, 1.5}, 0.05, 0.5);
  const std::vector<std::pair<BoxBev, double>> mix = {{small, 0.5}, {large, 0.5}};
  const SpatialGrid pred = UniformBoxGrid(small, g);
  EXPECT_NEAR(Jiou(SpatialPgDiscrete(mix, g), pred).value, 0.5, 1e-9);
  const SpatialGrid pdq =
      SpatialPdq(BoxSampler::Discrete({small, large}, {0.5, 0.5}), g, 2000, 4);
  EXPECT_NEAR(Jiou(pdq, pred).value, 0.1, 0.02);
}

TEST(ResampleToCommon, SharedSpecAndMass) {
  const BoxBev a = MakeBoxBev(0, 0, 2, 1, 0), b = MakeBoxBev(1, 0.2, 2, 1, 0.1);
  const SpatialGrid ga = UniformBoxGrid(a, AlignedGrid(BoxBounds(a), 0.1, 0.3));
  const SpatialGrid gb = UniformBoxGrid(b, AlignedGrid(BoxBounds(b), 0.05, 0.3));
  const auto [ra, rb] = ResampleToCommon(ga, gb);
  EXPECT_EQ(ra.spec, rb.spec);
  EXPECT_DOUBLE_EQ(ra.spec.resolution, 0.05);
  EXPECT_NEAR(ra.Sum(), 1.0, 1e-9);
  EXPECT_NEAR(rb.Sum(), 1.0, 1e-9);
}

TEST(JiouGt, DeltaPosteriorIsOne) {
  const BoxBev box = MakeBoxBev(3, 4, 4.5, 1.8, 0.3);
  LabelPosterior post;
  post.label = box;
  post.phi_mean = FeatureVector(box);
  post.phi_cov = 1e-12 * Mat6::Identity();
  const MetricValue v = JiouGt(box, post, DefaultGrid(post.phi(), 0.05));
  EXPECT_EQ(v.kind, MetricKind::kJiouGt);
  EXPECT_GT(v.value, 0.97);
}

TEST(JiouGt, DecreasesWithUncertainty) {
  const BoxBev box = MakeBoxBev(0, 0, 4.5, 1.8, 0.3);
  const LabelPosterior tight = testing::LShapePosterior(box, 5, 5.0);
  const LabelPosterior loose = testing::LShapePosterior(box, 5, 0.1);
  const GridSpec g = DefaultGrid(loose.phi(), 0.1);
  const double a = JiouGt(box, tight, g).value, b = JiouGt(box, loose, g).value;
  EXPECT_GT(a, b);
  EXPECT_GT(b, 0.0);
  EXPECT_LE(a, 1.0);
}

TEST(JiouRatio, LabelAsDetectionIsOne) {
  const BoxBev box = MakeBoxBev(0, 0, 4.5, 1.8, 0.3);
  const LabelPosterior post = testing::LShapePosterior(box, 6, 0.5);
  const GridSpec g = DefaultGrid(post.phi(), 0.1);
  EXPECT_NEAR(JiouRatio(box, post, g).value, 1.0, 1e-12);
  const BoxBev off = MakeBoxBev(1.0, 0.3, 4.5, 1.8, 0.3);
  const double r = JiouRatio(off, post, g).value;
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
}

TEST(JiouRatio, UndefinedWhenCeilingIsZero) {
  const GridSpec g = AlignedGrid({-5, -5, 5, 5}, 0.1, 0.0);
  const SpatialGrid pg = UniformBoxGrid(MakeBoxBev(-3, -3, 1, 1, 0), g);
  const SpatialGrid gt = UniformBoxGrid(MakeBoxBev(3, 3, 1, 1, 0), g);
  try {
    JiouRatio(gt, pg, gt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefined);
  }
}

TEST(MetricKind, NamesRoundTrip) {
  for (MetricKind k : {MetricKind::kIou, MetricKind::kJiou, MetricKind::kJiouGt,
                       MetricKind::kJiouRatio}) {
    EXPECT_EQ(ParseMetricKind(MetricName(k)), k);
  }
  EXPECT_THROW(ParseMetricKind("giou"), Error);
}

}  // namespace
}  // namespace labeluq
