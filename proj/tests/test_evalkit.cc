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


#include "evalkit.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "error.h"
#include "test_support.h"

namespace labeluq {
namespace {

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

EvalConfig FastConfig() {
  EvalConfig cfg;
  cfg.surface_samples = 256;
  return cfg;
}

TEST(AveragePrecision11, PerfectAndHalf) {
  EXPECT_NEAR(AveragePrecision11({{0.5, 1.0}, {1.0, 1.0}}), 1.0, 1e-15);
  // Recall reaches 0.5 at precision 1 and never more.
  EXPECT_NEAR(AveragePrecision11({{0.5, 1.0}, {0.5, 0.5}}), 6.0 / 11.0, 1e-15);
  EXPECT_EQ(AveragePrecision11({}), 0.0);
}

TEST(AveragePrecision11, InterpolatesMaxPrecisionToTheRight) {
  // tp, fp, tp over 2 gts: (0.5, 1), (0.5, 0.5), (1, 2/3).
  const std::vector<PrPoint> curve = {{0.5, 1.0}, {0.5, 0.5}, {1.0, 2.0 / 3.0}};
  EXPECT_NEAR(AveragePrecision11(curve), (6 * 1.0 + 5 * 2.0 / 3.0) / 11.0, 1e-15);
}

TEST(DetectionOrder, ScoreThenFrameThenBox) {
  const std::vector<DetectionRecord> dets = {
      Det("b", MakeBoxBev(0, 0, 1, 1, 0), 0.5), Det("a", MakeBoxBev(1, 0, 1, 1, 0), 0.5),
      Det("a", MakeBoxBev(0, 0, 1, 1, 0), 0.5), Det("c", MakeBoxBev(0, 0, 1, 1, 0), 0.9)};
  EXPECT_EQ(DetectionOrder(dets), (std::vector<std::size_t>{3, 2, 1, 0}));
}

TEST(MatchDetections, GreedyOneToOne) {
  const std::vector<GroundTruthRecord> gts = {DeltaGt("f", MakeBoxBev(0, 0, 4, 2, 0)),
                                              DeltaGt("f", MakeBoxBev(10, 0, 4, 2, 0))};
  const std::vector<DetectionRecord> dets = {Det("f", MakeBoxBev(0, 0, 4, 2, 0), 0.9),
                                             Det("f", MakeBoxBev(0.2, 0, 4, 2, 0), 0.8),
                                             Det("g", MakeBoxBev(10, 0, 4, 2, 0), 0.7)};
  std::vector<std::vector<double>> scores(dets.size(), std::vector<double>(gts.size()));
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      scores[d][g] = dets[d].frame == gts[g].frame ? RotatedIou(dets[d].box, gts[g].box)
                                                   : std::nan("");
    }
  }
  const Assignment a = MatchDetections(dets, gts, 0.5, scores);
  EXPECT_EQ(a.det_to_gt, (std::vector<int>{0, -1, -1}));
  EXPECT_EQ(a.true_positives, 1);
  EXPECT_EQ(a.false_positives, 2);
  EXPECT_EQ(a.false_negatives, 1);
}

TEST(MatchDetections, PrefersHighestValue) {
  const std::vector<GroundTruthRecord> gts = {DeltaGt("f", MakeBoxBev(0, 0, 4, 2, 0)),
                                              DeltaGt("f", MakeBoxBev(1, 0, 4, 2, 0))};
  const std::vector<DetectionRecord> dets = {Det("f", MakeBoxBev(0.9, 0, 4, 2, 0), 0.9)};
  const Assignment a = MatchDetectionsWith(
      dets, gts, 0.5, [&](std::size_t d, std::size_t g) {
        return RotatedIou(dets[d].box, gts[g].box);
      });
  EXPECT_EQ(a.det_to_gt[0], 1);
}

TEST(PairScorer, CrossFramePairsAreNan) {
  const std::vector<GroundTruthRecord> gts = {DeltaGt("f", MakeBoxBev(0, 0, 4, 2, 0))};
  const std::vector<DetectionRecord> dets = {Det("g", MakeBoxBev(0, 0, 4, 2, 0), 0.9),
                                             Det("f", MakeBoxBev(0, 0, 4, 2, 0), 0.8)};
  const PairScorer scorer(gts, FastConfig());
  const auto s = PairScores(dets, gts, scorer, MetricKind::kJiou, 1);
  EXPECT_TRUE(std::isnan(s[0][0]));
  EXPECT_GT(s[1][0], 0.97);
}

TEST(PairScorer, MetricsOnDeltaAndUncertainLabels) {
  const BoxBev box = MakeBoxBev(5, 10, 4.5, 1.8, 0.4);
  GroundTruthRecord uncertain = DeltaGt("f", box);
  uncertain.posterior = PriorOnlyPosterior(box, PriorSpec{});
  const std::vector<GroundTruthRecord> gts = {DeltaGt("f", box), uncertain};
  const PairScorer scorer(gts, FastConfig());
  EXPECT_NEAR(scorer.Score(MetricKind::kIou, box, 0), 1.0, 1e-12);
  EXPECT_GT(scorer.Score(MetricKind::kJiou, box, 0), 0.97);
  EXPECT_NEAR(scorer.Score(MetricKind::kJiouRatio, box, 0), 1.0, 1e-12);
  const double jiou = scorer.Score(MetricKind::kJiou, box, 1);
  EXPECT_LT(jiou, 0.8);
  EXPECT_NEAR(jiou, scorer.JiouGt(1), 1e-12);
  EXPECT_NEAR(scorer.Score(MetricKind::kJiouRatio, box, 1), 1.0, 1e-12);
  const BoxBev far = MakeBoxBev(50, 50, 4.5, 1.8, 0.0);
  EXPECT_EQ(scorer.Score(MetricKind::kJiou, far, 1), 0.0);
  EXPECT_FALSE(scorer.Overlaps(far, 1));
}

TEST(Evaluate, PerfectDetectionsScoreOne) {
  std::mt19937_64 rng(2);
  std::vector<GroundTruthRecord> gts;
  std::vector<DetectionRecord> dets;
  for (int f = 0; f < 3; ++f) {
    for (int k = 0; k < 3; ++k) {
      const BoxBev b = MakeBoxBev(10.0 * k, 5.0 * f, 4.5, 1.8, 0.3 * k);
      gts.push_back(DeltaGt("frame" + std::to_string(f), b));
      dets.push_back(Det(gts.back().frame, b, 0.5 + 0.05 * k));
    }
  }
  const EvalReport r = Evaluate(dets, gts, FastConfig());
  ASSERT_EQ(r.metrics.size(), 3u);
  for (const MetricReport& m : r.metrics) EXPECT_NEAR(m.map, 1.0, 1e-12) << MetricName(m.kind);
  EXPECT_EQ(r.pairs.size(), gts.size());
  EXPECT_TRUE(r.recall_gain.empty());
}

TEST(Evaluate, FalsePositivesLowerPrecision) {
  const BoxBev b = MakeBoxBev(0, 0, 4.5, 1.8, 0);
  const std::vector<GroundTruthRecord> gts = {DeltaGt("f", b)};
  const std::vector<DetectionRecord> dets = {Det("f", MakeBoxBev(20, 0, 4.5, 1.8, 0), 0.9),
                                             Det("f", b, 0.5)};
  const EvalReport r = Evaluate(dets, gts, FastConfig());
  // Recall 1 is only reached at precision 1/2.
  EXPECT_NEAR(r.metrics[0].map, 0.5, 1e-12);
}

TEST(Evaluate, ReportSerialization) {
  const BoxBev b = MakeBoxBev(0, 0, 4.5, 1.8, 0);
  std::vector<GroundTruthRecord> gts = {DeltaGt("f", b)};
  gts[0].difficulty = Difficulty::kModerate;
  gts[0].distance = 12.0;
  std::vector<DetectionRecord> dets = {Det("f", MakeBoxBev(0.2, 0, 4.5, 1.8, 0), 0.9)};
  dets[0].variances = std::array<double, 6>{0.01, 0.01, 1e-3, 1e-3, 1e-3, 1e-3};
  const EvalReport r = Evaluate(dets, gts, FastConfig());
  const auto j = ReportToJson(r);
  EXPECT_EQ(j["num_detections"], 1);
  EXPECT_TRUE(j["metrics"].contains("iou"));
  EXPECT_TRUE(j["metrics"].contains("jiou"));
  EXPECT_TRUE(j["metrics"].contains("jiou_ratio"));
  EXPECT_EQ(j["recall_gain"].size(), 5u);
  ASSERT_EQ(r.by_difficulty.size(), 1u);
  EXPECT_EQ(r.by_difficulty[0].key, "moderate");
  ASSERT_EQ(r.by_distance.size(), 1u);
  EXPECT_EQ(r.by_distance[0].count, 1);
  const std::string csv = PrCurvesToCsv(r);
  EXPECT_EQ(csv.rfind("metric,threshold,recall,precision\n", 0), 0u);
  EXPECT_NE(csv.find("\njiou_ratio,0.5,1,1\n"), std::string::npos);
}

TEST(RecallGain, ZeroVarianceGivesZeroGain) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> jitter(0.0, 0.3);
  std::vector<GroundTruthRecord> gts;
  std::vector<DetectionRecord> dets;
  for (int k = 0; k < 6; ++k) {
    const BoxBev b = MakeBoxBev(10.0 * k, 0, 4.5, 1.8, 0.2 * k);
    GroundTruthRecord g = DeltaGt("f", b);
    g.posterior = testing::LShapePosterior(b, 10 + k, 0.5);
    gts.push_back(g);
    DetectionRecord d = Det("f", MakeBoxBev(b.c1 + jitter(rng), b.c2 + jitter(rng), b.l,
                                            b.w, b.r + 0.1 * jitter(rng)),
                            0.9 - 0.1 * k);
    d.variances = std::array<double, 6>{};
    dets.push_back(d);
  }
  const PairScorer scorer(gts, FastConfig());
  const auto gain = ComputeRecallGain(dets, gts, scorer, {0.3, 0.5, 0.7});
  ASSERT_EQ(gain.size(), 3u);
  for (const RecallGain& g : gain) EXPECT_EQ(g.gain, 0.0);
}

TEST(RecallGain, RequiresVariances) {
  const BoxBev b = MakeBoxBev(0, 0, 4.5, 1.8, 0);
  const std::vector<GroundTruthRecord> gts = {DeltaGt("f", b)};
  const std::vector<DetectionRecord> dets = {Det("f", b, 0.9)};
  const PairScorer scorer(gts, FastConfig());
  EXPECT_THROW(ComputeRecallGain(dets, gts, scorer, {0.5}), Error);
}

TEST(PredictiveGaussian, RecoversTargetVariances) {
  const BoxBev b = MakeBoxBev(1, 2, 4.0, 2.0, 0.0);
  const PhiGaussian g = PredictiveGaussian(b, {0.04, 0.09, 0.01, 0.01, 0.0, 0.0});
  EXPECT_NEAR(g.cov(0, 0), 0.04, 1e-15);
  EXPECT_NEAR(g.cov(1, 1), 0.09, 1e-15);
  EXPECT_NEAR(g.cov(2, 2), 16.0 * 0.01, 1e-12);
  EXPECT_NEAR(g.cov(4, 4), 4.0 * 0.01, 1e-12);
  EXPECT_EQ(g.mean, FeatureVector(b));
}

TEST(BinnedStatistics, GroupsByDistanceBand) {
  std::vector<GroundTruthRecord> gts(3);
  gts[0].distance = 3;
  gts[1].distance = 8;
  gts[2].distance = 25;
  gts[0].difficulty = gts[1].difficulty = Difficulty::kEasy;
  gts[2].difficulty = Difficulty::kHard;
  const std::vector<MatchedPair> pairs = {{0, 0, 0.8, 0.6, 0.9}, {1, 1, 0.6, 0.4, 0.7},
                                          {2, 2, 0.5, 0.3, 0.5}};
  const auto bins = BinnedStatistics(pairs, gts, BinKey::kDistance, 10.0);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins[0].count, 2);
  EXPECT_NEAR(bins[0].mean_iou, 0.7, 1e-15);
  EXPECT_NEAR(bins[0].mean_jiou, 0.5, 1e-15);
  EXPECT_EQ(bins[1].count, 1);
  const auto diff = BinnedStatistics(pairs, gts, BinKey::kDifficulty);
  ASSERT_EQ(diff.size(), 2u);
  EXPECT_EQ(diff[0].key, "easy");
  EXPECT_EQ(diff[1].key, "hard");
}

TEST(EvalConfig, RejectsBadValues) {
  EvalConfig cfg;
  cfg.thresholds = {};
  EXPECT_THROW(Validate(cfg), Error);
  cfg = EvalConfig{};
  cfg.thresholds = {0.5, 1.5};
  EXPECT_THROW(Validate(cfg), Error);
  cfg = EvalConfig{};
  cfg.resolution = 0;
  EXPECT_THROW(Validate(cfg), Error);
}

}  // namespace
}  // namespace labeluq
