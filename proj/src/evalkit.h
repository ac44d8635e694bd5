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

// Detector evaluation under IoU, JIoU and JIoU-Ratio.
//
// Detections are matched greedily per frame in descending score order,
// separately for every metric and threshold. Average precision uses the
// 11-point interpolation.

#ifndef LABELUQ_EVALKIT_H_
#define LABELUQ_EVALKIT_H_

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geometry.h"
#include "jiou.h"
#include "labelvb.h"
#include "spatialdist.h"

namespace labeluq {

enum class Difficulty { kEasy, kModerate, kHard, kUnknown };

std::string DifficultyName(Difficulty d);

struct DetectionRecord {
  std::string frame;
  BoxBev box;
  double score = 0.0;
  // dx, dy, log l, log w, sin r, cos r.
  std::optional<std::array<double, 6>> variances;
};

struct GroundTruthRecord {
  std::string frame;
  BoxBev box;
  LabelPosterior posterior;
  Difficulty difficulty = Difficulty::kUnknown;
  double distance = 0.0;
};

struct EvalConfig {
  std::vector<double> thresholds = {0.5, 0.6, 0.7, 0.8, 0.9};
  double resolution = 0.1;
  int surface_samples = 1024;
  double distance_band = 10.0;
  int workers = 1;
};

void Validate(const EvalConfig& cfg);

// Gaussian over phi implied by per-target detector variances.
PhiGaussian PredictiveGaussian(const BoxBev& box, const std::array<double, 6>& variances);

// Caches the per-ground-truth grids that every metric needs.
class PairScorer {
 public:
  PairScorer(const std::vector<GroundTruthRecord>& gts, const EvalConfig& cfg);

  double Score(MetricKind kind, const BoxBev& det, std::size_t gt) const;
  // JIoU between an arbitrary detection distribution on `det_grid` and gt's p_G.
  double JiouWith(const SpatialGrid& det_grid, std::size_t gt) const;
  // Grid covering gt's p_G and the detection box, aligned with gt's grid.
  GridSpec PairGrid(const BoxBev& det, std::size_t gt) const;
  bool Overlaps(const BoxBev& det, std::size_t gt) const;
  double JiouGt(std::size_t gt) const { return entries_[gt].jiou_gt; }
  const GridSpec& GtGrid(std::size_t gt) const { return entries_[gt].pg.spec; }
  const EvalConfig& config() const { return cfg_; }

 private:
  struct Entry {
    SpatialGrid pg;
    double jiou_gt = 0.0;
  };
  const std::vector<GroundTruthRecord>& gts_;
  EvalConfig cfg_;
  std::vector<Entry> entries_;
};

struct Assignment {
  // det index -> gt index, or -1 for a false positive.
  std::vector<int> det_to_gt;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
};

// Greedy one-to-one matching: each detection, in descending score order with
// ties broken by frame then box parameters, claims the unmatched gt in its
// frame with the highest metric value >= threshold. `score(d, g)` is only
// called for same-frame pairs.
template <typename ScoreFn>
Assignment MatchDetectionsWith(const std::vector<DetectionRecord>& dets,
                           const std::vector<GroundTruthRecord>& gts, double threshold,
                           ScoreFn&& score);

Assignment MatchDetections(const std::vector<DetectionRecord>& dets,
                           const std::vector<GroundTruthRecord>& gts, double threshold,
                           const std::vector<std::vector<double>>& scores);

// Detection order used by matching and the PR sweep.
std::vector<std::size_t> DetectionOrder(const std::vector<DetectionRecord>& dets);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

std::vector<PrPoint> PrCurve(const std::vector<DetectionRecord>& dets,
                             const Assignment& assignment, std::size_t num_gt);

double AveragePrecision11(const std::vector<PrPoint>& curve);

struct MetricReport {
  MetricKind kind = MetricKind::kIou;
  std::vector<double> thresholds;
  std::vector<double> ap;
  std::vector<std::vector<PrPoint>> curves;
  double map = 0.0;
};

// Pairwise metric values, scores[d][g]; NaN for pairs in different frames.
std::vector<std::vector<double>> PairScores(const std::vector<DetectionRecord>& dets,
                                            const std::vector<GroundTruthRecord>& gts,
                                            const PairScorer& scorer, MetricKind kind,
                                            int workers);

MetricReport MapOverThresholds(const std::vector<DetectionRecord>& dets,
                               const std::vector<GroundTruthRecord>& gts,
                               const PairScorer& scorer, MetricKind kind,
                               const std::vector<double>& thresholds, int workers = 1);

struct RecallGain {
  double threshold = 0.0;
  double recall_deterministic = 0.0;
  double recall_probabilistic = 0.0;
  double gain = 0.0;
};

// Throws kInvalidArgument when any detection lacks variances.
std::vector<RecallGain> ComputeRecallGain(const std::vector<DetectionRecord>& dets,
                                          const std::vector<GroundTruthRecord>& gts,
                                          const PairScorer& scorer,
                                          const std::vector<double>& thresholds,
                                          int workers = 1);

struct BinStats {
  std::string key;
  int count = 0;
  double mean_iou = 0.0;
  double mean_jiou = 0.0;
  double mean_jiou_ratio = 0.0;
};

struct MatchedPair {
  std::size_t det = 0;
  std::size_t gt = 0;
  double iou = 0.0;
  double jiou = 0.0;
  double jiou_ratio = 0.0;
};

enum class BinKey { kDifficulty, kDistance };

// Means per bin; bins without pairs are omitted.
std::vector<BinStats> BinnedStatistics(const std::vector<MatchedPair>& pairs,
                                       const std::vector<GroundTruthRecord>& gts,
                                       BinKey key, double band = 10.0);

struct EvalReport {
  std::vector<MetricReport> metrics;
  std::vector<MatchedPair> pairs;
  std::vector<BinStats> by_difficulty;
  std::vector<BinStats> by_distance;
  std::vector<RecallGain> recall_gain;  // empty without detector variances
  std::size_t num_detections = 0;
  std::size_t num_ground_truths = 0;
};

EvalReport Evaluate(const std::vector<DetectionRecord>& dets,
                    const std::vector<GroundTruthRecord>& gts, const EvalConfig& cfg);

nlohmann::ordered_json ReportToJson(const EvalReport& report);
// metric,threshold,recall,precision rows.
std::string PrCurvesToCsv(const EvalReport& report);

// Template definition.

template <typename ScoreFn>
Assignment MatchDetectionsWith(const std::vector<DetectionRecord>& dets,
                           const std::vector<GroundTruthRecord>& gts, double threshold,
                           ScoreFn&& score) {
  Assignment out;
  out.det_to_gt.assign(dets.size(), -1);
  std::vector<bool> taken(gts.size(), false);
  std::map<std::string, std::vector<std::size_t>> by_frame;
  for (std::size_t g = 0; g < gts.size(); ++g) by_frame[gts[g].frame].push_back(g);
  for (std::size_t d : DetectionOrder(dets)) {
    const auto it = by_frame.find(dets[d].frame);
    int best = -1;
    double best_value = threshold;
    if (it != by_frame.end()) {
      for (std::size_t g : it->second) {
        if (taken[g]) continue;
        const double v = score(d, g);
        if (v >= best_value && (best < 0 || v > best_value)) {
          best = static_cast<int>(g);
          best_value = v;
        }
      }
    }
    if (best >= 0) {
      taken[best] = true;
      out.det_to_gt[d] = best;
      ++out.true_positives;
    } else {
      ++out.false_positives;
    }
  }
  out.false_negatives = static_cast<int>(gts.size()) - out.true_positives;
  return out;
}

}  // namespace labeluq

#endif  // LABELUQ_EVALKIT_H_
