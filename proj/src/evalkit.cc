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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "error.h"
#include "io_util.h"
#include "parallel.h"

namespace labeluq {

namespace {

constexpr double kRecallSlack = 1e-12;

bool Disjoint(const std::array<double, 4>& a, const GridSpec& g) {
  const Vec2 up = g.upper();
  return a[2] <= g.origin.x() || a[3] <= g.origin.y() || a[0] >= up.x() ||
         a[1] >= up.y();
}

// Smallest grid that extends `base` by whole cells to cover `bounds`.
GridSpec ExtendGrid(const GridSpec& base, const std::array<double, 4>& bounds) {
  const double res = base.resolution;
  const int lo_i = std::min(0, static_cast<int>(std::floor((bounds[0] - base.origin.x()) / res)));
  const int lo_j = std::min(0, static_cast<int>(std::floor((bounds[1] - base.origin.y()) / res)));
  const int hi_i = std::max(base.nx, static_cast<int>(std::ceil((bounds[2] - base.origin.x()) / res)));
  const int hi_j = std::max(base.ny, static_cast<int>(std::ceil((bounds[3] - base.origin.y()) / res)));
  GridSpec out = base;
  out.origin = base.origin + res * Vec2(lo_i, lo_j);
  out.nx = hi_i - lo_i;
  out.ny = hi_j - lo_j;
  return out;
}

// Copies `g` into the larger grid `target` produced by ExtendGrid.
SpatialGrid Pad(const SpatialGrid& g, const GridSpec& target) {
  if (g.spec == target) return g;
  const int di = static_cast<int>(std::lround((g.spec.origin.x() - target.origin.x()) / target.resolution));
  const int dj = static_cast<int>(std::lround((g.spec.origin.y() - target.origin.y()) / target.resolution));
  SpatialGrid out;
  out.spec = target;
  out.kind = g.kind;
  out.values.assign(target.size(), 0.0);
  for (int j = 0; j < g.spec.ny; ++j) {
    for (int i = 0; i < g.spec.nx; ++i) out.at(i + di, j + dj) = g.at(i, j);
  }
  return out;
}

std::array<double, 4> SpecBounds(const GridSpec& g) {
  const Vec2 up = g.upper();
  return {g.origin.x(), g.origin.y(), up.x(), up.y()};
}

bool AllZero(const std::array<double, 6>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

nlohmann::ordered_json BinsToJson(const std::vector<BinStats>& bins) {
  auto arr = nlohmann::ordered_json::array();
  for (const BinStats& b : bins) {
    arr.push_back({{"bin", b.key},
                   {"count", b.count},
                   {"mean_iou", b.mean_iou},
                   {"mean_jiou", b.mean_jiou},
                   {"mean_jiou_ratio", b.mean_jiou_ratio}});
  }
  return arr;
}

}  // namespace

std::string DifficultyName(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy:
      return "easy";
    case Difficulty::kModerate:
      return "moderate";
    case Difficulty::kHard:
      return "hard";
    case Difficulty::kUnknown:
      return "unknown";
  }
  return "unknown";
}

void Validate(const EvalConfig& cfg) {
  Require(!cfg.thresholds.empty(), "at least one threshold is required");
  for (double t : cfg.thresholds) Require(t > 0.0 && t <= 1.0, "thresholds must lie in (0, 1]");
  Require(cfg.resolution > 0.0, "resolution must be positive");
  Require(cfg.surface_samples >= 1, "surface_samples must be >= 1");
  Require(cfg.distance_band > 0.0, "distance band must be positive");
}

PhiGaussian PredictiveGaussian(const BoxBev& box, const std::array<double, 6>& v) {
  for (double x : v) Require(x >= 0.0 && std::isfinite(x), "detection variances must be >= 0");
  // var(r) = var(sin r) + var(cos r) inverts the first-order propagation.
  const std::array<double, 5> box_var = {v[0], v[1], box.l * box.l * v[2],
                                         box.w * box.w * v[3], v[4] + v[5]};
  return {FeatureVector(box), PhiCovarianceFromBox(box, box_var)};
}

PairScorer::PairScorer(const std::vector<GroundTruthRecord>& gts, const EvalConfig& cfg)
    : gts_(gts), cfg_(cfg), entries_(gts.size()) {
  Validate(cfg);
  ParallelFor(gts.size(), cfg.workers, [&](std::size_t g) {
    const PhiGaussian phi = gts[g].posterior.phi();
    const GridSpec spec = DefaultGrid(phi, cfg.resolution);
    entries_[g].pg = SpatialPg(phi, spec, cfg.surface_samples);
    entries_[g].jiou_gt =
        ProbJaccard(UniformBoxGrid(gts[g].box, spec).values, entries_[g].pg.values);
  });
}

bool PairScorer::Overlaps(const BoxBev& det, std::size_t gt) const {
  return !Disjoint(BoxBounds(det), entries_[gt].pg.spec);
}

GridSpec PairScorer::PairGrid(const BoxBev& det, std::size_t gt) const {
  return ExtendGrid(entries_[gt].pg.spec, BoxBounds(det));
}

double PairScorer::JiouWith(const SpatialGrid& det_grid, std::size_t gt) const {
  return ProbJaccard(det_grid.values, Pad(entries_[gt].pg, det_grid.spec).values);
}

double PairScorer::Score(MetricKind kind, const BoxBev& det, std::size_t gt) const {
  switch (kind) {
    case MetricKind::kIou:
      return RotatedIou(det, gts_[gt].box);
    case MetricKind::kJiouGt:
      return entries_[gt].jiou_gt;
    case MetricKind::kJiou:
    case MetricKind::kJiouRatio: {
      double j = 0.0;
      if (Overlaps(det, gt)) j = JiouWith(UniformBoxGrid(det, PairGrid(det, gt)), gt);
      if (kind == MetricKind::kJiou) return j;
      if (!(entries_[gt].jiou_gt > 0.0)) {
        Fail(ErrorCode::kUndefined, "JIoU-Ratio undefined: JIoU-GT is zero");
      }
      return std::clamp(j / entries_[gt].jiou_gt, 0.0, 1.0);
    }
  }
  Fail(ErrorCode::kInternal, "unknown metric kind");
}

std::vector<std::size_t> DetectionOrder(const std::vector<DetectionRecord>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    const BoxBev& b = dets[i].box;
    return std::make_tuple(-dets[i].score, dets[i].frame, b.c1, b.c2, b.l, b.w, b.r);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return order;
}

Assignment MatchDetections(const std::vector<DetectionRecord>& dets,
                           const std::vector<GroundTruthRecord>& gts, double threshold,
                           const std::vector<std::vector<double>>& scores) {
  return MatchDetectionsWith(dets, gts, threshold,
                             [&](std::size_t d, std::size_t g) { return scores[d][g]; });
}

std::vector<PrPoint> PrCurve(const std::vector<DetectionRecord>& dets,
                             const Assignment& assignment, std::size_t num_gt) {
  std::vector<PrPoint> curve;
  int tp = 0, fp = 0;
  for (std::size_t d : DetectionOrder(dets)) {
    if (assignment.det_to_gt[d] >= 0) {
      ++tp;
    } else {
      ++fp;
    }
    const double recall = num_gt > 0 ? static_cast<double>(tp) / num_gt : 0.0;
    curve.push_back({recall, static_cast<double>(tp) / (tp + fp)});
  }
  return curve;
}

double AveragePrecision11(const std::vector<PrPoint>& curve) {
  double sum = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double level = k / 10.0;
    double best = 0.0;
    for (const PrPoint& p : curve) {
      if (p.recall >= level - kRecallSlack) best = std::max(best, p.precision);
    }
    sum += best;
  }
  return sum / 11.0;
}

std::vector<std::vector<double>> PairScores(const std::vector<DetectionRecord>& dets,
                                            const std::vector<GroundTruthRecord>& gts,
                                            const PairScorer& scorer, MetricKind kind,
                                            int workers) {
  std::vector<std::vector<double>> scores(
      dets.size(), std::vector<double>(gts.size(), std::numeric_limits<double>::quiet_NaN()));
  ParallelFor(dets.size(), workers, [&](std::size_t d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].frame == dets[d].frame) scores[d][g] = scorer.Score(kind, dets[d].box, g);
    }
  });
  return scores;
}

MetricReport MapOverThresholds(const std::vector<DetectionRecord>& dets,
                               const std::vector<GroundTruthRecord>& gts,
                               const PairScorer& scorer, MetricKind kind,
                               const std::vector<double>& thresholds, int workers) {
  Require(!thresholds.empty(), "at least one threshold is required");
  MetricReport report;
  report.kind = kind;
  report.thresholds = thresholds;
  const auto scores = PairScores(dets, gts, scorer, kind, workers);
  for (double t : thresholds) {
    const Assignment a = MatchDetections(dets, gts, t, scores);
    report.curves.push_back(PrCurve(dets, a, gts.size()));
    report.ap.push_back(AveragePrecision11(report.curves.back()));
  }
  report.map = std::accumulate(report.ap.begin(), report.ap.end(), 0.0) / report.ap.size();
  return report;
}

std::vector<RecallGain> ComputeRecallGain(const std::vector<DetectionRecord>& dets,
                                          const std::vector<GroundTruthRecord>& gts,
                                          const PairScorer& scorer,
                                          const std::vector<double>& thresholds,
                                          int workers) {
  for (const DetectionRecord& d : dets) {
    if (!d.variances) {
      Fail(ErrorCode::kInvalidArgument, "recall gain needs predictive variances on every detection");
    }
  }
  const auto det_scores = PairScores(dets, gts, scorer, MetricKind::kJiou, workers);
  std::vector<std::vector<double>> prob_scores = det_scores;
  const EvalConfig& cfg = scorer.config();
  ParallelFor(dets.size(), workers, [&](std::size_t d) {
    const auto& var = *dets[d].variances;
    // Zero variance is the deterministic box itself.
    if (AllZero(var)) return;
    const PhiGaussian pred = PredictiveGaussian(dets[d].box, var);
    const GridSpec pred_spec = DefaultGrid(pred, cfg.resolution);
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].frame != dets[d].frame) continue;
      if (Disjoint(SpecBounds(pred_spec), scorer.GtGrid(g))) {
        prob_scores[d][g] = 0.0;
        continue;
      }
      const GridSpec spec = ExtendGrid(scorer.GtGrid(g), SpecBounds(pred_spec));
      prob_scores[d][g] = scorer.JiouWith(SpatialPg(pred, spec, cfg.surface_samples), g);
    }
  });
  std::vector<RecallGain> out;
  const double n = static_cast<double>(std::max<std::size_t>(gts.size(), 1));
  for (double t : thresholds) {
    RecallGain r;
    r.threshold = t;
    r.recall_deterministic = MatchDetections(dets, gts, t, det_scores).true_positives / n;
    r.recall_probabilistic = MatchDetections(dets, gts, t, prob_scores).true_positives / n;
    r.gain = r.recall_probabilistic - r.recall_deterministic;
    out.push_back(r);
  }
  return out;
}

std::vector<BinStats> BinnedStatistics(const std::vector<MatchedPair>& pairs,
                                       const std::vector<GroundTruthRecord>& gts,
                                       BinKey key, double band) {
  Require(band > 0.0, "distance band must be positive");
  // Ordered bins: difficulty in enum order, distance by band index.
  std::map<int, BinStats> bins;
  for (const MatchedPair& p : pairs) {
    const GroundTruthRecord& gt = gts.at(p.gt);
    int idx;
    std::string name;
    if (key == BinKey::kDifficulty) {
      idx = static_cast<int>(gt.difficulty);
      name = DifficultyName(gt.difficulty);
    } else {
      idx = static_cast<int>(std::floor(gt.distance / band));
      name = "[" + FormatDouble(idx * band) + "," + FormatDouble((idx + 1) * band) + ")";
    }
    BinStats& b = bins[idx];
    b.key = name;
    ++b.count;
    b.mean_iou += p.iou;
    b.mean_jiou += p.jiou;
    b.mean_jiou_ratio += p.jiou_ratio;
  }
  std::vector<BinStats> out;
  for (auto& [idx, b] : bins) {
    b.mean_iou /= b.count;
    b.mean_jiou /= b.count;
    b.mean_jiou_ratio /= b.count;
    out.push_back(b);
  }
  return out;
}

EvalReport Evaluate(const std::vector<DetectionRecord>& dets,
                    const std::vector<GroundTruthRecord>& gts, const EvalConfig& cfg) {
  Validate(cfg);
  EvalReport report;
  report.num_detections = dets.size();
  report.num_ground_truths = gts.size();
  const PairScorer scorer(gts, cfg);
  std::vector<std::vector<std::vector<double>>> scores;
  for (MetricKind kind : {MetricKind::kIou, MetricKind::kJiou, MetricKind::kJiouRatio}) {
    MetricReport m;
    m.kind = kind;
    m.thresholds = cfg.thresholds;
    scores.push_back(PairScores(dets, gts, scorer, kind, cfg.workers));
    for (double t : cfg.thresholds) {
      const Assignment a = MatchDetections(dets, gts, t, scores.back());
      m.curves.push_back(PrCurve(dets, a, gts.size()));
      m.ap.push_back(AveragePrecision11(m.curves.back()));
    }
    m.map = std::accumulate(m.ap.begin(), m.ap.end(), 0.0) / m.ap.size();
    report.metrics.push_back(std::move(m));
  }

  // Pairs for the binned statistics come from IoU matching at the lowest
  // threshold.
  const double t0 = *std::min_element(cfg.thresholds.begin(), cfg.thresholds.end());
  const Assignment a = MatchDetections(dets, gts, t0, scores[0]);
  for (std::size_t d : DetectionOrder(dets)) {
    const int g = a.det_to_gt[d];
    if (g < 0) continue;
    report.pairs.push_back({d, static_cast<std::size_t>(g), scores[0][d][g],
                            scores[1][d][g], scores[2][d][g]});
  }
  report.by_difficulty = BinnedStatistics(report.pairs, gts, BinKey::kDifficulty);
  report.by_distance = BinnedStatistics(report.pairs, gts, BinKey::kDistance, cfg.distance_band);

  const bool has_var = !dets.empty() && std::all_of(dets.begin(), dets.end(), [](const auto& d) {
    return d.variances.has_value();
  });
  if (has_var) report.recall_gain = ComputeRecallGain(dets, gts, scorer, cfg.thresholds, cfg.workers);
  return report;
}

nlohmann::ordered_json ReportToJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["num_detections"] = report.num_detections;
  j["num_ground_truths"] = report.num_ground_truths;
  auto metrics = nlohmann::ordered_json::object();
  for (const MetricReport& m : report.metrics) {
    nlohmann::ordered_json entry;
    entry["map"] = m.map;
    auto ap = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.thresholds.size(); ++i) {
      ap.push_back({{"threshold", m.thresholds[i]}, {"ap", m.ap[i]}});
    }
    entry["ap"] = ap;
    metrics[MetricName(m.kind)] = entry;
  }
  j["metrics"] = metrics;
  j["matched_pairs"] = report.pairs.size();
  j["by_difficulty"] = BinsToJson(report.by_difficulty);
  j["by_distance"] = BinsToJson(report.by_distance);
  auto gain = nlohmann::ordered_json::array();
  for (const RecallGain& r : report.recall_gain) {
    gain.push_back({{"threshold", r.threshold},
                    {"recall_deterministic", r.recall_deterministic},
                    {"recall_probabilistic", r.recall_probabilistic},
                    {"gain", r.gain}});
  }
  j["recall_gain"] = gain;
  return j;
}

std::string PrCurvesToCsv(const EvalReport& report) {
  std::string out = "metric,threshold,recall,precision\n";
  for (const MetricReport& m : report.metrics) {
    for (std::size_t i = 0; i < m.thresholds.size(); ++i) {
      for (const PrPoint& p : m.curves[i]) {
        out += MetricName(m.kind) + "," + FormatDouble(m.thresholds[i]) + "," +
               FormatDouble(p.recall) + "," + FormatDouble(p.precision) + "\n";
      }
    }
  }
  return out;
}

}  // namespace labeluq
