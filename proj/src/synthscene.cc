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

#include "synthscene.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "error.h"
#include "io_util.h"
#include "jiou.h"
#include "parallel.h"
#include "spatialdist.h"

namespace labeluq {

namespace {

constexpr double kNoHit = std::numeric_limits<double>::infinity();
constexpr int kPlacementAttempts = 1000;

// Entry distance of the ray o + t d into the box, or kNoHit.
double RayBox(const Vec2& o, const Vec2& d, const BoxBev& box) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  const Vec2 rel = o - box.center();
  const double half[2] = {0.5 * box.l, 0.5 * box.w};
  const double lo[2] = {c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y()};
  const double ld[2] = {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
  double t_in = -kNoHit, t_out = kNoHit;
  for (int a = 0; a < 2; ++a) {
    if (std::abs(ld[a]) < 1e-15) {
      if (std::abs(lo[a]) > half[a]) return kNoHit;
      continue;
    }
    double t0 = (-half[a] - lo[a]) / ld[a];
    double t1 = (half[a] - lo[a]) / ld[a];
    if (t0 > t1) std::swap(t0, t1);
    t_in = std::max(t_in, t0);
    t_out = std::min(t_out, t1);
  }
  if (t_in > t_out || t_in <= 0.0) return kNoHit;
  return t_in;
}

bool Clear(const BoxBev& a, const BoxBev& b, double clearance) {
  const BoxBev grown{a.c1, a.c2, a.l + 2 * clearance, a.w + 2 * clearance, a.r};
  return PolygonIou(BoxPolygon(grown), BoxPolygon(b)) == 0.0;
}

std::vector<BoxBev> PlaceObjects(const SceneConfig& cfg, std::mt19937_64& rng) {
  std::vector<BoxBev> boxes = cfg.objects;
  const RandomPlacement& p = cfg.placement;
  std::uniform_real_distribution<double> dist(p.min_distance, p.max_distance);
  std::uniform_real_distribution<double> azim(-p.max_azimuth, p.max_azimuth);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  std::normal_distribution<double> n01;
  for (int k = 0; k < p.count; ++k) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const double rho = dist(rng), az = azim(rng);
      const double l = std::max(p.length_mean + p.length_std * n01(rng), 2.0);
      const double w = std::max(p.width_mean + p.width_std * n01(rng), 1.0);
      const BoxBev cand = MakeBoxBev(cfg.sensor.x() + rho * std::sin(az),
                                     cfg.sensor.y() + rho * std::cos(az), l, w, yaw(rng));
      if (BoxContains(cand, cfg.sensor, p.clearance)) continue;
      const bool ok = std::all_of(boxes.begin(), boxes.end(), [&](const BoxBev& b) {
        return Clear(cand, b, p.clearance);
      });
      if (ok) {
        boxes.push_back(cand);
        break;
      }
    }
  }
  return boxes;
}

}  // namespace

void Validate(const SceneConfig& cfg) {
  Require(cfg.angular_resolution > 0.0, "angular resolution must be positive");
  Require(cfg.range_noise >= 0.0, "range noise must be >= 0");
  Require(cfg.max_range > 0.0, "max range must be positive");
  const RandomPlacement& p = cfg.placement;
  Require(p.count >= 0, "object count must be >= 0");
  Require(p.min_distance >= 0.0 && p.max_distance >= p.min_distance,
          "placement distances must satisfy 0 <= min <= max");
  Require(p.length_mean > 0.0 && p.width_mean > 0.0, "mean object size must be positive");
  Require(p.length_std >= 0.0 && p.width_std >= 0.0 && p.clearance >= 0.0,
          "placement spreads must be >= 0");
}

Difficulty DifficultyFromOcclusion(double occlusion) {
  if (occlusion < 0.1) return Difficulty::kEasy;
  if (occlusion < 0.5) return Difficulty::kModerate;
  return Difficulty::kHard;
}

Scene GenerateScene(const SceneConfig& cfg) {
  Validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  const std::vector<BoxBev> boxes = PlaceObjects(cfg, rng);
  Scene scene;
  scene.objects.resize(boxes.size());
  std::vector<int> solo_hits(boxes.size(), 0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int beams = static_cast<int>(std::ceil(2.0 * kPi / cfg.angular_resolution));
  for (int k = 0; k < beams; ++k) {
    const double theta = -kPi + k * cfg.angular_resolution;
    const Vec2 dir(std::cos(theta), std::sin(theta));
    double best = kNoHit;
    int hit = -1;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      const double t = RayBox(cfg.sensor, dir, boxes[b]);
      if (t > cfg.max_range) continue;
      ++solo_hits[b];
      if (t < best) {
        best = t;
        hit = static_cast<int>(b);
      }
    }
    // One draw per beam keeps the stream aligned across scenes.
    const double eps = cfg.range_noise * noise(rng);
    if (hit >= 0) scene.objects[hit].points.push_back(cfg.sensor + (best + eps) * dir);
  }
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    SceneObject& obj = scene.objects[b];
    obj.box = boxes[b];
    obj.distance = (boxes[b].center() - cfg.sensor).norm();
    if (solo_hits[b] == 0) {
      obj.occlusion = 1.0;
      obj.difficulty = Difficulty::kUnknown;
    } else {
      obj.occlusion = 1.0 - static_cast<double>(obj.points.size()) / solo_hits[b];
      obj.difficulty = DifficultyFromOcclusion(obj.occlusion);
    }
  }
  return scene;
}

void Validate(const NoiseSpec& spec) {
  Require(!spec.levels.empty(), "noise spec needs at least one level");
  for (const auto& level : spec.levels) {
    for (double s : level) Require(s >= 0.0 && s <= 1.0, "noise stds must lie in [0, 1] m");
  }
}

std::vector<BoxBev> InjectLabelNoise(const std::vector<BoxBev>& boxes,
                                     const NoiseSpec& spec, int level) {
  Validate(spec);
  Require(level >= 0 && level < static_cast<int>(spec.levels.size()),
          "noise level out of range");
  const auto& s = spec.levels[level];
  std::vector<BoxBev> out;
  out.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(level), static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> n01;
    BoxBev b = boxes[i];
    const double d[4] = {n01(rng), n01(rng), n01(rng), n01(rng)};
    if (s[0] > 0.0) b.c1 += s[0] * d[0];
    if (s[1] > 0.0) b.c2 += s[1] * d[1];
    if (s[2] > 0.0) b.l = std::max(b.l + s[2] * d[2], kMinNoisyExtent);
    if (s[3] > 0.0) b.w = std::max(b.w + s[3] * d[3], kMinNoisyExtent);
    out.push_back(b);
  }
  return out;
}

NoiseStudyResult NoiseStudy(const Scene& scene, const NoiseSpec& spec,
                            const PriorSpec& prior, const VbConfig& vb,
                            const NoiseStudyConfig& cfg) {
  Validate(spec);
  Validate(prior);
  Validate(vb);
  Require(cfg.resolution > 0.0, "resolution must be positive");
  std::vector<BoxBev> boxes;
  std::vector<std::size_t> used;
  NoiseStudyResult result;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (scene.objects[i].points.empty()) {
      ++result.excluded;
      continue;
    }
    boxes.push_back(scene.objects[i].box);
    used.push_back(i);
  }
  const int levels = static_cast<int>(spec.levels.size());
  std::vector<std::vector<BoxBev>> noisy(levels);
  for (int lv = 0; lv < levels; ++lv) noisy[lv] = InjectLabelNoise(boxes, spec, lv);

  // scores[object][level]
  std::vector<std::vector<double>> scores(boxes.size(), std::vector<double>(levels, 0.0));
  ParallelFor(boxes.size(), cfg.workers, [&](std::size_t k) {
    const auto& pts = scene.objects[used[k]].points;
    for (int lv = 0; lv < levels; ++lv) {
      const BoxBev& label = noisy[lv][k];
      const LabelPosterior post = InferPosterior(pts, label, prior, vb);
      const GridSpec grid = DefaultGrid(post.phi(), cfg.resolution);
      scores[k][lv] = JiouGt(label, post, grid, vb.surface_samples).value;
    }
  });
  for (int lv = 0; lv < levels; ++lv) {
    NoiseStudyRow row;
    row.level = lv;
    double sum = 0.0;
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      if (!(scores[k][0] > 0.0)) continue;
      sum += lv == 0 ? 1.0 : scores[k][lv] / scores[k][0];
      ++row.objects;
    }
    row.mean_normalized_jiou_gt = row.objects > 0 ? sum / row.objects : 0.0;
    result.rows.push_back(row);
  }
  return result;
}

std::string NoiseStudyToCsv(const NoiseStudyResult& result) {
  std::string out = "level,mean_normalized_jiou_gt,objects\n";
  for (const NoiseStudyRow& r : result.rows) {
    out += std::to_string(r.level) + "," + FormatDouble(r.mean_normalized_jiou_gt) + "," +
           std::to_string(r.objects) + "\n";
  }
  return out;
}

}  // namespace labeluq
