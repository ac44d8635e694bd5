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

// Synthetic BEV LiDAR scans of box-shaped vehicles.
//
// Beams are cast at uniform azimuths from the sensor; each returns the first
// box edge it meets, displaced along the beam by Gaussian range noise.

#ifndef LABELUQ_SYNTHSCENE_H_
#define LABELUQ_SYNTHSCENE_H_

#include <array>
#include <cstdint>
#include <vector>

#include "evalkit.h"
#include "geometry.h"
#include "labelvb.h"

namespace labeluq {

inline constexpr double kDegree = kPi / 180.0;

struct RandomPlacement {
  int count = 0;
  double min_distance = 5.0;
  double max_distance = 40.0;
  // Object azimuth, measured from the longitudinal (forward) axis.
  double max_azimuth = 60.0 * kDegree;
  double length_mean = 4.5;
  double length_std = 0.3;
  double width_mean = 1.8;
  double width_std = 0.1;
  // Minimum free gap between objects (m).
  double clearance = 0.5;
};

struct SceneConfig {
  Vec2 sensor = Vec2::Zero();
  double angular_resolution = 0.2 * kDegree;
  double max_range = 80.0;
  double range_noise = 0.02;
  // Explicit objects are kept first; random ones are appended.
  std::vector<BoxBev> objects;
  RandomPlacement placement;
  std::uint64_t seed = 0;
};

void Validate(const SceneConfig& cfg);

struct SceneObject {
  BoxBev box;
  std::vector<Vec2> points;
  // Share of the beams that would hit the object alone but are blocked.
  double occlusion = 0.0;
  Difficulty difficulty = Difficulty::kUnknown;
  double distance = 0.0;
};

struct Scene {
  std::vector<SceneObject> objects;
};

Scene GenerateScene(const SceneConfig& cfg);

// Difficulty from occlusion: < 0.1 easy, < 0.5 moderate, otherwise hard.
Difficulty DifficultyFromOcclusion(double occlusion);

struct NoiseSpec {
  // Per level: stds of (c1, c2, l, w), each in [0, 1] m.
  std::vector<std::array<double, 4>> levels = {
      {0, 0, 0, 0}, {0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5},
      {0.75, 0.75, 0.75, 0.75}, {1.0, 1.0, 1.0, 1.0}};
  std::uint64_t seed = 0;
};

void Validate(const NoiseSpec& spec);

inline constexpr double kMinNoisyExtent = 0.5;

// Deterministic per (seed, level, object index).
std::vector<BoxBev> InjectLabelNoise(const std::vector<BoxBev>& boxes,
                                     const NoiseSpec& spec, int level);

struct NoiseStudyRow {
  int level = 0;
  double mean_normalized_jiou_gt = 0.0;
  int objects = 0;
};

struct NoiseStudyResult {
  std::vector<NoiseStudyRow> rows;
  int excluded = 0;  // objects without points
};

struct NoiseStudyConfig {
  double resolution = 0.1;
  int workers = 1;
};

NoiseStudyResult NoiseStudy(const Scene& scene, const NoiseSpec& spec,
                            const PriorSpec& prior, const VbConfig& vb,
                            const NoiseStudyConfig& cfg);

// level,mean_normalized_jiou_gt,objects rows.
std::string NoiseStudyToCsv(const NoiseStudyResult& result);

}  // namespace labeluq

#endif  // LABELUQ_SYNTHSCENE_H_
