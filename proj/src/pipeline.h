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

// Batch commands driven by one JSON run configuration.

#ifndef LABELUQ_PIPELINE_H_
#define LABELUQ_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evalkit.h"
#include "labelvb.h"
#include "losses.h"
#include "synthscene.h"

namespace labeluq {

struct SweepConfig {
  std::string frame;
  int object = 0;
  std::vector<double> sigmas = {0.05, 0.2, 0.5};
  std::vector<double> weights = {0.1, 1.0, 10.0};
};

struct SpatialConfig {
  std::vector<std::string> frames;  // empty selects all
  std::vector<int> objects;         // empty selects all
  bool pdq = false;
  int pdq_draws = 1000;
  std::optional<SweepConfig> sweep;
};

struct RunConfig {
  std::string labels_dir;
  std::string points_dir;
  std::string detections_dir;
  std::string output_dir = "out";
  PriorSpec prior;
  VbConfig vb;
  double resolution = 0.1;
  double crop_margin = 0.1;
  EvalConfig eval;
  SpatialConfig spatial;
  std::string jiou_grid_a;
  std::string jiou_grid_b;
  SceneConfig scene;  // placement and sensor model for synth and noise-study
  int synth_frames = 10;
  int noise_frames = 10;
  NoiseSpec noise;
  LossTableConfig loss;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Applies `overrides` (seed, workers, resolution) on top of `config`.
// Unknown keys are rejected.
RunConfig ParseRunConfig(const nlohmann::json& config, const nlohmann::json& overrides);

// Commands: infer, spatial, jiou, eval, synth, noise-study, loss. Returns a
// summary document; data products go under cfg.output_dir.
nlohmann::ordered_json RunCommand(const std::string& command, const RunConfig& cfg);

// Independent stream seed for item `index`.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

}  // namespace labeluq

#endif  // LABELUQ_PIPELINE_H_
