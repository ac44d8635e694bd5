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

// KITTI-layout labels, detections and point clouds.
//
// BEV frame: x is lateral (camera x, or -y in the LiDAR frame) and y is
// longitudinal (camera z, or x in the LiDAR frame). The BEV yaw is -ry.
// Calibration is not applied; the camera-LiDAR offset is taken as zero.

#ifndef LABELUQ_DATAIO_H_
#define LABELUQ_DATAIO_H_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evalkit.h"
#include "geometry.h"
#include "labelvb.h"
#include "losses.h"
#include "synthscene.h"

namespace labeluq {

struct KittiLabelRow {
  std::string type;
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  std::array<double, 4> bbox = {0, 0, 0, 0};  // left, top, right, bottom (px)
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double ry = 0.0;
  std::optional<double> score;
};

// Parses one whitespace-separated row of 15 or 16 fields.
KittiLabelRow ParseKittiRow(const std::string& line);
std::string FormatKittiRow(const KittiLabelRow& row);

bool IsVehicle(const std::string& type);
BoxBev RowToBox(const KittiLabelRow& row);
KittiLabelRow BoxToRow(const BoxBev& box, const std::string& type = "Car");
// Benchmark cutoffs on box height, occlusion and truncation.
Difficulty KittiDifficulty(const KittiLabelRow& row);

struct LabelObject {
  KittiLabelRow row;
  BoxBev box;
  Difficulty difficulty = Difficulty::kUnknown;
  double distance = 0.0;
  int line = 0;
};

// Vehicle rows only (Car, Van). Malformed rows raise kParse with the line
// number.
std::vector<LabelObject> ParseLabels(const std::string& text);
std::vector<LabelObject> ReadLabels(const std::string& path);
// All rows, including non-vehicles, for round-tripping.
std::vector<KittiLabelRow> ParseKittiRows(const std::string& text);
std::string FormatKittiRows(const std::vector<KittiLabelRow>& rows);

struct DetectionRow {
  KittiLabelRow row;  // score is set
  std::optional<std::array<double, 6>> variances;
};

// 16 fields, or 22 with trailing variances (dx, dy, log l, log w, sin r,
// cos r). Every row of a file must use the same layout.
std::vector<DetectionRow> ParseDetectionRows(const std::string& text);
std::string FormatDetectionRows(const std::vector<DetectionRow>& rows);
std::vector<DetectionRecord> ParseDetections(const std::string& text, const std::string& frame);
std::vector<DetectionRecord> ReadDetections(const std::string& path, const std::string& frame);

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

using PointCloudFrame = std::vector<LidarPoint>;

// Binary little-endian float32 records of (x, y, z, intensity).
PointCloudFrame ParsePointsBin(const std::string& bytes);
std::string FormatPointsBin(const PointCloudFrame& frame);
// One "x,y,z,intensity" row per point; blank lines and '#' comments skipped.
PointCloudFrame ParsePointsCsv(const std::string& text);
std::string FormatPointsCsv(const PointCloudFrame& frame);
// Dispatches on the extension (.bin or .csv).
PointCloudFrame ReadPoints(const std::string& path);

Vec2 LidarToBev(const LidarPoint& p);
LidarPoint BevToLidar(const Vec2& p, double z = 0.0);

inline constexpr double kDefaultCropMargin = 0.1;

// BEV points inside the label dilated by `margin`.
std::vector<Vec2> CropObjectPoints(const PointCloudFrame& frame, const BoxBev& label,
                                   double margin = kDefaultCropMargin);

nlohmann::ordered_json BoxToJson(const BoxBev& box);
BoxBev BoxFromJson(const nlohmann::json& j);
nlohmann::ordered_json PosteriorToJson(const LabelPosterior& post);
LabelPosterior PosteriorFromJson(const nlohmann::json& j);

// labels/<frame>.txt and velodyne/<frame>.bin under `dir`.
void WriteSyntheticFrame(const std::string& dir, const std::string& frame,
                         const Scene& scene);

}  // namespace labeluq

#endif  // LABELUQ_DATAIO_H_
