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

#include "dataio.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "error.h"
#include "io_util.h"

namespace labeluq {

namespace {

static_assert(std::endian::native == std::endian::little,
              "point cloud IO assumes a little-endian host");

std::vector<std::string> Tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double Real(const std::string& tok, const char* field) {
  double v;
  if (!ParseDouble(tok, &v)) {
    Fail(ErrorCode::kParse, std::string("bad value '") + tok + "' for field " + field);
  }
  return v;
}

int Integer(const std::string& tok, const char* field) {
  int v = 0;
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    Fail(ErrorCode::kParse, std::string("bad integer '") + tok + "' for field " + field);
  }
  return v;
}

KittiLabelRow RowFromTokens(const std::vector<std::string>& t) {
  KittiLabelRow r;
  r.type = t[0];
  r.truncated = Real(t[1], "truncated");
  r.occluded = Integer(t[2], "occluded");
  r.alpha = Real(t[3], "alpha");
  for (int i = 0; i < 4; ++i) r.bbox[i] = Real(t[4 + i], "bbox");
  r.h = Real(t[8], "h");
  r.w = Real(t[9], "w");
  r.l = Real(t[10], "l");
  r.x = Real(t[11], "x");
  r.y = Real(t[12], "y");
  r.z = Real(t[13], "z");
  r.ry = Real(t[14], "ry");
  if (t.size() >= 16) r.score = Real(t[15], "score");
  return r;
}

// Runs `fn(line_number, line)` for every non-blank line, prefixing errors
// with the line number.
template <typename Fn>
void ForEachLine(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      fn(n, line);
    } catch (const Error& e) {
      Fail(e.code(), "line " + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace

KittiLabelRow ParseKittiRow(const std::string& line) {
  const auto t = Tokens(line);
  if (t.size() != 15 && t.size() != 16) {
    Fail(ErrorCode::kParse, "expected 15 or 16 fields, got " + std::to_string(t.size()));
  }
  return RowFromTokens(t);
}

std::string FormatKittiRow(const KittiLabelRow& r) {
  std::string out = r.type + " " + FormatDouble(r.truncated) + " " +
                    std::to_string(r.occluded) + " " + FormatDouble(r.alpha);
  for (double b : r.bbox) out += " " + FormatDouble(b);
  for (double v : {r.h, r.w, r.l, r.x, r.y, r.z, r.ry}) out += " " + FormatDouble(v);
  if (r.score) out += " " + FormatDouble(*r.score);
  return out;
}

bool IsVehicle(const std::string& type) { return type == "Car" || type == "Van"; }

BoxBev RowToBox(const KittiLabelRow& row) {
  return MakeBoxBev(row.x, row.z, row.l, row.w, -row.ry);
}

KittiLabelRow BoxToRow(const BoxBev& box, const std::string& type) {
  KittiLabelRow r;
  r.type = type;
  r.alpha = -10.0;
  r.bbox = {0.0, 0.0, 100.0, 100.0};
  r.h = 1.5;
  r.w = box.w;
  r.l = box.l;
  r.x = box.c1;
  r.y = 1.65;
  r.z = box.c2;
  r.ry = NormalizeAngle(-box.r);
  return r;
}

Difficulty KittiDifficulty(const KittiLabelRow& row) {
  const double height = row.bbox[3] - row.bbox[1];
  if (height >= 40.0 && row.occluded <= 0 && row.truncated <= 0.15) return Difficulty::kEasy;
  if (height >= 25.0 && row.occluded <= 1 && row.truncated <= 0.30) return Difficulty::kModerate;
  if (height >= 25.0 && row.occluded <= 2 && row.truncated <= 0.50) return Difficulty::kHard;
  return Difficulty::kUnknown;
}

std::vector<KittiLabelRow> ParseKittiRows(const std::string& text) {
  std::vector<KittiLabelRow> rows;
  ForEachLine(text, [&](int, const std::string& line) { rows.push_back(ParseKittiRow(line)); });
  return rows;
}

std::string FormatKittiRows(const std::vector<KittiLabelRow>& rows) {
  std::string out;
  for (const KittiLabelRow& r : rows) out += FormatKittiRow(r) + "\n";
  return out;
}

std::vector<LabelObject> ParseLabels(const std::string& text) {
  std::vector<LabelObject> out;
  ForEachLine(text, [&](int n, const std::string& line) {
    KittiLabelRow row = ParseKittiRow(line);
    if (!IsVehicle(row.type)) return;
    LabelObject obj;
    obj.box = RowToBox(row);
    obj.difficulty = KittiDifficulty(row);
    obj.distance = std::hypot(row.x, row.z);
    obj.line = n;
    obj.row = std::move(row);
    out.push_back(std::move(obj));
  });
  return out;
}

std::vector<LabelObject> ReadLabels(const std::string& path) {
  try {
    return ParseLabels(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    Fail(e.code(), path + ": " + e.what());
  }
}

std::vector<DetectionRow> ParseDetectionRows(const std::string& text) {
  std::vector<DetectionRow> out;
  std::size_t layout = 0;
  ForEachLine(text, [&](int, const std::string& line) {
    const auto t = Tokens(line);
    if (t.size() != 16 && t.size() != 22) {
      Fail(ErrorCode::kParse, "detection rows need 16 or 22 fields, got " +
                                  std::to_string(t.size()));
    }
    if (layout == 0) layout = t.size();
    if (t.size() != layout) {
      Fail(ErrorCode::kParse, "inconsistent field counts: " + std::to_string(t.size()) +
                                  " after " + std::to_string(layout));
    }
    DetectionRow d;
    d.row = RowFromTokens(t);
    if (!std::isfinite(*d.row.score)) Fail(ErrorCode::kParse, "score must be finite");
    if (t.size() == 22) {
      std::array<double, 6> v;
      for (int i = 0; i < 6; ++i) {
        v[i] = Real(t[16 + i], "variance");
        if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
          Fail(ErrorCode::kParse, "variance " + std::to_string(i + 1) + " is negative or not finite");
        }
      }
      d.variances = v;
    }
    out.push_back(std::move(d));
  });
  return out;
}

std::string FormatDetectionRows(const std::vector<DetectionRow>& rows) {
  std::string out;
  for (const DetectionRow& d : rows) {
    out += FormatKittiRow(d.row);
    if (d.variances) {
      for (double v : *d.variances) out += " " + FormatDouble(v);
    }
    out += "\n";
  }
  return out;
}

std::vector<DetectionRecord> ParseDetections(const std::string& text, const std::string& frame) {
  std::vector<DetectionRecord> out;
  for (const DetectionRow& d : ParseDetectionRows(text)) {
    if (!IsVehicle(d.row.type)) continue;
    out.push_back({frame, RowToBox(d.row), *d.row.score, d.variances});
  }
  return out;
}

std::vector<DetectionRecord> ReadDetections(const std::string& path, const std::string& frame) {
  try {
    return ParseDetections(ReadFile(path), frame);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    Fail(e.code(), path + ": " + e.what());
  }
}

PointCloudFrame ParsePointsBin(const std::string& bytes) {
  constexpr std::size_t kRecord = 4 * sizeof(float);
  if (bytes.size() % kRecord != 0) {
    Fail(ErrorCode::kParse, "point file size " + std::to_string(bytes.size()) +
                                " is not a multiple of 16 bytes");
  }
  PointCloudFrame frame(bytes.size() / kRecord);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    float v[4];
    std::memcpy(v, bytes.data() + i * kRecord, kRecord);
    for (float f : v) {
      if (!std::isfinite(f)) Fail(ErrorCode::kParse, "non-finite coordinate in point " + std::to_string(i));
    }
    frame[i] = {v[0], v[1], v[2], v[3]};
  }
  return frame;
}

std::string FormatPointsBin(const PointCloudFrame& frame) {
  std::string out(frame.size() * 4 * sizeof(float), '\0');
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const float v[4] = {static_cast<float>(frame[i].x), static_cast<float>(frame[i].y),
                        static_cast<float>(frame[i].z), static_cast<float>(frame[i].intensity)};
    std::memcpy(out.data() + i * sizeof(v), v, sizeof(v));
  }
  return out;
}

PointCloudFrame ParsePointsCsv(const std::string& text) {
  PointCloudFrame frame;
  ForEachLine(text, [&](int, const std::string& line) {
    if (line.front() == '#') return;
    std::array<double, 4> v;
    std::size_t start = 0;
    for (int i = 0; i < 4; ++i) {
      const std::size_t end = i < 3 ? line.find(',', start) : line.size();
      if (end == std::string::npos) Fail(ErrorCode::kParse, "expected 4 comma-separated values");
      std::string tok = line.substr(start, end - start);
      tok.erase(0, tok.find_first_not_of(" \t"));
      tok.erase(tok.find_last_not_of(" \t") + 1);
      v[i] = Real(tok, "point");
      if (!std::isfinite(v[i])) Fail(ErrorCode::kParse, "non-finite coordinate");
      start = end + 1;
    }
    frame.push_back({v[0], v[1], v[2], v[3]});
  });
  return frame;
}

std::string FormatPointsCsv(const PointCloudFrame& frame) {
  std::string out;
  for (const LidarPoint& p : frame) {
    out += FormatDouble(p.x) + "," + FormatDouble(p.y) + "," + FormatDouble(p.z) + "," +
           FormatDouble(p.intensity) + "\n";
  }
  return out;
}

PointCloudFrame ReadPoints(const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  try {
    if (ext == ".bin") return ParsePointsBin(ReadFile(path));
    if (ext == ".csv" || ext == ".txt") return ParsePointsCsv(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    Fail(e.code(), path + ": " + e.what());
  }
  Fail(ErrorCode::kInvalidArgument, "unknown point file extension: " + path);
}

Vec2 LidarToBev(const LidarPoint& p) { return {-p.y, p.x}; }

LidarPoint BevToLidar(const Vec2& p, double z) { return {p.y(), -p.x(), z, 0.0}; }

std::vector<Vec2> CropObjectPoints(const PointCloudFrame& frame, const BoxBev& label,
                                   double margin) {
  Require(margin >= 0.0, "crop margin must be >= 0");
  std::vector<Vec2> out;
  for (const LidarPoint& p : frame) {
    const Vec2 q = LidarToBev(p);
    if (BoxContains(label, q, margin)) out.push_back(q);
  }
  return out;
}

nlohmann::ordered_json BoxToJson(const BoxBev& box) {
  return {{"c1", box.c1}, {"c2", box.c2}, {"l", box.l}, {"w", box.w}, {"r", box.r}};
}

BoxBev BoxFromJson(const nlohmann::json& j) {
  try {
    return MakeBoxBev(j.at("c1").get<double>(), j.at("c2").get<double>(),
                      j.at("l").get<double>(), j.at("w").get<double>(),
                      j.at("r").get<double>());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("box: ") + e.what());
  }
}

nlohmann::ordered_json PosteriorToJson(const LabelPosterior& post) {
  nlohmann::ordered_json j;
  j["label"] = BoxToJson(post.label);
  j["num_points"] = post.num_points;
  j["sigma2"] = post.sigma2;
  j["iters_used"] = post.iters_used;
  j["converged"] = post.converged;
  j["phi_mean"] = std::vector<double>(post.phi_mean.data(), post.phi_mean.data() + 6);
  auto cov = nlohmann::ordered_json::array();
  for (int i = 0; i < 6; ++i) {
    std::vector<double> row(6);
    for (int k = 0; k < 6; ++k) row[k] = post.phi_cov(i, k);
    cov.push_back(row);
  }
  j["phi_cov"] = cov;
  return j;
}

LabelPosterior PosteriorFromJson(const nlohmann::json& j) {
  LabelPosterior post;
  try {
    post.label = BoxFromJson(j.at("label"));
    post.num_points = j.at("num_points").get<int>();
    post.sigma2 = j.at("sigma2").get<double>();
    post.iters_used = j.value("iters_used", 0);
    post.converged = j.value("converged", true);
    const auto mean = j.at("phi_mean").get<std::vector<double>>();
    Require(mean.size() == 6, "phi_mean needs 6 values");
    for (int i = 0; i < 6; ++i) post.phi_mean[i] = mean[i];
    const auto& cov = j.at("phi_cov");
    Require(cov.size() == 6, "phi_cov needs 6 rows");
    for (int i = 0; i < 6; ++i) {
      const auto row = cov.at(i).get<std::vector<double>>();
      Require(row.size() == 6, "phi_cov rows need 6 values");
      for (int k = 0; k < 6; ++k) post.phi_cov(i, k) = row[k];
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("posterior: ") + e.what());
  } catch (const Error& e) {
    Fail(ErrorCode::kParse, std::string("posterior: ") + e.what());
  }
  return post;
}

void WriteSyntheticFrame(const std::string& dir, const std::string& frame,
                         const Scene& scene) {
  std::vector<KittiLabelRow> rows;
  PointCloudFrame cloud;
  for (const SceneObject& obj : scene.objects) {
    KittiLabelRow row = BoxToRow(obj.box);
    switch (obj.difficulty) {
      case Difficulty::kEasy:
        row.occluded = 0;
        break;
      case Difficulty::kModerate:
        row.occluded = 1;
        break;
      case Difficulty::kHard:
        row.occluded = 2;
        break;
      case Difficulty::kUnknown:
        row.occluded = 3;
        break;
    }
    rows.push_back(row);
    for (const Vec2& p : obj.points) cloud.push_back(BevToLidar(p));
  }
  const std::filesystem::path root(dir);
  WriteFileAtomic((root / "labels" / (frame + ".txt")).string(), FormatKittiRows(rows));
  WriteFileAtomic((root / "velodyne" / (frame + ".bin")).string(), FormatPointsBin(cloud));
}

}  // namespace labeluq
