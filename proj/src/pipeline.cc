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

#include "pipeline.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include "dataio.h"
#include "error.h"
#include "io_util.h"
#include "jiou.h"
#include "parallel.h"
#include "spatialdist.h"

namespace labeluq {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::mutex log_mu;

// One JSON object per line on stderr.
void Log(const std::string& level, const std::string& msg, ojson fields = ojson::object()) {
  const auto now = std::chrono::system_clock::now();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  ojson line;
  line["ts_ms"] = ms;
  line["level"] = level;
  line["msg"] = msg;
  for (auto& [k, v] : fields.items()) line[k] = v;
  std::lock_guard<std::mutex> lock(log_mu);
  std::fprintf(stderr, "%s\n", line.dump().c_str());
}

// Strict reader: every key must be consumed; unknown keys are errors.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) Fail(ErrorCode::kParse, name_ + ": expected an object");
  }
  ~Section() = default;

  bool Has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void Get(const std::string& key, T* out) {
    if (!Has(key)) return;
    try {
      *out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, name_ + "." + key + ": " + e.what());
    }
  }

  Section Child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), name_ + "." + key);
  }

  void Finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) Fail(ErrorCode::kParse, name_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void ParseScene(Section s, SceneConfig* scene) {
  double deg = scene->angular_resolution / kDegree;
  double az = scene->placement.max_azimuth / kDegree;
  s.Get("angular_resolution_deg", &deg);
  s.Get("max_range", &scene->max_range);
  s.Get("range_noise", &scene->range_noise);
  s.Get("objects_per_frame", &scene->placement.count);
  s.Get("min_distance", &scene->placement.min_distance);
  s.Get("max_distance", &scene->placement.max_distance);
  s.Get("max_azimuth_deg", &az);
  s.Get("length_mean", &scene->placement.length_mean);
  s.Get("length_std", &scene->placement.length_std);
  s.Get("width_mean", &scene->placement.width_mean);
  s.Get("width_std", &scene->placement.width_std);
  s.Get("clearance", &scene->placement.clearance);
  s.Finish();
  scene->angular_resolution = deg * kDegree;
  scene->placement.max_azimuth = az * kDegree;
}

std::vector<std::string> Frames(const std::string& labels_dir) {
  std::vector<std::string> frames;
  for (const auto& e : fs::directory_iterator(labels_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") {
      frames.push_back(e.path().stem().string());
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

std::string PointsPath(const std::string& dir, const std::string& frame) {
  for (const char* ext : {".bin", ".csv"}) {
    const fs::path p = fs::path(dir) / (frame + ext);
    if (fs::exists(p)) return p.string();
  }
  Fail(ErrorCode::kIo, "no point cloud for frame " + frame + " in " + dir);
}

void RequireDir(const std::string& dir, const char* what) {
  if (dir.empty()) Fail(ErrorCode::kInvalidArgument, std::string(what) + " is not configured");
  if (!fs::is_directory(dir)) {
    Fail(ErrorCode::kIo, std::string(what) + " does not exist: " + dir);
  }
}

std::string OutPath(const RunConfig& cfg, const std::string& rel) {
  return (fs::path(cfg.output_dir) / rel).string();
}

struct ObjectResult {
  LabelObject label;
  std::vector<Vec2> points;
  std::optional<LabelPosterior> posterior;
  std::string flag = "ok";
};

struct FrameResult {
  std::string frame;
  std::vector<ObjectResult> objects;
};

ObjectResult InferObject(const LabelObject& label, std::vector<Vec2> points,
                         const PriorSpec& prior, const VbConfig& vb) {
  ObjectResult r;
  r.label = label;
  r.points = std::move(points);
  if (r.points.empty()) {
    r.flag = "no_points";
    if (prior.weight > 0.0) r.posterior = PriorOnlyPosterior(label.box, prior);
    return r;
  }
  try {
    r.posterior = InferPosterior(r.points, label.box, prior, vb);
  } catch (const RankDeficientError&) {
    r.flag = "rank_deficient";
  }
  return r;
}

std::vector<FrameResult> InferFrames(const RunConfig& cfg,
                                     const std::vector<std::string>& frames) {
  std::vector<FrameResult> out(frames.size());
  ParallelFor(frames.size(), cfg.workers, [&](std::size_t f) {
    const std::string& frame = frames[f];
    out[f].frame = frame;
    const auto labels = ReadLabels((fs::path(cfg.labels_dir) / (frame + ".txt")).string());
    const PointCloudFrame cloud = ReadPoints(PointsPath(cfg.points_dir, frame));
    for (const LabelObject& obj : labels) {
      out[f].objects.push_back(
          InferObject(obj, CropObjectPoints(cloud, obj.box, cfg.crop_margin), cfg.prior, cfg.vb));
    }
  });
  return out;
}

ojson ObjectToJson(const ObjectResult& r, int index) {
  ojson o;
  o["index"] = index;
  o["line"] = r.label.line;
  o["type"] = r.label.row.type;
  o["difficulty"] = DifficultyName(r.label.difficulty);
  o["distance"] = r.label.distance;
  o["num_points"] = r.points.size();
  o["flag"] = r.flag;
  if (r.posterior) {
    o["posterior"] = PosteriorToJson(*r.posterior);
    try {
      const ParamVariances v = PropagateVariances(*r.posterior);
      o["variances"] = {{"dx", v.dx},       {"dy", v.dy},       {"log_l", v.log_l},
                        {"log_w", v.log_w}, {"sin_r", v.sin_r}, {"cos_r", v.cos_r},
                        {"c1", v.c1},       {"c2", v.c2},       {"l", v.l},
                        {"w", v.w},         {"r", v.r}};
    } catch (const Error&) {
      o["variances"] = nullptr;
    }
  } else {
    o["posterior"] = nullptr;
  }
  return o;
}

// Posterior used when none could be inferred: the label itself.
LabelPosterior DeltaPosterior(const BoxBev& box) {
  LabelPosterior p;
  p.label = box;
  p.phi_mean = FeatureVector(box);
  p.converged = true;
  return p;
}

ojson CmdInfer(const RunConfig& cfg) {
  RequireDir(cfg.labels_dir, "labels_dir");
  RequireDir(cfg.points_dir, "points_dir");
  const auto frames = Frames(cfg.labels_dir);
  const auto results = InferFrames(cfg, frames);
  int objects = 0, flagged = 0;
  for (const FrameResult& fr : results) {
    ojson doc;
    doc["frame"] = fr.frame;
    auto arr = ojson::array();
    for (std::size_t i = 0; i < fr.objects.size(); ++i) {
      arr.push_back(ObjectToJson(fr.objects[i], static_cast<int>(i)));
      ++objects;
      if (fr.objects[i].flag != "ok") {
        ++flagged;
        Log("warn", "object flagged",
            {{"frame", fr.frame}, {"index", i}, {"flag", fr.objects[i].flag}});
      }
    }
    doc["objects"] = arr;
    WriteFileAtomic(OutPath(cfg, "posteriors/" + fr.frame + ".json"), doc.dump(2) + "\n");
  }
  return {{"command", "infer"}, {"frames", results.size()}, {"objects", objects},
          {"flagged", flagged}, {"output", OutPath(cfg, "posteriors")}};
}

template <typename T>
bool Selected(const std::vector<T>& sel, const T& v) {
  return sel.empty() || std::find(sel.begin(), sel.end(), v) != sel.end();
}

ojson CmdSpatial(const RunConfig& cfg) {
  RequireDir(cfg.labels_dir, "labels_dir");
  RequireDir(cfg.points_dir, "points_dir");
  std::vector<std::string> frames;
  for (const std::string& f : Frames(cfg.labels_dir)) {
    if (Selected(cfg.spatial.frames, f)) frames.push_back(f);
  }
  const auto results = InferFrames(cfg, frames);
  struct Job {
    std::string name;
    const ObjectResult* obj;
  };
  std::vector<Job> jobs;
  for (const FrameResult& fr : results) {
    for (std::size_t i = 0; i < fr.objects.size(); ++i) {
      if (!Selected(cfg.spatial.objects, static_cast<int>(i))) continue;
      jobs.push_back({fr.frame + "_" + std::to_string(i), &fr.objects[i]});
    }
  }
  ParallelFor(jobs.size(), cfg.workers, [&](std::size_t k) {
    const ObjectResult& obj = *jobs[k].obj;
    const LabelPosterior post =
        obj.posterior ? *obj.posterior : DeltaPosterior(obj.label.box);
    const GridSpec spec = DefaultGrid(post.phi(), cfg.resolution);
    const SpatialGrid pg = SpatialPg(post, spec, cfg.vb.surface_samples);
    WriteGrid(OutPath(cfg, "spatial/" + jobs[k].name + "_pg.grid"), pg);
    WritePgm(OutPath(cfg, "spatial/" + jobs[k].name + "_pg.pgm"), pg);
    if (cfg.spatial.pdq) {
      const SpatialGrid pdq = SpatialPdq(BoxSampler::Gaussian(post.phi()), spec,
                                         cfg.spatial.pdq_draws, DeriveSeed(cfg.seed, k));
      WriteGrid(OutPath(cfg, "spatial/" + jobs[k].name + "_pdq.grid"), pdq);
      WritePgm(OutPath(cfg, "spatial/" + jobs[k].name + "_pdq.pgm"), pdq);
    }
  });

  ojson summary = {{"command", "spatial"}, {"objects", jobs.size()},
                   {"output", OutPath(cfg, "spatial")}};
  if (cfg.spatial.sweep) {
    const SweepConfig& sw = *cfg.spatial.sweep;
    const ObjectResult* target = nullptr;
    for (const FrameResult& fr : results) {
      if (fr.frame == sw.frame && sw.object >= 0 &&
          sw.object < static_cast<int>(fr.objects.size())) {
        target = &fr.objects[sw.object];
      }
    }
    if (!target) {
      Fail(ErrorCode::kInvalidArgument, "sweep object " + sw.frame + "/" +
                                            std::to_string(sw.object) + " not found");
    }
    if (target->points.empty()) {
      Fail(ErrorCode::kInvalidArgument, "sweep object has no points");
    }
    std::string table = "sigma,weight,entropy,jiou_gt\n";
    for (std::size_t i = 0; i < sw.sigmas.size(); ++i) {
      for (std::size_t j = 0; j < sw.weights.size(); ++j) {
        PriorSpec prior = cfg.prior;
        prior.weight = sw.weights[j];
        VbConfig vb = cfg.vb;
        vb.sigma_mode = SigmaMode::kFixed;
        vb.sigma = sw.sigmas[i];
        const LabelPosterior post = InferPosterior(target->points, target->label.box, prior, vb);
        const GridSpec spec = DefaultGrid(post.phi(), cfg.resolution);
        const SpatialGrid pg = SpatialPg(post, spec, vb.surface_samples);
        const std::string stem =
            "spatial/sweep/s" + std::to_string(i) + "_w" + std::to_string(j);
        WriteGrid(OutPath(cfg, stem + ".grid"), pg);
        WritePgm(OutPath(cfg, stem + ".pgm"), pg);
        const double jgt = Jiou(UniformBoxGrid(target->label.box, spec), pg).value;
        table += FormatDouble(sw.sigmas[i]) + "," + FormatDouble(sw.weights[j]) + "," +
                 FormatDouble(Entropy(pg)) + "," + FormatDouble(jgt) + "\n";
      }
    }
    WriteFileAtomic(OutPath(cfg, "spatial/sweep.csv"), table);
    summary["sweep"] = OutPath(cfg, "spatial/sweep.csv");
  }
  return summary;
}

ojson CmdJiou(const RunConfig& cfg) {
  if (cfg.jiou_grid_a.empty() || cfg.jiou_grid_b.empty()) {
    Fail(ErrorCode::kInvalidArgument, "jiou needs jiou.grid_a and jiou.grid_b");
  }
  const SpatialGrid a = ReadGrid(cfg.jiou_grid_a);
  const SpatialGrid b = ReadGrid(cfg.jiou_grid_b);
  if (a.kind != GridKind::kDensity || b.kind != GridKind::kDensity) {
    Log("warn", "membership grid treated as a normalized density");
  }
  const auto [ra, rb] = ResampleToCommon(a, b);
  const double value = Jiou(ra, rb).value;
  ojson doc = {{"grid_a", cfg.jiou_grid_a}, {"grid_b", cfg.jiou_grid_b}, {"jiou", value}};
  WriteFileAtomic(OutPath(cfg, "jiou.json"), doc.dump(2) + "\n");
  return {{"command", "jiou"}, {"jiou", value}, {"output", OutPath(cfg, "jiou.json")}};
}

ojson CmdEval(const RunConfig& cfg) {
  RequireDir(cfg.labels_dir, "labels_dir");
  RequireDir(cfg.points_dir, "points_dir");
  RequireDir(cfg.detections_dir, "detections_dir");
  const auto frames = Frames(cfg.labels_dir);
  const auto results = InferFrames(cfg, frames);
  std::vector<GroundTruthRecord> gts;
  std::vector<DetectionRecord> dets;
  for (const FrameResult& fr : results) {
    for (const ObjectResult& obj : fr.objects) {
      gts.push_back({fr.frame, obj.label.box,
                     obj.posterior ? *obj.posterior : DeltaPosterior(obj.label.box),
                     obj.label.difficulty, obj.label.distance});
    }
    const fs::path det_path = fs::path(cfg.detections_dir) / (fr.frame + ".txt");
    if (fs::exists(det_path)) {
      for (DetectionRecord& d : ReadDetections(det_path.string(), fr.frame)) {
        dets.push_back(std::move(d));
      }
    }
  }
  EvalConfig ec = cfg.eval;
  ec.resolution = cfg.resolution;
  ec.surface_samples = cfg.vb.surface_samples;
  ec.workers = cfg.workers;
  const EvalReport report = Evaluate(dets, gts, ec);
  const ojson doc = ReportToJson(report);
  WriteFileAtomic(OutPath(cfg, "eval/report.json"), doc.dump(2) + "\n");
  WriteFileAtomic(OutPath(cfg, "eval/pr_curves.csv"), PrCurvesToCsv(report));
  ojson summary = {{"command", "eval"}, {"detections", dets.size()}, {"ground_truths", gts.size()}};
  for (const MetricReport& m : report.metrics) summary["map_" + MetricName(m.kind)] = m.map;
  summary["output"] = OutPath(cfg, "eval/report.json");
  return summary;
}

std::string FrameId(int i) {
  std::ostringstream s;
  s << std::setw(6) << std::setfill('0') << i;
  return s.str();
}

ojson CmdSynth(const RunConfig& cfg) {
  Require(cfg.synth_frames >= 1, "synth.frames must be >= 1");
  std::vector<int> counts(cfg.synth_frames, 0);
  const std::string root = OutPath(cfg, "synth");
  ParallelFor(counts.size(), cfg.workers, [&](std::size_t f) {
    SceneConfig sc = cfg.scene;
    sc.seed = DeriveSeed(cfg.seed, f);
    const Scene scene = GenerateScene(sc);
    WriteSyntheticFrame(root, FrameId(static_cast<int>(f)), scene);
    counts[f] = static_cast<int>(scene.objects.size());
  });
  int objects = 0;
  for (int c : counts) objects += c;
  return {{"command", "synth"}, {"frames", cfg.synth_frames}, {"objects", objects},
          {"output", root}};
}

ojson CmdNoiseStudy(const RunConfig& cfg) {
  Require(cfg.noise_frames >= 1, "noise_study.frames must be >= 1");
  Scene all;
  for (int f = 0; f < cfg.noise_frames; ++f) {
    SceneConfig sc = cfg.scene;
    sc.seed = DeriveSeed(cfg.seed, f);
    Scene s = GenerateScene(sc);
    for (SceneObject& o : s.objects) all.objects.push_back(std::move(o));
  }
  NoiseSpec spec = cfg.noise;
  spec.seed = DeriveSeed(cfg.seed, 0x6e6f697365ULL);
  const NoiseStudyResult result =
      NoiseStudy(all, spec, cfg.prior, cfg.vb, {cfg.resolution, cfg.workers});
  const int used = result.rows.empty() ? 0 : result.rows.front().objects;
  if (used < 30) {
    Log("warn", "noise study uses fewer than 30 objects; means may be unstable",
        {{"objects", used}});
  }
  WriteFileAtomic(OutPath(cfg, "noise_study.csv"), NoiseStudyToCsv(result));
  auto rows = ojson::array();
  for (const NoiseStudyRow& r : result.rows) {
    rows.push_back({{"level", r.level}, {"mean_normalized_jiou_gt", r.mean_normalized_jiou_gt}});
  }
  return {{"command", "noise-study"}, {"objects", used}, {"excluded", result.excluded},
          {"rows", rows}, {"output", OutPath(cfg, "noise_study.csv")}};
}

ojson CmdLoss(const RunConfig& cfg) {
  RequireDir(cfg.labels_dir, "labels_dir");
  RequireDir(cfg.points_dir, "points_dir");
  const auto results = InferFrames(cfg, Frames(cfg.labels_dir));
  std::vector<LossTableObject> objects;
  for (const FrameResult& fr : results) {
    for (std::size_t i = 0; i < fr.objects.size(); ++i) {
      const ObjectResult& r = fr.objects[i];
      LossTableObject o;
      o.id = fr.frame + "_" + std::to_string(i);
      o.has_posterior = r.posterior.has_value();
      if (o.has_posterior) o.posterior = *r.posterior;
      o.num_points = r.points.size();
      o.hull_iou = HeuristicConvexHull(r.points, r.label.box);
      objects.push_back(std::move(o));
    }
  }
  const auto rows = BuildLossTable(objects, cfg.loss);
  WriteFileAtomic(OutPath(cfg, "loss_table.csv"), LossTableToCsv(rows));
  return {{"command", "loss"}, {"objects", objects.size()}, {"rows", rows.size()},
          {"output", OutPath(cfg, "loss_table.csv")}};
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over a combined key.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RunConfig ParseRunConfig(const json& config, const json& overrides) {
  RunConfig cfg;
  const json doc = config.is_null() ? json::object() : config;
  Section root(doc, "config");
  root.Get("labels_dir", &cfg.labels_dir);
  root.Get("points_dir", &cfg.points_dir);
  root.Get("detections_dir", &cfg.detections_dir);
  root.Get("output_dir", &cfg.output_dir);
  root.Get("seed", &cfg.seed);
  root.Get("workers", &cfg.workers);
  root.Get("crop_margin", &cfg.crop_margin);
  if (root.Has("prior")) {
    Section s = root.Child("prior");
    s.Get("variances", &cfg.prior.variances);
    s.Get("weight", &cfg.prior.weight);
    s.Finish();
  }
  if (root.Has("vb")) {
    Section s = root.Child("vb");
    std::string mode = cfg.vb.sigma_mode == SigmaMode::kFixed ? "fixed" : "em";
    s.Get("num_components", &cfg.vb.num_components);
    s.Get("sigma_mode", &mode);
    s.Get("sigma", &cfg.vb.sigma);
    s.Get("max_iters", &cfg.vb.max_iters);
    s.Get("tol", &cfg.vb.tol);
    s.Get("surface_samples", &cfg.vb.surface_samples);
    s.Finish();
    if (mode == "fixed") {
      cfg.vb.sigma_mode = SigmaMode::kFixed;
    } else if (mode == "em") {
      cfg.vb.sigma_mode = SigmaMode::kEmFit;
    } else {
      Fail(ErrorCode::kParse, "config.vb.sigma_mode must be 'fixed' or 'em'");
    }
  }
  if (root.Has("grid")) {
    Section s = root.Child("grid");
    s.Get("resolution", &cfg.resolution);
    s.Finish();
  }
  if (root.Has("eval")) {
    Section s = root.Child("eval");
    s.Get("thresholds", &cfg.eval.thresholds);
    s.Get("distance_band", &cfg.eval.distance_band);
    s.Finish();
  }
  if (root.Has("spatial")) {
    Section s = root.Child("spatial");
    s.Get("frames", &cfg.spatial.frames);
    s.Get("objects", &cfg.spatial.objects);
    s.Get("pdq", &cfg.spatial.pdq);
    s.Get("pdq_draws", &cfg.spatial.pdq_draws);
    if (s.Has("sweep")) {
      Section w = s.Child("sweep");
      SweepConfig sw;
      w.Get("frame", &sw.frame);
      w.Get("object", &sw.object);
      w.Get("sigmas", &sw.sigmas);
      w.Get("weights", &sw.weights);
      w.Finish();
      cfg.spatial.sweep = sw;
    }
    s.Finish();
  }
  if (root.Has("jiou")) {
    Section s = root.Child("jiou");
    s.Get("grid_a", &cfg.jiou_grid_a);
    s.Get("grid_b", &cfg.jiou_grid_b);
    s.Finish();
  }
  cfg.scene.placement.count = 8;
  if (root.Has("scene")) ParseScene(root.Child("scene"), &cfg.scene);
  if (root.Has("synth")) {
    Section s = root.Child("synth");
    s.Get("frames", &cfg.synth_frames);
    s.Finish();
  }
  if (root.Has("noise_study")) {
    Section s = root.Child("noise_study");
    s.Get("frames", &cfg.noise_frames);
    std::vector<std::vector<double>> levels;
    s.Get("levels", &levels);
    s.Finish();
    if (!levels.empty()) {
      cfg.noise.levels.clear();
      for (const auto& l : levels) {
        if (l.size() == 1) {
          cfg.noise.levels.push_back({l[0], l[0], l[0], l[0]});
        } else if (l.size() == 4) {
          cfg.noise.levels.push_back({l[0], l[1], l[2], l[3]});
        } else {
          Fail(ErrorCode::kParse, "noise_study.levels entries need 1 or 4 stds");
        }
      }
    }
  }
  if (root.Has("loss")) {
    Section s = root.Child("loss");
    s.Get("fixed", &cfg.loss.fixed);
    s.Get("heuristic_base", &cfg.loss.heuristic_base);
    s.Finish();
  }
  root.Finish();

  if (!overrides.is_null()) {
    Section o(overrides, "overrides");
    o.Get("seed", &cfg.seed);
    o.Get("workers", &cfg.workers);
    o.Get("resolution", &cfg.resolution);
    o.Get("output_dir", &cfg.output_dir);
    o.Finish();
  }

  Validate(cfg.prior);
  Validate(cfg.vb);
  Validate(cfg.scene);
  Validate(cfg.noise);
  Require(cfg.workers >= 1, "workers must be >= 1");
  Require(cfg.resolution > 0.0, "grid resolution must be positive");
  Require(cfg.crop_margin >= 0.0, "crop_margin must be >= 0");
  Require(!cfg.output_dir.empty(), "output_dir must be set");
  Require(cfg.spatial.pdq_draws >= 1, "spatial.pdq_draws must be >= 1");
  EvalConfig ec = cfg.eval;
  ec.resolution = cfg.resolution;
  Validate(ec);
  return cfg;
}

ojson RunCommand(const std::string& command, const RunConfig& cfg) {
  Log("info", "start", {{"command", command}, {"workers", cfg.workers}, {"seed", cfg.seed}});
  const auto t0 = std::chrono::steady_clock::now();
  ojson summary;
  if (command == "infer") {
    summary = CmdInfer(cfg);
  } else if (command == "spatial") {
    summary = CmdSpatial(cfg);
  } else if (command == "jiou") {
    summary = CmdJiou(cfg);
  } else if (command == "eval") {
    summary = CmdEval(cfg);
  } else if (command == "synth") {
    summary = CmdSynth(cfg);
  } else if (command == "noise-study") {
    summary = CmdNoiseStudy(cfg);
  } else if (command == "loss") {
    summary = CmdLoss(cfg);
  } else {
    Fail(ErrorCode::kInvalidArgument, "unknown command '" + command + "'");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Log("info", "done", {{"command", command}, {"seconds", secs}});
  return summary;
}

}  // namespace labeluq
