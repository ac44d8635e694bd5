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

// Command-line front end for the labeluq pipeline.
//
//   labeluq <command> [--config PATH] [--seed N] [--workers N] [--resolution M]
//
// Exit codes: 0 ok, 1 internal error, 2 input error.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "labeluq/labeluq.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

struct Options {
  std::string config_path;
  std::optional<unsigned long long> seed;
  std::optional<int> workers;
  std::optional<double> resolution;
  std::optional<std::string> output_dir;
};

void AddCommonOptions(CLI::App* cmd, Options* opts) {
  cmd->add_option("--config", opts->config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts->seed, "random seed (overrides the config)");
  cmd->add_option("--workers", opts->workers, "worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--resolution", opts->resolution, "grid resolution in m (overrides the config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--output-dir", opts->output_dir, "output directory (overrides the config)");
}

int Run(const std::string& command, const Options& opts) {
  std::string config = "{}";
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) {
      std::fprintf(stderr, "cannot read %s\n", opts.config_path.c_str());
      return kExitInput;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    config = ss.str();
  }
  nlohmann::json overrides = nlohmann::json::object();
  if (opts.seed) overrides["seed"] = *opts.seed;
  if (opts.workers) overrides["workers"] = *opts.workers;
  if (opts.resolution) overrides["resolution"] = *opts.resolution;
  if (opts.output_dir) overrides["output_dir"] = *opts.output_dir;

  char* summary = nullptr;
  const lu_status st =
      lu_pipeline_run(command.c_str(), config.c_str(), overrides.dump().c_str(), &summary);
  if (st != LU_OK) {
    nlohmann::json err = {{"level", "error"},
                          {"command", command},
                          {"status", lu_status_name(st)},
                          {"msg", lu_last_error()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return st == LU_INTERNAL_ERROR ? kExitInternal : kExitInput;
  }
  std::printf("%s\n", summary);
  lu_string_free(summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label uncertainty for LiDAR bounding boxes"};
  app.set_version_flag("--version", std::string(lu_version()));
  app.require_subcommand(1);

  Options opts;
  const std::pair<const char*, const char*> commands[] = {
      {"infer", "infer label posteriors for every labelled frame"},
      {"spatial", "render spatial uncertainty grids and heatmaps"},
      {"jiou", "JIoU between two grid files"},
      {"eval", "evaluate detections under IoU, JIoU and JIoU-Ratio"},
      {"synth", "generate a synthetic LiDAR dataset"},
      {"noise-study", "normalized JIoU-GT under increasing label noise"},
      {"loss", "per-object label variances for loss training"},
  };
  for (const auto& [name, help] : commands) AddCommonOptions(app.add_subcommand(name, help), &opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }
  return Run(app.get_subcommands().front()->get_name(), opts);
}
