// Copyright 2026 The residyn Authors
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

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "residyn/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"identify interpretable hybrid robot-dynamics models from motion data"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "experiment config JSON")->required();
    cmd->add_option("--output", output_override, "override the config output_dir");
    cmd->add_option("--seed", seed_override, "override the config master seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "generate closed-loop rollouts");
  CLI::App* build = app.add_subcommand("build", "build the feature dataset from rollouts");
  CLI::App* train = app.add_subcommand("train", "fit one or all configured methods");
  CLI::App* evaluate = app.add_subcommand("evaluate", "score trained models on both splits");
  CLI::App* report = app.add_subcommand("report", "write report.json and report.txt");
  CLI::App* ingest = app.add_subcommand("ingest", "build a dataset from external trajectories");

  std::string method = "all";
  train->add_option("--method", method, "method name or 'all'")->default_val("all");

  std::string ingest_dir, ingest_map;
  ingest->add_option("--dir", ingest_dir, "directory of delimited trajectory files")
      ->required();
  ingest->add_option("--map", ingest_map, "column-map JSON file")->required();

  for (CLI::App* cmd : {simulate, build, train, evaluate, report, ingest})
    add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    residyn::ExperimentConfig cfg = residyn::ExperimentConfig::load(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (seed_given) cfg.seed = seed_override;

    if (simulate->parsed()) {
      residyn::cmd_simulate(cfg);
    } else if (build->parsed()) {
      residyn::cmd_build(cfg);
    } else if (train->parsed()) {
      residyn::cmd_train(cfg, method);
    } else if (evaluate->parsed()) {
      residyn::cmd_evaluate(cfg);
    } else if (report->parsed()) {
      residyn::cmd_report(cfg);
    } else if (ingest->parsed()) {
      residyn::cmd_ingest(cfg, ingest_dir, ingest_map);
    }
  } catch (const residyn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const residyn::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const residyn::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
