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

#ifndef RESIDYN_EXPERIMENT_HPP_
#define RESIDYN_EXPERIMENT_HPP_

#include <string>
#include <vector>

#include "residyn/control.hpp"
#include "residyn/excitation.hpp"
#include "residyn/models.hpp"

namespace residyn {

// One JSON file drives the whole pipeline; the CLI only selects the
// subcommand and may override the seed and output directory.
struct ExperimentConfig {
  std::string robot_model = "builtin:franka7_synthetic";  // or a JSON file path
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  SimConfig sim;
  MultiSineSpec excitation;
  int train_rollouts = 10;
  int test_rollouts = 10;
  double kp = 800, ki = 50, kd = 30, clip = 2;  // broadcast per joint
  DiffConfig diff;
  bool diff_specified = false;
  std::vector<MethodSpec> methods;  // in config order
  std::vector<std::string> ingest_test_files;  // optional split override

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig parse(const std::string& json_text);

  RobotModel robot() const;
  PidGains gains(int dof) const;
  // Resolved output directory (honors the RESIDYN_OUTPUT_ROOT env override).
  std::string resolved_output_dir() const;
  std::string rollout_dir() const;
  std::string dataset_dir() const;
  std::string model_dir() const;
};

// Subcommand bodies shared by the CLI and the test suites. Each throws
// ConfigError / DataError / NumericError on failure.
void cmd_simulate(const ExperimentConfig& cfg);
void cmd_build(const ExperimentConfig& cfg);
void cmd_train(const ExperimentConfig& cfg, const std::string& method_or_all);
void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_report(const ExperimentConfig& cfg);
void cmd_ingest(const ExperimentConfig& cfg, const std::string& data_dir,
                const std::string& map_path);

}  // namespace residyn

#endif  // RESIDYN_EXPERIMENT_HPP_
