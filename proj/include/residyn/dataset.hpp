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

#ifndef RESIDYN_DATASET_HPP_
#define RESIDYN_DATASET_HPP_

#include <string>
#include <vector>

#include "residyn/numdiff.hpp"
#include "residyn/rbd.hpp"
#include "residyn/sim.hpp"

namespace residyn {

// Fixed feature column layout: [q | qd | qdd | qddd | tau_i | tau_c | tau_g],
// each group n columns wide (7n total). The registry names are the frozen
// contract shared by feature building, training, and reporting.
std::vector<std::string> feature_registry(int dof);

struct FeatureLayout {
  int dof;
  int q() const { return 0; }
  int qd() const { return dof; }
  int qdd() const { return 2 * dof; }
  int qddd() const { return 3 * dof; }
  int tau_i() const { return 4 * dof; }
  int tau_c() const { return 5 * dof; }
  int tau_g() const { return 6 * dof; }
  int width() const { return 7 * dof; }
};

enum class TargetKind { kMotor, kResidual };

struct TargetMatrix {
  Mat Y;
  TargetKind kind = TargetKind::kMotor;
};

struct BuiltFeatures {
  Mat X;
  TargetMatrix targets;  // recorded motor torques
};

// Derives qdd and qddd by successively differentiating the recorded joint
// velocities, evaluates the three torque regressors rowwise, and drops the
// final state row (no torque is recorded for it).
BuiltFeatures build_features(const Rollout& rollout, const RobotModel& model,
                             const DiffConfig& diff);

// tau_m - (tau_i + tau_c + tau_g), with the rigid-body part taken from the
// feature columns themselves. Rejects targets that are already residual.
TargetMatrix residual_targets(const TargetMatrix& motor, const Mat& X, int dof);

struct DataSource {
  std::string file;
  std::string hash;
  std::string split;  // "train" | "test"
};

struct Dataset {
  Mat X_train, X_test;
  TargetMatrix train_targets, test_targets;
  std::vector<std::string> feature_names;
  int dof = 0;
  // Provenance
  std::string model_hash;
  std::string diff_method;
  std::vector<DataSource> sources;
  std::string hash;

  void compute_hash();
};

Dataset assemble_dataset(const std::vector<Rollout>& train,
                         const std::vector<Rollout>& test, const RobotModel& model,
                         const DiffConfig& diff,
                         const std::vector<DataSource>& sources);

// Directory persistence: X_train.csv, Y_train.csv, X_test.csv, Y_test.csv
// (headered, full precision) plus meta.json with provenance and the registry.
void save_dataset(const Dataset& ds, const std::string& directory);
Dataset load_dataset(const std::string& directory);

// Column map for external delimited files: entries are either 0-based column
// indices or header names. qd is optional (derived when absent).
struct ColumnMap {
  std::string t;
  std::vector<std::string> q;
  std::vector<std::string> qd;    // may be empty
  std::vector<std::string> taum;

  static ColumnMap from_json(const std::string& text);
};

// Reads every delimited file in the directory (lexicographic order) into
// normalized rollouts. Validates uniform sampling (1% jitter bound) and
// finiteness; missing columns are reported by name.
std::vector<std::pair<std::string, Rollout>> ingest_external(
    const std::string& directory, const ColumnMap& map, const RobotModel& model,
    const DiffConfig& diff);

}  // namespace residyn

#endif  // RESIDYN_DATASET_HPP_
