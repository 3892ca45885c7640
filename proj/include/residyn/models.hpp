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

#ifndef RESIDYN_MODELS_HPP_
#define RESIDYN_MODELS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "residyn/dataset.hpp"
#include "residyn/mlp.hpp"
#include "residyn/sparsereg.hpp"
#include "residyn/symreg.hpp"

namespace residyn {

enum class MethodKind { kSr, kSindy, kRSr, kRSindy, kRSindySr, kNn, kRNn };

std::string method_name(MethodKind kind);
MethodKind method_from_name(const std::string& name);
const std::vector<MethodKind>& all_methods();

struct MethodSpec {
  MethodKind kind = MethodKind::kRSindy;
  SymRegConfig sym;     // sr, r-sr, and the second stage of r-sindy-sr
  StlsqOptions sparse;  // sindy, r-sindy, r-sindy-sr stage 1
  TrainConfig nn;       // nn, r-nn
  std::uint64_t seed = 0;

  void validate() const;
};

// A fitted method. Residual-flagged kinds add tau_rbd (reconstructed from the
// feature columns) to their engine output; r-sindy-sr carries both stages.
struct TrainedModel {
  MethodKind kind = MethodKind::kRSindy;
  bool residual = false;
  std::vector<Expression> expressions;  // sr kinds, one per joint
  std::optional<SparseLinearModel> sparse;
  std::vector<Expression> stage2;       // r-sindy-sr second layer
  std::optional<Mlp> net;
  std::vector<std::string> feature_names;
  int dof = 0;
  std::string dataset_hash;
};

TrainedModel train_method(const MethodSpec& spec, const Dataset& dataset);

// Registry-checked prediction on a feature matrix with the given column
// names. Throws ConfigError on a registry mismatch.
Mat predict(const TrainedModel& model, const Eigen::Ref<const Mat>& X,
            const std::vector<std::string>& feature_names);

struct RelativeRmse {
  Vec value;                    // per joint
  std::vector<bool> degenerate; // true where RMS(target) == 0 (unnormalized)
};

// RMS of the prediction error over RMS of the target, per joint.
RelativeRmse relative_rmse(const Eigen::Ref<const Mat>& predicted,
                           const Eigen::Ref<const Mat>& target);

// Closed-form equation strings for the interpretable methods (one per joint);
// empty for the network baselines.
std::vector<std::string> equations(const TrainedModel& model);

struct Report {
  std::string json;
  std::string text;
};

// Per-joint train/test relative RMSE for every trained model plus rendered
// equations; best-per-joint marked at 3-decimal resolution.
Report report(const std::vector<TrainedModel>& models, const Dataset& dataset);

std::string trained_model_to_json(const TrainedModel& model);
TrainedModel trained_model_from_json(const std::string& text);

}  // namespace residyn

#endif  // RESIDYN_MODELS_HPP_
