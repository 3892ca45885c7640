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

#ifndef RESIDYN_NUMDIFF_HPP_
#define RESIDYN_NUMDIFF_HPP_

#include <string>

#include "residyn/common.hpp"

namespace residyn {

enum class DiffMethod { kFinite, kTvr };

struct DiffConfig {
  DiffMethod method = DiffMethod::kFinite;
  double alpha_tv = 1e-2;  // total-variation weight
  int iterations = 100;    // fixed-point iterations
  double delta = 1e-8;     // smoothing floor in sqrt(u'^2 + delta^2)

  void validate() const;
  std::string method_name() const;
  static DiffConfig from_name(const std::string& name);
};

// Central differences in the interior, second-order one-sided stencils at the
// two endpoints. Exact for quadratics. Needs >= 3 samples.
Vec finite_difference(const Vec& signal, double dt);

struct TvrResult {
  Vec derivative;
  bool converged = true;  // false when the iteration cap was hit while moving
  double objective = 0.0;
};

// Total-variation-regularized derivative: minimizes
//   alpha * sum sqrt((Du)^2 + delta^2) dt + 1/2 ||Au - (f - f0)||^2
// with A the cumulative trapezoid integral and D the forward difference
// quotient, by lagged-diffusivity fixed-point iteration. The objective is
// non-increasing across iterations (checked each iteration).
TvrResult tvr_differentiate(const Vec& signal, double dt, const DiffConfig& cfg);

// Dispatch on cfg.method.
Vec differentiate(const Vec& signal, double dt, const DiffConfig& cfg);

// Columnwise successive differentiation of a multi-channel series:
// level 1 = d/dt of the input, level 2 and 3 by chaining.
struct DerivativeChain {
  Mat d1;
  Mat d2;
  Mat d3;
};

DerivativeChain derive_chain(const Mat& series, double dt, const DiffConfig& cfg);

}  // namespace residyn

#endif  // RESIDYN_NUMDIFF_HPP_
