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

#ifndef RESIDYN_SIM_HPP_
#define RESIDYN_SIM_HPP_

#include <functional>
#include <string>

#include "residyn/robot_model.hpp"

namespace residyn {

struct SimConfig {
  double dt_env = 0.001; // controller sampling period [s]
  int substeps = 1;      // integration sub-steps per controller step
  double horizon = 10.0; // rollout length [s]

  double dt_sim() const { return dt_env / substeps; }
  int env_steps() const { return static_cast<int>(std::llround(horizon / dt_env)); }
  void validate() const;
};

// Sampled reference trajectory on the environment time grid, rows k = 0..N.
struct Reference {
  Mat q_star;   // (N+1) x n
  Mat qd_star;  // (N+1) x n
};

// Recorded closed-loop trajectory: N+1 states, N torque commands, plus the
// reference it tracked. References are empty for ingested external data.
struct Rollout {
  Vec t;        // N+1 timestamps
  Mat q;        // (N+1) x n
  Mat qd;       // (N+1) x n
  Mat tau_m;    // N x n
  Mat q_star;   // (N+1) x n, may be empty
  Mat qd_star;  // (N+1) x n, may be empty

  int samples() const { return static_cast<int>(t.size()); }
  int dof() const { return static_cast<int>(q.cols()); }
  bool has_reference() const { return q_star.size() > 0; }
  void validate() const;
};

// Viscous damping torque D qd.
Vec damping_torque(const RobotModel& model, const Vec& qd);

// One semi-implicit Euler sub-step under a zero-order-held motor torque:
// velocity first with the current acceleration, then position with the
// updated velocity.
JointState step(const RobotModel& model, const JointState& state,
                const Vec& tau_m, double dt_sim);

// Controller callback: (step index k, current state) -> motor torque. The
// torque is held constant across the sub-steps of environment step k.
using Controller = std::function<Vec(int, const JointState&)>;

// Closed-loop rollout from the reference's initial state. Aborts with
// NumericError if any joint speed exceeds `blowup_qd` (divergence guard).
Rollout rollout(const RobotModel& model, const Controller& controller,
                const Reference& reference, const SimConfig& cfg,
                double blowup_qd = 100.0);

// CSV persistence: header t,q*,qd*,taum*,qstar*,qdstar*; the final row has
// empty torque fields. Values are written with shortest round-trip precision.
void save_rollout_csv(const Rollout& r, const std::string& path);
Rollout load_rollout_csv(const std::string& path);

}  // namespace residyn

#endif  // RESIDYN_SIM_HPP_
