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

#ifndef RESIDYN_CONTROL_HPP_
#define RESIDYN_CONTROL_HPP_

#include "residyn/robot_model.hpp"

namespace residyn {

// Diagonal joint-space PID gains plus the componentwise integral clip bound.
struct PidGains {
  Vec kp;
  Vec ki;
  Vec kd;
  Vec clip;  // bound on the integral state [rad s], > 0

  static PidGains uniform(int n, double kp, double ki, double kd, double clip);
  void validate(int dof) const;
};

struct PidResult {
  Vec tau_m;
  Vec integral;
};

// One controller update: accumulate the position error integral, clip it
// componentwise, and return gravity compensation plus the PID correction.
// Pure function; the integral state is threaded through explicitly.
PidResult pid_step(const PidGains& gains, const RobotModel& model,
                   const JointState& state, const Vec& q_star,
                   const Vec& qd_star, const Vec& integral, double dt_env);

}  // namespace residyn

#endif  // RESIDYN_CONTROL_HPP_
