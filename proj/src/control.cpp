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

#include "residyn/control.hpp"

#include "residyn/rbd.hpp"

namespace residyn {

PidGains PidGains::uniform(int n, double kp, double ki, double kd, double clip) {
  PidGains g;
  g.kp = Vec::Constant(n, kp);
  g.ki = Vec::Constant(n, ki);
  g.kd = Vec::Constant(n, kd);
  g.clip = Vec::Constant(n, clip);
  g.validate(n);
  return g;
}

void PidGains::validate(int dof) const {
  if (kp.size() != dof || ki.size() != dof || kd.size() != dof ||
      clip.size() != dof)
    throw ConfigError("pid gains: dimension mismatch with model DoF");
  if (kp.minCoeff() < 0 || ki.minCoeff() < 0 || kd.minCoeff() < 0)
    throw ConfigError("pid gains: gains must be >= 0");
  if (clip.minCoeff() <= 0) throw ConfigError("pid gains: clip bound must be > 0");
}

PidResult pid_step(const PidGains& gains, const RobotModel& model,
                   const JointState& state, const Vec& q_star,
                   const Vec& qd_star, const Vec& integral, double dt_env) {
  model.require_dof(state.q, "pid_step: q");
  model.require_dof(state.qd, "pid_step: qd");
  model.require_dof(q_star, "pid_step: q_star");
  model.require_dof(qd_star, "pid_step: qd_star");
  model.require_dof(integral, "pid_step: integral");
  gains.validate(model.dof());
  if (!state.q.allFinite() || !state.qd.allFinite() || !q_star.allFinite() ||
      !qd_star.allFinite() || !integral.allFinite())
    throw NumericError("pid_step: non-finite input");

  const Vec e = q_star - state.q;
  // Rectangular accumulation at the controller rate, then clip the state.
  const Vec accumulated = integral + e * dt_env;
  const Vec clipped = accumulated.cwiseMin(gains.clip).cwiseMax(-gains.clip);

  PidResult out;
  out.integral = clipped;
  out.tau_m = gravity_torque(model, state.q) + gains.kp.cwiseProduct(e) +
              gains.ki.cwiseProduct(clipped) +
              gains.kd.cwiseProduct(qd_star - state.qd);
  return out;
}

}  // namespace residyn
