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

#ifndef RESIDYN_RBD_HPP_
#define RESIDYN_RBD_HPP_

#include "residyn/robot_model.hpp"

namespace residyn {

// Joint-space inertia matrix M(q) via the composite rigid body algorithm.
// Symmetric positive definite for every valid model and configuration.
Mat inertia_matrix(const RobotModel& model, const Vec& q);

// tau_g(q): torque holding the chain static against gravity.
Vec gravity_torque(const RobotModel& model, const Vec& q);

// tau_c = C(q, qd) qd. Computed as the velocity-dependent part of the inverse
// dynamics (gravity cancels in the subtraction).
Vec coriolis_torque(const RobotModel& model, const Vec& q, const Vec& qd);

// Recursive Newton-Euler: tau = M(q) qdd + C(q, qd) qd + tau_g(q).
Vec inverse_dynamics(const RobotModel& model, const Vec& q, const Vec& qd,
                     const Vec& qdd);

// qdd = M(q)^{-1} (tau_eff - C qd - tau_g), dense symmetric solve.
// Throws NumericError if M is not numerically positive definite.
Vec forward_dynamics(const RobotModel& model, const Vec& q, const Vec& qd,
                     const Vec& tau_eff);

}  // namespace residyn

#endif  // RESIDYN_RBD_HPP_
