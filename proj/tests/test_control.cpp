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

#include <doctest.h>

#include "oracles.hpp"
#include "residyn/control.hpp"
#include "residyn/rbd.hpp"

using namespace residyn;

TEST_CASE("pid with zero error outputs pure gravity compensation") {
  const RobotModel model = make_franka7_synthetic();
  const int n = model.dof();
  const PidGains gains = PidGains::uniform(n, 200, 20, 20, 2);

  Vec q = Vec::Constant(n, 0.4);
  JointState state{q, Vec::Zero(n)};
  auto res = pid_step(gains, model, state, q, Vec::Zero(n), Vec::Zero(n), 0.01);
  CHECK((res.tau_m - gravity_torque(model, q)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(res.integral.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pid gains act linearly on unit errors") {
  const RobotModel model = make_franka7_synthetic();
  const int n = model.dof();
  PidGains gains = PidGains::uniform(n, 150, 0, 30, 2);

  Vec q = Vec::Constant(n, -0.2);
  JointState state{q, Vec::Zero(n)};
  // Unit position and velocity errors.
  auto res = pid_step(gains, model, state, q + Vec::Ones(n), Vec::Ones(n),
                      Vec::Zero(n), 0.01);
  Vec expected = gains.kp + gains.kd;
  CHECK((res.tau_m - gravity_torque(model, q) - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("integral accumulates linearly then saturates exactly at the clip") {
  // Hand-simulated scalar trace: persistent error e = 0.5, dt = 0.1, clip 2.
  // The integral grows by 0.05 per step and must hit the bound at step 40.
  oracles::Pendulum p;
  const RobotModel model = p.model();
  PidGains gains = PidGains::uniform(1, 0, 1, 0, 2.0);

  const double e = 0.5, dt = 0.1;
  JointState state{Vec::Zero(1), Vec::Zero(1)};
  Vec q_star = Vec::Constant(1, e);
  Vec integral = Vec::Zero(1);
  for (int step = 1; step <= 100; ++step) {
    auto res = pid_step(gains, model, state, q_star, Vec::Zero(1), integral, dt);
    integral = res.integral;
    const double expected = std::min(e * dt * step, 2.0);
    CHECK(integral[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(integral[0]) <= 2.0);
  }
  CHECK(integral[0] == doctest::Approx(2.0));

  // Symmetric saturation on the negative side.
  integral = Vec::Zero(1);
  q_star = Vec::Constant(1, -e);
  for (int step = 0; step < 100; ++step)
    integral = pid_step(gains, model, state, q_star, Vec::Zero(1), integral, dt).integral;
  CHECK(integral[0] == doctest::Approx(-2.0));
}

TEST_CASE("integral clip bound holds under random inputs") {
  const RobotModel model = make_franka7_synthetic();
  const int n = model.dof();
  PidGains gains = PidGains::uniform(n, 100, 50, 10, 0.7);
  Rng rng(5);

  Vec integral = Vec::Zero(n);
  for (int i = 0; i < 200; ++i) {
    Vec q(n), q_star(n);
    for (int j = 0; j < n; ++j) {
      q[j] = rng.uniform(-2, 2);
      q_star[j] = rng.uniform(-2, 2);
    }
    JointState state{q, Vec::Zero(n)};
    integral = pid_step(gains, model, state, q_star, Vec::Zero(n), integral, 0.05).integral;
    CHECK(integral.cwiseAbs().maxCoeff() <= 0.7 + 1e-15);
  }
}

TEST_CASE("zero gains reduce the controller to gravity compensation") {
  const RobotModel model = make_franka7_synthetic();
  const int n = model.dof();
  PidGains gains = PidGains::uniform(n, 0, 0, 0, 1);
  Rng rng(9);
  Vec q(n), qd(n);
  for (int j = 0; j < n; ++j) {
    q[j] = rng.uniform(-2, 2);
    qd[j] = rng.uniform(-1, 1);
  }
  JointState state{q, qd};
  auto res = pid_step(gains, model, state, Vec::Zero(n), Vec::Zero(n),
                      Vec::Zero(n), 0.01);
  CHECK((res.tau_m - gravity_torque(model, q)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pid rejects invalid gains and non-finite inputs") {
  const RobotModel model = make_franka7_synthetic();
  const int n = model.dof();
  CHECK_THROWS_AS(PidGains::uniform(n, -1, 0, 0, 1), ConfigError);
  CHECK_THROWS_AS(PidGains::uniform(n, 1, 0, 0, 0), ConfigError);

  PidGains gains = PidGains::uniform(n, 1, 1, 1, 1);
  Vec bad = Vec::Zero(n);
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  JointState state{bad, Vec::Zero(n)};
  CHECK_THROWS_AS(pid_step(gains, model, state, Vec::Zero(n), Vec::Zero(n),
                           Vec::Zero(n), 0.01),
                  NumericError);
}
