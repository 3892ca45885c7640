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
#include "residyn/rbd.hpp"

using namespace residyn;

namespace {

Vec random_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("single pendulum matches the analytic oracle") {
  oracles::Pendulum p;
  const RobotModel model = p.model();

  SUBCASE("inertia") {
    for (double q : {0.0, 0.7, -1.3, 2.9}) {
      Mat M = inertia_matrix(model, Vec::Constant(1, q));
      CHECK(M.rows() == 1);
      CHECK(M(0, 0) == doctest::Approx(p.inertia()).epsilon(1e-12));
    }
  }

  SUBCASE("gravity torque, horizontal configuration") {
    Vec tau = gravity_torque(model, Vec::Zero(1));
    CHECK(std::abs(tau[0] - p.m * p.g * p.l) < 1e-9);
  }

  SUBCASE("gravity torque vanishes with COM below the axis") {
    Vec tau = gravity_torque(model, Vec::Constant(1, -M_PI / 2));
    CHECK(std::abs(tau[0]) < 1e-9);
  }

  SUBCASE("zero gravity means zero gravity torque") {
    RobotModel no_g = RobotModel::create("p0", {model.joint(0)}, Vec3::Zero());
    Vec tau = gravity_torque(no_g, Vec::Constant(1, 0.3));
    CHECK(tau.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("inverse and forward dynamics") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
      const double q = rng.uniform(-3, 3), qd = rng.uniform(-2, 2),
                   qdd = rng.uniform(-5, 5);
      Vec tau = inverse_dynamics(model, Vec::Constant(1, q),
                                 Vec::Constant(1, qd), Vec::Constant(1, qdd));
      CHECK(std::abs(tau[0] - p.id(q, qd, qdd)) < 1e-9);

      Vec acc = forward_dynamics(model, Vec::Constant(1, q),
                                 Vec::Constant(1, qd), Vec::Constant(1, tau[0]));
      CHECK(std::abs(acc[0] - qdd) < 1e-8);
    }
  }

  SUBCASE("free swing from horizontal") {
    Vec acc = forward_dynamics(model, Vec::Zero(1), Vec::Zero(1), Vec::Zero(1));
    CHECK(std::abs(acc[0] - p.fd(0, 0, 0)) < 1e-9);
  }
}

TEST_CASE("planar two-link arm matches the analytic oracle") {
  oracles::TwoLink tl;
  const RobotModel model = tl.model();
  Rng rng(11);

  SUBCASE("inertia at the zero configuration") {
    Mat M = inertia_matrix(model, Vec::Zero(2));
    Mat Mo = tl.inertia(Vec::Zero(2));
    CHECK((M - Mo).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("coriolis at unit joint rates") {
    Vec q(2);
    q << 0.4, -1.1;
    Vec qd = Vec::Ones(2);
    Vec tc = coriolis_torque(model, q, qd);
    Vec tco = tl.coriolis(q, qd);
    CHECK((tc - tco).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("all five operations on random states") {
    for (int i = 0; i < 200; ++i) {
      Vec q = random_vec(rng, 2, -3, 3);
      Vec qd = random_vec(rng, 2, -2, 2);
      Vec qdd = random_vec(rng, 2, -5, 5);

      CHECK((inertia_matrix(model, q) - tl.inertia(q)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((gravity_torque(model, q) - tl.gravity(q)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((coriolis_torque(model, q, qd) - tl.coriolis(q, qd)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((inverse_dynamics(model, q, qd, qdd) - tl.id(q, qd, qdd)).cwiseAbs().maxCoeff() < 1e-9);

      Vec tau = random_vec(rng, 2, -10, 10);
      CHECK((forward_dynamics(model, q, qd, tau) - tl.fd(q, qd, tau)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("rbd invariants on the 7-DoF model") {
  const RobotModel model = make_franka7_synthetic();
  Rng rng(42);
  const int n = model.dof();

  SUBCASE("M symmetric positive definite") {
    for (int i = 0; i < 200; ++i) {
      Vec q = random_vec(rng, n, -2.8, 2.8);
      Mat M = inertia_matrix(model, q);
      CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-9);
      Eigen::SelfAdjointEigenSolver<Mat> es(M);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }

  SUBCASE("inverse dynamics equals the assembled regressor sum") {
    for (int i = 0; i < 1000; ++i) {
      Vec q = random_vec(rng, n, -2.8, 2.8);
      Vec qd = random_vec(rng, n, -2.5, 2.5);
      Vec qdd = random_vec(rng, n, -5, 5);
      Vec lhs = inverse_dynamics(model, q, qd, qdd);
      Vec rhs = inertia_matrix(model, q) * qdd + coriolis_torque(model, q, qd) +
                gravity_torque(model, q);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("forward/inverse round trip") {
    for (int i = 0; i < 1000; ++i) {
      Vec q = random_vec(rng, n, -2.8, 2.8);
      Vec qd = random_vec(rng, n, -2.5, 2.5);
      Vec qdd = random_vec(rng, n, -5, 5);
      Vec tau = inverse_dynamics(model, q, qd, qdd);
      Vec back = forward_dynamics(model, q, qd, tau);
      CHECK((back - qdd).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  SUBCASE("statics: inverse dynamics at rest is the gravity torque") {
    Vec q = random_vec(rng, n, -2, 2);
    Vec z = Vec::Zero(n);
    CHECK((inverse_dynamics(model, q, z, z) - gravity_torque(model, q)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("zero gravity: inverse dynamics probes M columns") {
    RobotModel no_g = RobotModel::create("m0", model.joints(), Vec3::Zero());
    Vec q = random_vec(rng, n, -2, 2);
    Mat M = inertia_matrix(no_g, q);
    Vec z = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      Vec ej = Vec::Zero(n);
      ej[j] = 1.0;
      CHECK((inverse_dynamics(no_g, q, z, ej) - M.col(j)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("coriolis torque is quadratic in velocity") {
    for (int i = 0; i < 50; ++i) {
      Vec q = random_vec(rng, n, -2.8, 2.8);
      Vec qd = random_vec(rng, n, -2, 2);
      Vec t1 = coriolis_torque(model, q, qd);
      Vec t2 = coriolis_torque(model, q, 2 * qd);
      CHECK((t2 - 4 * t1).cwiseAbs().maxCoeff() < 1e-9);
    }
    Vec q = random_vec(rng, n, -2.8, 2.8);
    CHECK(coriolis_torque(model, q, Vec::Zero(n)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("gravity compensation holds the arm still") {
    Vec q = random_vec(rng, n, -2, 2);
    Vec qd = Vec::Zero(n);
    Vec acc = forward_dynamics(model, q, qd, gravity_torque(model, q));
    CHECK(acc.cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("dimension mismatches are rejected") {
    CHECK_THROWS_AS(inertia_matrix(model, Vec::Zero(3)), ConfigError);
    CHECK_THROWS_AS(gravity_torque(model, Vec::Zero(8)), ConfigError);
    CHECK_THROWS_AS(
        inverse_dynamics(model, Vec::Zero(n), Vec::Zero(n), Vec::Zero(2)),
        ConfigError);
  }
}

TEST_CASE("robot model loader validates invariants") {
  const RobotModel model = make_franka7_synthetic();
  const std::string text = robot_model_to_json(model);

  SUBCASE("round trip through JSON") {
    RobotModel back = parse_robot_model(text);
    CHECK(back.dof() == model.dof());
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      Vec q = random_vec(rng, model.dof(), -2, 2);
      CHECK((gravity_torque(back, q) - gravity_torque(model, q)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((inertia_matrix(back, q) - inertia_matrix(model, q)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("rejects a non-unit axis, naming the joint") {
    auto joints = model.joints();
    joints[3].axis = Vec3(0, 0, 2);
    try {
      RobotModel::create("bad", joints);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("joint 3") != std::string::npos);
    }
  }

  SUBCASE("rejects non-positive mass, damping, and inverted limits") {
    auto joints = model.joints();
    joints[0].mass = 0.0;
    CHECK_THROWS_AS(RobotModel::create("bad", joints), ConfigError);
    joints = model.joints();
    joints[5].damping = -1.0;
    CHECK_THROWS_AS(RobotModel::create("bad", joints), ConfigError);
    joints = model.joints();
    joints[2].q_min = 2.0;
    joints[2].q_max = -2.0;
    CHECK_THROWS_AS(RobotModel::create("bad", joints), ConfigError);
  }

  SUBCASE("rejects an indefinite inertia matrix") {
    auto joints = model.joints();
    joints[1].inertia = Vec3(-0.1, 0.1, 0.1).asDiagonal();
    CHECK_THROWS_AS(RobotModel::create("bad", joints), ConfigError);
  }

  SUBCASE("missing fields are config errors") {
    CHECK_THROWS_AS(parse_robot_model("{}"), ConfigError);
    CHECK_THROWS_AS(parse_robot_model("not json"), ConfigError);
  }
}
