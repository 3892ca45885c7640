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
//
// Hand-coded closed-form dynamics for a single pendulum and a planar 2-link
// arm. These are independent of the library's recursive algorithms and serve
// as the ground-truth oracles for the rbd tests and the acceptance suite.

#ifndef RESIDYN_TESTS_ORACLES_HPP_
#define RESIDYN_TESTS_ORACLES_HPP_

#include "residyn/robot_model.hpp"

namespace residyn::oracles {

// Revolute joint about z, gravity (0,-g,0), COM at (l,0,0): the textbook
// pendulum with angle measured from the +x axis.
struct Pendulum {
  double m = 1.7;
  double l = 0.4;
  double izz = 0.05;
  double g = 9.81;

  double inertia() const { return m * l * l + izz; }
  double gravity(double q) const { return m * g * l * std::cos(q); }
  double id(double q, double qd, double qdd) const {
    (void)qd;
    return inertia() * qdd + gravity(q);
  }
  double fd(double q, double qd, double tau) const {
    (void)qd;
    return (tau - gravity(q)) / inertia();
  }

  RobotModel model() const {
    Joint j;
    j.axis = Vec3::UnitZ();
    j.origin_xyz = Vec3::Zero();
    j.origin_rot = Mat3::Identity();
    j.mass = m;
    j.com = Vec3(l, 0, 0);
    j.inertia = Vec3(0.01, 0.01, izz).asDiagonal();
    j.damping = 0.5;
    j.q_min = -3.0;
    j.q_max = 3.0;
    j.qd_max = 10.0;
    return RobotModel::create("pendulum", {j}, Vec3(0, -g, 0));
  }
};

// Planar 2-link arm, both joints about z, gravity (0,-g,0). Closed forms from
// the standard Lagrangian derivation with angles relative to the parent link.
struct TwoLink {
  double m1 = 1.4, m2 = 0.9;
  double l1 = 0.5;
  double lc1 = 0.22, lc2 = 0.31;
  double i1 = 0.04, i2 = 0.02;
  double g = 9.81;

  Mat inertia(const Vec& q) const {
    const double c2 = std::cos(q[1]);
    Mat M(2, 2);
    M(0, 0) = m1 * lc1 * lc1 + i1 + i2 +
              m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * c2);
    M(0, 1) = M(1, 0) = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
    M(1, 1) = m2 * lc2 * lc2 + i2;
    return M;
  }

  Vec coriolis(const Vec& q, const Vec& qd) const {
    const double h = m2 * l1 * lc2 * std::sin(q[1]);
    Vec tau(2);
    tau[0] = -h * (2 * qd[0] * qd[1] + qd[1] * qd[1]);
    tau[1] = h * qd[0] * qd[0];
    return tau;
  }

  Vec gravity(const Vec& q) const {
    Vec tau(2);
    tau[0] = (m1 * lc1 + m2 * l1) * g * std::cos(q[0]) +
             m2 * lc2 * g * std::cos(q[0] + q[1]);
    tau[1] = m2 * lc2 * g * std::cos(q[0] + q[1]);
    return tau;
  }

  Vec id(const Vec& q, const Vec& qd, const Vec& qdd) const {
    return inertia(q) * qdd + coriolis(q, qd) + gravity(q);
  }

  Vec fd(const Vec& q, const Vec& qd, const Vec& tau) const {
    return inertia(q).ldlt().solve(tau - coriolis(q, qd) - gravity(q));
  }

  RobotModel model() const {
    Joint j1;
    j1.axis = Vec3::UnitZ();
    j1.origin_xyz = Vec3::Zero();
    j1.mass = m1;
    j1.com = Vec3(lc1, 0, 0);
    j1.inertia = Vec3(0.02, 0.02, i1).asDiagonal();
    j1.damping = 0.3;
    j1.q_min = -3.0;
    j1.q_max = 3.0;
    j1.qd_max = 10.0;

    Joint j2 = j1;
    j2.origin_xyz = Vec3(l1, 0, 0);
    j2.mass = m2;
    j2.com = Vec3(lc2, 0, 0);
    j2.inertia = Vec3(0.01, 0.01, i2).asDiagonal();
    j2.damping = 0.2;

    return RobotModel::create("two_link", {j1, j2}, Vec3(0, -g, 0));
  }
};

}  // namespace residyn::oracles

#endif  // RESIDYN_TESTS_ORACLES_HPP_
