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

#ifndef RESIDYN_ROBOT_MODEL_HPP_
#define RESIDYN_ROBOT_MODEL_HPP_

#include <string>
#include <vector>

#include "residyn/common.hpp"

namespace residyn {

// One revolute joint plus the rigid link it drives. The fixed transform places
// the joint frame in the parent link frame; the rotation axis is expressed in
// the joint frame and is invariant under the joint rotation.
struct Joint {
  Vec3 axis = Vec3::UnitZ();        // unit rotation axis, joint frame
  Mat3 origin_rot = Mat3::Identity();  // joint frame orientation in parent frame
  Vec3 origin_xyz = Vec3::Zero();   // joint frame origin in parent frame [m]
  double mass = 1.0;                // link mass [kg]
  Vec3 com = Vec3::Zero();          // link center of mass, link frame [m]
  Mat3 inertia = Mat3::Identity();  // rotational inertia about COM [kg m^2]
  double damping = 0.0;             // viscous coefficient d_i > 0
  double q_min = -3.0, q_max = 3.0; // position limits [rad]
  double qd_max = 2.5;              // velocity limit [rad/s]
};

// Immutable serial-chain description. Construct via the factory so the type
// invariants (unit axes, positive masses, SPD-compatible inertias, positive
// damping, ordered limits) hold for every instance in circulation.
class RobotModel {
 public:
  static RobotModel create(std::string name, std::vector<Joint> joints,
                           Vec3 gravity = Vec3(0, 0, -9.81));

  int dof() const { return static_cast<int>(joints_.size()); }
  const std::string& name() const { return name_; }
  const Vec3& gravity() const { return gravity_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const Joint& joint(int i) const { return joints_[static_cast<size_t>(i)]; }

  Vec damping_diagonal() const;
  Vec q_min() const;
  Vec q_max() const;
  Vec qd_max() const;

  // Constant 6x6 spatial inertia of link i in its own frame.
  const Eigen::Matrix<double, 6, 6>& spatial_inertia(int i) const {
    return spatial_inertias_[static_cast<size_t>(i)];
  }

  // Provenance hash over the full numeric description.
  std::uint64_t hash() const { return hash_; }

  void require_dof(const Eigen::Ref<const Vec>& v, const char* what) const;

 private:
  RobotModel() = default;

  std::string name_;
  Vec3 gravity_ = Vec3(0, 0, -9.81);
  std::vector<Joint> joints_;
  std::vector<Eigen::Matrix<double, 6, 6>> spatial_inertias_;
  std::uint64_t hash_ = 0;
};

struct JointState {
  Vec q;
  Vec qd;
};

// Rz(yaw) * Ry(pitch) * Rx(roll), the fixed-frame rpy convention used by the
// model file format.
Mat3 rotation_from_rpy(const Vec3& rpy);

// Loads the JSON robot description. Validation failures name the offending
// joint index. Throws ConfigError.
RobotModel load_robot_model(const std::string& path);
RobotModel parse_robot_model(const std::string& json_text);

// Serializes back to the same JSON schema accepted by the loader.
std::string robot_model_to_json(const RobotModel& model);

// Built-in 7-DoF serial arm used by the simulated experiments: alternating
// vertical/horizontal revolute axes, masses 0.5-4 kg, link offsets 0.1-0.35 m,
// damping diagonal (6.75, 6.00, 5.25, 4.50, 3.75, 3.00, 2.25), limits +-2.8 rad
// and +-2.5 rad/s on every joint.
RobotModel make_franka7_synthetic();

}  // namespace residyn

#endif  // RESIDYN_ROBOT_MODEL_HPP_
