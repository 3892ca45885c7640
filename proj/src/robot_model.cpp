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

#include "residyn/robot_model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace residyn {

using json = nlohmann::ordered_json;

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Eigen::Matrix<double, 6, 6> make_spatial_inertia(const Joint& j) {
  const Mat3 cx = skew(j.com);
  Eigen::Matrix<double, 6, 6> I;
  I.topLeftCorner<3, 3>() = j.inertia - j.mass * cx * cx;
  I.topRightCorner<3, 3>() = j.mass * cx;
  I.bottomLeftCorner<3, 3>() = -j.mass * cx;
  I.bottomRightCorner<3, 3>() = j.mass * Mat3::Identity();
  return I;
}

void validate_joint(const Joint& j, int index) {
  const auto fail = [index](const std::string& what) {
    throw ConfigError("robot model: joint " + std::to_string(index) + ": " + what);
  };
  if (std::abs(j.axis.norm() - 1.0) > 1e-9) fail("axis is not unit norm");
  if (!(j.mass > 0.0)) fail("mass must be > 0");
  if ((j.inertia - j.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    fail("inertia matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(j.inertia);
  if (es.eigenvalues().minCoeff() < -1e-12)
    fail("inertia matrix is not positive semidefinite");
  if (!(j.damping > 0.0)) fail("damping must be > 0");
  if (!(j.q_min < j.q_max)) fail("q_min must be < q_max");
  if (!(j.qd_max > 0.0)) fail("qd_max must be > 0");
}

Vec3 get_vec3(const json& arr, const std::string& ctx) {
  if (!arr.is_array() || arr.size() != 3)
    throw ConfigError("robot model: " + ctx + " must be a 3-array");
  return Vec3(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

}  // namespace

RobotModel RobotModel::create(std::string name, std::vector<Joint> joints,
                              Vec3 gravity) {
  if (joints.empty()) throw ConfigError("robot model: needs at least one joint");
  for (size_t i = 0; i < joints.size(); ++i)
    validate_joint(joints[i], static_cast<int>(i));

  RobotModel m;
  m.name_ = std::move(name);
  m.gravity_ = gravity;
  m.joints_ = std::move(joints);
  m.spatial_inertias_.reserve(m.joints_.size());
  for (const Joint& j : m.joints_) m.spatial_inertias_.push_back(make_spatial_inertia(j));

  std::ostringstream os;
  os.precision(17);
  os << m.name_ << '|' << m.gravity_.transpose();
  for (const Joint& j : m.joints_) {
    os << '|' << j.axis.transpose() << ';' << j.origin_xyz.transpose() << ';'
       << j.origin_rot << ';' << j.mass << ';' << j.com.transpose() << ';'
       << j.inertia << ';' << j.damping << ';' << j.q_min << ';' << j.q_max
       << ';' << j.qd_max;
  }
  m.hash_ = fnv1a(os.str());
  return m;
}

Vec RobotModel::damping_diagonal() const {
  Vec d(dof());
  for (int i = 0; i < dof(); ++i) d[i] = joints_[static_cast<size_t>(i)].damping;
  return d;
}

Vec RobotModel::q_min() const {
  Vec v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<size_t>(i)].q_min;
  return v;
}

Vec RobotModel::q_max() const {
  Vec v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<size_t>(i)].q_max;
  return v;
}

Vec RobotModel::qd_max() const {
  Vec v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<size_t>(i)].qd_max;
  return v;
}

void RobotModel::require_dof(const Eigen::Ref<const Vec>& v, const char* what) const {
  if (v.size() != dof())
    throw ConfigError(std::string(what) + ": expected dimension " +
                      std::to_string(dof()) + ", got " + std::to_string(v.size()));
}

Mat3 rotation_from_rpy(const Vec3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

RobotModel parse_robot_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("robot model: invalid JSON: ") + e.what());
  }
  if (!doc.contains("name") || !doc.contains("joints"))
    throw ConfigError("robot model: missing required field 'name' or 'joints'");

  Vec3 gravity(0, 0, -9.81);
  if (doc.contains("gravity")) gravity = get_vec3(doc["gravity"], "gravity");

  std::vector<Joint> joints;
  int idx = 0;
  for (const auto& jj : doc["joints"]) {
    const std::string ctx = "joints[" + std::to_string(idx) + "]";
    Joint j;
    try {
      j.axis = get_vec3(jj.at("axis"), ctx + ".axis");
      j.origin_xyz = get_vec3(jj.at("origin_xyz"), ctx + ".origin_xyz");
      j.origin_rot = rotation_from_rpy(get_vec3(jj.at("origin_rpy"), ctx + ".origin_rpy"));
      j.mass = jj.at("mass").get<double>();
      j.com = get_vec3(jj.at("com"), ctx + ".com");
      const auto& in = jj.at("inertia");
      if (!in.is_array() || in.size() != 6)
        throw ConfigError("robot model: " + ctx +
                          ".inertia must be [ixx, ixy, ixz, iyy, iyz, izz]");
      const double ixx = in[0].get<double>(), ixy = in[1].get<double>(),
                   ixz = in[2].get<double>(), iyy = in[3].get<double>(),
                   iyz = in[4].get<double>(), izz = in[5].get<double>();
      j.inertia << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
      j.damping = jj.at("damping").get<double>();
      j.q_min = jj.at("q_min").get<double>();
      j.q_max = jj.at("q_max").get<double>();
      j.qd_max = jj.at("qd_max").get<double>();
    } catch (const json::exception& e) {
      throw ConfigError("robot model: " + ctx + ": " + e.what());
    }
    joints.push_back(j);
    ++idx;
  }
  return RobotModel::create(doc["name"].get<std::string>(), std::move(joints), gravity);
}

RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("robot model: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_robot_model(buf.str());
}

std::string robot_model_to_json(const RobotModel& model) {
  json doc;
  doc["name"] = model.name();
  doc["gravity"] = {model.gravity().x(), model.gravity().y(), model.gravity().z()};
  json joints = json::array();
  for (const Joint& j : model.joints()) {
    json jj;
    jj["axis"] = {j.axis.x(), j.axis.y(), j.axis.z()};
    jj["origin_xyz"] = {j.origin_xyz.x(), j.origin_xyz.y(), j.origin_xyz.z()};
    // Recover rpy from the rotation matrix (ZYX euler order).
    const Vec3 ea = j.origin_rot.eulerAngles(2, 1, 0);
    jj["origin_rpy"] = {ea[2], ea[1], ea[0]};
    jj["mass"] = j.mass;
    jj["com"] = {j.com.x(), j.com.y(), j.com.z()};
    jj["inertia"] = {j.inertia(0, 0), j.inertia(0, 1), j.inertia(0, 2),
                     j.inertia(1, 1), j.inertia(1, 2), j.inertia(2, 2)};
    jj["damping"] = j.damping;
    jj["q_min"] = j.q_min;
    jj["q_max"] = j.q_max;
    jj["qd_max"] = j.qd_max;
    joints.push_back(jj);
  }
  doc["joints"] = joints;
  return doc.dump(2);
}

RobotModel make_franka7_synthetic() {
  // Alternating z/y axes so the base joint feels no gravity torque (vertical
  // axis) while every other joint does for generic configurations.
  const double masses[7] = {3.8, 3.2, 2.7, 2.2, 1.8, 1.5, 0.9};
  const double damping[7] = {6.75, 6.00, 5.25, 4.50, 3.75, 3.00, 2.25};
  const double offsets[7] = {0.20, 0.30, 0.25, 0.30, 0.25, 0.15, 0.10};
  const double com_along[7] = {0.10, 0.16, 0.12, 0.15, 0.12, 0.10, 0.08};
  // Rotational inertia about the joint axis includes the reflected actuator
  // inertia of a geared drive (rotor inertia times gear ratio squared), which
  // dominates the link's own inertia and keeps the closed loop stable at the
  // 100 Hz controller rate.
  const double i_axis[7] = {0.40, 0.38, 0.36, 0.34, 0.32, 0.31, 0.30};
  const double i_lat[7] = {0.25, 0.22, 0.20, 0.18, 0.15, 0.12, 0.10};

  std::vector<Joint> joints;
  for (int i = 0; i < 7; ++i) {
    Joint j;
    j.axis = (i % 2 == 0) ? Vec3::UnitZ() : Vec3::UnitY();
    j.origin_xyz = Vec3(0, 0, i == 0 ? 0.15 : offsets[i - 1]);
    j.origin_rot = Mat3::Identity();
    j.mass = masses[i];
    // COM offset both along the link axis and laterally so the inner joints
    // see configuration-dependent inertia and gravity loads. The wrist COM
    // sits on its own axis, so the last joint carries no gravity torque.
    j.com = i == 6 ? Vec3(0.0, 0.0, com_along[i])
                   : Vec3(0.06, i % 2 == 0 ? 0.04 : -0.04, com_along[i]);
    j.inertia = (i % 2 == 0 ? Vec3(i_lat[i], i_lat[i], i_axis[i])
                            : Vec3(i_lat[i], i_axis[i], i_lat[i]))
                    .asDiagonal();
    j.damping = damping[i];
    j.q_min = -2.8;
    j.q_max = 2.8;
    j.qd_max = 2.5;
    joints.push_back(j);
  }
  return RobotModel::create("franka7_synthetic", std::move(joints));
}

}  // namespace residyn
