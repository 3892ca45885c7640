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

#include "residyn/rbd.hpp"

#include <vector>

namespace residyn {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Plucker coordinate transform x_child = E * (x_parent - r), applied to
// spatial motion and force vectors. Angular components first.
struct Xform {
  Mat3 E;
  Vec3 r;
};

Vec3 ang(const Vec6& v) { return v.head<3>(); }
Vec3 lin(const Vec6& v) { return v.tail<3>(); }

Vec6 spatial(const Vec3& a, const Vec3& b) {
  Vec6 v;
  v << a, b;
  return v;
}

// Motion vector from parent coordinates into child coordinates.
Vec6 xform_motion(const Xform& X, const Vec6& m) {
  return spatial(X.E * ang(m), X.E * (lin(m) - X.r.cross(ang(m))));
}

// Force vector from child coordinates back into parent coordinates (the dual
// inverse transform used in the backward recursion).
Vec6 xform_force_to_parent(const Xform& X, const Vec6& f) {
  const Vec3 fp = X.E.transpose() * lin(f);
  return spatial(X.E.transpose() * ang(f) + X.r.cross(fp), fp);
}

// Spatial cross products: crm for motion vectors, crf for force vectors.
Vec6 crm(const Vec6& v, const Vec6& m) {
  return spatial(ang(v).cross(ang(m)),
                 ang(v).cross(lin(m)) + lin(v).cross(ang(m)));
}

Vec6 crf(const Vec6& v, const Vec6& f) {
  return spatial(ang(v).cross(ang(f)) + lin(v).cross(lin(f)),
                 ang(v).cross(lin(f)));
}

// Joint-to-parent transforms for the whole chain at configuration q.
std::vector<Xform> chain_transforms(const RobotModel& model, const Vec& q) {
  const int n = model.dof();
  std::vector<Xform> X(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Joint& j = model.joint(i);
    const Mat3 joint_rot =
        Eigen::AngleAxisd(q[i], j.axis).toRotationMatrix().transpose();
    X[static_cast<size_t>(i)] = {joint_rot * j.origin_rot.transpose(), j.origin_xyz};
  }
  return X;
}

// 6x6 motion-transform matrix of X, used by the CRBA inertia propagation.
Mat6 motion_matrix(const Xform& X) {
  Mat6 M = Mat6::Zero();
  M.topLeftCorner<3, 3>() = X.E;
  M.bottomRightCorner<3, 3>() = X.E;
  Mat3 rx;
  rx << 0, -X.r.z(), X.r.y(), X.r.z(), 0, -X.r.x(), -X.r.y(), X.r.x(), 0;
  M.bottomLeftCorner<3, 3>() = -X.E * rx;
  return M;
}

}  // namespace

Vec inverse_dynamics(const RobotModel& model, const Vec& q, const Vec& qd,
                     const Vec& qdd) {
  model.require_dof(q, "inverse_dynamics: q");
  model.require_dof(qd, "inverse_dynamics: qd");
  model.require_dof(qdd, "inverse_dynamics: qdd");

  const int n = model.dof();
  const auto X = chain_transforms(model, q);

  std::vector<Vec6> v(static_cast<size_t>(n)), a(static_cast<size_t>(n)),
      f(static_cast<size_t>(n));

  // Gravity enters as a fictitious base acceleration.
  const Vec6 a0 = spatial(Vec3::Zero(), -model.gravity());
  Vec6 v_prev = Vec6::Zero();
  Vec6 a_prev = a0;

  for (int i = 0; i < n; ++i) {
    const size_t k = static_cast<size_t>(i);
    const Vec6 S = spatial(model.joint(i).axis, Vec3::Zero());
    const Vec6 vJ = S * qd[i];
    v[k] = xform_motion(X[k], v_prev) + vJ;
    a[k] = xform_motion(X[k], a_prev) + S * qdd[i] + crm(v[k], vJ);
    const Mat6& I = model.spatial_inertia(i);
    f[k] = I * a[k] + crf(v[k], I * v[k]);
    v_prev = v[k];
    a_prev = a[k];
  }

  Vec tau(n);
  for (int i = n - 1; i >= 0; --i) {
    const size_t k = static_cast<size_t>(i);
    const Vec6 S = spatial(model.joint(i).axis, Vec3::Zero());
    tau[i] = S.dot(f[k]);
    if (i > 0) f[k - 1] += xform_force_to_parent(X[k], f[k]);
  }
  return tau;
}

Vec gravity_torque(const RobotModel& model, const Vec& q) {
  model.require_dof(q, "gravity_torque: q");
  const Vec zero = Vec::Zero(model.dof());
  return inverse_dynamics(model, q, zero, zero);
}

Vec coriolis_torque(const RobotModel& model, const Vec& q, const Vec& qd) {
  model.require_dof(q, "coriolis_torque: q");
  model.require_dof(qd, "coriolis_torque: qd");
  const Vec zero = Vec::Zero(model.dof());
  return inverse_dynamics(model, q, qd, zero) - gravity_torque(model, q);
}

Mat inertia_matrix(const RobotModel& model, const Vec& q) {
  model.require_dof(q, "inertia_matrix: q");
  const int n = model.dof();
  const auto X = chain_transforms(model, q);

  std::vector<Mat6> Ic(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) Ic[static_cast<size_t>(i)] = model.spatial_inertia(i);

  Mat M = Mat::Zero(n, n);
  for (int i = n - 1; i >= 0; --i) {
    const size_t k = static_cast<size_t>(i);
    if (i > 0) {
      const Mat6 Xm = motion_matrix(X[k]);
      Ic[k - 1] += Xm.transpose() * Ic[k] * Xm;
    }
    const Vec6 S = spatial(model.joint(i).axis, Vec3::Zero());
    Vec6 F = Ic[k] * S;
    M(i, i) = S.dot(F);
    for (int j = i - 1; j >= 0; --j) {
      F = motion_matrix(X[static_cast<size_t>(j) + 1]).transpose() * F;
      const Vec6 Sj = spatial(model.joint(j).axis, Vec3::Zero());
      M(i, j) = M(j, i) = F.dot(Sj);
    }
  }
  return M;
}

Vec forward_dynamics(const RobotModel& model, const Vec& q, const Vec& qd,
                     const Vec& tau_eff) {
  model.require_dof(q, "forward_dynamics: q");
  model.require_dof(qd, "forward_dynamics: qd");
  model.require_dof(tau_eff, "forward_dynamics: tau_eff");

  const Vec zero = Vec::Zero(model.dof());
  const Vec bias = inverse_dynamics(model, q, qd, zero);  // C qd + tau_g
  const Mat M = inertia_matrix(model, q);

  Eigen::LDLT<Mat> ldlt(M);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() < 1e-12 * ldlt.vectorD().maxCoeff()) {
    throw NumericError("forward_dynamics: inertia matrix is numerically singular");
  }
  return ldlt.solve(tau_eff - bias);
}

}  // namespace residyn
