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

#include "residyn/sim.hpp"

#include <fstream>

#include "residyn/csv.hpp"
#include "residyn/rbd.hpp"

namespace residyn {

void SimConfig::validate() const {
  if (!(dt_env > 0)) throw ConfigError("sim: dt_env must be > 0");
  if (substeps < 1) throw ConfigError("sim: substeps must be >= 1");
  if (!(horizon > 0)) throw ConfigError("sim: horizon must be > 0");
}

void Rollout::validate() const {
  const int N1 = samples();
  if (N1 < 2) throw DataError("rollout: needs at least 2 samples");
  if (q.rows() != N1 || qd.rows() != N1 || tau_m.rows() != N1 - 1)
    throw DataError("rollout: inconsistent lengths (expect N+1 states, N torques)");
  if (q.cols() != qd.cols() || q.cols() != tau_m.cols())
    throw DataError("rollout: inconsistent DoF across fields");
  if (has_reference() &&
      (q_star.rows() != N1 || qd_star.rows() != N1 || q_star.cols() != q.cols() ||
       qd_star.cols() != q.cols()))
    throw DataError("rollout: reference shape mismatch");
  for (int k = 1; k < N1; ++k)
    if (!(t[k] > t[k - 1])) throw DataError("rollout: timestamps not increasing");
}

Vec damping_torque(const RobotModel& model, const Vec& qd) {
  model.require_dof(qd, "damping_torque: qd");
  return model.damping_diagonal().cwiseProduct(qd);
}

JointState step(const RobotModel& model, const JointState& state,
                const Vec& tau_m, double dt_sim) {
  if (!(dt_sim > 0)) throw ConfigError("step: dt_sim must be > 0");
  model.require_dof(state.q, "step: q");
  model.require_dof(state.qd, "step: qd");
  model.require_dof(tau_m, "step: tau_m");
  if (!state.q.allFinite() || !state.qd.allFinite() || !tau_m.allFinite())
    throw NumericError("step: non-finite state or torque");

  const Vec tau_eff = tau_m - damping_torque(model, state.qd);
  const Vec qdd = forward_dynamics(model, state.q, state.qd, tau_eff);

  JointState next;
  next.qd = state.qd + dt_sim * qdd;
  next.q = state.q + dt_sim * next.qd;
  return next;
}

Rollout rollout(const RobotModel& model, const Controller& controller,
                const Reference& reference, const SimConfig& cfg,
                double blowup_qd) {
  cfg.validate();
  const int n = model.dof();
  const int N = cfg.env_steps();
  if (reference.q_star.rows() < N + 1 || reference.qd_star.rows() < N + 1)
    throw ConfigError("rollout: reference shorter than the time grid");
  if (reference.q_star.cols() != n || reference.qd_star.cols() != n)
    throw ConfigError("rollout: reference DoF mismatch");

  Rollout out;
  out.t = Vec::LinSpaced(N + 1, 0.0, N * cfg.dt_env);
  out.q = Mat(N + 1, n);
  out.qd = Mat(N + 1, n);
  out.tau_m = Mat(N, n);
  out.q_star = reference.q_star.topRows(N + 1);
  out.qd_star = reference.qd_star.topRows(N + 1);

  JointState state{reference.q_star.row(0).transpose(),
                   reference.qd_star.row(0).transpose()};
  out.q.row(0) = state.q.transpose();
  out.qd.row(0) = state.qd.transpose();

  const double dt_sim = cfg.dt_sim();
  for (int k = 0; k < N; ++k) {
    const Vec tau_m = controller(k, state);
    if (!tau_m.allFinite())
      throw NumericError("rollout: controller returned non-finite torque at step " +
                         std::to_string(k));
    out.tau_m.row(k) = tau_m.transpose();
    for (int s = 0; s < cfg.substeps; ++s) state = step(model, state, tau_m, dt_sim);
    if (state.qd.cwiseAbs().maxCoeff() > blowup_qd)
      throw NumericError("rollout: blow-up guard tripped at t=" +
                         std::to_string((k + 1) * cfg.dt_env) + " s (|qd| > " +
                         std::to_string(blowup_qd) + " rad/s)");
    out.q.row(k + 1) = state.q.transpose();
    out.qd.row(k + 1) = state.qd.transpose();
  }
  out.validate();
  return out;
}

void save_rollout_csv(const Rollout& r, const std::string& path) {
  r.validate();
  if (!r.has_reference())
    throw DataError("save_rollout_csv: rollout has no reference signals");
  const int n = r.dof();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);

  out << 't';
  const auto emit_group = [&out, n](const char* stem) {
    for (int j = 1; j <= n; ++j) out << ',' << stem << j;
  };
  emit_group("q");
  emit_group("qd");
  emit_group("taum");
  emit_group("qstar");
  emit_group("qdstar");
  out << '\n';

  const int N1 = r.samples();
  for (int k = 0; k < N1; ++k) {
    out << format_double(r.t[k]);
    for (int j = 0; j < n; ++j) out << ',' << format_double(r.q(k, j));
    for (int j = 0; j < n; ++j) out << ',' << format_double(r.qd(k, j));
    for (int j = 0; j < n; ++j) {
      out << ',';
      if (k < N1 - 1) out << format_double(r.tau_m(k, j));
    }
    for (int j = 0; j < n; ++j) out << ',' << format_double(r.q_star(k, j));
    for (int j = 0; j < n; ++j) out << ',' << format_double(r.qd_star(k, j));
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

Rollout load_rollout_csv(const std::string& path) {
  CsvTable table = read_delimited(path, true);
  if (table.header.empty() || table.header[0] != "t")
    throw DataError(path + ": expected rollout CSV with leading 't' column");
  const size_t cols = table.header.size();
  if ((cols - 1) % 5 != 0)
    throw DataError(path + ": malformed rollout header");
  const int n = static_cast<int>((cols - 1) / 5);
  const int N1 = static_cast<int>(table.rows.size());
  if (N1 < 2) throw DataError(path + ": too few rows");

  Rollout r;
  r.t = Vec(N1);
  r.q = Mat(N1, n);
  r.qd = Mat(N1, n);
  r.tau_m = Mat(N1 - 1, n);
  r.q_star = Mat(N1, n);
  r.qd_star = Mat(N1, n);

  for (int k = 0; k < N1; ++k) {
    const auto& row = table.rows[static_cast<size_t>(k)];
    if (row.size() != cols)
      throw DataError(path + ": row " + std::to_string(k) + " has wrong field count");
    const std::string ctx = path + ":" + std::to_string(k + 2);
    r.t[k] = parse_double(row[0], ctx);
    for (int j = 0; j < n; ++j) {
      r.q(k, j) = parse_double(row[1 + j], ctx);
      r.qd(k, j) = parse_double(row[1 + n + j], ctx);
      r.q_star(k, j) = parse_double(row[1 + 3 * n + j], ctx);
      r.qd_star(k, j) = parse_double(row[1 + 4 * n + j], ctx);
      const std::string& tq = row[1 + 2 * n + j];
      if (k < N1 - 1) {
        r.tau_m(k, j) = parse_double(tq, ctx);
      } else if (!tq.empty()) {
        throw DataError(path + ": final row must leave torque fields empty");
      }
    }
  }
  r.validate();
  return r;
}

}  // namespace residyn
