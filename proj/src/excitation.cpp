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

#include "residyn/excitation.hpp"

namespace residyn {

void MultiSineSpec::validate() const {
  if (modes < 1) throw ConfigError("excitation: modes must be >= 1");
  if (!(amp_lo > 0) || !(amp_lo <= amp_hi))
    throw ConfigError("excitation: need 0 < amp_lo <= amp_hi");
  if (!(freq_lo > 0) || !(freq_lo <= freq_hi))
    throw ConfigError("excitation: need 0 < freq_lo <= freq_hi");
  if (margin < 0) throw ConfigError("excitation: margin must be >= 0");
  if (!(guard > 0) || guard >= 1)
    throw ConfigError("excitation: guard must be a small positive number");
}

JointLimits JointLimits::of(const RobotModel& model) {
  return JointLimits{model.q_min(), model.q_max(), model.qd_max()};
}

Vec sample_initial_config(const JointLimits& limits, double margin, Rng& rng) {
  const int n = static_cast<int>(limits.q_min.size());
  Vec q0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = limits.q_min[j] + margin;
    const double hi = limits.q_max[j] - margin;
    if (!(lo < hi))
      throw ConfigError("excitation: margin leaves an empty interval for joint " +
                        std::to_string(j));
    q0[j] = rng.uniform(lo, hi);
  }
  return q0;
}

SineModes sample_modes(const MultiSineSpec& spec, Rng& rng) {
  spec.validate();
  SineModes m;
  m.amplitude = Vec(spec.modes);
  m.frequency = Vec(spec.modes);
  m.phase = Vec(spec.modes);
  for (int i = 0; i < spec.modes; ++i) {
    m.amplitude[i] = rng.uniform(spec.amp_lo, spec.amp_hi);
    m.frequency[i] = rng.uniform(spec.freq_lo, spec.freq_hi);
    m.phase[i] = rng.uniform(0.0, 2.0 * M_PI);
  }
  return m;
}

MultiSineSignal multisine(const SineModes& modes, const Vec& tgrid) {
  if (tgrid.size() == 0) throw ConfigError("multisine: empty time grid");
  MultiSineSignal out;
  out.q_raw = Vec::Zero(tgrid.size());
  out.qd_raw = Vec::Zero(tgrid.size());
  for (Eigen::Index m = 0; m < modes.amplitude.size(); ++m) {
    const double a = modes.amplitude[m];
    const double w = 2.0 * M_PI * modes.frequency[m];
    const double p = modes.phase[m];
    for (Eigen::Index k = 0; k < tgrid.size(); ++k) {
      out.q_raw[k] += a * std::sin(w * tgrid[k] + p);
      out.qd_raw[k] += a * w * std::cos(w * tgrid[k] + p);
    }
  }
  return out;
}

ScaledReference scale_to_limits(double q0, const MultiSineSignal& raw,
                                double q_min, double q_max, double qd_max,
                                double margin, double guard) {
  const double r = std::min(q_max - q0, q0 - q_min) - margin;
  if (!(r > 0))
    throw ConfigError("excitation: initial configuration too close to a limit");
  const double alpha_pos = r / (raw.q_raw.cwiseAbs().maxCoeff() + guard);
  const double alpha_vel = qd_max / (raw.qd_raw.cwiseAbs().maxCoeff() + guard);
  ScaledReference out;
  out.scale = std::min(alpha_pos, alpha_vel);
  out.q_star = Vec::Constant(raw.q_raw.size(), q0) + out.scale * raw.q_raw;
  out.qd_star = out.scale * raw.qd_raw;
  return out;
}

Reference make_reference(const JointLimits& limits, const MultiSineSpec& spec,
                         const Vec& tgrid, Rng& rng, int max_resample) {
  spec.validate();
  const int n = static_cast<int>(limits.q_min.size());
  Reference ref;
  ref.q_star = Mat(tgrid.size(), n);
  ref.qd_star = Mat(tgrid.size(), n);

  for (int attempt = 0;; ++attempt) {
    if (attempt >= max_resample)
      throw ConfigError("excitation: could not sample a feasible initial "
                        "configuration after " + std::to_string(max_resample) +
                        " attempts");
    const Vec q0 = sample_initial_config(limits, spec.margin, rng);
    bool feasible = true;
    for (int j = 0; j < n && feasible; ++j)
      feasible = (std::min(limits.q_max[j] - q0[j], q0[j] - limits.q_min[j]) -
                  spec.margin) > 0;
    if (!feasible) continue;

    for (int j = 0; j < n; ++j) {
      const SineModes modes = sample_modes(spec, rng);
      const MultiSineSignal raw = multisine(modes, tgrid);
      const ScaledReference scaled =
          scale_to_limits(q0[j], raw, limits.q_min[j], limits.q_max[j],
                          limits.qd_max[j], spec.margin, spec.guard);
      ref.q_star.col(j) = scaled.q_star;
      ref.qd_star.col(j) = scaled.qd_star;
    }
    return ref;
  }
}

}  // namespace residyn
