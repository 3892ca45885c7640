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

#ifndef RESIDYN_EXCITATION_HPP_
#define RESIDYN_EXCITATION_HPP_

#include "residyn/sim.hpp"

namespace residyn {

// Random multi-sine reference generator parameters.
struct MultiSineSpec {
  int modes = 5;                    // sinusoidal modes per joint
  double amp_lo = 0.1, amp_hi = 1.0;    // amplitude range [rad]
  double freq_lo = 0.05, freq_hi = 0.5; // frequency range [Hz]
  double margin = 0.1;              // limit margin rho [rad]
  double guard = 1e-9;              // epsilon guard in the scaling denominators

  void validate() const;
};

struct JointLimits {
  Vec q_min;
  Vec q_max;
  Vec qd_max;

  static JointLimits of(const RobotModel& model);
};

// Uniform draw from [q_min + rho, q_max - rho], componentwise.
// Throws ConfigError if any interval is empty.
Vec sample_initial_config(const JointLimits& limits, double margin, Rng& rng);

// Raw multi-sine signals for one joint on the time grid. The velocity is the
// analytic derivative of the position sum, not a numerical one.
struct MultiSineSignal {
  Vec q_raw;
  Vec qd_raw;
};

struct SineModes {
  Vec amplitude;
  Vec frequency;
  Vec phase;
};

SineModes sample_modes(const MultiSineSpec& spec, Rng& rng);
MultiSineSignal multisine(const SineModes& modes, const Vec& tgrid);

// Per-joint scaling: one factor s_j = min(alpha_pos, alpha_vel) applied to
// both signals so positions stay within the margin-shrunk limits and
// velocities within qd_max (both enforced on the sampled grid). The factor is
// allowed to exceed 1. Throws ConfigError when r_j <= 0.
struct ScaledReference {
  Vec q_star;
  Vec qd_star;
  double scale = 1.0;
};

ScaledReference scale_to_limits(double q0, const MultiSineSignal& raw,
                                double q_min, double q_max, double qd_max,
                                double margin, double guard);

// Full reference for all joints: sample q0 (resampling when a joint lands too
// close to a limit), sample modes, scale. Deterministic given the rng state.
Reference make_reference(const JointLimits& limits, const MultiSineSpec& spec,
                         const Vec& tgrid, Rng& rng, int max_resample = 100);

}  // namespace residyn

#endif  // RESIDYN_EXCITATION_HPP_
