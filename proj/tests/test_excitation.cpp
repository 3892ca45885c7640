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

#include "residyn/excitation.hpp"

using namespace residyn;

namespace {

JointLimits unit_limits(int n) {
  return JointLimits{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0),
                     Vec::Constant(n, 2.0)};
}

}  // namespace

TEST_CASE("initial configuration sampling") {
  SUBCASE("zero margin: draws fill the box") {
    JointLimits lim = unit_limits(2);
    Rng rng(100);
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 100000; ++i) {
      Vec q0 = sample_initial_config(lim, 0.0, rng);
      CHECK(q0.minCoeff() >= -1.0);
      CHECK(q0.maxCoeff() <= 1.0);
      lo = std::min(lo, q0.minCoeff());
      hi = std::max(hi, q0.maxCoeff());
    }
    CHECK(lo < -0.99);
    CHECK(hi > 0.99);
  }

  SUBCASE("margin of half the interval width is infeasible") {
    JointLimits lim = unit_limits(2);
    Rng rng(1);
    CHECK_THROWS_AS(sample_initial_config(lim, 1.0, rng), ConfigError);
  }

  SUBCASE("fixed seed reproduces the draw") {
    JointLimits lim = unit_limits(4);
    Rng a(7), b(7);
    Vec qa = sample_initial_config(lim, 0.1, a);
    Vec qb = sample_initial_config(lim, 0.1, b);
    CHECK((qa - qb).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("multi-sine signals and their analytic velocity") {
  const Vec tgrid = Vec::LinSpaced(1001, 0.0, 10.0);

  SUBCASE("single unit mode") {
    SineModes m{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), Vec::Zero(1)};
    MultiSineSignal s = multisine(m, tgrid);
    CHECK(s.q_raw[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.qd_raw[0] == doctest::Approx(2 * M_PI).epsilon(1e-12));
    for (int k = 0; k < 1001; ++k)
      CHECK(s.q_raw[k] == doctest::Approx(std::sin(2 * M_PI * tgrid[k])).epsilon(1e-9));
  }

  SUBCASE("phase pi/2 starts at the amplitude") {
    SineModes m{Vec::Constant(1, 0.37), Vec::Constant(1, 0.2),
                Vec::Constant(1, M_PI / 2)};
    MultiSineSignal s = multisine(m, tgrid);
    CHECK(s.q_raw[0] == doctest::Approx(0.37).epsilon(1e-12));
  }

  SUBCASE("analytic velocity matches central differences to O(dt^2)") {
    Rng rng(3);
    MultiSineSpec spec;
    SineModes m = sample_modes(spec, rng);
    MultiSineSignal s = multisine(m, tgrid);
    const double dt = tgrid[1] - tgrid[0];
    double max_err = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double fd = (s.q_raw[k + 1] - s.q_raw[k - 1]) / (2 * dt);
      max_err = std::max(max_err, std::abs(fd - s.qd_raw[k]));
    }
    // |f'''| <= sum a (2 pi f)^3; bound dt^2/6 * that, with slack.
    double bound = 0.0;
    for (int i = 0; i < spec.modes; ++i)
      bound += m.amplitude[i] * std::pow(2 * M_PI * m.frequency[i], 3);
    CHECK(max_err <= bound * dt * dt / 6 * 1.5 + 1e-12);
  }
}

TEST_CASE("per-joint scaling honors both limit families") {
  const Vec tgrid = Vec::LinSpaced(501, 0.0, 5.0);

  SUBCASE("position-bound case approaches scale 1") {
    // Raw amplitude exactly equal to the available room, unconstrained speed.
    SineModes m{Vec::Constant(1, 0.5), Vec::Constant(1, 0.25), Vec::Zero(1)};
    MultiSineSignal s = multisine(m, tgrid);
    const double peak = s.q_raw.cwiseAbs().maxCoeff();
    // Room r = min(1 - 0, 0 + 1) - margin = peak by construction below.
    const double margin = 1.0 - peak;
    ScaledReference out = scale_to_limits(0.0, s, -1.0, 1.0, 1e9, margin, 1e-12);
    CHECK(out.scale == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("tiny raw amplitudes are amplified above 1 yet stay inside") {
    SineModes m{Vec::Constant(1, 1e-3), Vec::Constant(1, 0.3), Vec::Zero(1)};
    MultiSineSignal s = multisine(m, tgrid);
    ScaledReference out = scale_to_limits(0.1, s, -1.0, 1.0, 2.0, 0.1, 1e-9);
    CHECK(out.scale > 1.0);
    CHECK(out.q_star.maxCoeff() <= 1.0 - 0.1 + 1e-6);
    CHECK(out.q_star.minCoeff() >= -1.0 + 0.1 - 1e-6);
    CHECK(out.qd_star.cwiseAbs().maxCoeff() <= 2.0 + 1e-9);
  }

  SUBCASE("initial configuration at a limit is rejected") {
    SineModes m{Vec::Constant(1, 0.5), Vec::Constant(1, 0.25), Vec::Zero(1)};
    MultiSineSignal s = multisine(m, tgrid);
    CHECK_THROWS_AS(scale_to_limits(0.95, s, -1.0, 1.0, 2.0, 0.1, 1e-9),
                    ConfigError);
  }

  SUBCASE("100 random specs: grid maxima within limits, one factor per joint") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      MultiSineSpec spec;
      spec.modes = 1 + static_cast<int>(rng.uniform_index(5));
      const double q0 = rng.uniform(-0.7, 0.7);
      SineModes m = sample_modes(spec, rng);
      MultiSineSignal s = multisine(m, tgrid);
      ScaledReference out = scale_to_limits(q0, s, -1.0, 1.0, 2.0, 0.1, 1e-9);

      CHECK(out.q_star.maxCoeff() <= 1.0 - 0.1 + 1e-6);
      CHECK(out.q_star.minCoeff() >= -1.0 + 0.1 - 1e-6);
      CHECK(out.qd_star.cwiseAbs().maxCoeff() <= 2.0 + 1e-9);

      // The same scalar multiplies position and velocity signals.
      for (int k = 0; k < 501; ++k) {
        CHECK(out.q_star[k] == doctest::Approx(q0 + out.scale * s.q_raw[k]).epsilon(1e-12));
        CHECK(out.qd_star[k] == doctest::Approx(out.scale * s.qd_raw[k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("full reference generation is deterministic and in-limits") {
  JointLimits lim = unit_limits(7);
  const Vec tgrid = Vec::LinSpaced(301, 0.0, 3.0);
  MultiSineSpec spec;

  Rng a(99), b(99);
  Reference ra = make_reference(lim, spec, tgrid, a);
  Reference rb = make_reference(lim, spec, tgrid, b);
  CHECK((ra.q_star - rb.q_star).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ra.qd_star - rb.qd_star).cwiseAbs().maxCoeff() == 0.0);

  CHECK(ra.q_star.maxCoeff() <= 1.0 - spec.margin + 1e-6);
  CHECK(ra.q_star.minCoeff() >= -1.0 + spec.margin - 1e-6);
  CHECK(ra.qd_star.cwiseAbs().maxCoeff() <= 2.0 + 1e-9);
}
