// Copyright 2026 The res-lru Authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "reslru/optimizer.hpp"

using namespace reslru;

namespace {

const double kOcr = critical_amplitude(DeviceParams::standard());

OptimizerConfig light_config() {
  OptimizerConfig c;
  c.measure_induced = false;
  c.measure_coherence = false;
  return c;
}

LandscapePoint make_point(double om_mhz, double p2, double t1, double t2) {
  LandscapePoint p;
  p.Omega = hz_to_rad(om_mhz * 1e6);
  p.omega_d = hz_to_rad(5.25e9);
  p.p2_leaked = p2;
  p.eff_T1 = t1;
  p.eff_T2 = t2;
  p.measured_coherence = true;
  return p;
}

}  // namespace

TEST_CASE("damped Rabi guess") {
  const double g = hz_to_rad(3e6);
  CHECK(damped_rabi_guess(g, 0.0) == doctest::Approx(kPi / (2 * g)).epsilon(1e-15));
  const double kappa = hz_to_rad(10e6);
  CHECK_THROWS_AS(damped_rabi_guess(0.25 * kappa, kappa), NumericalError);
  const double near = damped_rabi_guess(0.25 * kappa * (1 + 1e-6), kappa);
  const double nearer = damped_rabi_guess(0.25 * kappa * (1 + 1e-8), kappa);
  CHECK(nearer > 9.0 * near);  // square-root divergence
}

TEST_CASE("critical amplitude") {
  const DeviceParams p = DeviceParams::standard();
  CHECK(std::fabs(rad_to_hz(kOcr) - 143e6) <= 5e6);
  // The closed-form coupling overestimates g~ and puts the root lower.
  const double o3 = critical_amplitude(p, kTwoPi * 500e6, GTildeSource::Order3);
  CHECK(o3 < kOcr);
  CHECK(std::fabs(rad_to_hz(o3) - 135e6) < 3e6);

  DeviceParams q = p;
  q.kappa = 2.0 * p.kappa;
  q.T2_r = 2.0 / q.kappa;
  CHECK(critical_amplitude(q) > kOcr);
  q.kappa = hz_to_rad(0.1e6);
  q.T2_r = 2.0 / q.kappa;
  CHECK(critical_amplitude(q) < hz_to_rad(5e6));
  q.kappa = hz_to_rad(200e6);
  q.T2_r = 2.0 / q.kappa;
  CHECK_THROWS_AS(critical_amplitude(q), NumericalError);
}

TEST_CASE("guess scale at the operating point") {
  const DeviceParams p = DeviceParams::standard();
  const double g = g_tilde_at_crossing(p, hz_to_rad(204e6));
  const double guess = damped_rabi_guess(g, p.kappa);
  // Flat top of the chosen pulse is 178.6 - 60 ns; the heuristic lands 25% above.
  CHECK(guess / 118.6e-9 > 0.75);
  CHECK(guess / 118.6e-9 < 1.3);
}

TEST_CASE("t_p optimization at the operating point") {
  const DeviceParams p = DeviceParams::standard();
  const OptimizerConfig c = light_config();
  const double wd = hz_to_rad(5.2464e9);
  const TpResult r = optimize_tp(p, hz_to_rad(204e6), wd, c, kOcr);
  CHECK_FALSE(r.full_slot);
  CHECK(std::fabs(r.t_p - 178.6e-9) < 4e-9);
  CHECK(r.p2 <= 0.01);
  CHECK(r.t_p >= r.lower);
  CHECK(r.t_p <= r.upper);

  // The checkpointed objective agrees with a direct run.
  DrivePulse d;
  d.Omega = hz_to_rad(204e6);
  d.omega_d = wd;
  d.t_p = r.t_p;
  CHECK(std::fabs(run_lru(p, d, 2, c.T_slot).p2_final - r.p2) < 1e-7);
}

TEST_CASE("duration regimes") {
  const DeviceParams p = DeviceParams::standard();
  const OptimizerConfig c = light_config();
  // No drive: relaxation of |2> only, exp(-2 T_slot / T1).
  const TpResult z = optimize_tp(p, 0.0, hz_to_rad(5.25e9), c, kOcr);
  CHECK(z.full_slot);
  CHECK(z.t_p == c.T_slot);
  CHECK(z.p2 == doctest::Approx(std::exp(-2.0 * c.T_slot / p.T1_q)).epsilon(1e-6));

  const TpResult low = optimize_tp(p, hz_to_rad(100e6), hz_to_rad(5.2546e9), c, kOcr);
  CHECK(low.full_slot);
  CHECK(low.p2 <= 0.05);

  const TpResult high = optimize_tp(p, hz_to_rad(300e6), hz_to_rad(5.2329e9), c, kOcr);
  CHECK_FALSE(high.full_slot);
  CHECK(high.t_p < c.T_slot);
}

TEST_CASE("landscape sweep mechanics") {
  const DeviceParams p = DeviceParams::standard();
  OptimizerConfig c = light_config();
  c.Omega_min = hz_to_rad(40e6);
  c.Omega_max = hz_to_rad(120e6);
  c.omega_d_min = hz_to_rad(5.245e9);
  c.omega_d_max = hz_to_rad(5.265e9);
  c.grid_Omega = 4;
  c.grid_omega_d = 4;
  c.sample_budget = 16;
  // Omega_max below Omega_cr on purpose: every sample is a single run.
  c.Omega_max = hz_to_rad(120e6);

  c.sample_budget = 10;
  CHECK_THROWS_AS(c.validate(), NumericalError);
  c.sample_budget = 16;
  c.grid_Omega = 5;
  CHECK_THROWS_AS(sweep_landscape(p, c), NumericalError);
  c.grid_Omega = 4;

  const Landscape a = sweep_landscape(p, c);
  CHECK(a.points.size() == 16);
  c.sample_budget = 21;
  c.threads = 2;
  const Landscape b = sweep_landscape(p, c);
  CHECK(b.points.size() >= 21);
  CHECK(b.generations >= 1);

  // Refinement only adds samples, and the shared ones are identical.
  int shared = 0;
  for (const LandscapePoint& x : a.points)
    for (const LandscapePoint& y : b.points)
      if (x.Omega == y.Omega && x.omega_d == y.omega_d) {
        ++shared;
        CHECK(x.p2_leaked == y.p2_leaked);
        CHECK(x.t_p_opt == y.t_p_opt);
      }
  CHECK(shared == 16);
  auto min_p2 = [](const Landscape& l) {
    double m = 1.0;
    for (const LandscapePoint& x : l.points) m = std::min(m, x.p2_leaked);
    return m;
  };
  CHECK(min_p2(b) <= min_p2(a));
  for (const LandscapePoint& x : b.points) {
    CHECK(x.t_p_opt <= c.T_slot);
    CHECK(x.p2_leaked >= 0.0);
    CHECK(x.p2_leaked <= 1.0);
  }
  for (size_t i = 1; i < b.points.size(); ++i) {
    const auto& u = b.points[i - 1];
    const auto& v = b.points[i];
    CHECK((u.Omega < v.Omega || (u.Omega == v.Omega && u.omega_d < v.omega_d)));
  }
}

TEST_CASE("operating point selection") {
  std::vector<LandscapePoint> pts{make_point(0, 0.97, 30e-6, 7.7e-6), make_point(150, 0.004, 29e-6, 7.8e-6),
                                  make_point(204, 0.005, 29.5e-6, 7.9e-6), make_point(300, 0.02, 30e-6, 8e-6)};
  const OperatingPoint op = select_operating_point(pts, 0.01);
  CHECK(rad_to_hz(op.point.Omega) == doctest::Approx(204e6));
  CHECK(op.score == doctest::Approx(29.5 / 30.0));
  CHECK_FALSE(op.rationale.empty());

  // Single candidate, returned unconditionally.
  CHECK(rad_to_hz(select_operating_point(pts, 0.0045).point.Omega) == doctest::Approx(150e6));
  CHECK_THROWS_AS(select_operating_point(pts, 0.0), NumericalError);

  // Ties go to the smaller amplitude.
  std::vector<LandscapePoint> tie{make_point(250, 0.005, 30e-6, 7.7e-6), make_point(210, 0.005, 30e-6, 7.7e-6)};
  CHECK(rad_to_hz(select_operating_point(tie, 0.01, 30e-6, 7.7e-6).point.Omega) == doctest::Approx(210e6));
}
