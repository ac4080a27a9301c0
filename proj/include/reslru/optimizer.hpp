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

// Pulse duration optimization, critical amplitude, (Omega, omega_d)
// landscape sampling and operating-point selection.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reslru/lindblad.hpp"

namespace reslru {

struct OptimizerConfig {
  double t_rise = 30e-9;
  double T_slot = 440e-9;
  double Omega_min = 0.0;
  double Omega_max = kTwoPi * 500e6;
  double omega_d_min = kTwoPi * 5.19e9;
  double omega_d_max = kTwoPi * 5.26e9;
  int grid_Omega = 12;
  int grid_omega_d = 12;
  int sample_budget = 144;
  double tp_tolerance = 0.1e-9;
  // Above Omega_cr by less than this, the t_p search runs up to T_slot.
  double near_critical_margin = kTwoPi * 3e6;
  double refine_radius = kTwoPi * 2e6;
  double p2_floor = 1e-6;  // inside the log loss
  double checkpoint_spacing = 1e-9;
  bool measure_induced = true;
  bool measure_coherence = true;
  int threads = 1;
  IntegratorOptions integrator;

  void validate() const;
};

enum class GTildeSource {
  Exact,   // half the minimal gap of the full Hamiltonian
  Order3,  // closed form at the analytic crossing
};

// Effective coupling at the crossing for amplitude Omega.
double g_tilde_at_crossing(const DeviceParams& params, double Omega,
                           GTildeSource source = GTildeSource::Exact);

// Root of g~(Omega) = kappa/4 on (0, Omega_max].
double critical_amplitude(const DeviceParams& params, double Omega_max = kTwoPi * 500e6,
                          GTildeSource source = GTildeSource::Exact);

// pi / (2 g~_damp), g~_damp = sqrt(g~^2 - (kappa/4)^2) exp(-kappa / (7 g~)).
double damped_rabi_guess(double g_tilde, double kappa);

struct TpResult {
  double t_p = 0.0;
  double p2 = 0.0;  // from |2>, at T_slot
  double lower = 0.0;
  double upper = 0.0;
  int evaluations = 0;
  bool full_slot = false;  // Omega <= Omega_cr
};

// Omega_cr is computed when not supplied.
TpResult optimize_tp(const DeviceParams& params, double Omega, double omega_d,
                     const OptimizerConfig& config, std::optional<double> Omega_cr = std::nullopt);

struct LandscapePoint {
  double Omega = 0.0;
  double omega_d = 0.0;
  double t_p_opt = 0.0;
  double p2_leaked = 0.0;
  double p2_induced_0 = 0.0;
  double p2_induced_1 = 0.0;
  double eff_T1 = 0.0;
  double eff_T2 = 0.0;
  bool measured_induced = false;
  bool measured_coherence = false;
};

// Optimizes t_p and, as configured, records induced leakage and effective
// coherences at that duration.
LandscapePoint evaluate_point(const DeviceParams& params, double Omega, double omega_d,
                              const OptimizerConfig& config, double Omega_cr);

struct Landscape {
  std::vector<LandscapePoint> points;  // sorted by (Omega, omega_d)
  double Omega_cr = 0.0;  // infinity when the range never reaches g~ = kappa/4
  int generations = 0;
};

using ProgressFn = std::function<void(const std::string&)>;

// Coarse grid followed by deterministic subdivision of the cell with the
// largest spread of (log p2)^2 times its area, until the budget is spent.
Landscape sweep_landscape(const DeviceParams& params, const OptimizerConfig& config,
                          const ProgressFn& progress = nullptr);

// Single pass of bounded Brent minimizations of p2 along omega_d, then Omega,
// within +-refine_radius of the start point.
LandscapePoint refine_point(const DeviceParams& params, const LandscapePoint& start,
                            const OptimizerConfig& config, double Omega_cr);

struct OperatingPoint {
  LandscapePoint point;
  double score = 0.0;
  std::string rationale;
};

// Among points with p2_leaked <= threshold, maximizes
// min(eff_T1 / T1_ref, eff_T2 / T2_ref); ties go to the smaller Omega.
OperatingPoint select_operating_point(const std::vector<LandscapePoint>& points, double p2_threshold,
                                      double T1_ref, double T2_ref);
// References taken from the Omega = 0 points of the landscape.
OperatingPoint select_operating_point(const std::vector<LandscapePoint>& points,
                                      double p2_threshold = 0.01);

}  // namespace reslru
