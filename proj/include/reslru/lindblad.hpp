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

// Time-dependent Lindblad evolution in the exact dressed frame.
//
// All density matrices handled here are expressed in the dressed-label basis
// of H0 + Hc at the drive frequency, in the frame rotating at omega_d. Jump
// operators take their bare matrix form in that basis (dressed relaxation and
// dephasing).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reslru/model.hpp"

namespace reslru {

struct ThermalState {
  double nbar = 0.0;
  CMatrix matrix;  // n_r x n_r, only |0> and |1> populated
};

// (1 - p)|0><0| + p|1><1| with p = nbar/(1 + 2 nbar), padded to n_r levels.
ThermalState thermal_resonator_state(double nbar, int n_r = 2);

enum class Envelope {
  Pulsed,    // sin^2 ramps, flat top, off after t_p
  AlwaysOn,  // sin^2 ramp up, then flat indefinitely
};

// Instantaneous drive amplitude (rad/s).
double pulse_value(const DrivePulse& pulse, double t, Envelope env = Envelope::Pulsed);

// A jump operator with its rate folded in. Every operator used here has at
// most one non-zero per row and per column, which the solver exploits.
struct JumpOperator {
  std::string name;
  OperatorMatrix op;
  std::vector<int> source;      // source[i]: column of the non-zero in row i, or -1
  std::vector<cdouble> value;   // value[i]: that entry
};
using JumpOperatorSet = std::vector<JumpOperator>;

// sqrt(kappa) a, sqrt(kappa nbar/(1+nbar)) a^dagger, sqrt(2/Tphi_r) a^dagger a
// (only when Tphi_r is finite), sqrt(1/T1_q) b, sqrt(2/Tphi_q) b^dagger b.
JumpOperatorSet build_jump_operators(const DeviceParams& params);

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double ramp_step_fraction = 1.0 / 20.0;  // max step in ramps, units of t_rise
  long max_steps = 20'000'000;
  double trace_tolerance = 1e-6;
};

struct Trajectory {
  Dims dims;
  std::vector<double> times;
  // populations[k][i]: population of dressed label i at times[k]
  std::vector<RVector> populations;
  std::vector<DensityMatrix> states;  // filled when requested
  long steps = 0;

  std::vector<double> label_population(int m, int l) const;
};

class LindbladEngine {
 public:
  LindbladEngine(const DeviceParams& params, const DrivePulse& pulse,
                 Envelope envelope = Envelope::Pulsed, IntegratorOptions options = {});
  // Shares a precomputed frame (must match params and pulse.omega_d).
  LindbladEngine(const DeviceParams& params, const DrivePulse& pulse, const DressedFrame& frame,
                 Envelope envelope = Envelope::Pulsed, IntegratorOptions options = {});

  // Propagates rho from t0 to t1 (rotating frame, dressed basis).
  DensityMatrix propagate(const DensityMatrix& rho, double t0, double t1);

  // Propagates from 0 and records the requested sample times (sorted,
  // within [0, t_final]); t_final is always recorded last.
  Trajectory evolve(const DensityMatrix& rho0, double t_final, std::vector<double> sample_times,
                    bool keep_states = false);

  const DressedFrame& frame() const { return frame_; }
  const DeviceParams& params() const { return params_; }
  const DrivePulse& pulse() const { return pulse_; }
  long steps_taken() const { return steps_; }

 private:
  struct Workspace;
  void setup();
  // Segment boundaries of the envelope after t (piecewise smooth pieces).
  double next_boundary(double t) const;
  bool in_ramp(double t) const;
  void rhs(double t, double t_ref, double scale, const CMatrix& rho_i, CMatrix& out);
  void step_segment(CMatrix& rho_i, double t0, double t1, double t_ref, bool ramp);

  DeviceParams params_;
  DrivePulse pulse_;
  Envelope envelope_;
  IntegratorOptions opt_;
  DressedFrame frame_;
  CMatrix drive_;           // dressed drive at full amplitude Omega
  RVector gamma_;           // diagonal of sum_k K_k^dagger K_k
  JumpOperatorSet jumps_;
  CMatrix rho_s_, x_, dis_;  // scratch
  std::vector<cdouble> phase_;
  long steps_ = 0;
  double last_h_ = 0.0;
};

// Initial state |level><level| (x) thermal resonator, dressed labels.
DensityMatrix transmon_product_state(const DeviceParams& params, const CMatrix& transmon_rho);
DensityMatrix level_state(const DeviceParams& params, int level);
// (|0> + |1>)/sqrt(2) on the transmon.
DensityMatrix plus_state(const DeviceParams& params);

// Reduced transmon density matrix Tr_r(rho).
CMatrix transmon_reduced(const DensityMatrix& rho);
// <2| Tr_r rho |2>
double leakage_population(const DensityMatrix& rho);

Trajectory evolve(const DeviceParams& params, const DrivePulse& pulse, const DensityMatrix& rho0,
                  double t_final, const std::vector<double>& sample_times,
                  Envelope envelope = Envelope::Pulsed, IntegratorOptions options = {});

struct LruRun {
  double p2_final = 0.0;
  DensityMatrix final_state;
  Trajectory trajectory;
};

// Prepares |level> (x) thermal, pulses for t_p, evolves freely to T_slot.
LruRun run_lru(const DeviceParams& params, const DrivePulse& pulse, int initial_level, double T_slot,
               const std::vector<double>& sample_times = {}, IntegratorOptions options = {});

// -T_slot / ln p1(T_slot), starting in |1>.
double effective_T1(const DeviceParams& params, const DrivePulse& pulse, double T_slot,
                    Envelope envelope = Envelope::Pulsed, IntegratorOptions options = {});
// -T_slot / ln(2 |<0|Tr_r rho|1>|), starting in |+>.
double effective_T2(const DeviceParams& params, const DrivePulse& pulse, double T_slot,
                    Envelope envelope = Envelope::Pulsed, IntegratorOptions options = {});
// -T_slot / ln(1 - p1(T_slot)) starting in |0>; empty when nothing is excited.
std::optional<double> excitation_time(const DeviceParams& params, const DrivePulse& pulse, double T_slot,
                                      Envelope envelope = Envelope::Pulsed,
                                      IntegratorOptions options = {});

// Effective times from already evolved final states.
double T1_from_population(double p1, double T_slot);
double T2_from_coherence(double coherence, double T_slot);
std::optional<double> T1up_from_population(double p1, double T_slot);

struct ZZPoint {
  double zeta = 0.0;  // rad/s
  double R = 0.0;
};
// omega_q -> omega_q + zeta with the pulse held fixed; R = 1 - p2(T_slot).
std::vector<ZZPoint> zz_sensitivity(const DeviceParams& params, const DrivePulse& pulse,
                                    const std::vector<double>& zetas, double T_slot,
                                    IntegratorOptions options = {});

// Always-on drive (ramp up, then flat through T_slot) from |initial_level>.
Trajectory long_drive_run(const DeviceParams& params, double Omega, double omega_d, double T_slot,
                          double t_rise = 30e-9, int initial_level = 2,
                          const std::vector<double>& sample_times = {},
                          IntegratorOptions options = {});

}  // namespace reslru
