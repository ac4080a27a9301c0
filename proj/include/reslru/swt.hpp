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

// Schrieffer-Wolff analytics: a generic multi-block commutator series and
// closed-form generators / effective Hamiltonians for the driven
// transmon-resonator pair.
//
// Sign conventions: the first transformation uses S1 with [H0, S1] = Hc, so
// e^{S1} Hd e^{-S1} = Hd + [S1, Hd] + ... The indirect drive term H_d2 is
// built from that commutator, which fixes its overall sign (it is
// -(g' a + g~ a^dagger |m><m+2|) e^{i phi} - h.c. in terms of the
// coefficients below). Everything downstream of H_d2 inherits that sign.

#pragma once

#include <vector>

#include "reslru/model.hpp"

namespace reslru {

// ---------------------------------------------------------------------------
// Generic machinery
// ---------------------------------------------------------------------------

// Block id per basis index; "diagonal part" means within-block entries.
using BlockMap = std::vector<int>;

CMatrix block_diagonal_part(const CMatrix& X, const BlockMap& blocks);
CMatrix block_off_diagonal_part(const CMatrix& X, const BlockMap& blocks);

// Solves [H0, S] = X for block-off-diagonal S, H0 = diag(h0).
CMatrix solve_commutator_equation(const RVector& h0, const CMatrix& X, const BlockMap& blocks);

struct SwtSeries {
  CMatrix S1, S2, S3;
  CMatrix H_prime;  // block-diagonal effective Hamiltonian to 4th order
};

// Third-order generator series and 4th-order block-diagonal Hamiltonian of
// H0 + V (V block-off-diagonal). The perturbation scale is carried by V.
SwtSeries schrieffer_wolff_series(const RVector& h0, const CMatrix& V, const BlockMap& blocks);

inline CMatrix commutator(const CMatrix& A, const CMatrix& B) { return A * B - B * A; }

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

// Detunings at a drive frequency. All functions accept any integer m; they
// are plain numbers of the infinite ladder.
struct Detunings {
  DeviceParams p;
  double omega_d = 0.0;

  Detunings(const DeviceParams& params, double wd) : p(params), omega_d(wd) {}

  double Delta_m(int m) const { return p.Delta_m(m); }
  // delta^q + alpha m
  double delta_q_m(int m) const;
  // Transition frequency m -> m+1 of the first-order dressed Hamiltonian:
  // delta^q + alpha m + g^2 Delta_{-1} / (Delta_{m-1} Delta_m).
  double delta_q_tilde_m(int m) const;
  // Diagonal coefficient of [S'_1, H_d1]: (m+1) dt_{m-1} - m dt_m, which
  // equals delta^q - alpha + g^2 Delta_{-1} Delta_{3m} / (Delta_m Delta_{m-1} Delta_{m-2}).
  double delta_q_doubletilde_m(int m) const;
};

struct SWTGenerators {
  OperatorMatrix S1;        // capacitive, first order in g/Delta
  OperatorMatrix S1_prime;  // drive, first order in Omega/delta
  OperatorMatrix S2_prime;
  OperatorMatrix S3_prime;
};

struct EffectiveCouplingReport {
  double g_tilde_lowest = 0.0;  // |lowest-order g~|
  double g_tilde_order3 = 0.0;  // |<0,1|H_eff|2,0>| at the analytic crossing
  double omega_d_star_analytic = 0.0;
  double residual_norm = 0.0;  // max |H_resid| element within 3 excitations
  int secant_iterations = 0;
  bool used_bisection = false;
};

// g sum_m sqrt(m)/(Delta + alpha(m-1)) (a |m><m-1| - h.c.)
OperatorMatrix s1_capacitive(const DeviceParams& params);

// First-order dressed static Hamiltonian (diagonal): bare energies, transmon
// Stark shifts g^2 m/Delta_{m-1} and the dispersive term.
OperatorMatrix dressed_static_1st(const DeviceParams& params, double omega_d);

struct DressedDrive {
  OperatorMatrix H_d1;  // (Omega e^{i phi}/2) b + h.c.
  OperatorMatrix H_d2;  // indirect resonator drive and a^dagger|m><m+2| terms
};
DressedDrive dressed_drive_terms(const DeviceParams& params, const DrivePulse& drive);

// Omega g alpha / (sqrt(2) Delta (Delta + alpha)), signed.
double g_tilde_lowest_order(const DeviceParams& params, double Omega);

// g~_m and g'_m coefficients of H_d2 (before its overall sign).
double g_tilde_m(const DeviceParams& params, double Omega, int m);
double g_prime_m(const DeviceParams& params, double Omega, int m);

SWTGenerators second_swt_generators(const DeviceParams& params, const DrivePulse& drive);

// Transmon part of the double-dressed static Hamiltonian for level m
// (Omega^2 and Omega^4 Stark corrections included). Uses infinite-ladder
// detunings, so the two highest truncated levels are not consistent with a
// matrix evaluation on the truncated space.
double double_dressed_level(const DeviceParams& params, double Omega, double omega_d, int m);

OperatorMatrix double_dressed_static(const DeviceParams& params, double Omega, double omega_d);
inline OperatorMatrix double_dressed_static(const DeviceParams& params, const DrivePulse& drive,
                                            double omega_d) {
  return double_dressed_static(params, drive.Omega, omega_d);
}

// |2,0> <-> |0,1>-type couplings a^dagger |m><m+2| (+ h.c.) to second order
// in Omega/delta.
OperatorMatrix effective_coupling(const DeviceParams& params, const DrivePulse& drive,
                                  double omega_d);
// Everything else in e^{S'} H_d2 e^{-S'} at the same order.
OperatorMatrix residual_coupling(const DeviceParams& params, const DrivePulse& drive,
                                 double omega_d);

// <2,0|H0^DD|2,0> - <0,1|H0^DD|0,1>
double eta(const DeviceParams& params, double Omega, double omega_d);

double g_tilde_order3(const DeviceParams& params, double Omega, double omega_d);

// Largest |element| of the residual coupling among states with m + l <= 3.
double residual_norm(const DeviceParams& params, const DrivePulse& drive, double omega_d);

// Root of eta by secant iteration (bisection fallback).
double solve_eta_root(const DeviceParams& params, double Omega, int* iterations = nullptr,
                      bool* used_bisection = nullptr);

EffectiveCouplingReport solve_omega_d_star_analytic(const DeviceParams& params, double Omega);

// Crossing of the drive-free first-order dressed levels.
inline double drive_free_crossing(const DeviceParams& params) {
  return solve_eta_root(params, 0.0);
}

// Exact, order-3 and lowest-order (drive-free crossing, lowest-order g~)
// values at one amplitude. All rad/s.
struct CrossingComparison {
  double Omega = 0.0;
  double omega_d_exact = 0.0, omega_d_order3 = 0.0, omega_d_lowest = 0.0;
  double g_exact = 0.0, g_order3 = 0.0, g_lowest = 0.0;
};

// The exact crossing is scanned +-scan_half_width around the analytic one.
CrossingComparison compare_crossing(const DeviceParams& params, double Omega,
                                    double scan_half_width = kTwoPi * 60e6);

}  // namespace reslru
