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

// Driven transmon-resonator model in the frame rotating at the drive
// frequency, its exact dressed eigenbasis, and the exact |2,0>-|0,1>
// avoided crossing.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "reslru/errors.hpp"

namespace reslru {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double hz_to_rad(double f_hz) { return kTwoPi * f_hz; }
inline double rad_to_hz(double w) { return w / kTwoPi; }

struct DeviceParams {
  double omega_q = 0.0;  // rad/s
  double omega_r = 0.0;  // rad/s
  double alpha = 0.0;    // rad/s, negative for a transmon
  double g = 0.0;        // rad/s
  double kappa = 0.0;    // rad/s, equals 1/T1 of the resonator
  double nbar = 0.0;     // thermal photon number of the resonator bath
  double T1_q = 0.0;     // s
  double T2_q = 0.0;     // s
  double T2_r = 0.0;     // s
  int n_transmon = 6;
  int n_resonator = 3;

  double Delta() const { return omega_q - omega_r; }
  double Delta_m(int m) const { return Delta() + alpha * m; }
  // Pure-dephasing times (1/T2 - 1/(2 T1))^-1; infinity when T2 = 2 T1.
  double Tphi_q() const;
  double Tphi_r() const;
  int dim() const { return n_transmon * n_resonator; }

  // Throws NumericalError(InvalidArgument) when an invariant is violated.
  void validate() const;

  // Default transmon-resonator pair (6.7 / 7.8 GHz).
  static DeviceParams standard();
};

struct DrivePulse {
  double Omega = 0.0;    // peak amplitude, rad/s
  double omega_d = 0.0;  // rad/s
  double phi = 0.0;      // rad
  double t_rise = 30e-9;
  double t_p = 60e-9;

  void validate() const;
};

inline double delta_r(const DeviceParams& p, double omega_d) {
  return p.omega_r - omega_d;
}
inline double delta_q(const DeviceParams& p, double omega_d) {
  return p.omega_q - omega_d;
}
// Drive frequency at which bare |2,0> and |0,1> are degenerate.
inline double bare_crossing_frequency(const DeviceParams& p) {
  return 2.0 * p.omega_q + p.alpha - p.omega_r;
}

struct Dims {
  int n_t = 0;
  int n_r = 0;
  int size() const { return n_t * n_r; }
  int index(int m, int l) const { return m * n_r + l; }
  int transmon(int idx) const { return idx / n_r; }
  int resonator(int idx) const { return idx % n_r; }
  bool operator==(const Dims& o) const { return n_t == o.n_t && n_r == o.n_r; }
};

struct OperatorMatrix {
  Dims dims;
  CMatrix entries;
  bool hermitian = false;

  OperatorMatrix() = default;
  OperatorMatrix(Dims d, CMatrix m, bool herm = false)
      : dims(d), entries(std::move(m)), hermitian(herm) {}

  static OperatorMatrix zero(Dims d);
  static OperatorMatrix identity(Dims d);

  OperatorMatrix adjoint() const;
  double hermiticity_defect() const;  // max |O - O^dagger|
  const cdouble& operator()(int i, int j) const { return entries(i, j); }
};

// Density matrices share the operator layout; validity is checked by the
// Lindblad engine where the physical invariants matter.
using DensityMatrix = OperatorMatrix;

// JSON schema: {"dims":[n_t,n_r],"hermitian":bool,"data":[re,im,re,im,...]}
// with row-major entries.
std::string to_json(const OperatorMatrix& op);
OperatorMatrix operator_from_json(const std::string& text);

struct LadderOps {
  OperatorMatrix a;  // resonator annihilation, I_t (x) a
  OperatorMatrix b;  // transmon annihilation, b (x) I_r
};

LadderOps build_ladder_ops(const DeviceParams& params);

// Single-factor ladder matrix of size n.
CMatrix ladder_matrix(int n);

// H0 + Hc in the frame rotating at omega_d.
OperatorMatrix build_static_hamiltonian(const DeviceParams& params,
                                        double omega_d);
// (Omega/2)(e^{i phi} b + e^{-i phi} b^dagger) at the given amplitude.
OperatorMatrix build_drive_operator(const DeviceParams& params, double Omega,
                                    double phi);
// H0 + Hc + Hd with Omega replaced by amplitude_scale * Omega.
OperatorMatrix build_hamiltonian(const DeviceParams& params,
                                 const DrivePulse& drive,
                                 double amplitude_scale = 1.0);

struct DressedFrame {
  // Column k is the dressed eigenvector labeled by bare state k.
  OperatorMatrix unitary;
  // energies[k]: rotating-frame energy of the dressed state labeled k.
  RVector energies;
  // labels[r]: bare label of the r-th lowest-energy eigenvector.
  std::vector<int> labels;
  double omega_d = 0.0;
  // Smallest |<label|eigvec>|^2 encountered while labeling.
  double min_overlap = 1.0;
};

// Exact eigenbasis of H0 + Hc. The static Hamiltonian conserves the total
// excitation number, so each sector is diagonalized on its own; this keeps
// accidental rotating-frame degeneracies between sectors from mixing them.
DressedFrame diagonalize_static(const DeviceParams& params, double omega_d);

// The eigenvectors do not depend on omega_d; only energies shift by
// -omega_d times the excitation number. Returns a copy re-referenced to a
// new drive frequency.
DressedFrame reframe(const DressedFrame& frame, double omega_d);

OperatorMatrix to_dressed_frame(const OperatorMatrix& op,
                                const DressedFrame& frame);
OperatorMatrix from_dressed_frame(const OperatorMatrix& op,
                                  const DressedFrame& frame);

struct FrequencyScan {
  double lo = 0.0;  // rad/s
  double hi = 0.0;  // rad/s
  int samples = 41;
  double tolerance = kTwoPi * 1e3;  // refinement tolerance, rad/s
};

// omega_{d,0}* +- 2 pi 60 MHz.
FrequencyScan default_crossing_scan(const DeviceParams& params);
FrequencyScan crossing_scan_around(double center, double half_width = kTwoPi * 60e6,
                                   int samples = 41);

struct AvoidedCrossing {
  double omega_d_star = 0.0;
  double g_tilde = 0.0;  // half the minimal gap
  bool uncoupled = false;  // levels cross exactly; g_tilde is 0
  std::vector<std::pair<double, double>> gap_curve;  // (omega_d, gap)
};

// Gap between the two eigenstates of the full H (constant Omega) that carry
// the largest weight on dressed |2,0> and |0,1>.
double crossing_gap(const DeviceParams& params, const DressedFrame& frame,
                    const CMatrix& drive_dressed, double omega_d);

AvoidedCrossing find_avoided_crossing_exact(const DeviceParams& params,
                                            double Omega,
                                            const FrequencyScan& scan,
                                            double phi = 0.0);

struct ConvergenceReport {
  AvoidedCrossing base;
  AvoidedCrossing enlarged;
  double omega_d_star_drift = 0.0;  // rad/s
  double g_tilde_drift = 0.0;       // rad/s
};

// Repeats the exact crossing on an enlarged truncation and reports drift.
ConvergenceReport crossing_truncation_check(const DeviceParams& params,
                                            double Omega,
                                            const FrequencyScan& scan,
                                            int extra_transmon = 1,
                                            int extra_resonator = 1);

}  // namespace reslru
