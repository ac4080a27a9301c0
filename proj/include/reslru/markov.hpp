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

// Per-cycle leakage/seepage Markov model, LRU-augmented rates, a qutrit
// channel for the resonator LRU and a Monte Carlo of leakage traces.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "reslru/errors.hpp"

namespace reslru {

// Probabilities per QEC cycle.
struct MarkovRates {
  double gamma_CL = 0.0;
  double gamma_LC = 0.0;
  bool clamped = false;  // a rate exceeded 1 and was cut to 1
};

struct LRUParams {
  double R = 0.0;
  double L1_LRU = 0.0;
  double pM22 = 1.0;
  double pM11 = 1.0;

  void validate() const;
};

enum class QubitRole { Data, Ancilla };

struct QubitSpec {
  std::string name;
  QubitRole role = QubitRole::Data;
  int n_flux = 0;  // CZs per cycle in which the qubit is fluxed
  bool leakage_prone = false;
};

// Distance-3 rotated code: 3 high-frequency data qubits and 8 ancillas can leak.
std::vector<QubitSpec> surface17_layout();

// Gate, LRU, measurement and cycle durations plus coherence times.
struct ScheduleParams {
  double t_gate = 20e-9;
  double t_int = 30e-9;
  double t_pc = 10e-9;
  double t_res_lru = 100e-9;
  double t_pi_lru = 20e-9;
  double t_m = 580e-9;
  double t_c = 800e-9;
  double T_slot = 440e-9;
  double T1 = 30e-6;
  double Tphi_max = 60e-6;

  static ScheduleParams standard() { return {}; }
};

// gamma_CL = n_flux L1, gamma_LC = n_flux L2 + 1 - exp(-t_c / (T1 / 2)).
// Rates above 1 are clamped and flagged.
MarkovRates rates_from_physical(int n_flux, double L1, double L2, double t_c, double T1);

double lifetime(const MarkovRates& rates);      // 1 / gamma_LC, in cycles
double steady_state(const MarkovRates& rates);  // gamma_CL / (gamma_CL + gamma_LC)

// pbar(n) for n = 1..n_cycles.
std::vector<double> pbar_curve(const MarkovRates& rates, int n_cycles);

// Seepage composed as 1 - (1 - gamma_LC)(1 - s), s = R (data) or pM22
// (ancilla). Induced leakage per cycle: 2 L1_LRU p0 for data,
// (1 - pM11)(1 - p0) for ancillas, p0 being the weight of |0> inside C.
MarkovRates lru_augmented_rates(const MarkovRates& base, const LRUParams& lru, QubitRole role,
                                double p0_occupancy = 0.5);

struct Populations3 {
  double p0 = 0.0, p1 = 0.0, p2 = 0.0;
};

// p2' = (1 - R) p2 + 2 L1_LRU p0; removed leakage goes to |0>.
Populations3 res_lru_population_map(const Populations3& p, const LRUParams& lru);

// Declared outcome for a projected level, from one uniform draw u in [0, 1).
int readout_declare(int true_state, const LRUParams& lru, double u);

using Superop3 = Eigen::Matrix<std::complex<double>, 9, 9>;
using Density3 = Eigen::Matrix<std::complex<double>, 3, 3>;

// Column-stacked superoperator: vec(out) = S vec(in).
struct QutritChannel {
  Superop3 S = Superop3::Identity();

  Density3 apply(const Density3& rho) const;
  double choi_min_eigenvalue() const;
  double trace_preservation_error() const;  // max |tr S(|i><j|) - delta_ij|
  // T(i, j): population of |i> after the channel acting on |j><j|.
  Eigen::Matrix3d population_transfer() const;
};

// exp(L_up) exp(t L_down): L_down carries |0><2| at -ln(1 - R - 2 L1_LRU)/t,
// relaxation |0><1|, |1><2| at 1/T1, 2/T1 and b^dagger b dephasing at 2/Tphi;
// L_up carries |2><0| at -ln(1 - 2 L1_LRU). Infinite times switch a term off.
// At R + 2 L1_LRU = 1 the transfer is taken in its infinite-rate limit.
QutritChannel build_res_lru_channel(const LRUParams& lru, double t_lru, double T1, double Tphi);

struct LeakageTrace {
  std::string qubit;
  int cycles = 0;
  int runs = 0;
  std::vector<double> pbar;
  std::vector<double> stderr_;  // binomial standard error per cycle
  std::vector<std::uint8_t> leaked;  // runs x cycles, row-major
};

struct MonteCarloOptions {
  double t_c = 800e-9;
  double T1 = 30e-6;
  double p0_occupancy = 0.5;
  int threads = 1;
};

// Independent two-state chain per qubit and run. Each cycle: CZ leakage,
// record, seepage (CZ + relaxation), then the LRU if enabled. Only
// leakage-prone qubits are simulated. Results do not depend on threads.
std::map<std::string, LeakageTrace> monte_carlo_surface17(
    const std::vector<QubitSpec>& layout, double L1, double L2, const LRUParams& lru,
    bool use_data_lru, bool use_ancilla_lru, int cycles, int runs, std::uint64_t seed,
    const MonteCarloOptions& options = {});

// Expected record of the same chain, propagated exactly.
std::vector<double> chain_expectation(const QubitSpec& qubit, double L1, double L2, const LRUParams& lru,
                                      bool use_lru, int cycles, const MonteCarloOptions& options = {});

struct FitResult {
  MarkovRates curve;  // best-fit curve parameters, gamma_LC may exceed 1
  MarkovRates rates;  // curve clamped to per-cycle probabilities
  double lifetime = 0.0;      // 1 / rates.gamma_LC, at least one cycle
  double steady_state = 0.0;  // from curve
  double rss = 0.0;
  int iterations = 0;
};

// Least squares of pbar against the closed-form curve: grid over
// s = gamma_CL + gamma_LC with gamma_CL profiled out, then projected
// Gauss-Newton on (gamma_CL, s), s <= 50. A trace that saturates within a
// cycle drives gamma_LC past 1; rates then carry it clamped and flagged.
// Throws FitDiverged on an all-zero trace.
FitResult fit_pbar(const std::vector<double>& pbar);

struct FitSummary {
  FitResult fit;
  double sigma_gamma_CL = 0.0;
  double sigma_gamma_LC = 0.0;
  double sigma_lifetime = 0.0;
  double sigma_steady_state = 0.0;
  int bootstrap_samples = 0;
};

// Fit of the run average plus a bootstrap over runs for the error bars.
FitSummary fit_trace(const LeakageTrace& trace, int bootstrap_samples = 200, std::uint64_t seed = 1);

// Counter-based uniform in [0, 1) for a key tuple.
double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace reslru
