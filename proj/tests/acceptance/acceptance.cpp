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

// Acceptance run: one PASS/FAIL line per criterion with the measured
// numbers. Always exits 0 unless the harness itself breaks.

#include <sys/wait.h>

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "reslru/lindblad.hpp"
#include "reslru/markov.hpp"
#include "reslru/optimizer.hpp"
#include "reslru/swt.hpp"

using namespace reslru;
namespace fs = std::filesystem;

namespace {

constexpr double kMHz = kTwoPi * 1e6;
constexpr double kOpOmega = kTwoPi * 204e6;
constexpr double kOpOmegaD = kTwoPi * 5.2464e9;
constexpr double kOpTp = 178.6e-9;
constexpr double kTslot = 440e-9;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

DrivePulse op_pulse() {
  DrivePulse p;
  p.Omega = kOpOmega;
  p.omega_d = kOpOmegaD;
  p.t_rise = 30e-9;
  p.t_p = kOpTp;
  return p;
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------

Verdict crossing_validation() {
  const DeviceParams p = DeviceParams::standard();
  std::vector<CrossingComparison> rows;
  for (double f : {50e6, 100e6, 200e6, 300e6, 400e6, 500e6}) rows.push_back(compare_crossing(p, kTwoPi * f));
  bool ordering = true;
  for (const auto& c : rows) {
    if (c.Omega <= kTwoPi * 100e6 * (1 + 1e-12)) continue;
    ordering &= std::fabs(c.omega_d_order3 - c.omega_d_exact) < std::fabs(c.omega_d_lowest - c.omega_d_exact);
    ordering &= std::fabs(c.g_order3 - c.g_exact) < std::fabs(c.g_lowest - c.g_exact);
  }
  auto gerr = [&](int i, bool lowest) {
    return std::fabs((lowest ? rows[i].g_lowest : rows[i].g_order3) - rows[i].g_exact);
  };
  const double ratio_lowest = gerr(4, true) / gerr(2, true);
  const double ratio_order3 = gerr(4, false) / gerr(2, false);
  const bool pass = ordering && ratio_lowest > 3.0 && ratio_order3 < 3.0;
  return {pass, fmt("order-3 closer above 100 MHz: %s; g~ error ratio 400/200 MHz lowest-order %.2f (>3), "
                    "order-3 %.2f (<3)",
                    ordering ? "yes" : "no", ratio_lowest, ratio_order3)};
}

Verdict operating_point() {
  const DeviceParams p = DeviceParams::standard();
  const DrivePulse d = op_pulse();
  const double p2 = run_lru(p, d, 2, kTslot).p2_final;
  const double i0 = run_lru(p, d, 0, kTslot).p2_final;
  const double i1 = run_lru(p, d, 1, kTslot).p2_final;
  const bool pass = p2 <= 0.01 && std::fabs(i0 - 0.0048) <= 0.0015 && i1 <= 0.001;
  return {pass, fmt("p2 from |2> %.3f%% (<=1%%), from |0> %.3f%% (0.48+-0.15%%), from |1> %.4f%% (<=0.1%%)",
                    100 * p2, 100 * i0, 100 * i1)};
}

Verdict critical_amplitude_check() {
  const double w = rad_to_hz(critical_amplitude(DeviceParams::standard())) / 1e6;
  return {std::fabs(w - 143.0) <= 5.0, fmt("Omega_cr/2pi = %.2f MHz (143+-5)", w)};
}

Verdict effective_coherences() {
  const DeviceParams p = DeviceParams::standard();
  DrivePulse idle = op_pulse();
  idle.Omega = 0.0;
  const double T2_idle = effective_T2(p, idle, kTslot);
  const double T1_op = effective_T1(p, op_pulse(), kTslot);
  const std::optional<double> T1_up = excitation_time(p, op_pulse(), kTslot);
  DeviceParams cold = p;
  cold.nbar = 0.0;
  const double T2_cold = effective_T2(cold, idle, kTslot);

  // 10 x 10 sub-landscape: t_p optimized per point, then T1 from |1>.
  OptimizerConfig oc;
  oc.measure_induced = false;
  oc.measure_coherence = false;
  const double Omega_cr = critical_amplitude(p, oc.Omega_max);
  double T1_ref = 0.0, worst = 0.0, worst_O = 0.0, worst_w = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double Omega = kTwoPi * 50e6 * i;
    for (int j = 0; j < 10; ++j) {
      const double wd = oc.omega_d_min + (oc.omega_d_max - oc.omega_d_min) * j / 9.0;
      DrivePulse d = op_pulse();
      d.Omega = Omega;
      d.omega_d = wd;
      d.t_p = Omega == 0.0 ? kTslot : optimize_tp(p, Omega, wd, oc, Omega_cr).t_p;
      const double T1 = effective_T1(p, d, kTslot);
      if (i == 0) {
        T1_ref += T1 / 10.0;
        continue;
      }
      const double s = 1.0 - T1 / T1_ref;
      if (s > worst) {
        worst = s;
        worst_O = Omega;
        worst_w = wd;
      }
    }
  }
  const bool ok_T2 = std::fabs(T2_idle - 7.7e-6) <= 0.3e-6;
  const bool ok_T1 = std::fabs(T1_op - 27.1e-6) <= 1.5e-6;
  const bool ok_sup = worst <= 0.20;
  const bool ok_up = T1_up && *T1_up >= 170e-6 && *T1_up <= 390e-6;
  const bool ok_cold = std::fabs(T2_cold / 30e-6 - 1.0) <= 0.005;
  return {ok_T2 && ok_T1 && ok_sup && ok_up && ok_cold,
          fmt("T2(Omega=0) %.2f us [%s]; T1(op) %.2f us (27.1+-1.5) [%s]; worst T1 suppression %.1f%% at "
              "(%.0f MHz, %.4f GHz) [%s]; T1up(op) %.0f us (170..390) [%s]; T2 at nbar=0 %.3f us [%s]",
              T2_idle * 1e6, ok_T2 ? "ok" : "off", T1_op * 1e6, ok_T1 ? "ok" : "off", 100 * worst,
              rad_to_hz(worst_O) / 1e6, rad_to_hz(worst_w) / 1e9, ok_sup ? "ok" : "off",
              T1_up ? *T1_up * 1e6 : INFINITY, ok_up ? "ok" : "off", T2_cold * 1e6, ok_cold ? "ok" : "off")};
}

Verdict long_drive() {
  const DeviceParams p = DeviceParams::standard();
  const Trajectory tr = long_drive_run(p, kOpOmega, kOpOmegaD, kTslot, 30e-9, 2, {0.0, kTslot});
  const Dims d = tr.dims;
  const double p20 = tr.populations.back()[d.index(2, 0)];
  const double p01 = tr.populations.back()[d.index(0, 1)];
  DrivePulse on = op_pulse();
  on.t_p = kTslot;
  const double T1_long = effective_T1(p, on, kTslot, Envelope::AlwaysOn);
  const double T1_pulsed = effective_T1(p, op_pulse(), kTslot);
  const bool ok_pop = p20 <= 2 * p.nbar && p01 <= 2 * p.nbar;
  const bool ok_T1 = std::fabs(T1_long - 23e-6) <= 2e-6 && T1_long < T1_pulsed;
  return {ok_pop && ok_T1, fmt("|2,0> %.4f, |0,1> %.4f (<= %.3f) [%s]; T1 always-on %.2f us (23+-2) vs pulsed "
                               "%.2f us [%s]",
                               p20, p01, 2 * p.nbar, ok_pop ? "ok" : "off", T1_long * 1e6, T1_pulsed * 1e6,
                               ok_T1 ? "ok" : "off")};
}

Verdict zz_robustness() {
  const DeviceParams p = DeviceParams::standard();
  std::vector<double> zetas;
  for (int k = -4; k <= 4; ++k) zetas.push_back(k * 0.5 * kMHz);
  const auto pts = zz_sensitivity(p, op_pulse(), zetas, kTslot);
  double Rmin = 1.0;
  Eigen::MatrixXd A(pts.size(), 3);
  Eigen::VectorXd y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double z = pts[i].zeta / kMHz;
    A.row(i) << 1.0, z, z * z;
    y(i) = pts[i].R;
    Rmin = std::min(Rmin, pts[i].R);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  const double ss_res = (y - A * c).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  const double r2 = 1.0 - ss_res / ss_tot;
  return {Rmin >= 0.95 && r2 > 0.95,
          fmt("min R over |zeta|/2pi <= 2 MHz %.4f (>=0.95); quadratic fit R^2 %.4f (>0.95), curvature %.4f/MHz^2",
              Rmin, r2, c(2))};
}

Verdict swt_suite() {
  // (a) generic series on a random three-block problem.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 9;
  RVector h0(n);
  BlockMap blocks(n);
  for (int i = 0; i < n; ++i) {
    blocks[i] = i % 3;
    h0(i) = 4.0 * blocks[i] + 0.3 * i + 0.1 * u(rng);
  }
  CMatrix W = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (blocks[i] != blocks[j]) {
        W(i, j) = cdouble(u(rng), u(rng));
        W(j, i) = std::conj(W(i, j));
      }
  const CMatrix H0 = h0.cast<cdouble>().asDiagonal();
  auto off = [&](double eps) {
    const SwtSeries s = schrieffer_wolff_series(h0, eps * W, blocks);
    const CMatrix S = s.S1 + s.S2 + s.S3;
    return max_abs(block_off_diagonal_part(S.exp() * (H0 + eps * W) * (-S).exp(), blocks));
  };
  const double ratio = off(0.01) / off(0.005);
  const bool ok_a = std::fabs(ratio - 16.0) <= 3.0;

  // (b) closed forms against commutator-series evaluation.
  const DeviceParams p = DeviceParams::standard();
  const double wd = kTwoPi * 5.25e9;
  DeviceParams p0 = p;
  p0.g = 0.0;
  const CMatrix Hs0 = build_static_hamiltonian(p0, wd).entries;
  const CMatrix Hc = build_static_hamiltonian(p, wd).entries - Hs0;
  const double cap = max_abs(commutator(Hs0, s1_capacitive(p).entries) - Hc) / p.g;

  DrivePulse d;
  d.Omega = kOpOmega;
  d.omega_d = wd;
  d.phi = 0.3;
  const int L = 12;
  RVector E(L);
  for (int m = 0; m < L; ++m) {
    E(m) = m * (p.omega_q - wd) + 0.5 * p.alpha * m * (m - 1);
    if (m > 0) E(m) += p.g * p.g * m / (p.Delta() + p.alpha * (m - 1));
  }
  CMatrix V = CMatrix::Zero(L, L);
  for (int m = 0; m + 1 < L; ++m) {
    V(m, m + 1) = 0.5 * d.Omega * std::polar(1.0, d.phi) * std::sqrt(m + 1.0);
    V(m + 1, m) = std::conj(V(m, m + 1));
  }
  BlockMap tb(L);
  for (int m = 0; m < L; ++m) tb[m] = m;
  const SwtSeries ora = schrieffer_wolff_series(E, V, tb);
  const SWTGenerators gen = second_swt_generators(p, d);
  const Dims dm = gen.S1_prime.dims;
  double gen_err = 0.0;
  for (int m = 0; m < dm.n_t; ++m)
    for (int k = 0; k < dm.n_t; ++k) {
      const int i = dm.index(m, 0), j = dm.index(k, 0);
      gen_err = std::max({gen_err, std::abs(gen.S1_prime(i, j) - ora.S1(m, k)),
                          std::abs(gen.S2_prime(i, j) - ora.S2(m, k)), std::abs(gen.S3_prime(i, j) - ora.S3(m, k))});
    }
  double level_err = 0.0;
  for (int m = 0; m <= 3; ++m)
    level_err = std::max(level_err, std::fabs(double_dressed_level(p, d.Omega, wd, m) - ora.H_prime(m, m).real()));

  DeviceParams p9 = p;
  p9.n_transmon = 9;
  DrivePulse d9 = op_pulse();
  d9.phi = 0.3;
  const SWTGenerators g9 = second_swt_generators(p9, d9);
  const CMatrix& Hd2 = dressed_drive_terms(p9, d9).H_d2.entries;
  const CMatrix& S1 = g9.S1_prime.entries;
  const CMatrix series = Hd2 + commutator(S1, Hd2) + commutator(g9.S2_prime.entries, Hd2) +
                         0.5 * commutator(S1, commutator(S1, Hd2));
  const CMatrix approx = effective_coupling(p9, d9, d9.omega_d).entries + residual_coupling(p9, d9, d9.omega_d).entries;
  const Dims d9d{p9.n_transmon, p9.n_resonator};
  double coup_err = 0.0;
  for (int i = 0; i < d9d.size(); ++i)
    for (int j = 0; j < d9d.size(); ++j)
      if (d9d.transmon(i) <= 4 && d9d.transmon(j) <= 4)
        coup_err = std::max(coup_err, std::abs(approx(i, j) - series(i, j)));
  coup_err /= max_abs(Hd2);
  const bool ok_b = cap < 1e-9 && gen_err < 1e-12 && level_err < kTwoPi * 1e3 && coup_err < 1e-9;

  // (c) order-3 and lowest-order g~ agree at small amplitude.
  const CrossingComparison c = compare_crossing(p, kTwoPi * 10e6);
  const double gr = c.g_order3 / c.g_lowest;
  const bool ok_c = std::fabs(gr - 1.0) <= 0.01;
  return {ok_a && ok_b && ok_c,
          fmt("(a) off-diagonal reduction on halving %.2f (16+-3); (b) capacitive %.1e g, generators %.1e, levels "
              "%.2f kHz, couplings %.1e; (c) g~ ratio at 10 MHz %.5f",
              ratio, cap, gen_err, rad_to_hz(level_err) / 1e3, coup_err, gr)};
}

Verdict markov_layer() {
  const auto layout = surface17_layout();
  const double L1 = 0.005, L2 = 0.01;
  const LRUParams fig{0.95, 0.0025, 0.9, 0.995};
  MonteCarloOptions mo;
  const int cycles = 20, runs = 20000;

  auto lifetimes = [&](const LRUParams& lru, bool data, bool anc) {
    std::map<std::string, FitSummary> out;
    for (const auto& [name, tr] : monte_carlo_surface17(layout, L1, L2, lru, data, anc, cycles, runs, 1, mo))
      out[name] = fit_trace(tr, 200, 1);
    return out;
  };
  const auto none = lifetimes(fig, false, false);
  double min_none = INFINITY;
  for (const QubitSpec& q : layout)
    if (q.leakage_prone && q.n_flux >= 2) min_none = std::min(min_none, none.at(q.name).fit.lifetime);
  const auto with = lifetimes(fig, true, true);
  double max_lru = 0.0;
  for (const auto& [name, s] : with) max_lru = std::max(max_lru, s.fit.lifetime);

  LRUParams full = fig;
  full.R = 1.0;
  const auto r1 = lifetimes(full, true, false);
  double max_z = 0.0;
  for (const QubitSpec& q : layout)
    if (q.role == QubitRole::Data && q.leakage_prone) {
      const FitSummary& s = r1.at(q.name);
      max_z = std::max(max_z, std::fabs(s.fit.steady_state - (q.n_flux * L1 + full.L1_LRU)) / s.sigma_steady_state);
    }

  double round_trip = 0.0;
  for (const MarkovRates& r : {MarkovRates{0.015, 0.08}, MarkovRates{0.02, 0.3}, MarkovRates{0.005, 0.06},
                               MarkovRates{0.01, 0.9}}) {
    const FitResult f = fit_pbar(pbar_curve(r, cycles));
    round_trip = std::max({round_trip, std::fabs(f.rates.gamma_CL / r.gamma_CL - 1.0),
                           std::fabs(f.rates.gamma_LC / r.gamma_LC - 1.0)});
  }
  const bool pass = min_none >= 8.0 && max_lru <= 1.3 && max_z <= 3.0 && round_trip <= 1e-6;
  return {pass, fmt("(a) min lifetime without LRU, n_flux>=2: %.2f (>=8); (b) max lifetime with LRUs %.3f (<=1.3); "
                    "(c) max |z| of R=1 steady state %.2f (<=3); (d) round-trip rel. error %.1e (<=1e-6)",
                    min_none, max_lru, max_z, round_trip)};
}

Verdict qutrit_channel() {
  const LRUParams lru{0.995, 0.0025, 0.9, 0.995};
  const double t = 100e-9, T1 = 30e-6;
  const QutritChannel ch = build_res_lru_channel(lru, t, T1, 60e-6);
  const Eigen::Matrix3d P = ch.population_transfer();
  const double choi = ch.choi_min_eigenvalue();
  const double tp = ch.trace_preservation_error();
  double dev = 0.0;
  const Populations3 in[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int j = 0; j < 3; ++j) {
    const Populations3 m = res_lru_population_map(in[j], lru);
    dev = std::max({dev, std::fabs(P(0, j) - m.p0), std::fabs(P(1, j) - m.p1), std::fabs(P(2, j) - m.p2)});
  }
  const bool pass = choi >= -1e-9 && tp <= 1e-9 && std::fabs(P(2, 2) - (1 - lru.R)) <= 1e-3 &&
                    std::fabs(P(2, 0) - 2 * lru.L1_LRU) <= 1e-4 && dev <= 2 * t / T1;
  return {pass, fmt("Choi min %.1e, TP error %.1e; p2 from |2> %.5f (%.3f+-1e-3); p2 from |0> %.5f (%.4f+-1e-4); "
                    "map deviation %.2e (<= %.2e)",
                    choi, tp, P(2, 2), 1 - lru.R, P(2, 0), 2 * lru.L1_LRU, dev, 2 * t / T1)};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RESLRU_CLI_PATH) + " " + args + " -q";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "reslru_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::map<std::string, std::string> configs{
      {"crossing", "[crossing]\nOmega_list_hz = 100e6, 300e6\n"},
      {"evolve", "[evolve]\nlevels = 0, 2\nsamples = 45\n"},
      {"heatmap",
       "[heatmap]\nOmega_min_hz = 150e6\nOmega_max_hz = 300e6\ngrid_Omega = 4\ngrid_omega_d = 4\nsample_budget = 16\n"
       "measure_induced = false\nmeasure_coherence = false\n"},
      {"zz", "[zz]\npoints = 3\ninclude_critical = false\n"},
      {"markov", "[markov]\ncycles = 10\nruns = 2000\nbootstrap = 20\nR_sweep = 0.5, 1\npM22_sweep = 0.9\n"},
  };
  int files = 0, mismatched = 0, failures = 0;
  std::string bad;
  for (const auto& [cmd, text] : configs) {
    const fs::path ini = root / (cmd + ".ini");
    std::ofstream(ini) << text;
    const fs::path a = root / (cmd + "_a"), b = root / (cmd + "_b"), c = root / (cmd + "_c");
    failures += run_cli(cmd + " --config " + ini.string() + " --seed 5 --threads 1 --out " + a.string()) != 0;
    failures += run_cli(cmd + " --config " + ini.string() + " --seed 5 --threads 1 --out " + b.string()) != 0;
    const bool threaded = cmd == "markov" || cmd == "heatmap";
    if (threaded)
      failures += run_cli(cmd + " --config " + ini.string() + " --seed 5 --threads 3 --out " + c.string()) != 0;
    if (!fs::exists(a)) continue;
    for (const auto& e : fs::directory_iterator(a)) {
      const std::string name = e.path().filename().string();
      if (e.path().extension() != ".csv") continue;
      ++files;
      const std::string ref = slurp(e.path());
      if (ref != slurp(b / name) || (threaded && ref != slurp(c / name))) {
        ++mismatched;
        bad += " " + cmd + "/" + name;
      }
    }
  }
  fs::remove_all(root);
  return {failures == 0 && mismatched == 0 && files > 0,
          fmt("%d CSVs across 5 commands, %d differing%s; %d failed runs; markov and heatmap also at 3 threads", files,
              mismatched, bad.c_str(), failures)};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional argument: run only criteria whose label contains it, e.g. "AC10".
  const std::string only = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Verdict()>>> checks{
      {"AC1 avoided-crossing validation", crossing_validation},
      {"AC2 operating-point leakage removal", operating_point},
      {"AC3 critical amplitude", critical_amplitude_check},
      {"AC4 effective coherences", effective_coherences},
      {"AC5 long-drive comparison", long_drive},
      {"AC6 ZZ robustness", zz_robustness},
      {"AC7 SWT oracle suite", swt_suite},
      {"AC8 Markov layer", markov_layer},
      {"AC9 qutrit channel", qutrit_channel},
      {"AC10 determinism", determinism},
  };
  int passed = 0, ran = 0;
  for (const auto& [name, fn] : checks) {
    if (!only.empty() && (name + " ").find(only + " ") == std::string::npos) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    passed += v.pass;
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", passed, ran);
  return 0;
}
