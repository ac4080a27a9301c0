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

#include "reslru/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "reslru/numerics.hpp"
#include "reslru/swt.hpp"

namespace reslru {

void OptimizerConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::InvalidArgument, m); };
  if (!(t_rise >= 0.0) || !(T_slot >= 2.0 * t_rise)) bad("need T_slot >= 2 t_rise >= 0");
  if (!(Omega_max > Omega_min) || Omega_min < 0.0) bad("empty Omega range");
  if (!(omega_d_max > omega_d_min) || omega_d_min <= 0.0) bad("empty omega_d range");
  if (grid_Omega < 2 || grid_omega_d < 2) bad("grid needs at least 2 x 2 samples");
  if (sample_budget < 16) bad("sample budget must be at least 16");
  if (!(tp_tolerance > 0.0)) bad("tp_tolerance must be positive");
  if (!(checkpoint_spacing > 0.0)) bad("checkpoint_spacing must be positive");
  if (!(p2_floor > 0.0)) bad("p2_floor must be positive");
  if (threads < 1) bad("threads must be at least 1");
}

double g_tilde_at_crossing(const DeviceParams& params, double Omega, GTildeSource source) {
  if (Omega == 0.0) return 0.0;
  const EffectiveCouplingReport a = solve_omega_d_star_analytic(params, Omega);
  if (source == GTildeSource::Order3) return a.g_tilde_order3;
  FrequencyScan scan = crossing_scan_around(a.omega_d_star_analytic, kTwoPi * 20e6, 41);
  scan.tolerance = kTwoPi * 10.0;
  return find_avoided_crossing_exact(params, Omega, scan).g_tilde;
}

double critical_amplitude(const DeviceParams& params, double Omega_max, GTildeSource source) {
  const double target = 0.25 * params.kappa;
  if (!(target > 0.0)) return 0.0;
  auto f = [&](double Om) { return g_tilde_at_crossing(params, Om, source) - target; };
  if (f(Omega_max) < 0.0) fail(ErrorCode::NoRoot, "g~ stays below kappa/4 over the Omega range");
  double lo = std::min(kTwoPi * 1e6, 0.5 * Omega_max);
  while (f(lo) >= 0.0) {
    lo *= 0.1;
    if (lo < kTwoPi * 1.0) return 0.0;
  }
  return bisect_root(f, lo, Omega_max, kTwoPi * 1e3);
}

double damped_rabi_guess(double g_tilde, double kappa) {
  const double q = 0.25 * kappa;
  if (!(g_tilde > q)) fail(ErrorCode::Overdamped, "g~ <= kappa/4: no damped oscillation");
  const double g_damp = std::sqrt(g_tilde * g_tilde - q * q) * std::exp(-kappa / (7.0 * g_tilde));
  return kPi / (2.0 * g_damp);
}

namespace {

// Infinity when the whole amplitude range is overdamped.
double critical_or_inf(const DeviceParams& params, double Omega_max) {
  try {
    return critical_amplitude(params, Omega_max);
  } catch (const NumericalError& e) {
    if (e.code() != ErrorCode::NoRoot) throw;
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

TpResult optimize_tp(const DeviceParams& params, double Omega, double omega_d, const OptimizerConfig& cfg,
                     std::optional<double> Omega_cr) {
  const double Ocr = Omega_cr ? *Omega_cr : critical_or_inf(params, std::max(Omega, cfg.Omega_max));
  DrivePulse base;
  base.Omega = Omega;
  base.omega_d = omega_d;
  base.t_rise = cfg.t_rise;
  TpResult res;
  if (Omega <= Ocr) {
    base.t_p = cfg.T_slot;
    res.t_p = res.lower = res.upper = cfg.T_slot;
    res.p2 = run_lru(params, base, 2, cfg.T_slot, {}, cfg.integrator).p2_final;
    res.evaluations = 1;
    res.full_slot = true;
    return res;
  }

  const double lo = 2.0 * cfg.t_rise;
  double hi = cfg.T_slot;
  const double g = g_tilde_at_crossing(params, Omega);
  if (Omega - Ocr >= cfg.near_critical_margin && g > 0.25 * params.kappa)
    hi = std::min(cfg.T_slot, lo + 1.1 * damped_rabi_guess(g, params.kappa));
  res.lower = lo;
  res.upper = hi;

  // Ramp-up and flat top do not depend on t_p: integrate them once and keep
  // checkpoints, then finish each candidate from the nearest one.
  const DressedFrame frame = diagonalize_static(params, omega_d);
  base.t_p = hi;
  LindbladEngine up(params, base, frame, Envelope::Pulsed, cfg.integrator);
  std::vector<double> ck_t{cfg.t_rise};
  std::vector<DensityMatrix> ck_rho{up.propagate(level_state(params, 2), 0.0, cfg.t_rise)};
  const double flat_end = hi - cfg.t_rise;
  while (ck_t.back() < flat_end) {
    const double next = std::min(ck_t.back() + cfg.checkpoint_spacing, flat_end);
    ck_rho.push_back(up.propagate(ck_rho.back(), ck_t.back(), next));
    ck_t.push_back(next);
  }

  auto p2_at = [&](double t_p) {
    ++res.evaluations;
    const double tf = t_p - cfg.t_rise;
    const auto it = std::upper_bound(ck_t.begin(), ck_t.end(), tf);
    const size_t k = it == ck_t.begin() ? 0 : static_cast<size_t>(it - ck_t.begin()) - 1;
    DrivePulse q = base;
    q.t_p = t_p;
    LindbladEngine eng(params, q, frame, Envelope::Pulsed, cfg.integrator);
    return leakage_population(eng.propagate(ck_rho[k], ck_t[k], cfg.T_slot));
  };

  if (hi - lo <= cfg.tp_tolerance) {
    res.t_p = hi;
    res.p2 = p2_at(hi);
    return res;
  }
  const ScalarMin m = minimize_bounded(p2_at, lo, hi, cfg.tp_tolerance);
  res.t_p = m.x;
  res.p2 = m.fx;
  return res;
}

LandscapePoint evaluate_point(const DeviceParams& params, double Omega, double omega_d,
                              const OptimizerConfig& cfg, double Omega_cr) {
  LandscapePoint pt;
  pt.Omega = Omega;
  pt.omega_d = omega_d;
  const TpResult tp = optimize_tp(params, Omega, omega_d, cfg, Omega_cr);
  pt.t_p_opt = tp.t_p;
  pt.p2_leaked = tp.p2;
  DrivePulse pulse;
  pulse.Omega = Omega;
  pulse.omega_d = omega_d;
  pulse.t_rise = cfg.t_rise;
  pulse.t_p = tp.t_p;
  if (cfg.measure_induced || cfg.measure_coherence) {
    const LruRun r1 = run_lru(params, pulse, 1, cfg.T_slot, {}, cfg.integrator);
    if (cfg.measure_induced) {
      pt.p2_induced_1 = r1.p2_final;
      pt.p2_induced_0 = run_lru(params, pulse, 0, cfg.T_slot, {}, cfg.integrator).p2_final;
      pt.measured_induced = true;
    }
    if (cfg.measure_coherence) {
      pt.eff_T1 = T1_from_population(transmon_reduced(r1.final_state)(1, 1).real(), cfg.T_slot);
      pt.eff_T2 = effective_T2(params, pulse, cfg.T_slot, Envelope::Pulsed, cfg.integrator);
      pt.measured_coherence = true;
    }
  }
  return pt;
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; results are written
// by index so the outcome does not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Cell {
  long u = 0, v = 0, size = 0;
  long id = 0;
  double score = 0.0;
};

}  // namespace

Landscape sweep_landscape(const DeviceParams& params, const OptimizerConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const int nO = cfg.grid_Omega, nW = cfg.grid_omega_d;
  if (cfg.sample_budget < nO * nW)
    fail(ErrorCode::BudgetExhausted, "sample budget smaller than the initial grid");

  // Integer lattice: every coarse cell has side 2^kLevels, so midpoints of
  // subdivided cells stay exact and deduplicate by key.
  constexpr int kLevels = 20;
  constexpr long kSide = 1L << kLevels;
  const double dO = (cfg.Omega_max - cfg.Omega_min) / (nO - 1) / kSide;
  const double dW = (cfg.omega_d_max - cfg.omega_d_min) / (nW - 1) / kSide;
  auto coord = [&](long u, long v) {
    return std::make_pair(cfg.Omega_min + u * dO, cfg.omega_d_min + v * dW);
  };

  Landscape out;
  out.Omega_cr = critical_or_inf(params, cfg.Omega_max);
  std::map<std::pair<long, long>, LandscapePoint> samples;

  auto evaluate = [&](const std::vector<std::pair<long, long>>& keys) {
    std::vector<std::pair<long, long>> todo;
    for (const auto& k : keys)
      if (!samples.count(k) && std::find(todo.begin(), todo.end(), k) == todo.end()) todo.push_back(k);
    std::vector<LandscapePoint> results(todo.size());
    parallel_for(static_cast<int>(todo.size()), cfg.threads, [&](int i) {
      const auto [Om, wd] = coord(todo[i].first, todo[i].second);
      results[i] = evaluate_point(params, Om, wd, cfg, out.Omega_cr);
    });
    for (size_t i = 0; i < todo.size(); ++i) samples.emplace(todo[i], results[i]);
  };

  auto loss = [&](const LandscapePoint& p) {
    const double l = std::log(std::max(p.p2_leaked, cfg.p2_floor));
    return l * l;
  };
  long next_id = 0;
  auto make_cell = [&](long u, long v, long s) {
    Cell c{u, v, s, next_id++, 0.0};
    const double L[4] = {loss(samples.at({u, v})), loss(samples.at({u + s, v})), loss(samples.at({u, v + s})),
                         loss(samples.at({u + s, v + s}))};
    double spread = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) spread = std::max(spread, std::fabs(L[a] - L[b]));
    const double area = (static_cast<double>(s) / kSide) * (static_cast<double>(s) / kSide) /
                        ((nO - 1.0) * (nW - 1.0));
    c.score = spread * area;
    return c;
  };

  std::vector<std::pair<long, long>> grid;
  for (int i = 0; i < nO; ++i)
    for (int j = 0; j < nW; ++j) grid.emplace_back(i * kSide, j * kSide);
  evaluate(grid);
  if (progress) progress("grid " + std::to_string(samples.size()) + " samples");

  std::vector<Cell> cells;
  for (int i = 0; i + 1 < nO; ++i)
    for (int j = 0; j + 1 < nW; ++j) cells.push_back(make_cell(i * kSide, j * kSide, kSide));

  while (static_cast<int>(samples.size()) < cfg.sample_budget) {
    auto best = cells.end();
    for (auto it = cells.begin(); it != cells.end(); ++it) {
      if (it->size < 2) continue;
      if (best == cells.end() || it->score > best->score ||
          (it->score == best->score && it->id < best->id))
        best = it;
    }
    if (best == cells.end()) break;
    const Cell c = *best;
    cells.erase(best);
    const long h = c.size / 2;
    evaluate({{c.u + h, c.v + h}, {c.u + h, c.v}, {c.u + h, c.v + c.size}, {c.u, c.v + h},
              {c.u + c.size, c.v + h}});
    for (long du : {0L, h})
      for (long dv : {0L, h}) cells.push_back(make_cell(c.u + du, c.v + dv, h));
    ++out.generations;
    if (progress) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "generation %d samples %zu cell_score %.4g", out.generations,
                    samples.size(), c.score);
      progress(buf);
    }
  }

  for (auto& [k, p] : samples) out.points.push_back(p);
  std::sort(out.points.begin(), out.points.end(), [](const LandscapePoint& a, const LandscapePoint& b) {
    return a.Omega != b.Omega ? a.Omega < b.Omega : a.omega_d < b.omega_d;
  });
  return out;
}

LandscapePoint refine_point(const DeviceParams& params, const LandscapePoint& start, const OptimizerConfig& cfg,
                            double Omega_cr) {
  OptimizerConfig quiet = cfg;
  double Om = start.Omega, wd = start.omega_d;
  const double r = cfg.refine_radius;
  auto p2 = [&](double O, double w) { return optimize_tp(params, O, w, quiet, Omega_cr).p2; };
  wd = minimize_bounded([&](double w) { return p2(Om, w); }, wd - r, wd + r, kTwoPi * 10e3).x;
  const double Olo = std::max(cfg.Omega_min, Om - r);
  Om = minimize_bounded([&](double O) { return p2(O, wd); }, Olo, Om + r, kTwoPi * 10e3).x;
  return evaluate_point(params, Om, wd, cfg, Omega_cr);
}

OperatingPoint select_operating_point(const std::vector<LandscapePoint>& points, double p2_threshold,
                                      double T1_ref, double T2_ref) {
  if (!(T1_ref > 0.0) || !(T2_ref > 0.0)) fail(ErrorCode::InvalidArgument, "reference times must be positive");
  const LandscapePoint* best = nullptr;
  double best_score = -1.0;
  int candidates = 0;
  for (const LandscapePoint& p : points) {
    if (!(p.p2_leaked <= p2_threshold)) continue;
    if (!p.measured_coherence) fail(ErrorCode::InvalidArgument, "candidate without coherence data");
    ++candidates;
    const double s = std::min(p.eff_T1 / T1_ref, p.eff_T2 / T2_ref);
    if (!best || s > best_score || (s == best_score && p.Omega < best->Omega)) {
      best = &p;
      best_score = s;
    }
  }
  if (!best) fail(ErrorCode::NoCandidate, "no landscape point below the leakage threshold");
  OperatingPoint op;
  op.point = *best;
  op.score = best_score;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "p2=%.4g <= %.4g among %d candidates; score min(T1/%.4g us, T2/%.4g us) = %.4f", best->p2_leaked,
                p2_threshold, candidates, T1_ref * 1e6, T2_ref * 1e6, best_score);
  op.rationale = buf;
  return op;
}

OperatingPoint select_operating_point(const std::vector<LandscapePoint>& points, double p2_threshold) {
  double t1 = 0.0, t2 = 0.0;
  int n = 0;
  for (const LandscapePoint& p : points)
    if (p.Omega == 0.0 && p.measured_coherence) {
      t1 += p.eff_T1;
      t2 += p.eff_T2;
      ++n;
    }
  if (n == 0) fail(ErrorCode::InvalidArgument, "no Omega = 0 samples to take references from");
  return select_operating_point(points, p2_threshold, t1 / n, t2 / n);
}

}  // namespace reslru
