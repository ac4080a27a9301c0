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

#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "reslru/errors.hpp"
#include "reslru/swt.hpp"

namespace reslru::cli {

namespace fs = std::filesystem;

namespace {

// Fixed format so repeated runs give identical bytes.
std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += "\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void emit(const fs::path& out, const std::string& name, const std::string& text, RunOutput& result) {
  write_file_atomic(out / name, text);
  result.files.push_back(name);
}

void say(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

DrivePulse drive_pulse(const ExperimentConfig& cfg) {
  DrivePulse p;
  p.Omega = cfg.drive.Omega;
  p.omega_d = cfg.drive.omega_d;
  p.t_rise = cfg.drive.t_rise;
  p.t_p = cfg.drive.t_p;
  return p;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return xs;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::vector<std::string> header{"t_s"};
  for (int m = 0; m < tr.dims.n_t; ++m)
    for (int l = 0; l < tr.dims.n_r; ++l) header.push_back("p_" + std::to_string(m) + "_" + std::to_string(l));
  header.push_back("p_leak");
  Csv csv(header);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<std::string> row{num(tr.times[k])};
    double leak = 0.0;
    for (int i = 0; i < tr.dims.size(); ++i) {
      row.push_back(num(tr.populations[k][i]));
      if (tr.dims.transmon(i) >= 2) leak += tr.populations[k][i];
    }
    row.push_back(num(leak));
    csv.row(row);
  }
  return csv.text();
}

double transmon_population(const Trajectory& tr, std::size_t k, int m) {
  double p = 0.0;
  for (int l = 0; l < tr.dims.n_r; ++l) p += tr.populations[k][tr.dims.index(m, l)];
  return p;
}

std::vector<QubitSpec> layout_for(const MarkovSection& m) {
  if (m.layout_file.empty()) return surface17_layout();
  std::ifstream in(m.layout_file);
  if (!in) throw ConfigError("markov.layout_file", 0, "cannot read layout file '" + m.layout_file + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_layout_json(ss.str());
}

const char* role_name(QubitRole r) { return r == QubitRole::Data ? "data" : "ancilla"; }

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunOutput cmd_crossing(const ExperimentConfig& cfg, const fs::path& out, const Log& log) {
  RunOutput result;
  Csv csv({"Omega_Hz", "omega_d_star_exact_Hz", "omega_d_star_order3_Hz", "omega_d_star_lowest_Hz",
           "g_tilde_exact_Hz", "g_tilde_order3_Hz", "g_tilde_lowest_Hz", "omega_d_star_error_order3_Hz",
           "omega_d_star_error_lowest_Hz", "g_tilde_error_order3_Hz", "g_tilde_error_lowest_Hz"});
  for (double Omega : cfg.crossing.Omegas) {
    const CrossingComparison c = compare_crossing(cfg.device, Omega, cfg.crossing.scan_half_width);
    say(log, "crossing at Omega/2pi = " + num(rad_to_hz(Omega)) + " Hz");
    csv.row({num(rad_to_hz(c.Omega)), num(rad_to_hz(c.omega_d_exact)), num(rad_to_hz(c.omega_d_order3)),
             num(rad_to_hz(c.omega_d_lowest)), num(rad_to_hz(c.g_exact)), num(rad_to_hz(c.g_order3)),
             num(rad_to_hz(c.g_lowest)), num(rad_to_hz(c.omega_d_order3 - c.omega_d_exact)),
             num(rad_to_hz(c.omega_d_lowest - c.omega_d_exact)), num(rad_to_hz(c.g_order3 - c.g_exact)),
             num(rad_to_hz(c.g_lowest - c.g_exact))});
  }
  emit(out, "crossing.csv", csv.text(), result);
  return result;
}

RunOutput cmd_evolve(const ExperimentConfig& cfg, const fs::path& out, const Log& log) {
  RunOutput result;
  const DrivePulse pulse = drive_pulse(cfg);
  const double T = cfg.drive.T_slot;
  const std::vector<double> times = linspace(0.0, T, cfg.evolve.samples);
  const std::string prefix = cfg.evolve.long_drive ? "long_drive" : "evolve";
  Csv summary({"level", "p0_final", "p1_final", "p2_final", "p_leak_final", "p_resonator_excited_final"});
  for (int level : cfg.evolve.levels) {
    say(log, prefix + " from level " + std::to_string(level));
    const Trajectory tr =
        cfg.evolve.long_drive
            ? long_drive_run(cfg.device, pulse.Omega, pulse.omega_d, T, pulse.t_rise, level, times, cfg.integrator)
            : run_lru(cfg.device, pulse, level, T, times, cfg.integrator).trajectory;
    emit(out, prefix + "_level" + std::to_string(level) + ".csv", trajectory_csv(tr), result);
    const std::size_t k = tr.times.size() - 1;
    double leak = 0.0, res = 0.0;
    for (int i = 0; i < tr.dims.size(); ++i) {
      if (tr.dims.transmon(i) >= 2) leak += tr.populations[k][i];
      if (tr.dims.resonator(i) >= 1) res += tr.populations[k][i];
    }
    summary.row({std::to_string(level), num(transmon_population(tr, k, 0)), num(transmon_population(tr, k, 1)),
                 num(transmon_population(tr, k, 2)), num(leak), num(res)});
  }
  emit(out, prefix + "_summary.csv", summary.text(), result);
  return result;
}

RunOutput cmd_heatmap(const ExperimentConfig& cfg, const fs::path& out, const Log& log) {
  RunOutput result;
  OptimizerConfig oc = cfg.optimizer;
  oc.t_rise = cfg.drive.t_rise;
  oc.T_slot = cfg.drive.T_slot;
  oc.integrator = cfg.integrator;
  oc.threads = cfg.threads;
  const Landscape land = sweep_landscape(cfg.device, oc, log);
  Csv csv({"Omega_Hz", "omega_d_Hz", "t_p_s", "p2_leaked", "p2_induced_0", "p2_induced_1", "eff_T1_s",
           "eff_T2_s"});
  for (const LandscapePoint& p : land.points)
    csv.row({num(rad_to_hz(p.Omega)), num(rad_to_hz(p.omega_d)), num(p.t_p_opt), num(p.p2_leaked),
             p.measured_induced ? num(p.p2_induced_0) : "", p.measured_induced ? num(p.p2_induced_1) : "",
             p.measured_coherence ? num(p.eff_T1) : "", p.measured_coherence ? num(p.eff_T2) : ""});
  emit(out, "heatmap.csv", csv.text(), result);

  OperatingPoint op;
  if (!oc.measure_coherence) {
    // No coherence maps: fall back to the least leaky point.
    const auto it = std::min_element(land.points.begin(), land.points.end(),
                                     [](const auto& a, const auto& b) { return a.p2_leaked < b.p2_leaked; });
    if (it == land.points.end()) throw NumericalError(ErrorCode::NoCandidate, "empty landscape");
    op.point = *it;
    op.score = 0.0;
    op.rationale = "coherence maps off; lowest p2 = " + num(it->p2_leaked);
  } else if (std::any_of(land.points.begin(), land.points.end(), [](const auto& p) { return p.Omega == 0.0; })) {
    op = select_operating_point(land.points, cfg.heatmap.p2_threshold);
  } else {
    say(log, "undriven reference coherence times");
    DrivePulse idle = drive_pulse(cfg);
    idle.Omega = 0.0;
    const double T1_ref = effective_T1(cfg.device, idle, oc.T_slot, Envelope::Pulsed, oc.integrator);
    const double T2_ref = effective_T2(cfg.device, idle, oc.T_slot, Envelope::Pulsed, oc.integrator);
    op = select_operating_point(land.points, cfg.heatmap.p2_threshold, T1_ref, T2_ref);
  }
  if (cfg.heatmap.refine) {
    say(log, "refining operating point");
    op.point = refine_point(cfg.device, op.point, oc, land.Omega_cr);
  }
  nlohmann::ordered_json j;
  j["Omega_Hz"] = rad_to_hz(op.point.Omega);
  j["omega_d_Hz"] = rad_to_hz(op.point.omega_d);
  j["t_p_s"] = op.point.t_p_opt;
  j["p2_leaked"] = op.point.p2_leaked;
  j["p2_induced_0"] = op.point.p2_induced_0;
  j["p2_induced_1"] = op.point.p2_induced_1;
  j["eff_T1_s"] = op.point.eff_T1;
  j["eff_T2_s"] = op.point.eff_T2;
  j["score"] = op.score;
  j["rationale"] = op.rationale;
  j["refined"] = cfg.heatmap.refine;
  if (std::isfinite(land.Omega_cr))
    j["Omega_cr_Hz"] = rad_to_hz(land.Omega_cr);
  else
    j["Omega_cr_Hz"] = nullptr;
  emit(out, "operating_point.json", j.dump(2) + "\n", result);
  return result;
}

RunOutput cmd_zz(const ExperimentConfig& cfg, const fs::path& out, const Log& log) {
  RunOutput result;
  const std::vector<double> zetas = linspace(-cfg.zz.zeta_max, cfg.zz.zeta_max, cfg.zz.points);
  Csv csv({"point", "Omega_Hz", "omega_d_Hz", "t_p_s", "zeta_Hz", "R"});
  auto sweep = [&](const std::string& name, const DrivePulse& pulse) {
    say(log, "zz sweep at " + name + " point");
    for (const ZZPoint& z : zz_sensitivity(cfg.device, pulse, zetas, cfg.drive.T_slot, cfg.integrator))
      csv.row({name, num(rad_to_hz(pulse.Omega)), num(rad_to_hz(pulse.omega_d)), num(pulse.t_p),
               num(rad_to_hz(z.zeta)), num(z.R)});
  };
  sweep("operating", drive_pulse(cfg));
  if (cfg.zz.include_critical) {
    const double Omega_cr = critical_amplitude(cfg.device, cfg.optimizer.Omega_max);
    DrivePulse crit = drive_pulse(cfg);
    crit.Omega = Omega_cr;
    crit.omega_d = compare_crossing(cfg.device, Omega_cr, cfg.crossing.scan_half_width).omega_d_exact;
    crit.t_p = cfg.drive.T_slot;
    sweep("critical", crit);
  }
  emit(out, "zz.csv", csv.text(), result);
  return result;
}

RunOutput cmd_markov(const ExperimentConfig& cfg, const fs::path& out, const Log& log) {
  RunOutput result;
  const MarkovSection& m = cfg.markov;
  const std::vector<QubitSpec> layout = layout_for(m);
  const double L2 = m.L2_value();
  MonteCarloOptions mo;
  mo.t_c = m.schedule.t_c;
  mo.T1 = m.schedule.T1;
  mo.p0_occupancy = m.p0_occupancy;
  mo.threads = cfg.threads;

  Csv traces({"sweep", "value", "qubit", "cycle", "pbar", "stderr"});
  Csv fits({"sweep", "value", "qubit", "role", "n_flux", "lru_applied", "gamma_CL", "gamma_LC", "clamped",
            "lifetime", "sigma_lifetime", "steady_state", "sigma_steady_state", "steady_state_model",
            "lifetime_model"});
  nlohmann::ordered_json jfits = nlohmann::ordered_json::array();

  auto run = [&](const std::string& sweep, double value, const LRUParams& lru, bool data_lru, bool anc_lru) {
    say(log, "markov " + sweep + " = " + num(value));
    const auto res = monte_carlo_surface17(layout, m.L1, L2, lru, data_lru, anc_lru, m.cycles, m.runs, cfg.seed, mo);
    for (const QubitSpec& q : layout) {
      const auto it = res.find(q.name);
      if (it == res.end()) continue;
      const LeakageTrace& tr = it->second;
      for (int c = 0; c < tr.cycles; ++c)
        traces.row({sweep, num(value), q.name, std::to_string(c + 1), num(tr.pbar[c]), num(tr.stderr_[c])});
      const bool applied = q.role == QubitRole::Data ? data_lru : anc_lru;
      MarkovRates model = rates_from_physical(q.n_flux, m.L1, L2, m.schedule.t_c, m.schedule.T1);
      if (applied) model = lru_augmented_rates(model, lru, q.role, m.p0_occupancy);
      const FitSummary fs = fit_trace(tr, m.bootstrap, cfg.seed);
      const double model_life = model.gamma_LC > 0 ? lifetime(model) : std::numeric_limits<double>::infinity();
      fits.row({sweep, num(value), q.name, role_name(q.role), std::to_string(q.n_flux), applied ? "1" : "0",
                num(fs.fit.rates.gamma_CL), num(fs.fit.rates.gamma_LC), fs.fit.rates.clamped ? "1" : "0",
                num(fs.fit.lifetime), num(fs.sigma_lifetime), num(fs.fit.steady_state),
                num(fs.sigma_steady_state), num(steady_state(model)), num(model_life)});
      jfits.push_back({{"sweep", sweep},
                       {"value", value},
                       {"qubit", q.name},
                       {"lifetime", fs.fit.lifetime},
                       {"sigma_lifetime", fs.sigma_lifetime},
                       {"steady_state", fs.fit.steady_state},
                       {"sigma_steady_state", fs.sigma_steady_state},
                       {"steady_state_model", steady_state(model)}});
    }
  };

  run("none", 0.0, m.lru, false, false);
  for (double R : m.R_sweep) {
    LRUParams lru = m.lru;
    lru.R = R;
    run("R", R, lru, true, false);
  }
  for (double p : m.pM22_sweep) {
    LRUParams lru = m.lru;
    lru.pM22 = p;
    run("pM22", p, lru, false, true);
  }
  run("both", 1.0, m.lru, true, true);
  emit(out, "markov_traces.csv", traces.text(), result);
  emit(out, "markov_fits.csv", fits.text(), result);
  emit(out, "markov_fits.json", jfits.dump(2) + "\n", result);

  // Channel self-test at the configured LRU values.
  const QutritChannel ch = build_res_lru_channel(m.lru, m.schedule.t_res_lru, m.schedule.T1, m.schedule.Tphi_max);
  const Eigen::Matrix3d P = ch.population_transfer();
  const Populations3 from2 = res_lru_population_map({0, 0, 1}, m.lru);
  const Populations3 from0 = res_lru_population_map({1, 0, 0}, m.lru);
  const double bound = 2.0 * m.schedule.t_res_lru / m.schedule.T1;
  double dev = 0.0;
  const Populations3 maps[3] = {from0, res_lru_population_map({0, 1, 0}, m.lru), from2};
  for (int j = 0; j < 3; ++j) {
    dev = std::max({dev, std::abs(P(0, j) - maps[j].p0), std::abs(P(1, j) - maps[j].p1),
                    std::abs(P(2, j) - maps[j].p2)});
  }
  nlohmann::ordered_json jc;
  jc["R"] = m.lru.R;
  jc["L1_LRU"] = m.lru.L1_LRU;
  jc["t_lru_s"] = m.schedule.t_res_lru;
  jc["T1_s"] = m.schedule.T1;
  jc["Tphi_s"] = m.schedule.Tphi_max;
  jc["p2_from_2"] = P(2, 2);
  jc["p2_from_0"] = P(2, 0);
  jc["choi_min_eigenvalue"] = ch.choi_min_eigenvalue();
  jc["trace_preservation_error"] = ch.trace_preservation_error();
  jc["max_deviation_from_population_map"] = dev;
  jc["deviation_bound"] = bound;
  jc["cptp"] = ch.choi_min_eigenvalue() >= -1e-9 && ch.trace_preservation_error() <= 1e-9;
  emit(out, "channel_selftest.json", jc.dump(2) + "\n", result);
  return result;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"crossing", "evolve", "heatmap", "zz", "markov"};
  return names;
}

RunOutput run_command(const std::string& name, const ExperimentConfig& cfg, const fs::path& out, const Log& log) {
  fs::create_directories(out);
  if (name == "crossing") return cmd_crossing(cfg, out, log);
  if (name == "evolve") return cmd_evolve(cfg, out, log);
  if (name == "heatmap") return cmd_heatmap(cfg, out, log);
  if (name == "zz") return cmd_zz(cfg, out, log);
  if (name == "markov") return cmd_markov(cfg, out, log);
  throw ConfigError("command", 0, "unknown command '" + name + "'");
}

}  // namespace reslru::cli
