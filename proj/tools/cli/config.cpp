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

#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace reslru::cli {

namespace {

using Cfg = ExperimentConfig;

struct Field {
  std::function<void(Cfg&, const std::string&)> set;
  std::function<std::string(const Cfg&)> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& v) {
  const std::string t = trim(v);
  double x = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    if (t == "inf") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("expected a number, got '" + t + "'");
  }
  return x;
}

long long to_int(const std::string& v) {
  const std::string t = trim(v);
  long long x = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  return x;
}

bool to_bool(const std::string& v) {
  const std::string t = trim(v);
  if (t == "true") return true;
  if (t == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + t + "'");
}

std::vector<std::string> split(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.empty() || (out.size() == 1 && out[0].empty())) throw std::invalid_argument("empty list");
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

template <class Acc>
Field real(Acc acc, double scale = 1.0) {
  return {[acc, scale](Cfg& c, const std::string& v) { acc(c) = scale * to_double(v); },
          [acc, scale](const Cfg& c) { return fmt(acc(const_cast<Cfg&>(c)) / scale); }};
}

template <class Acc>
Field integer(Acc acc) {
  return {[acc](Cfg& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(acc(c))>;
            acc(c) = static_cast<T>(to_int(v));
          },
          [acc](const Cfg& c) { return std::to_string(acc(const_cast<Cfg&>(c))); }};
}

template <class Acc>
Field boolean(Acc acc) {
  return {[acc](Cfg& c, const std::string& v) { acc(c) = to_bool(v); },
          [acc](const Cfg& c) { return std::string(acc(const_cast<Cfg&>(c)) ? "true" : "false"); }};
}

template <class Acc>
Field real_list(Acc acc, double scale = 1.0) {
  return {[acc, scale](Cfg& c, const std::string& v) {
            std::vector<double> xs;
            for (const std::string& s : split(v)) xs.push_back(scale * to_double(s));
            acc(c) = xs;
          },
          [acc, scale](const Cfg& c) {
            std::string out;
            for (double x : acc(const_cast<Cfg&>(c))) out += (out.empty() ? "" : ", ") + fmt(x / scale);
            return out;
          }};
}

const std::map<std::string, Field>& schema() {
  static const std::map<std::string, Field> s = [] {
    std::map<std::string, Field> m;
    m["run.seed"] = {[](Cfg& c, const std::string& v) {
                       const long long x = to_int(v);
                       if (x < 0) throw std::invalid_argument("seed must be non-negative");
                       c.seed = static_cast<std::uint64_t>(x);
                     },
                     [](const Cfg& c) { return std::to_string(c.seed); }};
    m["run.threads"] = integer([](Cfg& c) -> int& { return c.threads; });
    m["run.output_dir"] = {[](Cfg& c, const std::string& v) { c.output_dir = trim(v); },
                           [](const Cfg& c) { return c.output_dir; }};

    m["device.omega_q_hz"] = real([](Cfg& c) -> double& { return c.device.omega_q; }, kTwoPi);
    m["device.omega_r_hz"] = real([](Cfg& c) -> double& { return c.device.omega_r; }, kTwoPi);
    m["device.alpha_hz"] = real([](Cfg& c) -> double& { return c.device.alpha; }, kTwoPi);
    m["device.g_hz"] = real([](Cfg& c) -> double& { return c.device.g; }, kTwoPi);
    m["device.kappa_hz"] = real([](Cfg& c) -> double& { return c.device.kappa; }, kTwoPi);
    m["device.nbar"] = real([](Cfg& c) -> double& { return c.device.nbar; });
    m["device.T1_q_s"] = real([](Cfg& c) -> double& { return c.device.T1_q; });
    m["device.T2_q_s"] = real([](Cfg& c) -> double& { return c.device.T2_q; });
    m["device.T2_r_s"] = real([](Cfg& c) -> double& { return c.device.T2_r; });
    m["device.n_transmon"] = integer([](Cfg& c) -> int& { return c.device.n_transmon; });
    m["device.n_resonator"] = integer([](Cfg& c) -> int& { return c.device.n_resonator; });

    m["integrator.rtol"] = real([](Cfg& c) -> double& { return c.integrator.rtol; });
    m["integrator.atol"] = real([](Cfg& c) -> double& { return c.integrator.atol; });
    m["integrator.max_steps"] = integer([](Cfg& c) -> long& { return c.integrator.max_steps; });

    m["drive.Omega_hz"] = real([](Cfg& c) -> double& { return c.drive.Omega; }, kTwoPi);
    m["drive.omega_d_hz"] = real([](Cfg& c) -> double& { return c.drive.omega_d; }, kTwoPi);
    m["drive.t_rise_s"] = real([](Cfg& c) -> double& { return c.drive.t_rise; });
    m["drive.t_p_s"] = real([](Cfg& c) -> double& { return c.drive.t_p; });
    m["drive.T_slot_s"] = real([](Cfg& c) -> double& { return c.drive.T_slot; });

    m["crossing.Omega_list_hz"] = real_list([](Cfg& c) -> std::vector<double>& { return c.crossing.Omegas; }, kTwoPi);
    m["crossing.scan_half_width_hz"] = real([](Cfg& c) -> double& { return c.crossing.scan_half_width; }, kTwoPi);

    m["evolve.levels"] = {[](Cfg& c, const std::string& v) {
                            c.evolve.levels.clear();
                            for (const std::string& s : split(v)) c.evolve.levels.push_back(static_cast<int>(to_int(s)));
                          },
                          [](const Cfg& c) {
                            std::string out;
                            for (int l : c.evolve.levels) out += (out.empty() ? "" : ", ") + std::to_string(l);
                            return out;
                          }};
    m["evolve.samples"] = integer([](Cfg& c) -> int& { return c.evolve.samples; });
    m["evolve.long_drive"] = boolean([](Cfg& c) -> bool& { return c.evolve.long_drive; });

    m["heatmap.Omega_min_hz"] = real([](Cfg& c) -> double& { return c.optimizer.Omega_min; }, kTwoPi);
    m["heatmap.Omega_max_hz"] = real([](Cfg& c) -> double& { return c.optimizer.Omega_max; }, kTwoPi);
    m["heatmap.omega_d_min_hz"] = real([](Cfg& c) -> double& { return c.optimizer.omega_d_min; }, kTwoPi);
    m["heatmap.omega_d_max_hz"] = real([](Cfg& c) -> double& { return c.optimizer.omega_d_max; }, kTwoPi);
    m["heatmap.grid_Omega"] = integer([](Cfg& c) -> int& { return c.optimizer.grid_Omega; });
    m["heatmap.grid_omega_d"] = integer([](Cfg& c) -> int& { return c.optimizer.grid_omega_d; });
    m["heatmap.sample_budget"] = integer([](Cfg& c) -> int& { return c.optimizer.sample_budget; });
    m["heatmap.tp_tolerance_s"] = real([](Cfg& c) -> double& { return c.optimizer.tp_tolerance; });
    m["heatmap.near_critical_margin_hz"] =
        real([](Cfg& c) -> double& { return c.optimizer.near_critical_margin; }, kTwoPi);
    m["heatmap.refine_radius_hz"] = real([](Cfg& c) -> double& { return c.optimizer.refine_radius; }, kTwoPi);
    m["heatmap.p2_floor"] = real([](Cfg& c) -> double& { return c.optimizer.p2_floor; });
    m["heatmap.measure_induced"] = boolean([](Cfg& c) -> bool& { return c.optimizer.measure_induced; });
    m["heatmap.measure_coherence"] = boolean([](Cfg& c) -> bool& { return c.optimizer.measure_coherence; });
    m["heatmap.p2_threshold"] = real([](Cfg& c) -> double& { return c.heatmap.p2_threshold; });
    m["heatmap.refine"] = boolean([](Cfg& c) -> bool& { return c.heatmap.refine; });

    m["zz.zeta_max_hz"] = real([](Cfg& c) -> double& { return c.zz.zeta_max; }, kTwoPi);
    m["zz.points"] = integer([](Cfg& c) -> int& { return c.zz.points; });
    m["zz.include_critical"] = boolean([](Cfg& c) -> bool& { return c.zz.include_critical; });

    m["markov.L1"] = real([](Cfg& c) -> double& { return c.markov.L1; });
    m["markov.L2"] = {[](Cfg& c, const std::string& v) { c.markov.L2 = to_double(v); },
                      [](const Cfg& c) { return fmt(c.markov.L2_value()); }};
    m["markov.cycles"] = integer([](Cfg& c) -> int& { return c.markov.cycles; });
    m["markov.runs"] = integer([](Cfg& c) -> int& { return c.markov.runs; });
    m["markov.bootstrap"] = integer([](Cfg& c) -> int& { return c.markov.bootstrap; });
    m["markov.R"] = real([](Cfg& c) -> double& { return c.markov.lru.R; });
    m["markov.L1_LRU"] = real([](Cfg& c) -> double& { return c.markov.lru.L1_LRU; });
    m["markov.pM22"] = real([](Cfg& c) -> double& { return c.markov.lru.pM22; });
    m["markov.pM11"] = real([](Cfg& c) -> double& { return c.markov.lru.pM11; });
    m["markov.R_sweep"] = real_list([](Cfg& c) -> std::vector<double>& { return c.markov.R_sweep; });
    m["markov.pM22_sweep"] = real_list([](Cfg& c) -> std::vector<double>& { return c.markov.pM22_sweep; });
    m["markov.t_c_s"] = real([](Cfg& c) -> double& { return c.markov.schedule.t_c; });
    m["markov.T1_s"] = real([](Cfg& c) -> double& { return c.markov.schedule.T1; });
    m["markov.Tphi_s"] = real([](Cfg& c) -> double& { return c.markov.schedule.Tphi_max; });
    m["markov.t_res_lru_s"] = real([](Cfg& c) -> double& { return c.markov.schedule.t_res_lru; });
    m["markov.p0_occupancy"] = real([](Cfg& c) -> double& { return c.markov.p0_occupancy; });
    m["markov.layout_file"] = {[](Cfg& c, const std::string& v) { c.markov.layout_file = trim(v); },
                               [](const Cfg& c) { return c.markov.layout_file; }};
    return m;
  }();
  return s;
}

// Line of "key" inside "[section]", for diagnostics only.
int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, cur;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.size() > 1 && t.front() == '[' && t.back() == ']') {
      cur = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (cur == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, 0, field + ": " + what);
}

void validate(Cfg& c) {
  try {
    c.device.validate();
  } catch (const NumericalError& e) {
    throw ConfigError("device", 0, std::string("device: ") + e.what());
  }
  check(c.threads >= 1, "run.threads", "must be at least 1");
  check(c.integrator.rtol > 0 && c.integrator.atol > 0, "integrator", "tolerances must be positive");
  check(c.drive.Omega >= 0, "drive.Omega_hz", "must be non-negative");
  check(c.drive.t_rise >= 0 && c.drive.t_p >= 2 * c.drive.t_rise, "drive.t_p_s", "need t_p >= 2 t_rise");
  check(c.drive.T_slot >= c.drive.t_p, "drive.T_slot_s", "need T_slot >= t_p");
  for (double w : c.crossing.Omegas) check(w >= 0, "crossing.Omega_list_hz", "amplitudes must be non-negative");
  check(c.crossing.scan_half_width > 0, "crossing.scan_half_width_hz", "must be positive");
  for (int l : c.evolve.levels) check(l >= 0 && l <= 2, "evolve.levels", "levels must be 0, 1 or 2");
  check(c.evolve.samples >= 2, "evolve.samples", "need at least 2 samples");
  c.optimizer.t_rise = c.drive.t_rise;
  c.optimizer.T_slot = c.drive.T_slot;
  c.optimizer.integrator = c.integrator;
  try {
    c.optimizer.validate();
  } catch (const NumericalError& e) {
    throw ConfigError("heatmap", 0, std::string("heatmap: ") + e.what());
  }
  check(c.heatmap.p2_threshold > 0 && c.heatmap.p2_threshold <= 1, "heatmap.p2_threshold", "must lie in (0, 1]");
  check(c.zz.zeta_max > 0, "zz.zeta_max_hz", "must be positive");
  check(c.zz.points >= 3, "zz.points", "need at least 3 points");
  const MarkovSection& m = c.markov;
  check(m.L1 >= 0 && m.L1 <= 1, "markov.L1", "must lie in [0, 1]");
  check(m.L2_value() >= 0 && m.L2_value() <= 1, "markov.L2", "must lie in [0, 1]");
  check(m.cycles >= 5, "markov.cycles", "need at least 5 cycles");
  check(m.runs >= 100, "markov.runs", "need at least 100 runs");
  check(m.bootstrap >= 0, "markov.bootstrap", "must be non-negative");
  try {
    m.lru.validate();
  } catch (const NumericalError& e) {
    throw ConfigError("markov", 0, std::string("markov: ") + e.what());
  }
  for (double r : m.R_sweep) check(r >= 0 && r <= 1, "markov.R_sweep", "values must lie in [0, 1]");
  for (double r : m.pM22_sweep) check(r >= 0 && r <= 1, "markov.pM22_sweep", "values must lie in [0, 1]");
  check(m.schedule.t_c > 0 && m.schedule.T1 > 0 && m.schedule.Tphi_max > 0 && m.schedule.t_res_lru > 0,
        "markov", "times must be positive");
  check(m.p0_occupancy >= 0 && m.p0_occupancy <= 1, "markov.p0_occupancy", "must lie in [0, 1]");
}

}  // namespace

std::map<std::string, std::string> ExperimentConfig::snapshot() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, f] : schema()) out[key] = f.get(*this);
  out["run.preset"] = preset;
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"device", "schedule", "lru"};
  return names;
}

void apply_preset(ExperimentConfig& cfg, const std::string& name) {
  if (name.empty()) return;
  if (name == "device") {
    cfg.device = DeviceParams::standard();
  } else if (name == "schedule") {
    cfg.markov.schedule = ScheduleParams::standard();
    cfg.drive.T_slot = cfg.markov.schedule.T_slot;
  } else if (name == "lru") {
    cfg.markov.lru = {0.95, 0.0025, 0.9, 0.995};
    cfg.markov.L1 = 0.005;
    cfg.markov.layout_file.clear();
  } else {
    throw ConfigError("--preset", 0, "unknown preset '" + name + "'");
  }
  cfg.preset = name;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& preset) {
  ExperimentConfig cfg;
  apply_preset(cfg, preset);
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", static_cast<int>(e.line()), "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(section, locate(text, "", section), "key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const int line = locate(text, section, key);
      const auto it = schema().find(field);
      if (it == schema().end())
        throw ConfigError(field, line, "line " + std::to_string(line) + ": unknown key '" + field + "'");
      try {
        it->second.set(cfg, value.data());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(field, line, "line " + std::to_string(line) + ": " + field + ": " + e.what());
      }
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::string& preset) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", 0, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), preset);
}

std::vector<QubitSpec> parse_layout_json(const std::string& text) {
  std::vector<QubitSpec> out;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& q : j.at("qubits")) {
      QubitSpec s;
      s.name = q.at("name").get<std::string>();
      const std::string role = q.at("role").get<std::string>();
      if (role != "data" && role != "ancilla") throw ConfigError("layout", 0, "role must be data or ancilla");
      s.role = role == "data" ? QubitRole::Data : QubitRole::Ancilla;
      s.n_flux = q.at("n_flux").get<int>();
      s.leakage_prone = q.at("leakage_prone").get<bool>();
      if (s.n_flux < 0 || s.n_flux > 4) throw ConfigError("layout", 0, "n_flux must be in 0..4 for " + s.name);
      out.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("layout", 0, std::string("layout JSON: ") + e.what());
  }
  if (out.empty()) throw ConfigError("layout", 0, "layout has no qubits");
  return out;
}

}  // namespace reslru::cli
