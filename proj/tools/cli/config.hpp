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

// Experiment configuration: INI-style sections of key = value pairs,
// checked against a fixed schema. Frequencies in Hz, times in seconds.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reslru/lindblad.hpp"
#include "reslru/markov.hpp"
#include "reslru/optimizer.hpp"

namespace reslru::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, int line, const std::string& what)
      : std::runtime_error(what), field_(field), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }  // 0 when unknown

 private:
  std::string field_;
  int line_;
};

struct DriveSection {
  double Omega = kTwoPi * 204e6;
  double omega_d = kTwoPi * 5.2464e9;
  double t_rise = 30e-9;
  double t_p = 178.6e-9;
  double T_slot = 440e-9;
};

struct CrossingSection {
  std::vector<double> Omegas{kTwoPi * 50e6, kTwoPi * 100e6, kTwoPi * 200e6,
                             kTwoPi * 300e6, kTwoPi * 400e6, kTwoPi * 500e6};
  double scan_half_width = kTwoPi * 60e6;
};

struct EvolveSection {
  std::vector<int> levels{0, 1, 2};
  int samples = 441;
  bool long_drive = false;
};

struct HeatmapSection {
  double p2_threshold = 0.01;
  bool refine = false;
};

struct ZZSection {
  double zeta_max = kTwoPi * 2e6;
  int points = 9;
  bool include_critical = true;
};

struct MarkovSection {
  double L1 = 0.005;
  std::optional<double> L2;  // 2 L1 when unset
  int cycles = 20;
  int runs = 20000;
  int bootstrap = 200;
  LRUParams lru{0.95, 0.0025, 0.9, 0.995};
  std::vector<double> R_sweep{0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 1.0};
  std::vector<double> pM22_sweep{0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 1.0};
  ScheduleParams schedule;
  double p0_occupancy = 0.5;
  std::string layout_file;  // JSON; built-in layout when empty

  double L2_value() const { return L2 ? *L2 : 2.0 * L1; }
};

struct ExperimentConfig {
  DeviceParams device = DeviceParams::standard();
  IntegratorOptions integrator;
  DriveSection drive;
  CrossingSection crossing;
  EvolveSection evolve;
  OptimizerConfig optimizer;
  HeatmapSection heatmap;
  ZZSection zz;
  MarkovSection markov;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";
  std::string preset;

  // Effective settings as sorted key/value text, for the manifest.
  std::map<std::string, std::string> snapshot() const;
};

const std::vector<std::string>& preset_names();
void apply_preset(ExperimentConfig& cfg, const std::string& name);

// Preset first, then the file. Throws ConfigError.
ExperimentConfig load_config(const std::string& path, const std::string& preset = "");
ExperimentConfig parse_config_text(const std::string& text, const std::string& preset = "");

// Surface-17 style layout from JSON: [{"name", "role", "n_flux", "leakage_prone"}].
std::vector<QubitSpec> parse_layout_json(const std::string& text);

}  // namespace reslru::cli
