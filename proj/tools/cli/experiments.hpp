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

// Experiment bodies behind the command-line tool. Each writes its files
// into the output directory and returns their names.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"

namespace reslru::cli {

using Log = std::function<void(const std::string&)>;

struct RunOutput {
  std::vector<std::string> files;  // relative to the output directory
};

RunOutput cmd_crossing(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = nullptr);
RunOutput cmd_evolve(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = nullptr);
RunOutput cmd_heatmap(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = nullptr);
RunOutput cmd_zz(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = nullptr);
RunOutput cmd_markov(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = nullptr);

const std::vector<std::string>& command_names();
RunOutput run_command(const std::string& name, const ExperimentConfig& cfg, const std::filesystem::path& out,
                      const Log& log = nullptr);

// Temporary file plus rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace reslru::cli
