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

// Run manifest: config snapshot, tool version, timing, output hashes.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace reslru::cli {

std::string sha1_hex(const std::string& bytes);
std::string sha1_file(const std::filesystem::path& path);

// Writes <out>/manifest.json atomically and returns its text.
std::string write_manifest(const std::filesystem::path& out, const std::string& command,
                           const ExperimentConfig& cfg, double wall_seconds,
                           const std::vector<std::string>& files);

const char* tool_version();

}  // namespace reslru::cli
