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

#include "manifest.hpp"

#include <openssl/sha.h>

#include <array>
#include <fstream>
#include <sstream>

#include "experiments.hpp"
#include "json.hpp"

#ifndef RESLRU_VERSION
#define RESLRU_VERSION "0.0.0"
#endif

namespace reslru::cli {

const char* tool_version() { return RESLRU_VERSION; }

std::string sha1_hex(const std::string& bytes) {
  std::array<unsigned char, SHA_DIGEST_LENGTH> md{};
  SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md.data());
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : md) {
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

std::string sha1_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return sha1_hex(ss.str());
}

std::string write_manifest(const std::filesystem::path& out, const std::string& command,
                           const ExperimentConfig& cfg, double wall_seconds,
                           const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["tool"] = "reslru";
  j["version"] = tool_version();
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["wall_time_s"] = wall_seconds;
  nlohmann::ordered_json snap = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.snapshot()) snap[k] = v;
  j["config"] = snap;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const std::string& f : files) {
    const auto p = out / f;
    list.push_back({{"file", f}, {"bytes", std::filesystem::file_size(p)}, {"sha1", sha1_file(p)}});
  }
  j["outputs"] = list;
  const std::string text = j.dump(2) + "\n";
  write_file_atomic(out / "manifest.json", text);
  return text;
}

}  // namespace reslru::cli
