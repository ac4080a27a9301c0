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

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "reslru/errors.hpp"

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kNumerical = 3 };

int fail(int code, nlohmann::ordered_json err) {
  std::cerr << err.dump() << "\n";
  return code;
}

int parse_threads(const std::string& text, const std::string& origin) {
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(text, &used);
    if (used != text.size()) n = 0;
  } catch (const std::exception&) {
    n = 0;
  }
  if (n < 1) throw reslru::cli::ConfigError(origin, 0, origin + " must be a positive integer, got '" + text + "'");
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace reslru::cli;
  CLI::App app{"res-LRU experiments: crossing, evolve, heatmap, zz, markov"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string config_path, preset, out_dir, threads_arg;
  std::uint64_t seed = 0;
  bool quiet = false;
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--preset", preset, "device, schedule or lru (applied before the file)");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--threads", threads_arg, "worker threads");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("-q,--quiet", quiet, "no progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfig, {{"error", "usage"}, {"message", e.what()}});
  }
  const std::string command = app.get_subcommands().front()->get_name();
  CLI::App* sub = app.get_subcommands().front();

  try {
    ExperimentConfig cfg = load_config(config_path, preset);
    if (sub->count("--seed")) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (sub->count("--threads")) {
      cfg.threads = parse_threads(threads_arg, "--threads");
    } else if (const char* env = std::getenv("RESLRU_THREADS"); env && *env) {
      cfg.threads = parse_threads(env, "RESLRU_THREADS");
    }

    const Log log = quiet ? Log{} : Log{[](const std::string& msg) { std::cerr << "[reslru] " << msg << "\n"; }};
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput result = run_command(command, cfg, cfg.output_dir, log);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg.output_dir, command, cfg, wall, result.files);
    if (!quiet) std::cerr << "[reslru] wrote " << result.files.size() << " files to " << cfg.output_dir << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    nlohmann::ordered_json err{{"error", "config"}, {"field", e.field()}, {"message", e.what()}};
    if (e.line() > 0) err["line"] = e.line();
    return fail(kConfig, err);
  } catch (const reslru::NumericalError& e) {
    return fail(kNumerical,
                {{"error", "numerical"}, {"code", reslru::error_name(e.code())}, {"message", e.what()}});
  } catch (const std::exception& e) {
    return fail(kInternal, {{"error", "internal"}, {"message", e.what()}});
  }
}
