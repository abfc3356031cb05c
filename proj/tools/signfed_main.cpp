// Copyright 2026 The SignFed Authors
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

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "signfed/experiment.hpp"
#include "signfed/verify.hpp"

namespace {

// SIGNFED_THREADS caps the number of runs executed concurrently.
int resolve_threads() {
  const int hardware = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SIGNFED_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) return std::min(requested, 4 * hardware);
  }
  return hardware;
}

int execute(const std::string& path, bool require_sweep, bool dump_updates) {
  try {
    signfed::ExperimentFile experiment = signfed::ExperimentFile::load(path);
    if (require_sweep && experiment.sweep.empty()) {
      std::cerr << "error: sweep: the experiment file declares no sweep.* keys"
                << std::endl;
      return 2;
    }
    if (dump_updates) {
      experiment.base.dump_updates = true;
      experiment.raw.set("dump_updates", "true");
    }
    const signfed::ExperimentResult result =
        signfed::execute_experiment(experiment, resolve_threads());
    for (const auto& outcome : result.runs) {
      if (outcome.diverged) {
        std::cout << outcome.group << " seed " << outcome.seed
                  << ": DIVERGED (" << outcome.error << ")" << std::endl;
      } else {
        std::cout << outcome.group << " seed " << outcome.seed
                  << ": final objective " << outcome.final_objective << " -> "
                  << outcome.csv_path.string() << std::endl;
      }
    }
    std::cout << "summary: " << result.summary_path.string() << std::endl;
    return result.any_diverged ? 3 : 0;
  } catch (const signfed::ConfigError& error) {
    std::cerr << "error: " << error.what() << std::endl;
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << std::endl;
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signfed: stochastic sign-compressed federated optimization lab"};
  app.require_subcommand(1);

  std::string run_path;
  bool run_dump = false;
  CLI::App* cmd_run = app.add_subcommand("run", "execute an experiment file");
  cmd_run->add_option("file", run_path, "experiment file")->required();
  cmd_run->add_flag("--dump-updates", run_dump,
                    "write each run's compressed client messages verbatim");

  std::string sweep_path;
  bool sweep_dump = false;
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "execute an experiment file with sweep axes");
  cmd_sweep->add_option("file", sweep_path, "experiment file")->required();
  cmd_sweep->add_flag("--dump-updates", sweep_dump,
                      "write each run's compressed client messages verbatim");

  bool fast = false;
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "run the built-in invariant suite");
  cmd_verify->add_flag("--fast", fast,
                       "10x fewer Monte-Carlo samples, sqrt(10)x wider tolerances");

  CLI11_PARSE(app, argc, argv);

  if (cmd_run->parsed()) return execute(run_path, false, run_dump);
  if (cmd_sweep->parsed()) return execute(sweep_path, true, sweep_dump);
  if (cmd_verify->parsed()) {
    const auto checks = signfed::run_verification({fast});
    return signfed::print_verification(std::cout, checks);
  }
  return 1;
}
