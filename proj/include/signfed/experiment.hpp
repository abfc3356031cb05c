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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "signfed/config.hpp"
#include "signfed/fedsim.hpp"

namespace signfed {

inline constexpr const char* kCsvHeader =
    "round,objective,grad_norm_sq,avg_local_grad_sq,uplink_bits,sigma";

// CSV rows in the frozen column order; floats are rendered with %.17g so a
// rerun of the same config reproduces the file byte for byte.
std::string format_metrics_csv(std::span<const RoundMetrics> rounds);

// Write-temp-then-rename, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

struct RunOutcome {
  std::string group;
  std::vector<std::pair<std::string, std::string>> overrides;
  uint64_t seed = 0;
  int repeat_index = 0;
  std::filesystem::path csv_path;
  double final_objective = 0.0;
  int rounds_completed = 0;
  bool diverged = false;
  std::string error;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::filesystem::path summary_path;
  bool any_diverged = false;
};

// Executes every (sweep variant x repeat) run of the experiment, writing one
// CSV per run named <group>_seed<k>.csv plus a summary.json with final
// objective mean/std per group. Runs are independent and may execute
// concurrently (`threads`, typically from SIGNFED_THREADS); outputs are
// deterministic either way. Divergent runs are recorded, the remaining runs
// still execute, and any_diverged is set (CLI exit code 3).
ExperimentResult execute_experiment(const ExperimentFile& experiment,
                                    int threads = 1);

std::string summary_json(const ExperimentFile& experiment,
                         std::span<const RunOutcome> outcomes);

}  // namespace signfed
