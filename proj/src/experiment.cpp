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

#include "signfed/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

namespace signfed {

namespace {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

std::string format_metrics_csv(std::span<const RoundMetrics> rounds) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const RoundMetrics& m : rounds) {
    out += std::to_string(m.round);
    out += ',';
    out += format_double(m.objective);
    out += ',';
    out += format_double(m.grad_norm_sq);
    out += ',';
    out += format_double(m.avg_local_grad_sq);
    out += ',';
    out += std::to_string(m.uplink_bits);
    out += ',';
    out += format_double(m.sigma);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  std::filesystem::rename(tmp, path);
}

ExperimentResult execute_experiment(const ExperimentFile& experiment,
                                    int threads) {
  std::filesystem::create_directories(experiment.output_dir);
  const std::vector<RunVariant> variants = expand_variants(experiment);

  ExperimentResult result;
  result.runs.resize(variants.size());

  std::atomic<std::size_t> cursor{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t index = cursor.fetch_add(1);
      if (index >= variants.size()) return;
      const RunVariant& variant = variants[index];
      RunOutcome outcome;
      outcome.group = variant.group;
      outcome.overrides = variant.overrides;
      outcome.seed = variant.config.seed;
      outcome.repeat_index = variant.repeat_index;
      outcome.csv_path =
          experiment.output_dir /
          (variant.group + "_seed" + std::to_string(variant.repeat_index) + ".csv");
      try {
        const RunResult run_result = run(variant.config);
        write_file_atomic(outcome.csv_path,
                          format_metrics_csv(run_result.rounds));
        if (variant.config.dump_updates) {
          const std::filesystem::path dump_path =
              experiment.output_dir /
              (variant.group + "_seed" + std::to_string(variant.repeat_index) +
               ".updates.bin");
          write_file_atomic(dump_path,
                            std::string(run_result.dumped_updates.begin(),
                                        run_result.dumped_updates.end()));
        }
        outcome.final_objective = run_result.rounds.back().objective;
        outcome.rounds_completed = static_cast<int>(run_result.rounds.size());
      } catch (const DivergenceError& error) {
        outcome.diverged = true;
        outcome.error = error.what();
      }
      result.runs[index] = std::move(outcome);
    }
  };

  const int worker_count = std::max(
      1, std::min<int>(threads, static_cast<int>(variants.size())));
  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const RunOutcome& outcome : result.runs) {
    if (outcome.diverged) result.any_diverged = true;
  }

  result.summary_path = experiment.output_dir / "summary.json";
  write_file_atomic(result.summary_path, summary_json(experiment, result.runs));
  return result;
}

std::string summary_json(const ExperimentFile& experiment,
                         std::span<const RunOutcome> outcomes) {
  using json = nlohmann::ordered_json;

  // Group outcomes in first-seen order.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<const RunOutcome*>> groups;
  for (const RunOutcome& outcome : outcomes) {
    if (!groups.count(outcome.group)) group_order.push_back(outcome.group);
    groups[outcome.group].push_back(&outcome);
  }

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = experiment.name;
  doc["repeat"] = experiment.repeat;
  doc["groups"] = json::array();
  for (const std::string& group : group_order) {
    const auto& members = groups[group];
    json entry;
    entry["name"] = group;
    json overrides = json::object();
    for (const auto& [key, value] : members.front()->overrides) {
      overrides[key] = value;
    }
    entry["overrides"] = overrides;

    std::vector<double> finals;
    json runs = json::array();
    for (const RunOutcome* outcome : members) {
      json run_entry;
      run_entry["seed"] = outcome->seed;
      run_entry["csv"] = outcome->csv_path.filename().string();
      run_entry["status"] = outcome->diverged ? "diverged" : "ok";
      if (outcome->diverged) {
        run_entry["error"] = outcome->error;
      } else {
        run_entry["final_objective"] = outcome->final_objective;
        run_entry["rounds"] = outcome->rounds_completed;
        finals.push_back(outcome->final_objective);
      }
      runs.push_back(std::move(run_entry));
    }
    entry["runs"] = std::move(runs);

    if (!finals.empty()) {
      double mean = 0.0;
      for (double v : finals) mean += v;
      mean /= static_cast<double>(finals.size());
      double var = 0.0;
      for (double v : finals) var += (v - mean) * (v - mean);
      const double std_dev =
          finals.size() > 1 ? std::sqrt(var / (finals.size() - 1)) : 0.0;
      entry["final_objective_mean"] = mean;
      entry["final_objective_std"] = std_dev;
    }
    doc["groups"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

}  // namespace signfed
