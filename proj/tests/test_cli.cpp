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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "signfed/config.hpp"
#include "signfed/experiment.hpp"

using namespace signfed;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("signfed_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const char* kCounterexampleText = R"(
# Divergence instance: both clients' signs cancel at every interior point.
schema_version = 1
name = stuck
output_dir = {OUT}
repeat = 2
seed = 5

problem.kind = counterexample
problem.a = 1.0

rounds = 50
client_lr = 0.01
server_lr = 1.0
compressor = exact_sign
x0 = 0.5
)";

std::string with_output_dir(std::string text, const std::filesystem::path& dir) {
  const std::string needle = "{OUT}";
  const auto pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, needle.size(), dir.string());
}

}  // namespace

TEST_CASE("key-value parsing") {
  const auto kv = KeyValues::parse_string(
      "a = 1\n"
      "b.c = hello  # trailing comment\n"
      "# full comment line\n"
      "\n"
      "list = 1, 2.5, 3\n");
  CHECK(kv.get_int("a") == 1);
  CHECK(kv.get_string("b.c") == "hello");
  CHECK(kv.get_double_list("list") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(kv.get_double("missing", 7.5) == 7.5);
  CHECK_THROWS_AS(kv.get_string("missing"), ConfigError);
}

TEST_CASE("key-value syntax errors") {
  CHECK_THROWS_AS(KeyValues::parse_string("novalue\n"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse_string("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse_string("= 3\n"), ConfigError);
}

TEST_CASE("minimal experiment parses with defaults") {
  const auto experiment = ExperimentFile::parse(
      "schema_version = 1\n"
      "name = demo\n"
      "rounds = 10\n"
      "noise.z = 1\n"
      "noise.sigma = 0.5\n");
  CHECK(experiment.name == "demo");
  CHECK(experiment.repeat == 1);
  CHECK(experiment.base.rounds == 10);
  CHECK(experiment.base.local_steps == 1);
  CHECK(experiment.base.participation == 1.0);
  CHECK(experiment.base.compressor.type == CompressorType::kStochasticSign);
  CHECK(experiment.base.server_lr.auto_rule);
  CHECK(experiment.base.problem.kind == ProblemSpec::Kind::kConsensus);
}

TEST_CASE("field-level validation errors") {
  const auto parse_with = [](const std::string& extra) {
    return ExperimentFile::parse("schema_version = 1\nname = x\n" + extra);
  };

  SUBCASE("schema version") {
    CHECK_THROWS_WITH_AS(ExperimentFile::parse("schema_version = 2\nname = x\n"),
                         doctest::Contains("schema_version"), ConfigError);
  }
  SUBCASE("missing name") {
    CHECK_THROWS_WITH_AS(ExperimentFile::parse("schema_version = 1\n"),
                         doctest::Contains("name"), ConfigError);
  }
  SUBCASE("unknown key") {
    CHECK_THROWS_WITH_AS(parse_with("not_a_key = 1\n"),
                         doctest::Contains("not_a_key"), ConfigError);
  }
  SUBCASE("bad number") {
    CHECK_THROWS_WITH_AS(parse_with("client_lr = fast\n"),
                         doctest::Contains("client_lr"), ConfigError);
  }
  SUBCASE("bad compressor") {
    CHECK_THROWS_WITH_AS(parse_with("compressor = morse\n"),
                         doctest::Contains("compressor"), ConfigError);
  }
  SUBCASE("auto stepsize without noise") {
    CHECK_THROWS_WITH_AS(parse_with("compressor = exact_sign\n"),
                         doctest::Contains("server_lr"), ConfigError);
  }
  SUBCASE("bad participation") {
    CHECK_THROWS_WITH_AS(
        parse_with("participation = 0\nnoise.sigma = 1\n"),
        doctest::Contains("participation"), ConfigError);
  }
  SUBCASE("sweeping an unknown field") {
    CHECK_THROWS_WITH_AS(
        parse_with("noise.sigma = 1\nsweep.banana = 1, 2\n"),
        doctest::Contains("banana"), ConfigError);
  }
}

TEST_CASE("sweep expansion") {
  // A grid including sigma = 0 (the noiseless sign) needs an explicit server
  // stepsize; the auto rule would be undefined there.
  const auto experiment = ExperimentFile::parse(
      "schema_version = 1\n"
      "name = grid\n"
      "repeat = 2\n"
      "rounds = 5\n"
      "server_lr = 0.5\n"
      "noise.z = 1\n"
      "noise.sigma = 0.1\n"
      "sweep.noise.sigma = 0, 0.05, 0.1\n");
  REQUIRE(experiment.sweep.size() == 1);
  const auto variants = expand_variants(experiment);
  REQUIRE(variants.size() == 6);
  CHECK(variants[0].group == "grid_noise.sigma=0");
  CHECK(variants[0].config.seed == 1);
  CHECK(variants[1].config.seed == 2);
  CHECK(variants[2].group == "grid_noise.sigma=0.05");
  CHECK(variants[2].config.compressor.noise.sigma == 0.05);
  CHECK(variants[0].config.compressor.noise.sigma == 0.0);
}

TEST_CASE("sweeping sigma to zero under the auto rule is a field error") {
  CHECK_THROWS_WITH_AS(ExperimentFile::parse("schema_version = 1\n"
                                             "name = grid\n"
                                             "noise.z = 1\n"
                                             "noise.sigma = 0.1\n"
                                             "sweep.noise.sigma = 0, 0.1\n"),
                       doctest::Contains("server_lr"), ConfigError);
}

TEST_CASE("multi-axis sweeps expand as a cartesian product") {
  const auto experiment = ExperimentFile::parse(
      "schema_version = 1\n"
      "name = multi\n"
      "rounds = 5\n"
      "server_lr = 0.5\n"
      "noise.z = 1\n"
      "noise.sigma = 0.1\n"
      "sweep.local_steps = 1, 2, 3\n"
      "sweep.noise.sigma = 0.1, 0.3\n");
  const auto variants = expand_variants(experiment);
  REQUIRE(variants.size() == 6);
  CHECK(variants.front().group == "multi_local_steps=1_noise.sigma=0.1");
  CHECK(variants.back().group == "multi_local_steps=3_noise.sigma=0.3");
  CHECK(variants.back().config.local_steps == 3);
  CHECK(variants.back().config.compressor.noise.sigma == 0.3);
}

TEST_CASE("run config canonical text round-trips") {
  RunConfig config;
  config.problem.kind = ProblemSpec::Kind::kSyntheticLogreg;
  config.problem.dim = 17;
  config.problem.clients = 4;
  config.problem.samples_per_client = 33;
  config.problem.dirichlet_alpha = 0.25;
  config.problem.seed = 7;
  config.rounds = 123;
  config.local_steps = 5;
  config.participation = 0.75;
  config.client_lr = 0.037;
  config.server_lr = ServerLr::explicit_value(0.5);
  config.compressor = CompressorKind::unbiased_quantizer(4);
  config.grad_noise = {GradNoiseModel::Kind::kGaussian, 0.3, 0.0};
  config.seed = 99;

  const std::string text = run_config_to_text(config, "roundtrip", "out", 2);
  const auto parsed = ExperimentFile::parse(text);
  CHECK(run_config_to_text(parsed.base, "roundtrip", "out", 2) == text);
  CHECK(parsed.base.compressor.levels == 4);
  CHECK(parsed.base.client_lr == config.client_lr);
}

TEST_CASE("experiment execution writes csvs and summary") {
  const auto dir = fresh_dir("exec");
  const auto experiment =
      ExperimentFile::parse(with_output_dir(kCounterexampleText, dir));
  const auto result = execute_experiment(experiment, 2);

  REQUIRE(result.runs.size() == 2);
  CHECK_FALSE(result.any_diverged);
  CHECK(std::filesystem::exists(dir / "stuck_seed0.csv"));
  CHECK(std::filesystem::exists(dir / "stuck_seed1.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));

  const std::string csv = read_file(dir / "stuck_seed0.csv");
  CHECK(csv.rfind("round,objective,grad_norm_sq,avg_local_grad_sq,uplink_bits,"
                  "sigma\n",
                  0) == 0);

  const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  REQUIRE(summary["groups"].size() == 1);
  const auto& group = summary["groups"][0];
  CHECK(group["name"] == "stuck");
  REQUIRE(group["runs"].size() == 2);
  const double mean = group["final_objective_mean"].get<double>();
  // f(0.5) for the A=1 pair: ((0.5-1)^2 + (0.5+1)^2)/2 = 1.25.
  CHECK(mean == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(group["final_objective_std"].get<double>() == 0.0);

  // No leftover temp files from the atomic writes.
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    CHECK(entry.path().extension() != ".tmp");
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("experiment reruns are byte-identical") {
  const auto dir_a = fresh_dir("rerun_a");
  const auto dir_b = fresh_dir("rerun_b");
  const std::string base =
      "schema_version = 1\n"
      "name = rep\n"
      "repeat = 2\n"
      "seed = 11\n"
      "problem.kind = consensus\n"
      "problem.dim = 4\n"
      "problem.clients = 5\n"
      "problem.seed = 2\n"
      "rounds = 30\n"
      "participation = 0.6\n"
      "client_lr = 0.05\n"
      "noise.z = 1\n"
      "noise.sigma = 0.3\n"
      "grad_noise.kind = gaussian\n"
      "grad_noise.zeta = 0.1\n";
  const auto exp_a =
      ExperimentFile::parse(base + "output_dir = " + dir_a.string() + "\n");
  const auto exp_b =
      ExperimentFile::parse(base + "output_dir = " + dir_b.string() + "\n");
  execute_experiment(exp_a, 1);
  execute_experiment(exp_b, 4);
  for (const char* name : {"rep_seed0.csv", "rep_seed1.csv"}) {
    CHECK(read_file(dir_a / name) == read_file(dir_b / name));
  }
  // Distinct seeds give distinct finals, so the sample std is positive.
  const auto summary = nlohmann::json::parse(read_file(dir_a / "summary.json"));
  CHECK(summary["groups"][0]["final_objective_std"].get<double>() > 0.0);
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("diverging run is reported and the rest still execute") {
  const auto dir = fresh_dir("diverge");
  const auto experiment = ExperimentFile::parse(
      "schema_version = 1\n"
      "name = blowup\n"
      "output_dir = " + dir.string() + "\n"
      "problem.kind = consensus\n"
      "problem.dim = 3\n"
      "problem.clients = 2\n"
      "rounds = 50\n"
      "client_lr = 400\n"
      "server_lr = 1.0\n"
      "compressor = identity\n"
      "sweep.client_lr = 0.05, 400\n");
  const auto result = execute_experiment(experiment, 1);
  REQUIRE(result.runs.size() == 2);
  CHECK_FALSE(result.runs[0].diverged);
  CHECK(result.runs[1].diverged);
  CHECK(result.any_diverged);

  const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  CHECK(summary["groups"][1]["runs"][0]["status"] == "diverged");
  std::filesystem::remove_all(dir);
}

TEST_CASE("dump_updates writes the serialized payload stream") {
  const auto dir = fresh_dir("dump");
  const auto experiment = ExperimentFile::parse(
      "schema_version = 1\n"
      "name = dumped\n"
      "output_dir = " + dir.string() + "\n"
      "problem.kind = consensus\n"
      "problem.dim = 9\n"
      "problem.clients = 3\n"
      "rounds = 4\n"
      "client_lr = 0.05\n"
      "noise.z = inf\n"
      "noise.sigma = 0.5\n"
      "dump_updates = true\n");
  execute_experiment(experiment, 1);
  const std::string blob = read_file(dir / "dumped_seed0.updates.bin");
  // 4 rounds x 3 clients x (1 + 4 + ceil(9/8)) bytes per sign frame.
  CHECK(blob.size() == 4u * 3u * (1 + 4 + 2));
  std::filesystem::remove_all(dir);
}
