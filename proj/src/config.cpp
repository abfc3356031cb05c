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

#include "signfed/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <span>
#include <sstream>
#include <string_view>

namespace signfed {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  for (char c : value) {
    if (c == ',') {
      items.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  items.push_back(trim(current));
  return items;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double parsed = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + value + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  int64_t parsed = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  }
  return parsed;
}

}  // namespace

KeyValues KeyValues::parse_string(const std::string& text) {
  KeyValues kv;
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number),
                        "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_number), "empty key");
    }
    if (kv.values_.count(key)) {
      throw ConfigError(key, "duplicate key");
    }
    kv.values_[key] = value;
  }
  return kv;
}

KeyValues KeyValues::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

void KeyValues::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string KeyValues::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "required key is missing");
  return it->second;
}

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

int64_t KeyValues::get_int(const std::string& key) const {
  return parse_int(key, get_string(key));
}

int64_t KeyValues::get_int(const std::string& key, int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_int(key, it->second);
}

uint64_t KeyValues::get_uint(const std::string& key, uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const int64_t v = parse_int(key, it->second);
  if (v < 0) throw ConfigError(key, "expected a non-negative integer");
  return static_cast<uint64_t>(v);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + it->second + "'");
}

std::vector<double> KeyValues::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : get_list(key)) {
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<std::string> KeyValues::get_list(const std::string& key) const {
  const std::string value = get_string(key);
  auto items = split_list(value);
  if (items.size() == 1 && items[0].empty()) {
    throw ConfigError(key, "expected a non-empty list");
  }
  for (const auto& item : items) {
    if (item.empty()) throw ConfigError(key, "empty list element");
  }
  return items;
}

std::span<const std::string_view> known_config_keys() {
  static constexpr std::string_view kKeys[] = {
      "schema_version", "name", "output_dir", "repeat", "seed", "dump_updates",
      "x0", "problem.kind", "problem.dim", "problem.clients", "problem.seed",
      "problem.a", "problem.samples_per_client", "problem.dirichlet_alpha",
      "rounds", "local_steps", "participation", "client_lr", "server_lr",
      "compressor", "noise.z", "noise.sigma", "quantizer.levels",
      "grad_noise.kind", "grad_noise.zeta", "grad_noise.q_inf", "scheduler",
      "plateau.preset", "plateau.sigma_init", "plateau.sigma_bound",
      "plateau.patience", "plateau.beta", "plateau.rel_tol", "dp.enabled",
      "dp.preset", "dp.clip", "dp.noise_multiplier",
  };
  return kKeys;
}

namespace {

bool is_known_key(std::string_view key) {
  for (const std::string_view known : known_config_keys()) {
    if (key == known) return true;
  }
  return false;
}

}  // namespace

RunConfig run_config_from_keyvalues(const KeyValues& kv) {
  RunConfig config;

  const std::string problem_kind = kv.get_string("problem.kind", "consensus");
  if (problem_kind == "consensus") {
    config.problem.kind = ProblemSpec::Kind::kConsensus;
  } else if (problem_kind == "counterexample") {
    config.problem.kind = ProblemSpec::Kind::kCounterexample;
  } else if (problem_kind == "synthetic_logreg") {
    config.problem.kind = ProblemSpec::Kind::kSyntheticLogreg;
  } else {
    throw ConfigError("problem.kind", "unknown problem '" + problem_kind + "'");
  }

  config.seed = kv.get_uint("seed", 1);
  config.problem.seed = kv.get_uint("problem.seed", config.seed);
  config.problem.dim = static_cast<int>(kv.get_int("problem.dim", 10));
  config.problem.clients = static_cast<int>(kv.get_int("problem.clients", 10));
  config.problem.a = kv.get_double("problem.a", 1.0);
  config.problem.samples_per_client =
      static_cast<int>(kv.get_int("problem.samples_per_client", 100));
  config.problem.dirichlet_alpha = kv.get_double("problem.dirichlet_alpha", 1.0);
  if (config.problem.kind == ProblemSpec::Kind::kCounterexample) {
    config.problem.dim = 1;
    config.problem.clients = 2;
    if (!(config.problem.a > 0.0)) {
      throw ConfigError("problem.a", "must be > 0");
    }
  }
  if (config.problem.dim < 1) throw ConfigError("problem.dim", "must be >= 1");
  if (config.problem.clients < 1) {
    throw ConfigError("problem.clients", "must be >= 1");
  }
  if (config.problem.kind == ProblemSpec::Kind::kSyntheticLogreg) {
    if (config.problem.samples_per_client < 1) {
      throw ConfigError("problem.samples_per_client", "must be >= 1");
    }
    if (!(config.problem.dirichlet_alpha > 0.0)) {
      throw ConfigError("problem.dirichlet_alpha", "must be > 0");
    }
  }

  config.rounds = static_cast<int>(kv.get_int("rounds", 2000));
  config.local_steps = static_cast<int>(kv.get_int("local_steps", 1));
  config.participation = kv.get_double("participation", 1.0);
  config.client_lr = kv.get_double("client_lr", 0.01);

  const std::string server_lr = kv.get_string("server_lr", "auto");
  if (server_lr == "auto") {
    config.server_lr = ServerLr::auto_from_noise();
  } else {
    config.server_lr = ServerLr::explicit_value(parse_double("server_lr", server_lr));
  }

  const std::string compressor = kv.get_string("compressor", "stochastic_sign");
  const std::string z_text = kv.get_string("noise.z", "inf");
  ZIndex z = ZIndex::infinity();
  if (z_text != "inf") {
    const int64_t zv = parse_int("noise.z", z_text);
    if (zv < 1) throw ConfigError("noise.z", "must be a positive integer or inf");
    z = ZIndex::finite(static_cast<int>(zv));
  }
  const double sigma = kv.get_double("noise.sigma", 0.0);
  if (sigma < 0.0) throw ConfigError("noise.sigma", "must be >= 0");
  const int levels = static_cast<int>(kv.get_int("quantizer.levels", 1));

  if (compressor == "exact_sign") {
    config.compressor = CompressorKind::exact_sign();
  } else if (compressor == "stochastic_sign") {
    config.compressor = CompressorKind::stochastic_sign({z, sigma});
  } else if (compressor == "input_scaled_sign") {
    config.compressor = CompressorKind::input_scaled_sign();
  } else if (compressor == "quantizer") {
    config.compressor = CompressorKind::unbiased_quantizer(levels);
  } else if (compressor == "ef_sign") {
    config.compressor = CompressorKind::error_feedback_sign();
  } else if (compressor == "identity") {
    config.compressor = CompressorKind::identity();
  } else {
    throw ConfigError("compressor", "unknown compressor '" + compressor + "'");
  }

  const std::string noise_kind = kv.get_string("grad_noise.kind", "none");
  if (noise_kind == "none") {
    config.grad_noise.kind = GradNoiseModel::Kind::kNone;
  } else if (noise_kind == "gaussian") {
    config.grad_noise.kind = GradNoiseModel::Kind::kGaussian;
  } else if (noise_kind == "truncated_gaussian") {
    config.grad_noise.kind = GradNoiseModel::Kind::kTruncatedGaussian;
  } else {
    throw ConfigError("grad_noise.kind", "unknown noise model '" + noise_kind + "'");
  }
  config.grad_noise.zeta = kv.get_double("grad_noise.zeta", 0.0);
  config.grad_noise.q_inf = kv.get_double("grad_noise.q_inf", 0.0);
  if (config.grad_noise.zeta < 0.0) throw ConfigError("grad_noise.zeta", "must be >= 0");
  if (config.grad_noise.q_inf < 0.0) throw ConfigError("grad_noise.q_inf", "must be >= 0");

  const std::string scheduler = kv.get_string("scheduler", "none");
  if (scheduler == "none") {
    config.scheduler = SchedulerKind::kNone;
  } else if (scheduler == "plateau") {
    config.scheduler = SchedulerKind::kPlateau;
    const std::string preset = kv.get_string("plateau.preset", "");
    if (!preset.empty()) {
      const auto found = plateau_preset(preset);
      if (!found) throw ConfigError("plateau.preset", "unknown preset '" + preset + "'");
      config.plateau = *found;
    }
    config.plateau.sigma_init =
        kv.get_double("plateau.sigma_init", config.plateau.sigma_init);
    config.plateau.sigma_bound =
        kv.get_double("plateau.sigma_bound", config.plateau.sigma_bound);
    config.plateau.patience =
        static_cast<int>(kv.get_int("plateau.patience", config.plateau.patience));
    config.plateau.beta = kv.get_double("plateau.beta", config.plateau.beta);
    config.plateau.rel_improvement =
        kv.get_double("plateau.rel_tol", config.plateau.rel_improvement);
  } else {
    throw ConfigError("scheduler", "unknown scheduler '" + scheduler + "'");
  }

  if (kv.get_bool("dp.enabled", false)) {
    DpConfig dp;
    const std::string preset = kv.get_string("dp.preset", "");
    double preset_noise = -1.0;
    if (!preset.empty()) {
      bool found = false;
      for (const auto& candidate : dp_presets()) {
        if (candidate.name == preset) {
          preset_noise = candidate.noise_multiplier;
          found = true;
          break;
        }
      }
      if (!found) throw ConfigError("dp.preset", "unknown preset '" + preset + "'");
    }
    dp.clip = kv.get_double("dp.clip", 0.01);
    dp.noise_multiplier = kv.get_double(
        "dp.noise_multiplier", preset_noise >= 0.0 ? preset_noise : 0.0);
    config.dp = dp;
  } else {
    kv.get_string("dp.preset", "");
    kv.get_double("dp.clip", 0.0);
    kv.get_double("dp.noise_multiplier", 0.0);
  }

  config.dump_updates = kv.get_bool("dump_updates", false);
  if (kv.contains("x0")) config.x0 = kv.get_double_list("x0");

  try {
    validate(config);
  } catch (const std::invalid_argument& error) {
    const std::string what = error.what();
    const std::size_t colon = what.find(':');
    const std::string field = colon == std::string::npos ? "config" : what.substr(0, colon);
    const std::string message =
        colon == std::string::npos ? what : trim(what.substr(colon + 1));
    throw ConfigError(field, message);
  }
  return config;
}

ExperimentFile ExperimentFile::parse(const std::string& text) {
  ExperimentFile experiment;
  experiment.raw = KeyValues::parse_string(text);
  const KeyValues& kv = experiment.raw;

  const int64_t version = kv.get_int("schema_version");
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version",
                      "unsupported version " + std::to_string(version) +
                          " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  experiment.name = kv.get_string("name");
  if (experiment.name.empty()) throw ConfigError("name", "must not be empty");
  experiment.output_dir = kv.get_string("output_dir", "out");
  experiment.repeat = static_cast<int>(kv.get_int("repeat", 1));
  if (experiment.repeat < 1) throw ConfigError("repeat", "must be >= 1");

  // Unknown keys are rejected up front, before any semantic validation, so
  // typos surface as themselves.
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("sweep.", 0) == 0) {
      const std::string swept = key.substr(6);
      if (!is_known_key(swept)) {
        throw ConfigError(key, "does not name a RunConfig field");
      }
      SweepAxis axis;
      axis.key = swept;
      axis.values = kv.get_list(key);
      experiment.sweep.push_back(std::move(axis));
      continue;
    }
    if (!is_known_key(key)) throw ConfigError(key, "unknown key");
  }

  experiment.base = run_config_from_keyvalues(kv);

  // Every sweep variant must itself validate.
  for (const auto& axis : experiment.sweep) {
    for (const auto& value : axis.values) {
      KeyValues probe = kv;
      probe.set(axis.key, value);
      (void)run_config_from_keyvalues(probe);
    }
  }
  return experiment;
}

ExperimentFile ExperimentFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::vector<RunVariant> expand_variants(const ExperimentFile& experiment) {
  // Cartesian product over sweep axes.
  std::vector<std::vector<std::pair<std::string, std::string>>> combos{{}};
  for (const auto& axis : experiment.sweep) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& combo : combos) {
      for (const auto& value : axis.values) {
        auto extended = combo;
        extended.emplace_back(axis.key, value);
        next.push_back(std::move(extended));
      }
    }
    combos = std::move(next);
  }

  std::vector<RunVariant> variants;
  for (const auto& combo : combos) {
    KeyValues kv = experiment.raw;
    std::string group = experiment.name;
    for (const auto& [key, value] : combo) {
      kv.set(key, value);
      group += "_" + key + "=" + value;
    }
    const RunConfig variant_base = run_config_from_keyvalues(kv);
    for (int k = 0; k < experiment.repeat; ++k) {
      RunVariant variant;
      variant.group = group;
      variant.overrides = combo;
      variant.config = variant_base;
      variant.config.seed = variant_base.seed + static_cast<uint64_t>(k);
      variant.repeat_index = k;
      variants.push_back(std::move(variant));
    }
  }
  return variants;
}

std::string run_config_to_text(const RunConfig& config, const std::string& name,
                               const std::string& output_dir, int repeat) {
  std::ostringstream out;
  out.precision(17);
  out << "schema_version = " << kSchemaVersion << "\n";
  out << "name = " << name << "\n";
  out << "output_dir = " << output_dir << "\n";
  out << "repeat = " << repeat << "\n";
  out << "seed = " << config.seed << "\n";
  switch (config.problem.kind) {
    case ProblemSpec::Kind::kConsensus:
      out << "problem.kind = consensus\n";
      out << "problem.dim = " << config.problem.dim << "\n";
      out << "problem.clients = " << config.problem.clients << "\n";
      break;
    case ProblemSpec::Kind::kCounterexample:
      out << "problem.kind = counterexample\n";
      out << "problem.a = " << config.problem.a << "\n";
      break;
    case ProblemSpec::Kind::kSyntheticLogreg:
      out << "problem.kind = synthetic_logreg\n";
      out << "problem.dim = " << config.problem.dim << "\n";
      out << "problem.clients = " << config.problem.clients << "\n";
      out << "problem.samples_per_client = " << config.problem.samples_per_client
          << "\n";
      out << "problem.dirichlet_alpha = " << config.problem.dirichlet_alpha << "\n";
      break;
  }
  out << "problem.seed = " << config.problem.seed << "\n";
  out << "rounds = " << config.rounds << "\n";
  out << "local_steps = " << config.local_steps << "\n";
  out << "participation = " << config.participation << "\n";
  out << "client_lr = " << config.client_lr << "\n";
  if (config.server_lr.auto_rule) {
    out << "server_lr = auto\n";
  } else {
    out << "server_lr = " << config.server_lr.value << "\n";
  }
  out << "compressor = " << compressor_type_name(config.compressor.type) << "\n";
  if (config.compressor.type == CompressorType::kStochasticSign) {
    if (config.compressor.noise.z.is_infinite()) {
      out << "noise.z = inf\n";
    } else {
      out << "noise.z = " << config.compressor.noise.z.finite_value() << "\n";
    }
    out << "noise.sigma = " << config.compressor.noise.sigma << "\n";
  }
  if (config.compressor.type == CompressorType::kUnbiasedQuantizer) {
    out << "quantizer.levels = " << config.compressor.levels << "\n";
  }
  switch (config.grad_noise.kind) {
    case GradNoiseModel::Kind::kNone:
      out << "grad_noise.kind = none\n";
      break;
    case GradNoiseModel::Kind::kGaussian:
      out << "grad_noise.kind = gaussian\n";
      out << "grad_noise.zeta = " << config.grad_noise.zeta << "\n";
      break;
    case GradNoiseModel::Kind::kTruncatedGaussian:
      out << "grad_noise.kind = truncated_gaussian\n";
      out << "grad_noise.zeta = " << config.grad_noise.zeta << "\n";
      out << "grad_noise.q_inf = " << config.grad_noise.q_inf << "\n";
      break;
  }
  if (config.scheduler == SchedulerKind::kPlateau) {
    out << "scheduler = plateau\n";
    out << "plateau.sigma_init = " << config.plateau.sigma_init << "\n";
    out << "plateau.sigma_bound = " << config.plateau.sigma_bound << "\n";
    out << "plateau.patience = " << config.plateau.patience << "\n";
    out << "plateau.beta = " << config.plateau.beta << "\n";
    if (config.plateau.rel_improvement > 0.0) {
      out << "plateau.rel_tol = " << config.plateau.rel_improvement << "\n";
    }
  }
  if (config.dp.has_value()) {
    out << "dp.enabled = true\n";
    out << "dp.clip = " << config.dp->clip << "\n";
    out << "dp.noise_multiplier = " << config.dp->noise_multiplier << "\n";
  }
  if (config.dump_updates) out << "dump_updates = true\n";
  if (!config.x0.empty()) {
    out << "x0 = ";
    for (std::size_t j = 0; j < config.x0.size(); ++j) {
      if (j) out << ", ";
      out << config.x0[j];
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace signfed
