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
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "signfed/fedsim.hpp"

namespace signfed {

// Configuration error with the offending dotted key attached; the CLI maps
// these to exit code 2 with a field-level message.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Flat `key = value` text with dotted keys, one pair per line, `#` comments.
// The experiment schema is versioned via the required `schema_version` key.
class KeyValues {
 public:
  static KeyValues parse_string(const std::string& text);
  static KeyValues parse_file(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  uint64_t get_uint(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  // Comma-separated raw items of a list-valued key.
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// The experiment-file schema: every key the parser understands. Keys under
// `sweep.` must name one of these.
std::span<const std::string_view> known_config_keys();

inline constexpr int kSchemaVersion = 1;

// One swept key with its override values (raw text, applied by substitution
// and re-validation per variant).
struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

// A full experiment description: one base RunConfig, optional sweep axes
// (cartesian product), a repeat count with seed offsets and an output
// directory.
struct ExperimentFile {
  std::string name;
  std::filesystem::path output_dir;
  int repeat = 1;
  RunConfig base;
  std::vector<SweepAxis> sweep;
  KeyValues raw;

  static ExperimentFile load(const std::filesystem::path& path);
  static ExperimentFile parse(const std::string& text);
};

// Builds the RunConfig described by a key/value set; throws ConfigError on
// invalid or unknown keys.
RunConfig run_config_from_keyvalues(const KeyValues& kv);

// Canonical textual form of a RunConfig (parses back to an equal config).
std::string run_config_to_text(const RunConfig& config, const std::string& name,
                               const std::string& output_dir, int repeat);

// One concrete (sweep variant, repeat) execution unit.
struct RunVariant {
  std::string group;                 // base name plus "key=value" suffixes
  std::vector<std::pair<std::string, std::string>> overrides;
  RunConfig config;                  // seed already offset for the repeat
  int repeat_index = 0;
};

// Expands sweep axes and repeats into concrete variants. Seeds are
// base_seed + repeat index, so any single run is reproducible in isolation.
std::vector<RunVariant> expand_variants(const ExperimentFile& experiment);

}  // namespace signfed
