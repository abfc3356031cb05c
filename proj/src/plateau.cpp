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

#include "signfed/plateau.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace signfed {

void validate(const PlateauConfig& config) {
  if (!(config.sigma_init > 0.0)) {
    throw std::invalid_argument("plateau.sigma_init: must be > 0");
  }
  if (!(config.sigma_bound >= config.sigma_init)) {
    throw std::invalid_argument("plateau.sigma_bound: must be >= sigma_init");
  }
  if (config.patience < 1) {
    throw std::invalid_argument("plateau.patience: must be >= 1");
  }
  if (!(config.beta >= 1.5 && config.beta <= 2.0)) {
    throw std::invalid_argument("plateau.beta: must lie in [1.5, 2]");
  }
  if (config.rel_improvement < 0.0) {
    throw std::invalid_argument("plateau.rel_tol: must be >= 0");
  }
}

void observe(PlateauState& state, const PlateauConfig& config, double objective) {
  if (!std::isfinite(objective)) {
    throw std::invalid_argument("plateau: objective must be finite");
  }
  const bool improving =
      !state.has_best ||
      objective < state.best_objective -
                      config.rel_improvement * std::abs(state.best_objective);
  if (improving) {
    state.best_objective = objective;
    state.has_best = true;
    state.stall_rounds = 0;
    return;
  }
  ++state.stall_rounds;
  if (state.stall_rounds >= config.patience && state.sigma <= config.sigma_bound) {
    state.sigma *= config.beta;
    state.stall_rounds = 0;
  }
}

std::span<const PlateauPreset> plateau_presets() {
  static const std::array<PlateauPreset, 3> kPresets = {{
      {"mnist", {0.01, 0.5, 30, 1.5, 0.0}},
      {"emnist", {0.0001, 0.1, 10, 2.0, 0.0}},
      {"cifar10", {0.001, 0.1, 200, 1.5, 0.0}},
  }};
  return kPresets;
}

std::optional<PlateauConfig> plateau_preset(const std::string& name) {
  for (const auto& preset : plateau_presets()) {
    if (preset.name == name) return preset.config;
  }
  return std::nullopt;
}

}  // namespace signfed
