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

#include <optional>
#include <span>
#include <string>

namespace signfed {

// Plateau criterion for the noise scale: start at sigma_init and multiply by
// beta whenever the best objective seen so far fails to improve for
// `patience` consecutive rounds; stop adjusting once sigma has exceeded
// sigma_bound (one final jump past the bound is possible, since the check is
// sigma <= sigma_bound before jumping).
struct PlateauConfig {
  double sigma_init = 0.01;
  double sigma_bound = 0.5;
  int patience = 30;
  double beta = 1.5;
  // "Improving" means a strict decrease of the best-so-far objective;
  // rel_improvement > 0 additionally requires the decrease to beat
  // rel_improvement * |best|.
  double rel_improvement = 0.0;
};

struct PlateauState {
  double sigma = 0.0;
  double best_objective = 0.0;
  int stall_rounds = 0;
  bool has_best = false;

  static PlateauState init(const PlateauConfig& config) {
    PlateauState state;
    state.sigma = config.sigma_init;
    return state;
  }
};

void validate(const PlateauConfig& config);

// Feeds one end-of-round objective into the schedule.
void observe(PlateauState& state, const PlateauConfig& config, double objective);

// Named presets with the paper-tuned schedules for the three training setups.
struct PlateauPreset {
  std::string name;
  PlateauConfig config;
};

std::span<const PlateauPreset> plateau_presets();
std::optional<PlateauConfig> plateau_preset(const std::string& name);

}  // namespace signfed
