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

#include "signfed/dp.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace signfed {

void validate(const DpConfig& config) {
  if (!(config.clip > 0.0)) {
    throw std::invalid_argument("dp.clip: must be > 0");
  }
  if (config.noise_multiplier < 0.0) {
    throw std::invalid_argument("dp.noise_multiplier: must be >= 0");
  }
}

std::vector<double> clip_l2(std::span<const double> v, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip_l2: clip must be > 0");
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  const double norm = std::sqrt(norm_sq);
  const double divisor = std::max(1.0, norm / c);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= divisor;
  return out;
}

CompressedUpdate dp_compress(std::span<const double> v, const DpConfig& config,
                             Philox& rng) {
  validate(config);
  const std::vector<double> clipped = clip_l2(v, config.clip);
  const NoiseSpec gaussian{ZIndex::finite(1),
                           config.noise_multiplier * config.clip};
  return compress(CompressorKind::stochastic_sign(gaussian), clipped, rng);
}

std::span<const DpPreset> dp_presets() {
  static const std::array<DpPreset, 6> kPresets = {{
      {"eps1", 1.0029, 2.77, 0.03},
      {"eps2", 2.0171, 1.57, 0.05},
      {"eps4", 4.0459, 1.02, 0.05},
      {"eps6", 6.0135, 0.845, 0.05},
      {"eps8", 8.0336, 0.75, 0.05},
      {"eps10", 9.9996, 0.685, 0.05},
  }};
  return kPresets;
}

}  // namespace signfed
