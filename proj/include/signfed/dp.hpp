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

#include <span>
#include <string>
#include <vector>

#include "signfed/compressors.hpp"

namespace signfed {

// Client-level DP mechanism for sign compression: l2-clip the local update,
// perturb with Gaussian noise of per-coordinate std noise_multiplier * clip,
// then sign. Privacy accounting is out of scope here; noise_multiplier is a
// direct input (see dp_presets() for budget/noise pairs from the reference
// accounting).
struct DpConfig {
  double clip = 1.0;              // C > 0
  double noise_multiplier = 0.0;  // sigma_dp >= 0
};

void validate(const DpConfig& config);

// v / max(1, ||v||_2 / c): output norm <= c, direction preserved.
std::vector<double> clip_l2(std::span<const double> v, double c);

// Sign(clip(v, C) + N(0, (sigma_dp C)^2 I)). Implemented as the z = 1
// stochastic sign with sigma = sigma_dp * C applied after clipping, so a
// seed-matched StochasticSign(1, sigma_dp*C) of the clipped vector produces
// a bit-identical payload. The payload is exactly d packed sign bits and
// carries no norms.
CompressedUpdate dp_compress(std::span<const double> v, const DpConfig& config,
                             Philox& rng);

// Documentation-only presets pairing privacy budgets with the noise scale
// and server stepsize used at that budget (EMNIST, client-level DP).
struct DpPreset {
  std::string name;
  double epsilon;
  double noise_multiplier;
  double server_lr;
};

std::span<const DpPreset> dp_presets();

}  // namespace signfed
