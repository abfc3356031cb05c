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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "signfed/compressors.hpp"
#include "signfed/dp.hpp"
#include "signfed/noise.hpp"
#include "signfed/plateau.hpp"
#include "signfed/problems.hpp"

namespace signfed {

// Server stepsize rule. Auto follows the analysis: eta = eta_z * sigma for
// the stochastic sign compressor (eta = sigma for z = infinity) and
// eta = eta_1 * sigma_dp * clip on the DP path. Compressors without a noise
// scale need an explicit eta.
struct ServerLr {
  bool auto_rule = true;
  double value = 0.0;

  static ServerLr auto_from_noise() { return {true, 0.0}; }
  static ServerLr explicit_value(double eta) { return {false, eta}; }
};

enum class SchedulerKind { kNone, kPlateau };

struct RunConfig {
  ProblemSpec problem;
  int rounds = 2000;
  int local_steps = 1;
  double participation = 1.0;  // q in (0,1]; ceil(q*n) clients per round
  double client_lr = 0.01;
  ServerLr server_lr;
  CompressorKind compressor = CompressorKind::exact_sign();
  GradNoiseModel grad_noise;
  SchedulerKind scheduler = SchedulerKind::kNone;
  PlateauConfig plateau;
  uint64_t seed = 1;
  std::optional<DpConfig> dp;
  bool dump_updates = false;
  // Initial iterate; empty means the zero vector, a single entry broadcasts.
  std::vector<double> x0;
};

// Throws std::invalid_argument describing the offending field.
void validate(const RunConfig& config);

// Per-round telemetry. avg_local_grad_sq is the running average over rounds
// so far of ||grad f(x_{t-1})||^2, the gradient at the iterate each round
// started from. The analysis averages gradients at the (unobservable)
// averaged local iterates; the server iterate is the measurable surrogate.
struct RoundMetrics {
  int round = 0;               // 1-based
  double objective = 0.0;      // f(x_t)
  double grad_norm_sq = 0.0;   // ||grad f(x_t)||^2
  double avg_local_grad_sq = 0.0;
  uint64_t uplink_bits = 0;    // cumulative
  double sigma = 0.0;          // noise scale in effect this round (0 if none)
};

struct RunResult {
  std::vector<RoundMetrics> rounds;
  std::vector<double> final_x;
  // Serialized client messages in (round, sorted client index) order; only
  // populated when dump_updates is set.
  std::vector<uint8_t> dumped_updates;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// E local SGD steps from x_start; returns the accumulated update
// (x_start - x_E) / client_lr = sum_s g_s, the exact quantity the sign
// operator is applied to. Gradient draws consume `rng` sequentially across
// the local steps. Throws DivergenceError on a non-finite gradient.
std::vector<double> local_update(const Problem& problem,
                                 const GradNoiseModel& noise, int client,
                                 std::span<const double> x_start,
                                 int local_steps, double client_lr, Philox& rng);

// Executes the full client/server loop for config.rounds rounds. Each round
// samples ceil(q*n) clients uniformly without replacement, runs the local
// updates, compresses with fresh per-(round, client) noise streams, averages
// the decoded updates over the sampled set and applies the server step.
// Fully deterministic in config.seed; `threads` only distributes the
// independent client computations and never changes results. Aborts with
// DivergenceError once f(x_t) > 1e6 * f(x_0) + 1e6.
RunResult run(const RunConfig& config, int threads = 1);

// Full right-hand side of the finite-z convergence bound, term by term:
//   2 (f0 - f*) / (T E gamma)
// + gamma zeta^2 L_max / n
// + 4 gamma^2 (E-1) E L_max^2 (zeta^2 + G^2) / 3
// + 2^{2z+1} E^{2z} sqrt(Q_z + G^{4z+2}) G / (sqrt(2) (2z+1) sigma^{2z})
// + gamma 2^{4z} E^{4z+1} (Q_z + G^{4z+2}) L_max / (2 (2z+1)^2 sigma^{4z})
// + 4 eta_z^2 gamma sigma^2 sum_j L_j / (E n).
// Preconditions: gamma <= 1/L_max, sigma > 0, finite z >= 1; d must match
// constants.smoothness (size-1 smoothness broadcasts to d coordinates).
double theorem1_bound(const TheoryConstants& constants, double f0, int rounds,
                      int local_steps, int n_clients, double gamma,
                      double sigma, int z, int d);

// Stepsize/noise schedules from the rate analysis, tau = T*E gradient
// queries per client. For finite z: gamma = min{n^{z/(2z+1)}
// tau^{-(z+1)/(2z+1)}, 1/L_max}, sigma = (n tau)^{1/(4z+2)}, E_max =
// n^{-3z/(4z+2)} tau^{(z+2)/(4z+2)}. For z = infinity: gamma = min{sqrt(n /
// tau), 1/L_max}, E_max = n^{-3/4} tau^{1/4}, and sigma is left to the
// caller (it must exceed E (G + Q_inf)).
struct CorollarySchedule {
  double gamma = 0.0;
  std::optional<double> sigma;
  double max_local_steps = 0.0;
};

CorollarySchedule corollary_schedule(ZIndex z, int n_clients, double tau,
                                     double l_max);

// Convergence threshold for the uniform-noise case: E * (G + Q_inf).
double sigma_threshold_inf(double local_steps, double grad_bound, double q_inf);

}  // namespace signfed
