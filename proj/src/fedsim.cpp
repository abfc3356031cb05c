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

#include "signfed/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace signfed {

namespace {

bool compressor_has_noise_scale(const RunConfig& config) {
  if (config.dp.has_value()) return true;
  return config.compressor.type == CompressorType::kStochasticSign &&
         config.compressor.noise.sigma > 0.0;
}

double resolve_server_lr(const RunConfig& config, double sigma) {
  if (!config.server_lr.auto_rule) return config.server_lr.value;
  if (config.dp.has_value()) {
    return eta(ZIndex::finite(1)) * config.dp->noise_multiplier *
           config.dp->clip;
  }
  return eta(config.compressor.noise.z) * sigma;
}

// ceil(q * n) participants, uniform without replacement, returned sorted so
// aggregation order is independent of the sampling path.
std::vector<int> sample_participants(int n, double q, uint64_t seed,
                                     uint64_t round) {
  const int count = std::min<int>(
      n, static_cast<int>(std::ceil(q * static_cast<double>(n))));
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  if (count == n) return pool;
  Philox rng(seed, round, 0, StreamPurpose::kClientSampling);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct ClientMessage {
  CompressedUpdate update;
};

// One client's work for one round; independent of every other client.
ClientMessage run_client(const RunConfig& config, const Problem& problem,
                         std::span<const double> x, double sigma,
                         uint64_t round, int client, EfState* ef) {
  Philox grad_rng(config.seed, round, static_cast<uint64_t>(client),
                  StreamPurpose::kGradNoise);
  std::vector<double> accumulated =
      local_update(problem, config.grad_noise, client, x, config.local_steps,
                   config.client_lr, grad_rng);

  Philox compress_rng(config.seed, round, static_cast<uint64_t>(client),
                      StreamPurpose::kCompressNoise);
  if (config.dp.has_value()) {
    // DP path works on the raw parameter difference x_{t-1} - x_{t-1,E}.
    std::vector<double> raw(accumulated.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
      raw[j] = config.client_lr * accumulated[j];
    }
    return {dp_compress(raw, *config.dp, compress_rng)};
  }

  CompressorKind kind = config.compressor;
  if (kind.type == CompressorType::kStochasticSign) kind.noise.sigma = sigma;
  if (kind.type == CompressorType::kUnbiasedQuantizer) {
    Philox quant_rng(config.seed, round, static_cast<uint64_t>(client),
                     StreamPurpose::kQuantizer);
    return {compress(kind, accumulated, quant_rng)};
  }
  return {compress(kind, accumulated, compress_rng, ef)};
}

}  // namespace

void validate(const RunConfig& config) {
  if (config.rounds < 1) throw std::invalid_argument("rounds: must be >= 1");
  if (config.local_steps < 1) {
    throw std::invalid_argument("local_steps: must be >= 1");
  }
  if (!(config.client_lr > 0.0)) {
    throw std::invalid_argument("client_lr: must be > 0");
  }
  if (!(config.participation > 0.0 && config.participation <= 1.0)) {
    throw std::invalid_argument("participation: must lie in (0, 1]");
  }
  if (config.compressor.type == CompressorType::kUnbiasedQuantizer &&
      (config.compressor.levels < 1 || config.compressor.levels > 255)) {
    throw std::invalid_argument("quantizer.levels: must lie in [1, 255]");
  }
  if (config.compressor.type == CompressorType::kStochasticSign &&
      config.compressor.noise.sigma < 0.0) {
    throw std::invalid_argument("noise.sigma: must be >= 0");
  }
  if (config.server_lr.auto_rule && !compressor_has_noise_scale(config) &&
      config.scheduler != SchedulerKind::kPlateau) {
    throw std::invalid_argument(
        "server_lr: auto requires a compressor with a noise scale "
        "(stochastic_sign with sigma > 0, or the DP path); use an explicit "
        "value");
  }
  if (!config.server_lr.auto_rule && !(config.server_lr.value > 0.0)) {
    throw std::invalid_argument("server_lr: explicit value must be > 0");
  }
  if (config.compressor.type == CompressorType::kErrorFeedbackSign &&
      config.participation < 1.0) {
    throw std::invalid_argument(
        "compressor: ef_sign requires full participation (residuals cannot "
        "be tracked under client sampling)");
  }
  if (config.scheduler == SchedulerKind::kPlateau) {
    if (config.compressor.type != CompressorType::kStochasticSign) {
      throw std::invalid_argument(
          "scheduler: plateau only applies to the stochastic_sign compressor");
    }
    validate(config.plateau);
  }
  if (config.dp.has_value()) {
    validate(*config.dp);
    if (config.compressor.type != CompressorType::kStochasticSign ||
        config.compressor.noise.z != ZIndex::finite(1)) {
      throw std::invalid_argument(
          "dp: the DP path uses Gaussian perturbation; set compressor = "
          "stochastic_sign with noise.z = 1");
    }
    if (config.scheduler != SchedulerKind::kNone) {
      throw std::invalid_argument(
          "dp: the noise scale is fixed by the privacy budget; scheduler must "
          "be none");
    }
  }
  // x0 dimension is checked in run(), where the problem is instantiated.
}

std::vector<double> local_update(const Problem& problem,
                                 const GradNoiseModel& noise, int client,
                                 std::span<const double> x_start,
                                 int local_steps, double client_lr,
                                 Philox& rng) {
  if (local_steps < 1) {
    throw std::invalid_argument("local_update: local_steps must be >= 1");
  }
  std::vector<double> x(x_start.begin(), x_start.end());
  std::vector<double> accumulated(problem.dim(), 0.0);
  for (int s = 0; s < local_steps; ++s) {
    const std::vector<double> g =
        minibatch_gradient(problem, noise, client, x, rng);
    for (int j = 0; j < problem.dim(); ++j) {
      if (!std::isfinite(g[j])) {
        std::ostringstream msg;
        msg << "local_update: non-finite gradient for client " << client
            << " at local step " << s + 1 << ", coordinate " << j;
        throw DivergenceError(msg.str());
      }
      accumulated[j] += g[j];
      x[j] -= client_lr * g[j];
    }
  }
  return accumulated;
}

RunResult run(const RunConfig& config, int threads) {
  validate(config);
  const ProblemPtr problem = config.problem.instantiate();
  const int n = problem->num_clients();
  const int d = problem->dim();

  std::vector<double> x(d, 0.0);
  if (config.x0.size() == 1) {
    std::fill(x.begin(), x.end(), config.x0[0]);
  } else if (!config.x0.empty()) {
    if (config.x0.size() != static_cast<std::size_t>(d)) {
      throw std::invalid_argument("x0: dimension does not match the problem");
    }
    x = config.x0;
  }

  std::vector<EfState> ef_states;
  if (config.compressor.type == CompressorType::kErrorFeedbackSign) {
    ef_states.assign(n, EfState(d));
  }

  PlateauState plateau_state = PlateauState::init(config.plateau);
  double sigma = config.scheduler == SchedulerKind::kPlateau
                     ? plateau_state.sigma
                     : config.compressor.noise.sigma;
  if (config.dp.has_value()) {
    sigma = config.dp->noise_multiplier * config.dp->clip;
  }

  RunResult result;
  result.rounds.reserve(config.rounds);
  const double f0 = problem->objective(x);
  const double divergence_cap = 1e6 * f0 + 1e6;
  uint64_t total_bits = 0;
  double grad_sq_sum = 0.0;

  const int worker_count =
      std::max(1, std::min<int>(threads, std::thread::hardware_concurrency()));

  for (int t = 1; t <= config.rounds; ++t) {
    if (config.scheduler == SchedulerKind::kPlateau) {
      sigma = plateau_state.sigma;
    }

    {
      const std::vector<double> g_start = problem->gradient(x);
      double g_sq = 0.0;
      for (double v : g_start) g_sq += v * v;
      grad_sq_sum += g_sq;
    }

    const std::vector<int> participants = sample_participants(
        n, config.participation, config.seed, static_cast<uint64_t>(t));
    std::vector<ClientMessage> messages(participants.size());

    const auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const int client = participants[k];
        EfState* ef = ef_states.empty() ? nullptr : &ef_states[client];
        messages[k] = run_client(config, *problem, x, sigma,
                                 static_cast<uint64_t>(t), client, ef);
      }
    };
    if (worker_count <= 1 || participants.size() <= 1) {
      work(0, participants.size());
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk =
          (participants.size() + worker_count - 1) / worker_count;
      for (std::size_t begin = 0; begin < participants.size(); begin += chunk) {
        pool.emplace_back(work, begin,
                          std::min(begin + chunk, participants.size()));
      }
      for (auto& th : pool) th.join();
    }

    // Aggregation in sorted client order, independent of the thread layout.
    std::vector<double> mean_update(d, 0.0);
    for (const auto& message : messages) {
      const std::vector<double> decoded = message.update.decode();
      for (int j = 0; j < d; ++j) mean_update[j] += decoded[j];
      total_bits += uplink_bits(config.compressor, static_cast<uint64_t>(d));
      if (config.dump_updates) {
        const auto bytes = message.update.serialize();
        result.dumped_updates.insert(result.dumped_updates.end(), bytes.begin(),
                                     bytes.end());
      }
    }
    for (double& v : mean_update) v /= static_cast<double>(messages.size());

    const double server_lr = resolve_server_lr(config, sigma);
    // Algorithm 2's server step has no client_lr factor: the DP update is a
    // parameter difference, not an accumulated gradient.
    const double step = config.dp.has_value() ? server_lr
                                              : server_lr * config.client_lr;
    for (int j = 0; j < d; ++j) x[j] -= step * mean_update[j];

    const double objective = problem->objective(x);
    if (!std::isfinite(objective) || objective > divergence_cap) {
      std::ostringstream msg;
      msg << "run: objective " << objective << " exceeded the divergence guard "
          << divergence_cap << " at round " << t;
      throw DivergenceError(msg.str());
    }

    const std::vector<double> g_now = problem->gradient(x);
    double grad_sq = 0.0;
    for (double v : g_now) grad_sq += v * v;

    RoundMetrics metrics;
    metrics.round = t;
    metrics.objective = objective;
    metrics.grad_norm_sq = grad_sq;
    metrics.avg_local_grad_sq = grad_sq_sum / t;
    metrics.uplink_bits = total_bits;
    metrics.sigma = config.compressor.type == CompressorType::kStochasticSign ||
                            config.dp.has_value()
                        ? sigma
                        : 0.0;
    result.rounds.push_back(metrics);

    if (config.scheduler == SchedulerKind::kPlateau) {
      observe(plateau_state, config.plateau, objective);
    }
  }

  result.final_x = std::move(x);
  return result;
}

double theorem1_bound(const TheoryConstants& constants, double f0, int rounds,
                      int local_steps, int n_clients, double gamma,
                      double sigma, int z, int d) {
  if (z < 1) throw std::invalid_argument("theorem1_bound: z must be finite >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("theorem1_bound: sigma must be > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("theorem1_bound: gamma must be > 0");
  if (constants.l_max > 0.0 && gamma > 1.0 / constants.l_max) {
    throw std::invalid_argument("theorem1_bound: requires gamma <= 1/L_max");
  }
  if (rounds < 1 || local_steps < 1 || n_clients < 1 || d < 1) {
    throw std::invalid_argument("theorem1_bound: T, E, n, d must be >= 1");
  }
  double smoothness_sum = 0.0;
  double smoothness_max = 0.0;
  if (constants.smoothness.size() == 1) {
    smoothness_sum = constants.smoothness[0] * d;
    smoothness_max = constants.smoothness[0];
  } else if (constants.smoothness.size() == static_cast<std::size_t>(d)) {
    for (double l : constants.smoothness) {
      smoothness_sum += l;
      smoothness_max = std::max(smoothness_max, l);
    }
  } else {
    throw std::invalid_argument(
        "theorem1_bound: smoothness must have size d (or 1 to broadcast)");
  }
  for (double l : constants.smoothness) {
    if (l < 0.0) {
      throw std::invalid_argument("theorem1_bound: smoothness must be >= 0");
    }
  }
  if (constants.l_max != smoothness_max) {
    throw std::invalid_argument(
        "theorem1_bound: l_max must equal max_j smoothness[j]");
  }
  if (constants.zeta_sq < 0.0 || constants.grad_bound < 0.0 ||
      constants.q_z < 0.0) {
    throw std::invalid_argument(
        "theorem1_bound: zeta_sq, grad_bound and q_z must be >= 0");
  }

  const double T = rounds;
  const double E = local_steps;
  const double nn = n_clients;
  const double G = constants.grad_bound;
  const double moment = constants.q_z + std::pow(G, 4.0 * z + 2.0);
  const double two_z1 = 2.0 * z + 1.0;
  const double eta_z = eta(ZIndex::finite(z));

  const double descent = 2.0 * (f0 - constants.f_star) / (T * E * gamma);
  const double sgd_variance = gamma * constants.zeta_sq * constants.l_max / nn;
  const double drift = 4.0 * gamma * gamma * (E - 1.0) * E * constants.l_max *
                       constants.l_max * (constants.zeta_sq + G * G) / 3.0;
  const double bias_first = std::pow(2.0, 2.0 * z + 1.0) * std::pow(E, 2.0 * z) *
                            std::sqrt(moment) * G /
                            (std::sqrt(2.0) * two_z1 * std::pow(sigma, 2.0 * z));
  const double bias_second = gamma * std::pow(2.0, 4.0 * z) *
                             std::pow(E, 4.0 * z + 1.0) * moment *
                             constants.l_max /
                             (2.0 * two_z1 * two_z1 * std::pow(sigma, 4.0 * z));
  const double injected_variance =
      4.0 * eta_z * eta_z * gamma * sigma * sigma * smoothness_sum / (E * nn);

  return descent + sgd_variance + drift + bias_first + bias_second +
         injected_variance;
}

CorollarySchedule corollary_schedule(ZIndex z, int n_clients, double tau,
                                     double l_max) {
  if (n_clients < 1 || !(tau >= 1.0)) {
    throw std::invalid_argument("corollary_schedule: n and tau must be >= 1");
  }
  const double n = n_clients;
  const double lr_cap = l_max > 0.0 ? 1.0 / l_max
                                    : std::numeric_limits<double>::infinity();
  CorollarySchedule schedule;
  if (z.is_infinite()) {
    schedule.gamma = std::min(std::sqrt(n / tau), lr_cap);
    schedule.max_local_steps = std::pow(n, -0.75) * std::pow(tau, 0.25);
    return schedule;
  }
  const double zv = z.finite_value();
  schedule.gamma = std::min(std::pow(n, zv / (2.0 * zv + 1.0)) *
                                std::pow(tau, -(zv + 1.0) / (2.0 * zv + 1.0)),
                            lr_cap);
  schedule.sigma = std::pow(n * tau, 1.0 / (4.0 * zv + 2.0));
  schedule.max_local_steps = std::pow(n, -3.0 * zv / (4.0 * zv + 2.0)) *
                             std::pow(tau, (zv + 2.0) / (4.0 * zv + 2.0));
  return schedule;
}

double sigma_threshold_inf(double local_steps, double grad_bound, double q_inf) {
  return local_steps * (grad_bound + q_inf);
}

}  // namespace signfed
