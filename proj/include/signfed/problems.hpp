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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "signfed/rng.hpp"

namespace signfed {

// A distributed objective f(x) = (1/n) sum_i f_i(x) with per-client gradient
// oracles. Immutable after construction; gradient calls are safe from many
// threads with per-thread RNGs.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual int dim() const = 0;
  virtual int num_clients() const = 0;
  virtual double client_objective(int client, std::span<const double> x) const = 0;
  virtual void client_gradient(int client, std::span<const double> x,
                               std::span<double> out) const = 0;

  // Known only for the analytic problems.
  virtual std::optional<std::vector<double>> optimum() const { return std::nullopt; }
  virtual std::optional<double> optimal_value() const { return std::nullopt; }

  double objective(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;
  std::vector<double> client_gradient(int client, std::span<const double> x) const;
};

using ProblemPtr = std::shared_ptr<const Problem>;

// Consensus objective f_i(x) = 1/2 ||x - y_i||^2 with i.i.d. standard
// Gaussian targets y_i; x* = mean(y_i).
class ConsensusProblem final : public Problem {
 public:
  ConsensusProblem(int dim, int n_clients, uint64_t seed);

  using Problem::client_gradient;

  int dim() const override { return dim_; }
  int num_clients() const override { return static_cast<int>(targets_.size()); }
  double client_objective(int client, std::span<const double> x) const override;
  void client_gradient(int client, std::span<const double> x,
                       std::span<double> out) const override;
  std::optional<std::vector<double>> optimum() const override { return optimum_; }
  std::optional<double> optimal_value() const override { return f_star_; }

  const std::vector<double>& target(int client) const { return targets_[client]; }

 private:
  int dim_;
  std::vector<std::vector<double>> targets_;
  std::vector<double> optimum_;
  double f_star_;
};

// The divergence instance for plain sign descent: n = 2, f_1 = (x - A)^2,
// f_2 = (x + A)^2, x* = 0. Every point of (-A, A) has averaged sign gradient
// zero.
class CounterexampleProblem final : public Problem {
 public:
  explicit CounterexampleProblem(double a);

  using Problem::client_gradient;

  int dim() const override { return 1; }
  int num_clients() const override { return 2; }
  double client_objective(int client, std::span<const double> x) const override;
  void client_gradient(int client, std::span<const double> x,
                       std::span<double> out) const override;
  std::optional<std::vector<double>> optimum() const override {
    return std::vector<double>{0.0};
  }
  std::optional<double> optimal_value() const override { return a_ * a_; }

  double a() const { return a_; }

 private:
  double a_;
};

// Binary logistic regression with L2 regularization 1e-4 and Dirichlet label
// skew across clients: client i's positive-label probability is drawn from
// the symmetric Dirichlet(alpha) (Beta(alpha, alpha) in the binary case),
// features are a two-blob Gaussian mixture along a random direction. Fully
// deterministic in the seed.
class SyntheticLogregProblem final : public Problem {
 public:
  SyntheticLogregProblem(int dim, int n_clients, int samples_per_client,
                         double dirichlet_alpha, uint64_t seed);

  using Problem::client_gradient;

  int dim() const override { return dim_; }
  int num_clients() const override { return n_clients_; }
  double client_objective(int client, std::span<const double> x) const override;
  void client_gradient(int client, std::span<const double> x,
                       std::span<double> out) const override;

  // The drawn Dirichlet proportion of positive labels for a client.
  double positive_label_probability(int client) const {
    return label_probs_[client];
  }

  static constexpr double kRegularization = 1e-4;

 private:
  int dim_;
  int n_clients_;
  int samples_per_client_;
  std::vector<double> label_probs_;
  std::vector<std::vector<double>> features_;  // [client][sample * dim + j]
  std::vector<std::vector<int8_t>> labels_;    // +-1
};

ProblemPtr make_consensus(int dim, int n_clients, uint64_t seed);
ProblemPtr make_counterexample(double a);
ProblemPtr make_synthetic_logreg(int dim, int n_clients, int samples_per_client,
                                 double dirichlet_alpha, uint64_t seed);

// Synthetic minibatch-gradient noise. The Gaussian variant spreads the
// variance evenly over coordinates so the full-vector variance is zeta^2;
// the truncated variant additionally hard-clips each coordinate's noise to
// [-q_inf, q_inf] (so the sup-norm bound holds with probability 1, at the
// price of a small documented bias).
struct GradNoiseModel {
  enum class Kind { kNone, kGaussian, kTruncatedGaussian };
  Kind kind = Kind::kNone;
  double zeta = 0.0;
  double q_inf = 0.0;
};

// full_gradient(client, x) plus one draw of the noise model.
std::vector<double> minibatch_gradient(const Problem& problem,
                                       const GradNoiseModel& noise, int client,
                                       std::span<const double> x, Philox& rng);

// Serializable description of a problem; the RunConfig file format carries
// exactly these fields.
struct ProblemSpec {
  enum class Kind { kConsensus, kCounterexample, kSyntheticLogreg };
  Kind kind = Kind::kConsensus;
  int dim = 10;
  int clients = 10;
  uint64_t seed = 1;
  double a = 1.0;               // counterexample
  int samples_per_client = 100; // logreg
  double dirichlet_alpha = 1.0; // logreg

  ProblemPtr instantiate() const;
};

}  // namespace signfed
