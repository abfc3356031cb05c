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

#include "signfed/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace signfed {

double Problem::objective(std::span<const double> x) const {
  double sum = 0.0;
  for (int i = 0; i < num_clients(); ++i) sum += client_objective(i, x);
  return sum / num_clients();
}

std::vector<double> Problem::gradient(std::span<const double> x) const {
  std::vector<double> grad(dim(), 0.0);
  std::vector<double> g(dim());
  for (int i = 0; i < num_clients(); ++i) {
    client_gradient(i, x, g);
    for (int j = 0; j < dim(); ++j) grad[j] += g[j];
  }
  for (double& v : grad) v /= num_clients();
  return grad;
}

std::vector<double> Problem::client_gradient(int client,
                                             std::span<const double> x) const {
  std::vector<double> g(dim());
  client_gradient(client, x, std::span<double>(g));
  return g;
}

ConsensusProblem::ConsensusProblem(int dim, int n_clients, uint64_t seed)
    : dim_(dim) {
  if (dim < 1 || n_clients < 1) {
    throw std::invalid_argument("ConsensusProblem: dim and clients must be >= 1");
  }
  targets_.resize(n_clients);
  for (int i = 0; i < n_clients; ++i) {
    Philox rng(seed, 0, static_cast<uint64_t>(i), StreamPurpose::kProblemData);
    targets_[i].resize(dim);
    for (double& t : targets_[i]) t = rng.normal();
  }
  optimum_.assign(dim, 0.0);
  for (const auto& y : targets_) {
    for (int j = 0; j < dim; ++j) optimum_[j] += y[j];
  }
  for (double& v : optimum_) v /= n_clients;
  f_star_ = objective(optimum_);
}

double ConsensusProblem::client_objective(int client,
                                          std::span<const double> x) const {
  const auto& y = targets_[client];
  double s = 0.0;
  for (int j = 0; j < dim_; ++j) {
    const double d = x[j] - y[j];
    s += d * d;
  }
  return 0.5 * s;
}

void ConsensusProblem::client_gradient(int client, std::span<const double> x,
                                       std::span<double> out) const {
  const auto& y = targets_[client];
  for (int j = 0; j < dim_; ++j) out[j] = x[j] - y[j];
}

CounterexampleProblem::CounterexampleProblem(double a) : a_(a) {
  if (!(a > 0.0)) throw std::invalid_argument("CounterexampleProblem: A must be > 0");
}

double CounterexampleProblem::client_objective(int client,
                                               std::span<const double> x) const {
  const double shift = client == 0 ? -a_ : a_;
  const double d = x[0] + shift;
  return d * d;
}

void CounterexampleProblem::client_gradient(int client, std::span<const double> x,
                                            std::span<double> out) const {
  const double shift = client == 0 ? -a_ : a_;
  out[0] = 2.0 * (x[0] + shift);
}

SyntheticLogregProblem::SyntheticLogregProblem(int dim, int n_clients,
                                               int samples_per_client,
                                               double dirichlet_alpha,
                                               uint64_t seed)
    : dim_(dim), n_clients_(n_clients), samples_per_client_(samples_per_client) {
  if (dim < 1 || n_clients < 1 || samples_per_client < 1 ||
      !(dirichlet_alpha > 0.0)) {
    throw std::invalid_argument("SyntheticLogregProblem: parameters must be positive");
  }

  // Class-mean direction, shared across clients.
  Philox shared(seed, 0, 0, StreamPurpose::kProblemData);
  std::vector<double> mu(dim);
  double norm = 0.0;
  for (double& m : mu) {
    m = shared.normal();
    norm += m * m;
  }
  norm = std::sqrt(norm);
  for (double& m : mu) m = 1.5 * m / norm;

  label_probs_.resize(n_clients);
  features_.resize(n_clients);
  labels_.resize(n_clients);
  for (int i = 0; i < n_clients; ++i) {
    Philox rng(seed, 1, static_cast<uint64_t>(i), StreamPurpose::kProblemData);
    const double g1 = rng.gamma(dirichlet_alpha);
    const double g2 = rng.gamma(dirichlet_alpha);
    label_probs_[i] = g1 / (g1 + g2);

    features_[i].resize(static_cast<std::size_t>(samples_per_client) * dim);
    labels_[i].resize(samples_per_client);
    for (int s = 0; s < samples_per_client; ++s) {
      const int8_t label = rng.uniform01() < label_probs_[i] ? 1 : -1;
      labels_[i][s] = label;
      for (int j = 0; j < dim; ++j) {
        features_[i][static_cast<std::size_t>(s) * dim + j] =
            label * mu[j] + rng.normal();
      }
    }
  }
}

double SyntheticLogregProblem::client_objective(int client,
                                                std::span<const double> x) const {
  const auto& feats = features_[client];
  const auto& labs = labels_[client];
  double loss = 0.0;
  for (int s = 0; s < samples_per_client_; ++s) {
    double margin = 0.0;
    for (int j = 0; j < dim_; ++j) {
      margin += x[j] * feats[static_cast<std::size_t>(s) * dim_ + j];
    }
    const double t = -labs[s] * margin;
    // log(1 + e^t), overflow-safe.
    loss += t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  loss /= samples_per_client_;
  double reg = 0.0;
  for (int j = 0; j < dim_; ++j) reg += x[j] * x[j];
  return loss + 0.5 * kRegularization * reg;
}

void SyntheticLogregProblem::client_gradient(int client, std::span<const double> x,
                                             std::span<double> out) const {
  const auto& feats = features_[client];
  const auto& labs = labels_[client];
  for (int j = 0; j < dim_; ++j) out[j] = kRegularization * x[j];
  for (int s = 0; s < samples_per_client_; ++s) {
    double margin = 0.0;
    for (int j = 0; j < dim_; ++j) {
      margin += x[j] * feats[static_cast<std::size_t>(s) * dim_ + j];
    }
    // d/dm log(1+e^{-y m}) = -y * sigmoid(-y m)
    const double t = -labs[s] * margin;
    const double sig = 1.0 / (1.0 + std::exp(-t));
    const double coeff = -labs[s] * sig / samples_per_client_;
    for (int j = 0; j < dim_; ++j) {
      out[j] += coeff * feats[static_cast<std::size_t>(s) * dim_ + j];
    }
  }
}

ProblemPtr make_consensus(int dim, int n_clients, uint64_t seed) {
  return std::make_shared<ConsensusProblem>(dim, n_clients, seed);
}

ProblemPtr make_counterexample(double a) {
  return std::make_shared<CounterexampleProblem>(a);
}

ProblemPtr make_synthetic_logreg(int dim, int n_clients, int samples_per_client,
                                 double dirichlet_alpha, uint64_t seed) {
  return std::make_shared<SyntheticLogregProblem>(dim, n_clients,
                                                  samples_per_client,
                                                  dirichlet_alpha, seed);
}

std::vector<double> minibatch_gradient(const Problem& problem,
                                       const GradNoiseModel& noise, int client,
                                       std::span<const double> x, Philox& rng) {
  if (client < 0 || client >= problem.num_clients()) {
    throw std::invalid_argument("minibatch_gradient: client out of range");
  }
  std::vector<double> g = problem.client_gradient(client, x);
  switch (noise.kind) {
    case GradNoiseModel::Kind::kNone:
      break;
    case GradNoiseModel::Kind::kGaussian: {
      const double per_coord = noise.zeta / std::sqrt(problem.dim());
      for (double& v : g) v += per_coord * rng.normal();
      break;
    }
    case GradNoiseModel::Kind::kTruncatedGaussian: {
      const double per_coord = noise.zeta / std::sqrt(problem.dim());
      for (double& v : g) {
        v += std::clamp(per_coord * rng.normal(), -noise.q_inf, noise.q_inf);
      }
      break;
    }
  }
  return g;
}

ProblemPtr ProblemSpec::instantiate() const {
  switch (kind) {
    case Kind::kConsensus:
      return make_consensus(dim, clients, seed);
    case Kind::kCounterexample:
      return make_counterexample(a);
    case Kind::kSyntheticLogreg:
      return make_synthetic_logreg(dim, clients, samples_per_client,
                                   dirichlet_alpha, seed);
  }
  throw std::logic_error("ProblemSpec: unreachable");
}

}  // namespace signfed
