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
#include <span>
#include <vector>

#include "signfed/rng.hpp"

namespace signfed {

// Index of the z-distribution family: density proportional to
// exp(-t^{2z}/2). z = 1 is the standard Gaussian; the z -> infinity limit is
// the uniform distribution on [-1,1]. Infinity is a distinct state, never a
// large integer, so the piecewise-exact limit formulas are used and t^{2z}
// can not overflow.
class ZIndex {
 public:
  static ZIndex finite(int z);
  static ZIndex infinity() { return ZIndex(0); }

  bool is_infinite() const { return z_ == 0; }
  // Requires a finite index.
  int finite_value() const;

  friend bool operator==(ZIndex a, ZIndex b) { return a.z_ == b.z_; }

 private:
  explicit ZIndex(int z) : z_(z) {}
  int z_;  // 0 encodes infinity
};

// Noise specification for the stochastic sign operator: Sign(x + sigma*xi_z).
// sigma = 0 is allowed only to express the exact (noiseless) sign operator.
struct NoiseSpec {
  ZIndex z = ZIndex::infinity();
  double sigma = 0.0;
};

// Constants of the convergence analysis, provided by the caller: per-
// coordinate smoothness L_j, L_max, gradient-noise variance zeta^2, gradient
// norm bound G, the (4z+2)-moment bound Q_z, the sup-norm noise bound Q_inf,
// and the objective lower bound f*.
struct TheoryConstants {
  std::vector<double> smoothness;  // L_1..L_d (size 1 broadcasts)
  double l_max = 0.0;
  double zeta_sq = 0.0;
  double grad_bound = 0.0;  // G
  double q_z = 0.0;
  double q_inf = 0.0;
  double f_star = 0.0;
};

// Normalizer eta_z = 2^{1/(2z)} Gamma(1 + 1/(2z)); eta_inf = 1 exactly.
double eta(ZIndex z);

// Density p_z(t) = exp(-t^{2z}/2) / (2 eta_z); the infinity case is the
// uniform density 1/2 on [-1,1].
double pdf(ZIndex z, double t);

// Psi_z(x) = integral_0^x exp(-t^{2z}/2) dt, by adaptive quadrature with
// absolute tolerance 1e-12. Odd in x. Psi_inf(x) = clamp(x, -1, 1).
double psi(ZIndex z, double x);

// C.d.f. of the z-distribution: 1/2 + Psi_z(t) / (2 eta_z).
double cdf(ZIndex z, double t);

// E[Sign(x + sigma*xi_z)] = Psi_z(x/sigma) / eta_z. Requires sigma > 0; the
// noiseless expectation is the deterministic sign and must use the exact-sign
// path instead. Consequence: eta_z * sigma * expected_sign = sigma *
// Psi_z(x/sigma), which equals x for z = infinity whenever sigma > |x|.
double expected_sign(const NoiseSpec& spec, double x);

// Upper bound on || eta_z sigma E[Sign(x + sigma xi_z)] - x ||^2 for finite z:
//   ||x||_{4z+2}^{4z+2} / (4 (2z+1)^2 sigma^{4z}).
// Requires sigma > 0.
double bias_bound(ZIndex z, std::span<const double> x, double sigma);
double bias_bound(ZIndex z, double x, double sigma);

// One draw of xi_z. Infinity draws uniform on [-1,1]; finite z draws
// sign * (2U)^{1/(2z)} with U ~ Gamma(1/(2z), 1) and an independent fair
// sign (the change of variables u = t^{2z}/2 makes this exact).
double sample(const NoiseSpec& spec, Philox& rng);

// The magnitude half of the finite-z sampler, split out so the transform can
// be checked against hand arithmetic.
double zdist_magnitude(int z, double gamma_draw);

// sup over the grid t in {-3.00, -2.99, ..., 3.00} of
// |CDF_z(t) - CDF_inf(t)|, both by the analytic/quadrature route. Requires
// finite z. A numeric handle on the weak convergence of the family to the
// uniform distribution.
double cdf_sup_gap(ZIndex z);

}  // namespace signfed
