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

#include "signfed/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "signfed/quadrature.hpp"

namespace signfed {

namespace {

constexpr double kPsiAbsTol = 1e-12;

double pow_2z(double t, int z) {
  // t^{2z} for integer z >= 1; overflow to +inf is fine (exp(-inf) = 0).
  return std::pow(t * t, static_cast<double>(z));
}

}  // namespace

ZIndex ZIndex::finite(int z) {
  if (z < 1) throw std::invalid_argument("ZIndex: finite z must be >= 1");
  return ZIndex(z);
}

int ZIndex::finite_value() const {
  if (is_infinite()) throw std::invalid_argument("ZIndex: index is infinite");
  return z_;
}

double eta(ZIndex z) {
  if (z.is_infinite()) return 1.0;
  const double a = 1.0 / (2.0 * z.finite_value());
  return std::exp(a * std::log(2.0) + std::lgamma(1.0 + a));
}

double pdf(ZIndex z, double t) {
  if (z.is_infinite()) return std::abs(t) <= 1.0 ? 0.5 : 0.0;
  return std::exp(-0.5 * pow_2z(t, z.finite_value())) / (2.0 * eta(z));
}

double psi(ZIndex z, double x) {
  if (z.is_infinite()) return std::clamp(x, -1.0, 1.0);
  if (x == 0.0) return 0.0;
  const int zv = z.finite_value();
  const double ax = std::abs(x);
  const auto integrand = [zv](double t) { return std::exp(-0.5 * pow_2z(t, zv)); };
  const double value = integrate(integrand, 0.0, ax, kPsiAbsTol).value;
  return x > 0.0 ? value : -value;
}

double cdf(ZIndex z, double t) { return 0.5 + psi(z, t) / (2.0 * eta(z)); }

double expected_sign(const NoiseSpec& spec, double x) {
  if (!(spec.sigma > 0.0)) {
    throw std::invalid_argument(
        "expected_sign: sigma must be > 0 (the noiseless expectation is the "
        "deterministic sign)");
  }
  return psi(spec.z, x / spec.sigma) / eta(spec.z);
}

double bias_bound(ZIndex z, std::span<const double> x, double sigma) {
  const int zv = z.finite_value();  // rejects infinity
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("bias_bound: sigma must be > 0");
  }
  const double p = 4.0 * zv + 2.0;
  double norm_pow = 0.0;
  for (double v : x) norm_pow += std::pow(std::abs(v), p);
  const double denom =
      4.0 * (2.0 * zv + 1.0) * (2.0 * zv + 1.0) * std::pow(sigma, 4.0 * zv);
  return norm_pow / denom;
}

double bias_bound(ZIndex z, double x, double sigma) {
  return bias_bound(z, std::span<const double>(&x, 1), sigma);
}

double zdist_magnitude(int z, double gamma_draw) {
  return std::pow(2.0 * gamma_draw, 1.0 / (2.0 * z));
}

double sample(const NoiseSpec& spec, Philox& rng) {
  if (spec.z.is_infinite()) return rng.uniform_pm1();
  const int zv = spec.z.finite_value();
  const double u = rng.gamma(1.0 / (2.0 * zv));
  const double magnitude = zdist_magnitude(zv, u);
  return rng.coin_flip() ? magnitude : -magnitude;
}

double cdf_sup_gap(ZIndex z) {
  (void)z.finite_value();
  double gap = 0.0;
  for (int k = -300; k <= 300; ++k) {
    const double t = k / 100.0;
    const double uniform_cdf = 0.5 + std::clamp(t, -1.0, 1.0) / 2.0;
    gap = std::max(gap, std::abs(cdf(z, t) - uniform_cdf));
  }
  return gap;
}

}  // namespace signfed
