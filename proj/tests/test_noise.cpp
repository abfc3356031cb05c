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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "signfed/compressors.hpp"
#include "signfed/noise.hpp"
#include "signfed/quadrature.hpp"

using namespace signfed;

namespace {
const ZIndex kOne = ZIndex::finite(1);
const ZIndex kInf = ZIndex::infinity();
}  // namespace

TEST_CASE("eta values") {
  CHECK(eta(kInf) == 1.0);
  // sqrt(pi/2)
  CHECK(eta(kOne) == doctest::Approx(1.2533141373155003).epsilon(1e-14));
  // 2^{1/4} Gamma(5/4)
  CHECK(eta(ZIndex::finite(2)) ==
        doctest::Approx(1.0779002747704640).epsilon(1e-14));
}

TEST_CASE("eta against the series oracle") {
  for (int z = 1; z <= 8; ++z) {
    CHECK(eta(ZIndex::finite(z)) ==
          doctest::Approx(test::eta_oracle(z)).epsilon(1e-12));
  }
}

TEST_CASE("zindex invariants") {
  CHECK_THROWS_AS(ZIndex::finite(0), std::invalid_argument);
  CHECK_THROWS_AS(ZIndex::finite(-3), std::invalid_argument);
  CHECK(ZIndex::infinity().is_infinite());
  CHECK_THROWS_AS(ZIndex::infinity().finite_value(), std::invalid_argument);
}

TEST_CASE("pdf point values") {
  CHECK(pdf(kOne, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(pdf(kInf, 0.5) == 0.5);
  CHECK(pdf(kInf, 1.0) == 0.5);
  CHECK(pdf(kInf, 2.0) == 0.0);
  CHECK(pdf(kInf, -2.0) == 0.0);
  // Symmetric, nonnegative.
  for (double t : {0.3, 1.7, 2.9}) {
    CHECK(pdf(kOne, t) == pdf(kOne, -t));
    CHECK(pdf(ZIndex::finite(4), t) >= 0.0);
  }
}

TEST_CASE("pdf integrates to one") {
  for (int z = 1; z <= 5; ++z) {
    const ZIndex zi = ZIndex::finite(z);
    const auto mass =
        integrate([zi](double t) { return pdf(zi, t); }, -20.0, 20.0, 1e-10);
    CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("psi point values") {
  // Quadrature vs the erf closed form at z = 1.
  CHECK(psi(kOne, 1.0) ==
        doctest::Approx(std::sqrt(3.141592653589793 / 2.0) *
                        std::erf(1.0 / std::sqrt(2.0)))
            .epsilon(1e-13));
  CHECK(psi(kOne, 1.0) == doctest::Approx(0.8556243918921488).epsilon(1e-13));
  CHECK(psi(kOne, 0.0) == 0.0);
  CHECK(psi(ZIndex::finite(5), 0.0) == 0.0);
  CHECK(psi(kInf, 2.0) == 1.0);
  CHECK(psi(kInf, -2.0) == -1.0);
  CHECK(psi(kInf, 0.25) == 0.25);
}

TEST_CASE("psi is odd") {
  for (int z : {1, 2, 3}) {
    for (double x : {0.1, 0.7, 1.9, 3.0}) {
      CHECK(psi(ZIndex::finite(z), -x) == -psi(ZIndex::finite(z), x));
    }
  }
}

TEST_CASE("psi against the incomplete-gamma oracle") {
  for (int z = 1; z <= 5; ++z) {
    for (int k = 1; k <= 30; ++k) {
      const double x = 0.1 * k;
      CHECK(psi(ZIndex::finite(z), x) ==
            doctest::Approx(test::psi_oracle(z, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("psi sandwich") {
  for (int z = 1; z <= 5; ++z) {
    const ZIndex zi = ZIndex::finite(z);
    for (int k = 0; k <= 300; ++k) {
      const double x = k / 100.0;
      const double value = psi(zi, x);
      REQUIRE(value <= x + 1e-10);
      REQUIRE(value >=
              x - std::pow(x, 2.0 * z + 1.0) / (2.0 * (2.0 * z + 1.0)) - 1e-10);
    }
  }
}

TEST_CASE("expected_sign values") {
  CHECK(expected_sign({kOne, 1.0}, 0.0) == 0.0);
  CHECK(expected_sign({kInf, 1.0}, 0.5) == 0.5);
  CHECK(expected_sign({kOne, 1.0}, 1.0) ==
        doctest::Approx(0.6826894921370859).epsilon(1e-13));
  CHECK_THROWS_AS(expected_sign({kOne, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("expected_sign is odd and nondecreasing") {
  const NoiseSpec spec{ZIndex::finite(2), 1.5};
  double previous = -2.0;
  for (int k = -20; k <= 20; ++k) {
    const double x = 0.2 * k;
    const double value = expected_sign(spec, x);
    CHECK(value == -expected_sign(spec, -x));
    CHECK(value >= previous - 1e-12);
    previous = value;
  }
}

TEST_CASE("remark-2 exactness for uniform noise") {
  for (double sigma : {1.0, 2.5}) {
    for (double x : {-0.9, -0.3, 0.2, 0.8}) {
      if (std::abs(x) >= sigma) continue;
      const double estimate = sigma * expected_sign({kInf, sigma}, x);
      CHECK(std::abs(estimate - x) <= 1e-14);
    }
  }
}

TEST_CASE("bias_bound examples") {
  CHECK(bias_bound(kOne, 1.0, 2.0) == doctest::Approx(1.0 / 576.0).epsilon(1e-14));
  const std::vector<double> zero(4, 0.0);
  CHECK(bias_bound(kOne, zero, 1.0) == 0.0);
  CHECK(bias_bound(ZIndex::finite(2), 1.0, 1.0) ==
        doctest::Approx(0.01).epsilon(1e-14));
  CHECK_THROWS_AS(bias_bound(kOne, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bias_bound(kInf, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("analytic bias respects the lemma bound") {
  for (int z : {1, 2}) {
    const ZIndex zi = ZIndex::finite(z);
    for (double x : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
      for (double sigma : {1.0, 2.0, 4.0}) {
        const double bias = sigma * psi(zi, x / sigma) - x;
        CHECK(bias * bias <= bias_bound(zi, x, sigma) + 1e-10);
      }
    }
  }
}

TEST_CASE("sampler magnitude transform") {
  CHECK(zdist_magnitude(1, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(zdist_magnitude(2, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(zdist_magnitude(1, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("uniform sampler support") {
  Philox rng(5, 0, 0, StreamPurpose::kCompressNoise);
  for (int i = 0; i < 100000; ++i) {
    const double draw = sample({kInf, 1.0}, rng);
    REQUIRE(draw >= -1.0);
    REQUIRE(draw <= 1.0);
  }
}

TEST_CASE("gaussian sampler is centered") {
  Philox rng(6, 0, 0, StreamPurpose::kCompressNoise);
  const int n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double draw = sample({kOne, 1.0}, rng);
    sum += draw;
    sum_sq += draw * draw;
  }
  const double mean = sum / n;
  const double std_dev = std::sqrt(sum_sq / n - mean * mean);
  CHECK(std::abs(mean) <= 4.0 * std_dev / 1e3);
}

TEST_CASE("sampler matches the quadrature cdf (KS)") {
  // 1% two-sided critical value at n = 1e5.
  const int n = 100000;
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));
  for (int z : {1, 2, 3}) {
    const ZIndex zi = ZIndex::finite(z);
    Philox rng(7, static_cast<uint64_t>(z), 0, StreamPurpose::kCompressNoise);
    std::vector<double> samples(n);
    for (double& s : samples) s = sample({zi, 1.0}, rng);
    const double d =
        test::ks_statistic(std::move(samples), [zi](double t) { return cdf(zi, t); });
    CHECK(d < critical);
  }
}

TEST_CASE("monte-carlo unbiasedness and empirical lemma bound") {
  const int n = 1000000;
  const double sigma = 4.0;
  const ZIndex zs[] = {kOne, ZIndex::finite(2), kInf};
  uint64_t stream = 0;
  for (const ZIndex z : zs) {
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      Philox rng(8, stream++, 0, StreamPurpose::kCompressNoise);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += sign_of(x + sigma * sample({z, sigma}, rng));
      const double scaled_mean = eta(z) * sigma * (sum / n);
      const double analytic = sigma * psi(z, x / sigma);
      const double tolerance = 5.0 * eta(z) * sigma / std::sqrt(n);
      CHECK(std::abs(scaled_mean - analytic) <= tolerance);
      if (!z.is_infinite()) {
        const double allowed =
            std::sqrt(bias_bound(z, x, sigma)) + tolerance;
        CHECK(std::abs(scaled_mean - x) <= allowed);
      }
    }
  }
}

TEST_CASE("weak convergence of the cdf") {
  const double g1 = cdf_sup_gap(kOne);
  // Regression baseline, sup_t |Phi(t) - U(t)| on the grid.
  CHECK(g1 == doctest::Approx(0.158655253931).epsilon(1e-6));
  const double g2 = cdf_sup_gap(ZIndex::finite(2));
  const double g8 = cdf_sup_gap(ZIndex::finite(8));
  CHECK(g8 < g2);
  CHECK(g2 < g1);
  CHECK(cdf_sup_gap(ZIndex::finite(64)) < 0.02);
  CHECK_THROWS_AS(cdf_sup_gap(kInf), std::invalid_argument);
}
