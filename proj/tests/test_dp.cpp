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

#include "signfed/dp.hpp"
#include "signfed/noise.hpp"

using namespace signfed;

TEST_CASE("clip examples") {
  CHECK(clip_l2(std::vector<double>{3.0, 4.0}, 1.0) ==
        std::vector<double>{0.6, 0.8});
  CHECK(clip_l2(std::vector<double>{3.0, 4.0}, 10.0) ==
        std::vector<double>{3.0, 4.0});
  CHECK(clip_l2(std::vector<double>{0.0, 0.0}, 1.0) ==
        std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(clip_l2(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("clip norm property") {
  Philox rng(1, 0, 0, StreamPurpose::kProblemData);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(6);
    for (double& x : v) x = 3.0 * rng.normal();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);

    const double c = 0.5 + 2.0 * rng.uniform01();
    const auto clipped = clip_l2(v, c);
    double clipped_norm = 0.0;
    for (double x : clipped) clipped_norm += x * x;
    clipped_norm = std::sqrt(clipped_norm);

    REQUIRE(clipped_norm <= c * (1.0 + 1e-12));
    if (norm >= c) {
      REQUIRE(clipped_norm == doctest::Approx(c).epsilon(1e-12));
    } else {
      REQUIRE(clipped == v);
    }
  }
}

TEST_CASE("zero noise multiplier reduces to the exact sign of the clipped input") {
  const DpConfig config{10.0, 0.0};
  Philox rng(2, 0, 0, StreamPurpose::kCompressNoise);
  const std::vector<double> v{0.5, -0.25, 0.0};
  const auto update = dp_compress(v, config, rng);
  CHECK(update.decode() == std::vector<double>{1.0, -1.0, 1.0});
}

TEST_CASE("dp path equals clip followed by gaussian stochastic sign, seed-matched") {
  const DpConfig config{0.01, 2.77};
  for (uint64_t stream = 0; stream < 8; ++stream) {
    Philox data_rng(7, stream, 0, StreamPurpose::kProblemData);
    std::vector<double> v(33);
    for (double& x : v) x = 0.05 * data_rng.normal();

    Philox rng_a(11, stream, 3, StreamPurpose::kCompressNoise);
    Philox rng_b(11, stream, 3, StreamPurpose::kCompressNoise);
    const auto dp_update = dp_compress(v, config, rng_a);
    const auto manual = compress(
        CompressorKind::stochastic_sign(
            {ZIndex::finite(1), config.noise_multiplier * config.clip}),
        clip_l2(v, config.clip), rng_b);
    REQUIRE(dp_update.sign_bits == manual.sign_bits);
    REQUIRE(dp_update.serialize().size() == manual.serialize().size());
  }
}

TEST_CASE("payload is d packed bits with no norms") {
  const DpConfig config{1.0, 1.5};
  Philox rng(3, 0, 0, StreamPurpose::kCompressNoise);
  std::vector<double> v(41, 123456.0);  // far outside the clip ball
  const auto update = dp_compress(v, config, rng);
  CHECK(update.sign_bits.size() == (41 + 7) / 8);
  CHECK(update.serialize().size() == 1 + 4 + (41 + 7) / 8);
  for (double x : update.decode()) REQUIRE(std::abs(x) == 1.0);
}

TEST_CASE("per-coordinate sign mean matches the analytic expectation") {
  const DpConfig config{2.0, 0.8};
  const std::vector<double> v{1.0, -0.4};  // norm < clip, so unclipped
  const double sigma = config.noise_multiplier * config.clip;
  const int n = 200000;
  Philox rng(4, 0, 0, StreamPurpose::kCompressNoise);
  std::vector<double> sums(2, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto decoded = dp_compress(v, config, rng).decode();
    sums[0] += decoded[0];
    sums[1] += decoded[1];
  }
  for (int j = 0; j < 2; ++j) {
    const double analytic = expected_sign({ZIndex::finite(1), sigma}, v[j]);
    CHECK(std::abs(sums[j] / n - analytic) <= 5.0 / std::sqrt(n));
  }
}

TEST_CASE("table of budget presets") {
  const auto presets = dp_presets();
  REQUIRE(presets.size() == 6);
  CHECK(presets[0].name == "eps1");
  CHECK(presets[0].epsilon == doctest::Approx(1.0029));
  CHECK(presets[0].noise_multiplier == doctest::Approx(2.77));
  CHECK(presets[0].server_lr == doctest::Approx(0.03));
  CHECK(presets[5].epsilon == doctest::Approx(9.9996));
  CHECK(presets[5].noise_multiplier == doctest::Approx(0.685));
}

TEST_CASE("dp validation") {
  CHECK_THROWS_AS(validate(DpConfig{0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(DpConfig{1.0, -0.5}), std::invalid_argument);
  CHECK_NOTHROW(validate(DpConfig{1.0, 0.0}));
}
