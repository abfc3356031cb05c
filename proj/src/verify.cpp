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

#include "signfed/verify.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "signfed/compressors.hpp"
#include "signfed/experiment.hpp"
#include "signfed/fedsim.hpp"
#include "signfed/noise.hpp"
#include "signfed/quadrature.hpp"

namespace signfed {

namespace {

struct Checker {
  std::vector<CheckResult> results;

  void add(const std::string& name, const std::function<std::string()>& body) {
    CheckResult result;
    result.name = name;
    try {
      result.detail = body();
      result.passed = true;
    } catch (const std::exception& error) {
      result.passed = false;
      result.detail = error.what();
    }
    results.push_back(std::move(result));
  }
};

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

std::string check_sign_zero() {
  require(sign_of(0.0) == 1, "Sign(0) must be +1");
  require(sign_of(-0.0) == 1, "Sign(-0.0) must be +1");
  require(sign_of(-1e-300) == -1, "Sign of a tiny negative must be -1");
  return "Sign(0) = +1";
}

std::string check_psi_sandwich() {
  for (int z = 1; z <= 5; ++z) {
    const ZIndex zi = ZIndex::finite(z);
    for (int k = 0; k <= 300; ++k) {
      const double x = k / 100.0;
      const double value = psi(zi, x);
      const double lower = x - std::pow(x, 2.0 * z + 1.0) / (2.0 * (2.0 * z + 1.0));
      require(value <= x + 1e-10, "psi exceeds the upper envelope");
      require(value >= lower - 1e-10, "psi below the lower envelope");
    }
  }
  return "z in 1..5, x in [0,3] step 0.01";
}

std::string check_pdf_normalization() {
  for (int z = 1; z <= 5; ++z) {
    const ZIndex zi = ZIndex::finite(z);
    const double mass =
        integrate([zi](double t) { return pdf(zi, t); }, -20.0, 20.0, 1e-10)
            .value;
    require(std::abs(mass - 1.0) <= 1e-8, "pdf mass off by more than 1e-8");
  }
  return "z in 1..5, mass within 1e-8 of 1";
}

std::string check_mc_unbiasedness(bool fast) {
  const int n = fast ? 100000 : 1000000;
  const double widen = fast ? std::sqrt(10.0) : 1.0;
  const ZIndex zs[] = {ZIndex::finite(1), ZIndex::finite(2), ZIndex::infinity()};
  const double sigma = 4.0;
  uint64_t stream = 0;
  for (const ZIndex z : zs) {
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      Philox rng(20260101, stream++, 0, StreamPurpose::kCompressNoise);
      const NoiseSpec spec{z, sigma};
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        sum += sign_of(x + sigma * sample(spec, rng));
      }
      const double mc = eta(z) * sigma * (sum / n);
      const double analytic = sigma * psi(z, x / sigma);
      const double tol = widen * 5.0 * eta(z) * sigma / std::sqrt(n);
      require(std::abs(mc - analytic) <= tol,
              "MC mean deviates from sigma*Psi_z(x/sigma)");
    }
  }
  return "z in {1,2,inf}, x in {-2..2}, sigma=4";
}

std::string check_quantizer_enumeration() {
  Philox rng(7, 0, 0, StreamPurpose::kQuantizer);
  for (int s : {1, 2, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      double v[3];
      for (double& x : v) x = 2.0 * rng.normal();
      const std::span<const double> vs(v, 3);
      double norm = 0.0;
      for (double x : vs) norm += x * x;
      norm = std::sqrt(norm);
      // Exact expectation, coordinate by coordinate.
      for (int j = 0; j < 3; ++j) {
        const double ratio = std::abs(v[j]) / norm;
        const int l = std::min(static_cast<int>(ratio * s), s - 1);
        const double p_up = ratio * s - l;
        const double expectation =
            norm * sign_of(v[j]) *
            (p_up * (l + 1.0) / s + (1.0 - p_up) * static_cast<double>(l) / s);
        require(std::abs(expectation - v[j]) <= 1e-12,
                "quantizer expectation differs from the input");
      }
    }
  }
  return "s in {1,2,4}, random 3-dim inputs, exact expectation";
}

std::string check_codec_roundtrip() {
  Philox rng(11, 0, 0, StreamPurpose::kQuantizer);
  for (std::size_t dim = 1; dim <= 257; dim += 8) {
    std::vector<int8_t> signs(dim);
    for (auto& s : signs) s = rng.coin_flip() ? 1 : -1;
    const auto bytes = pack_bits(signs);
    const auto back = unpack_bits(bytes, dim);
    require(back == signs, "codec round-trip mismatch");
  }
  return "dims 1..257";
}

std::string check_counterexample(bool fast) {
  const int rounds = fast ? 100 : 1000;
  RunConfig config;
  config.problem.kind = ProblemSpec::Kind::kCounterexample;
  config.problem.a = 1.0;
  config.rounds = rounds;
  config.client_lr = 0.01;
  config.x0 = {0.5};

  config.compressor = CompressorKind::exact_sign();
  config.server_lr = ServerLr::explicit_value(1.0);
  require(run(config).final_x[0] == 0.5, "exact sign moved off the stuck point");

  config.compressor =
      CompressorKind::stochastic_sign({ZIndex::infinity(), 0.9});
  config.server_lr = ServerLr::auto_from_noise();
  require(run(config).final_x[0] == 0.5,
          "uniform noise below the threshold moved off the stuck point");
  return "exact and sub-threshold stochastic sign stay at x0";
}

std::string check_determinism() {
  RunConfig config;
  config.problem.kind = ProblemSpec::Kind::kConsensus;
  config.problem.dim = 6;
  config.problem.clients = 8;
  config.problem.seed = 5;
  config.rounds = 50;
  config.participation = 0.5;
  config.client_lr = 0.05;
  config.compressor = CompressorKind::stochastic_sign({ZIndex::finite(1), 0.3});
  config.grad_noise = {GradNoiseModel::Kind::kGaussian, 0.1, 0.0};
  config.seed = 99;

  const RunResult a = run(config, 1);
  const RunResult b = run(config, 4);
  require(format_metrics_csv(a.rounds) == format_metrics_csv(b.rounds),
          "metrics differ across thread counts");
  require(a.final_x == b.final_x, "final iterates differ across thread counts");
  return "1-thread and 4-thread runs byte-identical";
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  Checker checker;
  checker.add("sign_zero_convention", check_sign_zero);
  checker.add("psi_sandwich", check_psi_sandwich);
  checker.add("pdf_normalization", check_pdf_normalization);
  checker.add("mc_unbiasedness",
              [&] { return check_mc_unbiasedness(options.fast); });
  checker.add("quantizer_enumeration", check_quantizer_enumeration);
  checker.add("codec_roundtrip", check_codec_roundtrip);
  checker.add("counterexample_stuck",
              [&] { return check_counterexample(options.fast); });
  checker.add("determinism", check_determinism);
  return checker.results;
}

int print_verification(std::ostream& out, const std::vector<CheckResult>& checks) {
  bool all_passed = true;
  std::size_t width = 0;
  for (const CheckResult& check : checks) width = std::max(width, check.name.size());
  for (const CheckResult& check : checks) {
    out << (check.passed ? "[PASS] " : "[FAIL] ") << check.name;
    for (std::size_t i = check.name.size(); i < width + 2; ++i) out << ' ';
    out << check.detail << "\n";
    all_passed = all_passed && check.passed;
  }
  out << (all_passed ? "verification passed" : "verification FAILED") << "\n";
  return all_passed ? 0 : 1;
}

}  // namespace signfed
