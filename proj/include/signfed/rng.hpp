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

#include <array>
#include <cmath>
#include <cstdint>

namespace signfed {

// Every random decision in a run is drawn from a stream identified by
// (seed, round, client, purpose). Streams are independent Philox counters,
// so the schedule that executes clients (sequential or threaded) cannot
// change the numbers they see.
enum class StreamPurpose : uint32_t {
  kProblemData = 1,     // dataset / target generation at problem build time
  kGradNoise = 2,       // minibatch gradient noise, consumed across local steps
  kCompressNoise = 3,   // stochastic-sign / DP perturbation
  kQuantizer = 4,       // unbiased-quantizer level selection
  kClientSampling = 5,  // per-round participant selection (client field = 0)
};

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Key      = 64-bit seed.
// Counter  = [block | client | round | purpose], 32 bits each.
//
// The implementation is verified against the Random123 known-answer vectors
// in the unit tests; any deviation would silently break run reproducibility.
class Philox {
 public:
  Philox(uint64_t seed, uint64_t round, uint64_t client, StreamPurpose purpose)
      : key0_(static_cast<uint32_t>(seed)),
        key1_(static_cast<uint32_t>(seed >> 32)),
        round_(static_cast<uint32_t>(round)),
        client_(static_cast<uint32_t>(client)),
        purpose_(static_cast<uint32_t>(purpose)) {}

  uint64_t next_u64() {
    if (have_ == 0) refill();
    return buffer_[--have_];
  }

  // Uniform on [0,1), 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1); never returns an exact endpoint (log-safe).
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Uniform on [-1,1).
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

  bool coin_flip() { return (next_u64() & 1u) != 0; }

  // Unbiased-enough integer in [0, bound) via widening multiply; the modulo
  // bias is bound/2^64 and irrelevant at simulation scale.
  uint64_t next_below(uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Standard normal via Box-Muller (fixed two-uniform consumption per draw;
  // the cosine branch is kept, the sine branch discarded).
  double normal() {
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, with the standard U^{1/shape} boost
  // for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform_open01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Raw block function, exposed for the known-answer tests.
  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> counter,
                                       std::array<uint32_t, 2> key) {
    uint32_t x0 = counter[0], x1 = counter[1], x2 = counter[2], x3 = counter[3];
    uint32_t k0 = key[0], k1 = key[1];
    for (int r = 0; r < 10; ++r) {
      const uint64_t p0 = static_cast<uint64_t>(0xD2511F53u) * x0;
      const uint64_t p1 = static_cast<uint64_t>(0xCD9E8D57u) * x2;
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      const uint32_t lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(p1);
      x0 = hi1 ^ x1 ^ k0;
      x1 = lo1;
      x2 = hi0 ^ x3 ^ k1;
      x3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {x0, x1, x2, x3};
  }

 private:
  void refill() {
    const auto out = block({block_, client_, round_, purpose_}, {key0_, key1_});
    ++block_;
    buffer_[1] = (static_cast<uint64_t>(out[1]) << 32) | out[0];
    buffer_[0] = (static_cast<uint64_t>(out[3]) << 32) | out[2];
    have_ = 2;
  }

  uint32_t key0_, key1_;
  uint32_t round_, client_, purpose_;
  uint32_t block_ = 0;
  std::array<uint64_t, 2> buffer_{};
  int have_ = 0;
};

}  // namespace signfed
