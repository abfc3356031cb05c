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
#include <string>
#include <vector>

#include "signfed/noise.hpp"
#include "signfed/rng.hpp"

namespace signfed {

enum class CompressorType : uint8_t {
  kExactSign = 0,
  kStochasticSign = 1,
  kInputScaledSign = 2,   // z = inf, sigma = ||v||_2 of the input, per call
  kUnbiasedQuantizer = 3, // QSGD-style comparator
  kErrorFeedbackSign = 4, // l1-scaled sign with residual memory, comparator
  kIdentity = 5,          // uncompressed passthrough, costed at 32 bits/coord
};

std::string compressor_type_name(CompressorType type);

struct CompressorKind {
  CompressorType type = CompressorType::kExactSign;
  NoiseSpec noise;     // kStochasticSign only
  int levels = 1;      // kUnbiasedQuantizer only; s >= 1

  static CompressorKind exact_sign() { return {CompressorType::kExactSign, {}, 1}; }
  static CompressorKind stochastic_sign(NoiseSpec spec) {
    return {CompressorType::kStochasticSign, spec, 1};
  }
  static CompressorKind input_scaled_sign() {
    return {CompressorType::kInputScaledSign, {}, 1};
  }
  static CompressorKind unbiased_quantizer(int levels) {
    return {CompressorType::kUnbiasedQuantizer, {}, levels};
  }
  static CompressorKind error_feedback_sign() {
    return {CompressorType::kErrorFeedbackSign, {}, 1};
  }
  static CompressorKind identity() { return {CompressorType::kIdentity, {}, 1}; }
};

// Per-client residual memory for the error-feedback compressor. Initialized
// to zero; dimension must match the model.
struct EfState {
  std::vector<double> residual;

  explicit EfState(std::size_t dim) : residual(dim, 0.0) {}
};

// One compressed client->server message.
//
// Wire layout (serialize(), stable; dumped verbatim by --dump-updates):
//   [type : u8] [dim : u32 LE] [payload]
// payload by type:
//   sign types          ceil(dim/8) packed sign bytes
//   error-feedback      f64 LE scale, then packed sign bytes
//   quantizer           f64 LE norm, packed sign bytes, dim u8 level indices
//   identity            dim f64 LE coordinates
// Sign bit layout: bit j of byte k encodes coordinate 8k+j, +1 -> 1, -1 -> 0,
// least-significant bit first; trailing pad bits are zero.
struct CompressedUpdate {
  CompressorType type = CompressorType::kExactSign;
  uint32_t dim = 0;
  std::vector<uint8_t> sign_bits;  // all but identity
  double scale = 0.0;              // EF scale or quantizer norm
  std::vector<uint8_t> levels;     // quantizer: selected level per coordinate
  std::vector<double> raw;         // identity passthrough
  int quantizer_levels = 1;        // s, needed to decode level indices

  std::vector<double> decode() const;
  std::vector<uint8_t> serialize() const;
};

// Sign-bit codec. Input entries must be +1 or -1.
std::vector<uint8_t> pack_bits(std::span<const int8_t> signs);
// Throws if dim exceeds 8 * bytes.size().
std::vector<int8_t> unpack_bits(std::span<const uint8_t> bytes, std::size_t dim);

// Sign(x) with Sign(0) = +1.
inline int8_t sign_of(double x) { return x >= 0.0 ? int8_t{1} : int8_t{-1}; }

// Applies the compressor to an accumulated local update. ef must be present
// exactly for kErrorFeedbackSign and its residual dimension must match v.
CompressedUpdate compress(const CompressorKind& kind, std::span<const double> v,
                          Philox& rng, EfState* ef = nullptr);

// The unbiased quantizer: Q(v) = ||v||_2 * Sign(v_i) * xi(v_i, s) where
// xi takes (l+1)/s with probability |v_i|/||v|| * s - l and l/s otherwise,
// l = the integer with |v_i|/||v|| in [l/s, (l+1)/s). E[decode] = v exactly.
// s must be >= 1 (and <= 255 for the u8 wire encoding).
CompressedUpdate quantize(int levels, std::span<const double> v, Philox& rng);

// Per-round uplink cost of one client message, in bits (the accounting is
// deliberately decoupled from simulation precision: the quantizer and EF
// scales travel as 64-bit doubles in simulation but are charged 32 bits).
uint64_t uplink_bits(const CompressorKind& kind, uint64_t dim);

}  // namespace signfed
