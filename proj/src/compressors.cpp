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

#include "signfed/compressors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace signfed {

namespace {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void append_f64_le(std::vector<uint8_t>& out, double value) {
  uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
}

void append_u32_le(std::vector<uint8_t>& out, uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(value >> (8 * i)));
}

CompressedUpdate make_sign_update(CompressorType type,
                                  const std::vector<int8_t>& signs) {
  CompressedUpdate update;
  update.type = type;
  update.dim = static_cast<uint32_t>(signs.size());
  update.sign_bits = pack_bits(signs);
  return update;
}

}  // namespace

std::string compressor_type_name(CompressorType type) {
  switch (type) {
    case CompressorType::kExactSign: return "exact_sign";
    case CompressorType::kStochasticSign: return "stochastic_sign";
    case CompressorType::kInputScaledSign: return "input_scaled_sign";
    case CompressorType::kUnbiasedQuantizer: return "quantizer";
    case CompressorType::kErrorFeedbackSign: return "ef_sign";
    case CompressorType::kIdentity: return "identity";
  }
  return "unknown";
}

std::vector<uint8_t> pack_bits(std::span<const int8_t> signs) {
  std::vector<uint8_t> bytes((signs.size() + 7) / 8, 0);
  for (std::size_t j = 0; j < signs.size(); ++j) {
    if (signs[j] > 0) bytes[j / 8] |= static_cast<uint8_t>(1u << (j % 8));
  }
  return bytes;
}

std::vector<int8_t> unpack_bits(std::span<const uint8_t> bytes, std::size_t dim) {
  if (dim > 8 * bytes.size()) {
    throw std::invalid_argument("unpack_bits: dim exceeds packed capacity");
  }
  std::vector<int8_t> signs(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    signs[j] = (bytes[j / 8] >> (j % 8)) & 1u ? int8_t{1} : int8_t{-1};
  }
  return signs;
}

std::vector<double> CompressedUpdate::decode() const {
  if (type == CompressorType::kIdentity) return raw;
  const auto signs = unpack_bits(sign_bits, dim);
  std::vector<double> out(dim);
  switch (type) {
    case CompressorType::kExactSign:
    case CompressorType::kStochasticSign:
    case CompressorType::kInputScaledSign:
      for (uint32_t j = 0; j < dim; ++j) out[j] = static_cast<double>(signs[j]);
      break;
    case CompressorType::kErrorFeedbackSign:
      for (uint32_t j = 0; j < dim; ++j) out[j] = scale * signs[j];
      break;
    case CompressorType::kUnbiasedQuantizer:
      for (uint32_t j = 0; j < dim; ++j) {
        out[j] = scale * signs[j] *
                 (static_cast<double>(levels[j]) / quantizer_levels);
      }
      break;
    case CompressorType::kIdentity:
      break;
  }
  return out;
}

std::vector<uint8_t> CompressedUpdate::serialize() const {
  std::vector<uint8_t> out;
  out.push_back(static_cast<uint8_t>(type));
  append_u32_le(out, dim);
  switch (type) {
    case CompressorType::kExactSign:
    case CompressorType::kStochasticSign:
    case CompressorType::kInputScaledSign:
      out.insert(out.end(), sign_bits.begin(), sign_bits.end());
      break;
    case CompressorType::kErrorFeedbackSign:
      append_f64_le(out, scale);
      out.insert(out.end(), sign_bits.begin(), sign_bits.end());
      break;
    case CompressorType::kUnbiasedQuantizer:
      append_f64_le(out, scale);
      out.insert(out.end(), sign_bits.begin(), sign_bits.end());
      out.insert(out.end(), levels.begin(), levels.end());
      break;
    case CompressorType::kIdentity:
      for (double v : raw) append_f64_le(out, v);
      break;
  }
  return out;
}

CompressedUpdate quantize(int s, std::span<const double> v, Philox& rng) {
  if (s < 1) throw std::invalid_argument("quantize: levels must be >= 1");
  if (s > 255) throw std::invalid_argument("quantize: levels must be <= 255");

  CompressedUpdate update;
  update.type = CompressorType::kUnbiasedQuantizer;
  update.dim = static_cast<uint32_t>(v.size());
  update.quantizer_levels = s;
  update.levels.resize(v.size());

  const double norm = l2_norm(v);
  update.scale = norm;
  std::vector<int8_t> signs(v.size());
  if (norm == 0.0) {
    // Canonical zero message: norm 0, +1 signs, level 0.
    std::fill(signs.begin(), signs.end(), int8_t{1});
    update.sign_bits = pack_bits(signs);
    return update;
  }
  for (std::size_t j = 0; j < v.size(); ++j) {
    signs[j] = sign_of(v[j]);
    const double ratio = std::abs(v[j]) / norm;  // in [0,1]
    const int l = std::min(static_cast<int>(ratio * s), s - 1);
    const double p_up = ratio * s - l;
    update.levels[j] =
        static_cast<uint8_t>(rng.uniform01() < p_up ? l + 1 : l);
  }
  update.sign_bits = pack_bits(signs);
  return update;
}

CompressedUpdate compress(const CompressorKind& kind, std::span<const double> v,
                          Philox& rng, EfState* ef) {
  const bool wants_ef = kind.type == CompressorType::kErrorFeedbackSign;
  if (wants_ef != (ef != nullptr)) {
    throw std::invalid_argument(
        "compress: EfState must be supplied exactly for the error-feedback "
        "compressor");
  }

  switch (kind.type) {
    case CompressorType::kExactSign: {
      std::vector<int8_t> signs(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) signs[j] = sign_of(v[j]);
      return make_sign_update(kind.type, signs);
    }
    case CompressorType::kStochasticSign: {
      std::vector<int8_t> signs(v.size());
      if (kind.noise.sigma == 0.0) {
        for (std::size_t j = 0; j < v.size(); ++j) signs[j] = sign_of(v[j]);
      } else {
        for (std::size_t j = 0; j < v.size(); ++j) {
          signs[j] = sign_of(v[j] + kind.noise.sigma * sample(kind.noise, rng));
        }
      }
      return make_sign_update(kind.type, signs);
    }
    case CompressorType::kInputScaledSign: {
      const double sigma = l2_norm(v);
      const NoiseSpec uniform{ZIndex::infinity(), sigma};
      std::vector<int8_t> signs(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) {
        signs[j] = sigma == 0.0 ? sign_of(v[j])
                                : sign_of(v[j] + sigma * sample(uniform, rng));
      }
      return make_sign_update(kind.type, signs);
    }
    case CompressorType::kUnbiasedQuantizer:
      return quantize(kind.levels, v, rng);
    case CompressorType::kErrorFeedbackSign: {
      if (ef->residual.size() != v.size()) {
        throw std::invalid_argument(
            "compress: EfState dimension does not match input");
      }
      std::vector<double> carried(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) {
        carried[j] = v[j] + ef->residual[j];
      }
      double l1 = 0.0;
      for (double x : carried) l1 += std::abs(x);
      const double scale = v.empty() ? 0.0 : l1 / static_cast<double>(v.size());

      CompressedUpdate update;
      update.type = kind.type;
      update.dim = static_cast<uint32_t>(v.size());
      update.scale = scale;
      std::vector<int8_t> signs(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) signs[j] = sign_of(carried[j]);
      update.sign_bits = pack_bits(signs);
      for (std::size_t j = 0; j < v.size(); ++j) {
        ef->residual[j] = carried[j] - scale * signs[j];
      }
      return update;
    }
    case CompressorType::kIdentity: {
      CompressedUpdate update;
      update.type = kind.type;
      update.dim = static_cast<uint32_t>(v.size());
      update.raw.assign(v.begin(), v.end());
      return update;
    }
  }
  throw std::logic_error("compress: unreachable");
}

uint64_t uplink_bits(const CompressorKind& kind, uint64_t dim) {
  switch (kind.type) {
    case CompressorType::kExactSign:
    case CompressorType::kStochasticSign:
    case CompressorType::kInputScaledSign:
      return dim;
    case CompressorType::kErrorFeedbackSign:
      return dim + 32;
    case CompressorType::kUnbiasedQuantizer: {
      const uint64_t bits_per_coord = static_cast<uint64_t>(
          std::ceil(std::log2(static_cast<double>(kind.levels) + 1.0)));
      return bits_per_coord * dim + 32;
    }
    case CompressorType::kIdentity:
      return 32 * dim;
  }
  throw std::logic_error("uplink_bits: unreachable");
}

}  // namespace signfed
