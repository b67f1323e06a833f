#include "tma_sim/fp8.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "tma_sim/errors.hpp"

namespace tma_sim {
namespace e4m3 {
namespace {

float decode_slow(std::uint8_t bits) {
  if ((bits & 0x7F) == 0x7F) return std::numeric_limits<float>::quiet_NaN();
  const int exponent = (bits >> 3) & 0xF;
  const int mantissa = bits & 0x7;
  const float magnitude = exponent == 0 ? std::ldexp(static_cast<float>(mantissa), -9)
                                        : std::ldexp(static_cast<float>(8 + mantissa), exponent - 10);
  return (bits & 0x80) ? -magnitude : magnitude;
}

std::array<float, 256> build_table() {
  std::array<float, 256> table{};
  for (int c = 0; c < 256; ++c) table[c] = decode_slow(static_cast<std::uint8_t>(c));
  return table;
}

const std::array<float, 256>& table() {
  static const std::array<float, 256> t = build_table();
  return t;
}

}  // namespace

float decode(Fp8Value v) { return table()[v.bits]; }

std::span<const float, 256> decode_table() { return table(); }

Fp8Value encode(double x) {
  if (std::isnan(x)) throw InvalidInput("cannot encode NaN as E4M3");
  const std::uint8_t sign = std::signbit(x) ? 0x80 : 0x00;
  const double a = std::fabs(x);

  int code = 0;
  if (a < 0x1p-6) {
    // Subnormal range: units of 2^-9. q == 8 lands on the smallest normal code.
    code = static_cast<int>(std::nearbyint(a * 512.0));
  } else if (std::isinf(a)) {
    code = kMaxCode;
  } else {
    int exp2 = 0;
    const double frac = std::frexp(a, &exp2);  // a = frac * 2^exp2, frac in [0.5, 1)
    const int unbiased = exp2 - 1;
    const double steps = (frac * 2.0 - 1.0) * 8.0;
    const int q = static_cast<int>(std::nearbyint(steps));
    code = std::min((unbiased + 7) * 8 + q, 0x7F);
  }
  code = std::min(code, static_cast<int>(kMaxCode));
  return Fp8Value{static_cast<std::uint8_t>(sign | code)};
}

double ulp(double x) {
  const double a = std::fabs(x);
  if (a < 0x1p-6) return 0x1p-9;
  int exp2 = 0;
  std::frexp(a, &exp2);
  return std::ldexp(1.0, std::min(exp2 - 1, 8) - 3);
}

}  // namespace e4m3

float dequant(Fp8Value code, float scale) { return e4m3::decode(code) * scale; }

namespace {

void require_finite(std::span<const float> matrix, std::size_t rows, std::size_t cols) {
  if (cols == 0) throw InvalidInput("quantize: K must be at least 1");
  if (matrix.size() != rows * cols) {
    throw InvalidInput("quantize: matrix has " + std::to_string(matrix.size()) + " entries, expected " +
                       std::to_string(rows * cols));
  }
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    if (!std::isfinite(matrix[i])) {
      throw InvalidInput("quantize: non-finite entry at (" + std::to_string(i / cols) + ", " +
                         std::to_string(i % cols) + ")");
    }
  }
}

float scale_for(float amax) { return amax == 0.0f ? 1.0f : amax / e4m3::kMax; }

std::uint8_t quantize_one(float x, float scale) {
  return e4m3::encode(static_cast<double>(x) / static_cast<double>(scale)).bits;
}

}  // namespace

std::pair<Fp8Tensor, ScaleTensorA> quantize_a(std::span<const float> matrix, std::size_t rows, std::size_t cols) {
  require_finite(matrix, rows, cols);
  const std::size_t kblocks = ceil_div(cols, e4m3::kBlockSize);
  Fp8Tensor codes{rows, cols, std::vector<std::uint8_t>(rows * cols)};
  ScaleTensorA scales{rows, kblocks, std::vector<float>(rows * kblocks)};

  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = matrix.data() + r * cols;
    for (std::size_t kb = 0; kb < kblocks; ++kb) {
      const std::size_t k0 = kb * e4m3::kBlockSize;
      const std::size_t k1 = std::min(cols, k0 + e4m3::kBlockSize);
      float amax = 0.0f;
      for (std::size_t k = k0; k < k1; ++k) amax = std::max(amax, std::fabs(row[k]));
      const float scale = scale_for(amax);
      scales.values[r * kblocks + kb] = scale;
      for (std::size_t k = k0; k < k1; ++k) codes.codes[r * cols + k] = quantize_one(row[k], scale);
    }
  }
  return {std::move(codes), std::move(scales)};
}

std::pair<Fp8Tensor, ScaleTensorB> quantize_b(std::span<const float> matrix, std::size_t rows, std::size_t cols) {
  require_finite(matrix, rows, cols);
  const std::size_t kblocks = ceil_div(rows, e4m3::kBlockSize);
  const std::size_t nblocks = ceil_div(cols, e4m3::kBlockSize);
  Fp8Tensor codes{rows, cols, std::vector<std::uint8_t>(rows * cols)};
  ScaleTensorB scales{kblocks, nblocks, std::vector<float>(kblocks * nblocks)};

  for (std::size_t kb = 0; kb < kblocks; ++kb) {
    const std::size_t k0 = kb * e4m3::kBlockSize;
    const std::size_t k1 = std::min(rows, k0 + e4m3::kBlockSize);
    for (std::size_t nb = 0; nb < nblocks; ++nb) {
      const std::size_t n0 = nb * e4m3::kBlockSize;
      const std::size_t n1 = std::min(cols, n0 + e4m3::kBlockSize);
      float amax = 0.0f;
      for (std::size_t k = k0; k < k1; ++k)
        for (std::size_t n = n0; n < n1; ++n) amax = std::max(amax, std::fabs(matrix[k * cols + n]));
      const float scale = scale_for(amax);
      scales.values[kb * nblocks + nb] = scale;
      for (std::size_t k = k0; k < k1; ++k)
        for (std::size_t n = n0; n < n1; ++n) codes.codes[k * cols + n] = quantize_one(matrix[k * cols + n], scale);
    }
  }
  return {std::move(codes), std::move(scales)};
}

std::uint16_t to_bf16_bits(float x) {
  const auto bits = std::bit_cast<std::uint32_t>(x);
  if (std::isnan(x)) return static_cast<std::uint16_t>((bits >> 16) | 0x0040);
  const std::uint32_t rounding = 0x7FFF + ((bits >> 16) & 1);
  return static_cast<std::uint16_t>((bits + rounding) >> 16);
}

float from_bf16_bits(std::uint16_t bits) { return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16); }

}  // namespace tma_sim
