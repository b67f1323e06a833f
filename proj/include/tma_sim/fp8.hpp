#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tma_sim {

/// E4M3 code: 1 sign bit, 4 exponent bits (bias 7), 3 mantissa bits.
/// No infinities; 0x7F and 0xFF are NaN. Largest finite magnitude is 448.
struct Fp8Value {
  std::uint8_t bits = 0;

  friend bool operator==(Fp8Value, Fp8Value) = default;
};

namespace e4m3 {

inline constexpr float kMax = 448.0f;
inline constexpr std::uint8_t kMaxCode = 0x7E;
inline constexpr int kBlockSize = 128;

constexpr bool is_nan(Fp8Value v) { return (v.bits & 0x7F) == 0x7F; }

/// Exact value of a code; NaN for the two NaN codes.
float decode(Fp8Value v);

/// Nearest code to `x` with ties to even mantissa, saturating to +-448.
/// Signed zero is preserved. Throws InvalidInput for NaN.
Fp8Value encode(double x);

/// Spacing of E4M3 values in the binade containing |x| (2^-9 below the normal range).
double ulp(double x);

/// 256-entry decode table, NaN at the NaN codes.
std::span<const float, 256> decode_table();

}  // namespace e4m3

/// decode(code) x scale in 32-bit precision.
float dequant(Fp8Value code, float scale);

/// Row-major FP8 payload, one byte per element.
struct Fp8Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> codes;

  std::uint8_t at(std::size_t r, std::size_t c) const { return codes[r * cols + c]; }
};

/// One scale per 1x128 row tile: shape [rows, ceil(K/128)].
struct ScaleTensorA {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  float at(std::size_t r, std::size_t kb) const { return values[r * cols + kb]; }
};

/// One scale per 128x128 block: shape [ceil(K/128), ceil(N/128)].
struct ScaleTensorB {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  float at(std::size_t kb, std::size_t nb) const { return values[kb * cols + nb]; }
};

constexpr std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

/// Quantizes an M x K row-major matrix with 1x128 tiled scaling.
/// scale = amax(tile)/448, or 1 for an all-zero tile.
std::pair<Fp8Tensor, ScaleTensorA> quantize_a(std::span<const float> matrix, std::size_t rows, std::size_t cols);

/// Quantizes a K x N row-major matrix with 128x128 blocked scaling.
std::pair<Fp8Tensor, ScaleTensorB> quantize_b(std::span<const float> matrix, std::size_t rows, std::size_t cols);

/// float -> bfloat16 bits, round to nearest even.
std::uint16_t to_bf16_bits(float x);
float from_bf16_bits(std::uint16_t bits);

}  // namespace tma_sim
