#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tma_sim/fp8.hpp"
#include "tma_sim/gemm_engine.hpp"

namespace tma_sim {

// Flat binary array file, little-endian throughout.
//
//   offset  size  field
//        0     4  magic "TMAS"
//        4     2  format version (1)
//        6     2  dtype tag (DType)
//        8     8  rows
//       16     8  cols
//       24     8  reserved, zero
//       32     -  rows * cols elements, row-major
inline constexpr std::size_t kFixtureHeaderBytes = 32;
inline constexpr std::uint16_t kFixtureVersion = 1;

enum class DType : std::uint16_t { e4m3 = 1, f32 = 2, bf16 = 3, u64 = 4 };

std::size_t dtype_bytes(DType t);

struct BinaryArray {
  DType dtype = DType::e4m3;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  /// Little-endian element bytes.
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_array(const BinaryArray& array);
/// Throws InvalidInput on bad magic, version, dtype or a truncated payload.
BinaryArray decode_array(std::span<const std::uint8_t> bytes);

void write_array(const std::filesystem::path& path, const BinaryArray& array);
BinaryArray read_array(const std::filesystem::path& path);

BinaryArray to_array(const Fp8Tensor& t);
BinaryArray to_array(std::uint64_t rows, std::uint64_t cols, std::span<const float> values);
BinaryArray to_array(const OutputMatrix& m);
Fp8Tensor to_fp8(const BinaryArray& a);
std::vector<float> to_floats(const BinaryArray& a);
std::vector<std::uint16_t> to_bf16(const BinaryArray& a);

/// A replayable golden case: fixture.txt plus a.bin, sa.bin, b.bin, sb.bin and c.bin.
struct Fixture {
  ProblemConfig config;
  GroupedOperands operands;
  OutputMatrix golden;
};

void write_fixture(const std::filesystem::path& dir, const Fixture& fixture);
Fixture read_fixture(const std::filesystem::path& dir);

}  // namespace tma_sim
