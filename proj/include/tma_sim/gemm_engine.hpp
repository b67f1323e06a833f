#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tma_sim/descriptor_pool.hpp"
#include "tma_sim/fp8.hpp"
#include "tma_sim/memory_model.hpp"

namespace tma_sim {

struct ProblemConfig {
  std::uint64_t n = 128;
  std::uint64_t k = 128;
  std::vector<std::uint64_t> group_sizes;
  std::uint64_t block_m = 128;
  std::uint64_t block_n = 128;
  std::uint64_t block_k = 128;

  std::uint64_t total_rows() const;
  /// Prefix sums of group_sizes; offsets[g] is the first row of group g.
  std::vector<std::uint64_t> row_offsets() const;

  /// Throws InvalidBlockM, InvalidBlockN or ConfigError.
  /// Requires K % 16 == 0, 2N % 16 == 0, N % block_N == 0, block_K == 128.
  void validate() const;
};

/// Groups concatenated along rows: A is sum(M^g) x K and S_A sum(M^g) x ceil(K/128).
/// B and S_B are shared by every group.
struct GroupedOperands {
  std::vector<std::uint64_t> group_sizes;
  Fp8Tensor a;
  ScaleTensorA sa;
  Fp8Tensor b;
  ScaleTensorB sb;
};

/// Random inputs for `config`, quantized with the 1x128 / 128x128 scheme.
/// Row magnitudes vary over several binades so scales differ across tiles.
GroupedOperands make_random_operands(const ProblemConfig& config, std::uint64_t seed);

/// bf16 output, groups concatenated along rows.
struct OutputMatrix {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<std::uint64_t> group_sizes;
  std::vector<std::uint16_t> bits;

  std::uint16_t at(std::uint64_t r, std::uint64_t c) const { return bits[r * cols + c]; }
};

/// Inputs to one output tile. `a` is rows x K codes, `sa` rows x ceil(K/128),
/// `b` is K x cols codes holding output columns [n0, n0 + cols).
struct TileInputs {
  std::span<const std::uint8_t> a;
  std::span<const float> sa;
  std::span<const std::uint8_t> b;
  const ScaleTensorB* sb = nullptr;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t k = 0;
  std::uint64_t n0 = 0;
};

/// rows x cols fp32 tile:
///   C[m,n] = sum over k-blocks kb ascending of (sum_{k in kb, ascending} A[m,k] * B[k,n]) * S_A[m,kb] * S_B[kb,nb]
/// with every sum in fp32 and the two scale multiplies applied left to right.
std::vector<float> compute_tile(const TileInputs& in);

enum class ScaleSource { prefetch_window, direct };

struct AdaptiveOptions {
  ScaleSource scale_source = ScaleSource::prefetch_window;
  /// Byte written into A tail rows and S_A guard rows.
  std::uint8_t guard_fill = 0;
  /// Test hook: skip the phase-b store of every residual tile.
  bool drop_phase_b = false;
  std::ostream* plan_log = nullptr;
};

struct AdaptiveResult {
  OutputMatrix output;
  std::vector<StorePlan> plans;
  std::vector<TransferRecord> log;
  TransferSummary summary;
  std::uint64_t residual_store_ops = 0;
};

/// Padding-free pipeline through the simulated memory model. Per output tile:
/// TMA-load A, B and the S_A prefetch window, compute, cast to bf16 in shared
/// memory, then store with the full-tile descriptor or the two-phase residual plan.
/// Alignment and bounds violations propagate as exceptions.
AdaptiveResult run_adaptive(const ProblemConfig& config, const GroupedOperands& operands,
                            const AdaptiveOptions& options = {});

inline constexpr std::uint64_t kPaddingMultiple = 128;

/// Group g padded to ceil(M^g/128)*128 rows (zero A codes, unit S_A), full padded output.
std::vector<std::uint16_t> padded_group_output(const ProblemConfig& config, const GroupedOperands& operands,
                                               std::size_t group);

/// Padding baseline with the padded rows sliced off.
OutputMatrix run_padded_baseline(const ProblemConfig& config, const GroupedOperands& operands);

struct Mismatch {
  std::uint64_t row = 0;  // row within the group
  std::uint64_t col = 0;
  std::uint16_t bits_a = 0;
  std::uint16_t bits_b = 0;
};

struct GroupComparison {
  std::size_t group = 0;
  bool equal = true;
  std::optional<Mismatch> first;
};

struct BitwiseReport {
  std::vector<GroupComparison> groups;

  bool all_equal() const;
};

/// Per-group comparison of output bits. Throws ShapeMismatch when shapes or group splits differ.
BitwiseReport verify_bitwise(const OutputMatrix& a, const OutputMatrix& b);

}  // namespace tma_sim
