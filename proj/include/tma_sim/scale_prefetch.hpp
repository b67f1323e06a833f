#pragma once

#include <cstdint>
#include <vector>

#include "tma_sim/memory_model.hpp"

namespace tma_sim {

inline constexpr std::uint64_t kPrefetchGuardRows = 16;
inline constexpr std::uint64_t kScaleBytes = 4;

/// Bytes per S_A row: 4 * ceil(K/128).
constexpr std::uint64_t scale_row_bytes(std::uint64_t k) { return kScaleBytes * ((k + 127) / 128); }

/// Over-fetch window for one m-tile of S_A. The copy starts row_prev rows before
/// the tile so its global address is 16-byte aligned and spans 16 + block_M rows;
/// rows [row_prev, row_prev + block_M) of the window are the tile's scales.
struct PrefetchWindow {
  std::uint64_t tile_addr = 0;
  std::uint64_t start_addr = 0;
  std::uint64_t row_prev = 0;
  std::uint64_t row_next = 0;
  std::uint64_t desc_rows = 0;
  std::uint64_t desc_cols = 0;
  std::uint64_t block_m = 0;

  std::uint64_t valid_begin() const { return row_prev; }
  std::uint64_t valid_end() const { return row_prev + block_m; }
  std::uint64_t row_bytes() const { return desc_cols * kScaleBytes; }
};

/// Smallest row_prev in [0, 15] with (addr - 4 * row_prev * ceil(K/128)) % 16 == 0.
/// Throws NoAlignedSolution when none exists (addr is not reachable from a 16-byte aligned base).
PrefetchWindow plan_prefetch(std::uint64_t addr, std::uint64_t k, std::uint64_t block_m);

/// Registers the window descriptor [16 + block_M, ceil(K/128)] of 4-byte scales.
TmaDescriptor make_window_descriptor(DescriptorTable& table, std::uint64_t k, std::uint64_t block_m);

/// Valid scale rows of a loaded window, block_M x ceil(K/128), row-major.
struct ScaleTile {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<float> values;

  float at(std::uint64_t r, std::uint64_t kb) const { return values[r * cols + kb]; }
};

/// Issues one TMA load of the whole window into shared memory at smem_offset and
/// returns the central block_M rows. Guard rows are copied but never returned.
ScaleTile load_scales(const PrefetchWindow& window, TransferEngine& engine, const TmaDescriptor& descriptor,
                      std::uint64_t smem_offset);

}  // namespace tma_sim
