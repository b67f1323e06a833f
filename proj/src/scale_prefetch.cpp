#include "tma_sim/scale_prefetch.hpp"

#include <cstring>
#include <stdexcept>
#include <string>

namespace tma_sim {

PrefetchWindow plan_prefetch(std::uint64_t addr, std::uint64_t k, std::uint64_t block_m) {
  if (k == 0 || block_m == 0) throw std::invalid_argument("plan_prefetch: K and block_M must be positive");
  const std::uint64_t row_bytes = scale_row_bytes(k);
  for (std::uint64_t r = 0; r < kPrefetchGuardRows; ++r) {
    const std::uint64_t back = r * row_bytes;
    // (addr - back) mod 16, computed without assuming addr >= back.
    if ((addr + kGlobalAlignment * back - back) % kGlobalAlignment != 0) continue;
    if (back > addr) {
      throw NoAlignedSolution("plan_prefetch: aligned window for address " + std::to_string(addr) +
                              " would start before address 0");
    }
    PrefetchWindow w;
    w.tile_addr = addr;
    w.start_addr = addr - back;
    w.row_prev = r;
    w.row_next = kPrefetchGuardRows + block_m - r;
    w.desc_rows = kPrefetchGuardRows + block_m;
    w.desc_cols = row_bytes / kScaleBytes;
    w.block_m = block_m;
    return w;
  }
  throw NoAlignedSolution("plan_prefetch: no row_prev in [0, 15] aligns address " + std::to_string(addr) +
                          " with row pitch " + std::to_string(row_bytes));
}

TmaDescriptor make_window_descriptor(DescriptorTable& table, std::uint64_t k, std::uint64_t block_m) {
  const std::uint64_t row_bytes = scale_row_bytes(k);
  return table.create(kScaleBytes, kPrefetchGuardRows + block_m, row_bytes / kScaleBytes, row_bytes);
}

ScaleTile load_scales(const PrefetchWindow& window, TransferEngine& engine, const TmaDescriptor& descriptor,
                      std::uint64_t smem_offset) {
  if (descriptor.box_rows() != window.desc_rows || descriptor.box_cols() != window.desc_cols ||
      descriptor.element_width() != kScaleBytes) {
    throw std::invalid_argument("load_scales: descriptor shape does not match the prefetch window");
  }
  engine.tma_copy(TransferOp{descriptor.id(), Direction::global_to_shared, window.start_addr, smem_offset});

  ScaleTile tile{window.block_m, window.desc_cols, std::vector<float>(window.block_m * window.desc_cols)};
  const auto valid = engine.shared().bytes(smem_offset + window.valid_begin() * window.row_bytes(),
                                           window.block_m * window.row_bytes());
  std::memcpy(tile.values.data(), valid.data(), valid.size());
  return tile;
}

}  // namespace tma_sim
