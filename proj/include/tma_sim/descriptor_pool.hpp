#pragma once

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tma_sim/memory_model.hpp"

namespace tma_sim {

/// Output-tile store descriptors with box rows 2^0 .. 2^floor(log2(block_M)) and
/// box cols block_N. The largest entry stores full tiles; the others serve
/// residual tiles through the two-phase plan.
class DescriptorPool {
 public:
  std::uint64_t block_m() const { return block_m_; }
  std::uint64_t block_n() const { return block_n_; }
  const std::vector<TmaDescriptor>& entries() const { return entries_; }

  const TmaDescriptor& full_tile() const { return entries_.back(); }

  /// Descriptor with box_rows = 2^floor(log2(res)). Throws ResOutOfRange unless 1 <= res <= block_M.
  const TmaDescriptor& select(std::uint64_t res) const;

 private:
  friend DescriptorPool build_pool(std::uint64_t, std::uint64_t, DescriptorTable&, std::uint64_t, std::uint64_t);
  std::uint64_t block_m_ = 0;
  std::uint64_t block_n_ = 0;
  std::vector<TmaDescriptor> entries_;
};

inline constexpr std::uint64_t kOutputElementBytes = 2;

/// Registers the pool in `table`, which must not be sealed yet.
/// Throws InvalidBlockM unless block_m is a power of two, InvalidBlockN unless block_n % 64 == 0.
DescriptorPool build_pool(std::uint64_t block_m, std::uint64_t block_n, DescriptorTable& table,
                          std::uint64_t global_row_stride, std::uint64_t element_width = kOutputElementBytes);

/// Standalone pool (private table, global row stride 2 * block_n).
DescriptorPool build_pool(std::uint64_t block_m, std::uint64_t block_n);

/// One TMA store: `rows` consecutive shared rows starting at smem_row go to
/// global rows starting at gmem_row. Rows are relative to the group.
struct RowTransfer {
  std::uint64_t smem_row = 0;
  std::uint64_t gmem_row = 0;
  std::uint64_t rows = 0;

  std::uint64_t smem_last() const { return smem_row + rows - 1; }
  std::uint64_t gmem_last() const { return gmem_row + rows - 1; }
  friend bool operator==(const RowTransfer&, const RowTransfer&) = default;
};

struct TwoPhasePlan {
  std::uint64_t res = 0;
  std::uint64_t desc_rows = 0;
  DescriptorId descriptor = 0;
  RowTransfer phase_a;
  RowTransfer phase_b;

  std::uint64_t overlap_rows() const { return 2 * desc_rows - res; }
};

struct StorePlan {
  std::uint64_t m_g = 0;
  DescriptorId full_descriptor = 0;
  std::vector<RowTransfer> full_tiles;
  std::optional<TwoPhasePlan> residual;

  /// Number of TMA stores the plan issues.
  std::uint64_t store_ops() const { return full_tiles.size() + (residual ? 2 : 0); }
};

/// floor(M_g / block_M) full-tile stores, then a two-phase residual store when
/// M_g % block_M > 0:
///   phase a: smem rows [0, d)          -> global rows [M_g - res, M_g - res + d)
///   phase b: smem rows [res - d, res)  -> global rows [M_g - d, M_g)
/// with d = 2^floor(log2(res)). Overlapping global rows receive the same shared row twice.
StorePlan plan_two_phase(std::uint64_t m_g, const DescriptorPool& pool);

/// `group g: full=<n> res=<res> desc=<rows> A:[s0..s1]->[g0..g1] B:[s0..s1]->[g0..g1]`
void write_plan_line(std::ostream& out, std::size_t group, const StorePlan& plan);

constexpr std::uint64_t floor_pow2(std::uint64_t x) { return x == 0 ? 0 : std::uint64_t{1} << (63 - std::countl_zero(x)); }

}  // namespace tma_sim
