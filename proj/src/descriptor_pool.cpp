#include "tma_sim/descriptor_pool.hpp"

#include <bit>
#include <ostream>
#include <string>

namespace tma_sim {

DescriptorPool build_pool(std::uint64_t block_m, std::uint64_t block_n, DescriptorTable& table,
                          std::uint64_t global_row_stride, std::uint64_t element_width) {
  if (block_m == 0 || !std::has_single_bit(block_m)) {
    throw InvalidBlockM("block_M must be a power of two, got " + std::to_string(block_m));
  }
  if (block_n == 0 || block_n % 64 != 0) {
    throw InvalidBlockN("block_N must be a positive multiple of 64, got " + std::to_string(block_n));
  }
  DescriptorPool pool;
  pool.block_m_ = block_m;
  pool.block_n_ = block_n;
  for (std::uint64_t rows = 1; rows <= block_m; rows *= 2) {
    pool.entries_.push_back(table.create(element_width, rows, block_n, global_row_stride));
  }
  return pool;
}

DescriptorPool build_pool(std::uint64_t block_m, std::uint64_t block_n) {
  DescriptorTable table;
  return build_pool(block_m, block_n, table, kOutputElementBytes * block_n);
}

const TmaDescriptor& DescriptorPool::select(std::uint64_t res) const {
  if (res < 1 || res > block_m_) {
    throw ResOutOfRange("residual rows " + std::to_string(res) + " outside [1, " + std::to_string(block_m_) + "]");
  }
  return entries_[static_cast<std::size_t>(std::countr_zero(floor_pow2(res)))];
}

StorePlan plan_two_phase(std::uint64_t m_g, const DescriptorPool& pool) {
  StorePlan plan;
  plan.m_g = m_g;
  plan.full_descriptor = pool.full_tile().id();
  const std::uint64_t block_m = pool.block_m();
  const std::uint64_t full = m_g / block_m;
  for (std::uint64_t t = 0; t < full; ++t) plan.full_tiles.push_back(RowTransfer{0, t * block_m, block_m});

  const std::uint64_t res = m_g % block_m;
  if (res > 0) {
    const TmaDescriptor& desc = pool.select(res);
    const std::uint64_t d = desc.box_rows();
    TwoPhasePlan two;
    two.res = res;
    two.desc_rows = d;
    two.descriptor = desc.id();
    two.phase_a = RowTransfer{0, m_g - res, d};
    two.phase_b = RowTransfer{res - d, m_g - d, d};
    plan.residual = two;
  }
  return plan;
}

void write_plan_line(std::ostream& out, std::size_t group, const StorePlan& plan) {
  out << "group " << group << ": full=" << plan.full_tiles.size();
  if (!plan.residual) {
    out << " res=0 desc=none\n";
    return;
  }
  const auto& r = *plan.residual;
  out << " res=" << r.res << " desc=" << r.desc_rows << " A:[" << r.phase_a.smem_row << ".." << r.phase_a.smem_last()
      << "]->[" << r.phase_a.gmem_row << ".." << r.phase_a.gmem_last() << "] B:[" << r.phase_b.smem_row << ".."
      << r.phase_b.smem_last() << "]->[" << r.phase_b.gmem_row << ".." << r.phase_b.gmem_last() << "]\n";
}

}  // namespace tma_sim
