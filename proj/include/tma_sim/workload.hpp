#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tma_sim {

/// Draws G group sizes summing to M_total:
///   1. v = 0 (length G)
///   2. v_i ~ uniform integer in [0, 2 * floor(M/G)]
///   3. v_i = floor(M * v_i / sum(v))   (exact integer arithmetic)
///   4. v_G += M - sum(v)
/// An all-zero draw in step 2 is redrawn from the next substream of `seed`.
/// When 2 * floor(M/G) == 0 every draw is zero and the last group receives M.
std::vector<std::uint64_t> generate_group_sizes(std::uint64_t m_total, std::uint64_t groups, std::uint64_t seed);

struct WorkloadSpec {
  std::uint64_t m_total = 0;
  std::uint64_t groups = 1;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::uint64_t seed = 0;
};

struct PaddedBytes {
  std::uint64_t a = 0;
  std::uint64_t sa = 0;
  std::uint64_t c = 0;

  std::uint64_t total() const { return a + sa + c; }
};

/// Memory accounting for one workload: the padding baseline rounds every group
/// up to a multiple of 128 rows and allocates A (K bytes/row), S_A
/// (4 * ceil(K/128) bytes/row) and C (2N bytes/row) at the padded size.
struct AccountingReport {
  WorkloadSpec spec;
  std::vector<std::uint64_t> group_sizes;
  std::uint64_t padded_rows = 0;
  PaddedBytes bytes_padded;
  PaddedBytes bytes_actual;
  /// 1 - actual/padded, in [0, 1).
  double memory_saving = 0.0;
  /// 2 x (padded A bytes + padded S_A bytes): the padding kernel writes the padded
  /// copies and the GEMM reads them back.
  std::uint64_t eliminated_traffic_bytes = 0;
  /// Two stores per group with a residual tile.
  std::uint64_t residual_store_ops = 0;
};

AccountingReport account(const WorkloadSpec& spec, std::span<const std::uint64_t> group_sizes,
                         std::uint64_t block_m = 128);

/// Generates the group sizes from spec.seed and accounts them.
AccountingReport account(const WorkloadSpec& spec, std::uint64_t block_m = 128);

inline constexpr std::array<const char*, 5> kCorrelationVariables = {"M", "N", "K", "groups", "saving"};

/// Pearson correlation matrix over (M, N, K, groups, saving).
using CorrelationMatrix = std::array<std::array<double, 5>, 5>;

/// Throws DegenerateVariance when any variable is constant or fewer than two reports are given.
CorrelationMatrix correlation_matrix(std::span<const AccountingReport> reports);

struct SweepGrid {
  std::vector<std::uint64_t> m_total;
  std::vector<std::uint64_t> groups;
  std::vector<std::uint64_t> n;
  std::vector<std::uint64_t> k;
  std::uint64_t seed = 0;
  std::uint64_t seed_count = 1;

  std::size_t cell_count() const { return m_total.size() * groups.size() * n.size() * k.size(); }
  /// Cells in M, groups, N, K nesting order, seeds seed .. seed + seed_count - 1 innermost.
  std::vector<WorkloadSpec> expand() const;
};

/// M in {8192, 16384, 32768, 65536}, N, K in {3072, ..., 8192}, groups in {4, 8, 16, 32}.
SweepGrid paper_grid();
/// Small dimensions that keep emulated GEMM fast.
SweepGrid desk_grid();

}  // namespace tma_sim
