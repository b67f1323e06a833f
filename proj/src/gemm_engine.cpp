#include "tma_sim/gemm_engine.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <cstring>
#include <numeric>
#include <string>
#include <tuple>

#include "tma_sim/random.hpp"
#include "tma_sim/scale_prefetch.hpp"

namespace tma_sim {

static_assert(std::endian::native == std::endian::little, "simulated memory uses host byte order");

std::uint64_t ProblemConfig::total_rows() const {
  return std::accumulate(group_sizes.begin(), group_sizes.end(), std::uint64_t{0});
}

std::vector<std::uint64_t> ProblemConfig::row_offsets() const {
  std::vector<std::uint64_t> offsets(group_sizes.size(), 0);
  std::exclusive_scan(group_sizes.begin(), group_sizes.end(), offsets.begin(), std::uint64_t{0});
  return offsets;
}

void ProblemConfig::validate() const {
  if (block_m == 0 || !std::has_single_bit(block_m)) {
    throw InvalidBlockM("block_M must be a power of two, got " + std::to_string(block_m));
  }
  if (block_n == 0 || block_n % 64 != 0) {
    throw InvalidBlockN("block_N must be a positive multiple of 64, got " + std::to_string(block_n));
  }
  if (block_k != 128) throw ConfigError("block_K must be 128, got " + std::to_string(block_k));
  if (group_sizes.empty()) throw ConfigError("at least one group is required");
  if (k == 0 || k % 16 != 0) throw ConfigError("K must be a positive multiple of 16, got " + std::to_string(k));
  if (n == 0 || (2 * n) % 16 != 0) throw ConfigError("2N must be a positive multiple of 16, got N=" + std::to_string(n));
  if (n % block_n != 0) {
    throw ConfigError("N=" + std::to_string(n) + " must be a multiple of block_N=" + std::to_string(block_n));
  }
}

GroupedOperands make_random_operands(const ProblemConfig& config, std::uint64_t seed) {
  const std::uint64_t rows = config.total_rows();
  Rng rng(seed);
  auto fill = [&rng](std::vector<float>& values, std::uint64_t row_len) {
    for (std::size_t start = 0; start < values.size(); start += row_len) {
      // Exponent in [-4, 4]; one row in 16 is left all zero.
      const bool zero_row = rng.uniform(15) == 0;
      const float magnitude = std::ldexp(1.0f, static_cast<int>(rng.uniform(8)) - 4);
      for (std::size_t i = start; i < start + row_len; ++i) {
        values[i] = zero_row ? 0.0f : static_cast<float>((rng.unit() * 2.0 - 1.0) * magnitude);
      }
    }
  };

  std::vector<float> a(rows * config.k);
  std::vector<float> b(config.k * config.n);
  fill(a, config.k);
  fill(b, config.n);

  GroupedOperands ops;
  ops.group_sizes = config.group_sizes;
  std::tie(ops.a, ops.sa) = quantize_a(a, rows, config.k);
  std::tie(ops.b, ops.sb) = quantize_b(b, config.k, config.n);
  return ops;
}

std::vector<float> compute_tile(const TileInputs& in) {
  const auto table = e4m3::decode_table();
  const std::uint64_t kblocks = ceil_div(in.k, e4m3::kBlockSize);

  std::vector<float> a(in.rows * in.k);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = table[in.a[i]];
  std::vector<float> bt(in.cols * in.k);
  for (std::uint64_t kk = 0; kk < in.k; ++kk)
    for (std::uint64_t n = 0; n < in.cols; ++n) bt[n * in.k + kk] = table[in.b[kk * in.cols + n]];

  std::vector<float> out(in.rows * in.cols, 0.0f);
  for (std::uint64_t m = 0; m < in.rows; ++m) {
    const float* arow = a.data() + m * in.k;
    for (std::uint64_t n = 0; n < in.cols; ++n) {
      const float* bcol = bt.data() + n * in.k;
      const std::uint64_t nb = (in.n0 + n) / e4m3::kBlockSize;
      float acc = 0.0f;
      for (std::uint64_t kb = 0; kb < kblocks; ++kb) {
        const std::uint64_t k0 = kb * e4m3::kBlockSize;
        const std::uint64_t k1 = std::min<std::uint64_t>(in.k, k0 + e4m3::kBlockSize);
        float inner = 0.0f;
        for (std::uint64_t kk = k0; kk < k1; ++kk) inner += arow[kk] * bcol[kk];
        const float scaled = inner * in.sa[m * kblocks + kb];
        acc += scaled * in.sb->at(kb, nb);
      }
      out[m * in.cols + n] = acc;
    }
  }
  return out;
}

namespace {

void write_floats(SimArena& arena, std::uint64_t address, std::span<const float> values) {
  std::memcpy(arena.bytes(address, values.size_bytes()).data(), values.data(), values.size_bytes());
}

// Addresses and descriptors of one simulated launch.
struct Launch {
  std::uint64_t a_base = 0;
  std::uint64_t sa_base = 0;  // first guard row
  std::uint64_t b_base = 0;
  std::uint64_t sb_base = 0;
  std::uint64_t c_base = 0;

  std::uint64_t a_buf = 0;
  std::uint64_t b_buf = 0;
  std::uint64_t sa_buf = 0;
  std::uint64_t c_buf = 0;

  std::optional<TmaDescriptor> a_full, a_tail, b_full, b_tail, window;
  std::optional<DescriptorPool> pool;
};

constexpr std::uint64_t kSharedCapacity = 228 * 1024;

}  // namespace

AdaptiveResult run_adaptive(const ProblemConfig& config, const GroupedOperands& operands,
                            const AdaptiveOptions& options) {
  config.validate();
  const std::uint64_t total = config.total_rows();
  const std::uint64_t k = config.k;
  const std::uint64_t n = config.n;
  const std::uint64_t bm = config.block_m;
  const std::uint64_t bn = config.block_n;
  const std::uint64_t kblocks = ceil_div(k, e4m3::kBlockSize);
  const std::uint64_t k_tail = k % e4m3::kBlockSize;
  const std::uint64_t sa_row = scale_row_bytes(k);
  const std::uint64_t c_row = kOutputElementBytes * n;
  if (operands.a.rows != total || operands.a.cols != k || operands.b.rows != k || operands.b.cols != n ||
      operands.sa.rows != total || operands.sa.cols != kblocks) {
    throw ShapeMismatch("run_adaptive: operands do not match the problem configuration");
  }

  // Global layout. A carries block_M tail rows because the last residual tile
  // loads a full box; S_A carries 16 guard rows before and 16 + block_M after.
  const std::uint64_t a_bytes = (total + bm) * k;
  const std::uint64_t sa_rows = kPrefetchGuardRows + total + kPrefetchGuardRows + bm;
  const std::uint64_t sb_bytes = operands.sb.values.size() * kScaleBytes;
  const std::uint64_t global_need = align_up(a_bytes, 16) + align_up(sa_rows * sa_row, 16) + align_up(k * n, 16) +
                                    align_up(sb_bytes, 16) + total * c_row;
  SimArena global(MemorySide::global, global_need);
  SimArena shared(MemorySide::shared, kSharedCapacity);
  TransferEngine engine(global, shared);

  Launch L;
  L.a_base = global.alloc(a_bytes);
  L.sa_base = global.alloc(sa_rows * sa_row);
  L.b_base = global.alloc(k * n);
  L.sb_base = global.alloc(sb_bytes);
  L.c_base = global.alloc(total * c_row);

  std::memcpy(global.bytes(L.a_base, total * k).data(), operands.a.codes.data(), total * k);
  global.fill(L.a_base + total * k, bm * k, options.guard_fill);
  global.fill(L.sa_base, sa_rows * sa_row, options.guard_fill);
  write_floats(global, L.sa_base + kPrefetchGuardRows * sa_row, operands.sa.values);
  std::memcpy(global.bytes(L.b_base, k * n).data(), operands.b.codes.data(), k * n);
  write_floats(global, L.sb_base, operands.sb.values);
  global.fill(L.c_base, total * c_row, 0xFF);

  L.a_buf = shared.alloc(bm * e4m3::kBlockSize);
  L.b_buf = shared.alloc(e4m3::kBlockSize * bn);
  L.sa_buf = shared.alloc((kPrefetchGuardRows + bm) * sa_row);
  L.c_buf = shared.alloc(bm * bn * kOutputElementBytes);

  // Host initialization: every descriptor is created before launch.
  DescriptorTable& table = engine.descriptors();
  L.a_full = table.create(1, bm, std::min<std::uint64_t>(k, e4m3::kBlockSize), k);
  if (k_tail != 0 && k > e4m3::kBlockSize) L.a_tail = table.create(1, bm, k_tail, k);
  L.b_full = table.create(1, std::min<std::uint64_t>(k, e4m3::kBlockSize), bn, n);
  if (k_tail != 0 && k > e4m3::kBlockSize) L.b_tail = table.create(1, k_tail, bn, n);
  L.window = make_window_descriptor(table, k, bm);
  L.pool = build_pool(bm, bn, table, c_row);
  table.seal();

  // S_B is read in place, without TMA.
  ScaleTensorB sb{operands.sb.rows, operands.sb.cols, std::vector<float>(operands.sb.values.size())};
  std::memcpy(sb.values.data(), global.bytes(L.sb_base, sb_bytes).data(), sb_bytes);

  AdaptiveResult result;
  const auto offsets = config.row_offsets();
  std::vector<std::uint8_t> a_stage(bm * k);
  std::vector<std::uint8_t> b_stage(k * bn);
  std::vector<std::uint16_t> c_tile(bm * bn);

  for (std::size_t g = 0; g < config.group_sizes.size(); ++g) {
    const std::uint64_t m_g = config.group_sizes[g];
    const std::uint64_t row0 = offsets[g];
    StorePlan plan = plan_two_phase(m_g, *L.pool);
    if (options.plan_log != nullptr) write_plan_line(*options.plan_log, g, plan);

    for (std::uint64_t m0 = 0; m0 < m_g; m0 += bm) {
      const bool residual_tile = m_g - m0 < bm;
      for (std::uint64_t n0 = 0; n0 < n; n0 += bn) {
        ScaleTile scales;
        if (options.scale_source == ScaleSource::prefetch_window) {
          const std::uint64_t tile_addr = L.sa_base + (kPrefetchGuardRows + row0 + m0) * sa_row;
          scales = load_scales(plan_prefetch(tile_addr, k, bm), engine, *L.window, L.sa_buf);
        } else {
          scales = ScaleTile{bm, kblocks, std::vector<float>(bm * kblocks, 1.0f)};
          const std::uint64_t valid = std::min(bm, m_g - m0);
          std::copy_n(operands.sa.values.begin() + static_cast<std::ptrdiff_t>((row0 + m0) * kblocks),
                      valid * kblocks, scales.values.begin());
        }

        for (std::uint64_t kb = 0; kb < kblocks; ++kb) {
          const bool tail = kb + 1 == kblocks && L.a_tail.has_value();
          const TmaDescriptor& a_desc = tail ? *L.a_tail : *L.a_full;
          const TmaDescriptor& b_desc = tail ? *L.b_tail : *L.b_full;
          const std::uint64_t k0 = kb * e4m3::kBlockSize;
          const std::uint64_t width = a_desc.box_cols();

          engine.tma_copy(TransferOp{a_desc.id(), Direction::global_to_shared, L.a_base + (row0 + m0) * k + k0, L.a_buf});
          const auto a_smem = shared.bytes(L.a_buf, a_desc.box_bytes());
          for (std::uint64_t r = 0; r < bm; ++r) std::memcpy(&a_stage[r * k + k0], &a_smem[r * width], width);

          engine.tma_copy(TransferOp{b_desc.id(), Direction::global_to_shared, L.b_base + k0 * n + n0, L.b_buf});
          const auto b_smem = shared.bytes(L.b_buf, b_desc.box_bytes());
          std::memcpy(&b_stage[k0 * bn], b_smem.data(), b_desc.box_bytes());
        }

        const auto acc = compute_tile(TileInputs{a_stage, scales.values, b_stage, &sb, bm, bn, k, n0});
        for (std::size_t i = 0; i < acc.size(); ++i) c_tile[i] = to_bf16_bits(acc[i]);
        std::memcpy(shared.bytes(L.c_buf, c_tile.size() * 2).data(), c_tile.data(), c_tile.size() * 2);

        auto store = [&](const TmaDescriptor& desc, const RowTransfer& t) {
          engine.tma_copy(TransferOp{desc.id(), Direction::shared_to_global,
                                     L.c_base + (row0 + t.gmem_row) * c_row + n0 * kOutputElementBytes,
                                     L.c_buf + t.smem_row * bn * kOutputElementBytes});
        };
        if (!residual_tile) {
          store(L.pool->full_tile(), plan.full_tiles[m0 / bm]);
        } else {
          const TwoPhasePlan& two = *plan.residual;
          const TmaDescriptor& desc = table.at(two.descriptor);
          store(desc, two.phase_a);
          if (!options.drop_phase_b) store(desc, two.phase_b);
          result.residual_store_ops += options.drop_phase_b ? 1 : 2;
        }
      }
    }
    result.plans.push_back(std::move(plan));
  }

  result.output.rows = total;
  result.output.cols = n;
  result.output.group_sizes = config.group_sizes;
  result.output.bits.resize(total * n);
  std::memcpy(result.output.bits.data(), global.bytes(L.c_base, total * c_row).data(), total * c_row);
  result.log = engine.log();
  result.summary = engine.summary();
  return result;
}

std::vector<std::uint16_t> padded_group_output(const ProblemConfig& config, const GroupedOperands& operands,
                                               std::size_t group) {
  const std::uint64_t k = config.k;
  const std::uint64_t n = config.n;
  const std::uint64_t kblocks = ceil_div(k, e4m3::kBlockSize);
  const std::uint64_t m_g = config.group_sizes.at(group);
  const std::uint64_t row0 = config.row_offsets()[group];
  const std::uint64_t padded = ceil_div(m_g, kPaddingMultiple) * kPaddingMultiple;

  std::vector<std::uint8_t> a(padded * k, 0);
  std::vector<float> sa(padded * kblocks, 1.0f);
  std::copy_n(operands.a.codes.begin() + static_cast<std::ptrdiff_t>(row0 * k), m_g * k, a.begin());
  std::copy_n(operands.sa.values.begin() + static_cast<std::ptrdiff_t>(row0 * kblocks), m_g * kblocks, sa.begin());

  std::vector<std::uint16_t> out(padded * n);
  std::vector<std::uint8_t> b_tile(k * config.block_n);
  for (std::uint64_t n0 = 0; n0 < n; n0 += config.block_n) {
    for (std::uint64_t kk = 0; kk < k; ++kk)
      std::copy_n(operands.b.codes.begin() + static_cast<std::ptrdiff_t>(kk * n + n0), config.block_n,
                  b_tile.begin() + static_cast<std::ptrdiff_t>(kk * config.block_n));
    for (std::uint64_t m0 = 0; m0 < padded; m0 += config.block_m) {
      const std::uint64_t rows = std::min(config.block_m, padded - m0);
      const auto acc = compute_tile(TileInputs{std::span(a).subspan(m0 * k, rows * k),
                                               std::span(sa).subspan(m0 * kblocks, rows * kblocks), b_tile,
                                               &operands.sb, rows, config.block_n, k, n0});
      for (std::uint64_t r = 0; r < rows; ++r)
        for (std::uint64_t c = 0; c < config.block_n; ++c)
          out[(m0 + r) * n + n0 + c] = to_bf16_bits(acc[r * config.block_n + c]);
    }
  }
  return out;
}

OutputMatrix run_padded_baseline(const ProblemConfig& config, const GroupedOperands& operands) {
  config.validate();
  OutputMatrix out;
  out.rows = config.total_rows();
  out.cols = config.n;
  out.group_sizes = config.group_sizes;
  out.bits.reserve(out.rows * out.cols);
  for (std::size_t g = 0; g < config.group_sizes.size(); ++g) {
    const auto padded = padded_group_output(config, operands, g);
    out.bits.insert(out.bits.end(), padded.begin(),
                    padded.begin() + static_cast<std::ptrdiff_t>(config.group_sizes[g] * config.n));
  }
  return out;
}

bool BitwiseReport::all_equal() const {
  return std::all_of(groups.begin(), groups.end(), [](const GroupComparison& g) { return g.equal; });
}

BitwiseReport verify_bitwise(const OutputMatrix& a, const OutputMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.group_sizes != b.group_sizes || a.bits.size() != b.bits.size()) {
    throw ShapeMismatch("verify_bitwise: outputs differ in shape or group split");
  }
  BitwiseReport report;
  std::uint64_t row0 = 0;
  for (std::size_t g = 0; g < a.group_sizes.size(); ++g) {
    GroupComparison cmp{g, true, std::nullopt};
    for (std::uint64_t r = 0; r < a.group_sizes[g] && cmp.equal; ++r) {
      for (std::uint64_t c = 0; c < a.cols; ++c) {
        const auto x = a.at(row0 + r, c);
        const auto y = b.at(row0 + r, c);
        if (x != y) {
          cmp.equal = false;
          cmp.first = Mismatch{r, c, x, y};
          break;
        }
      }
    }
    report.groups.push_back(cmp);
    row0 += a.group_sizes[g];
  }
  return report;
}

}  // namespace tma_sim
