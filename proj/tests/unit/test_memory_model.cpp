#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "tma_sim/memory_model.hpp"

using namespace tma_sim;

namespace {

struct Rig {
  SimArena global{MemorySide::global, 1 << 20};
  SimArena shared{MemorySide::shared, 228 * 1024};
  TransferEngine engine{global, shared};
};

}  // namespace

TEST_CASE("alloc honours per-arena alignment") {
  SimArena g(MemorySide::global, 4096);
  CHECK(g.alloc(100) == 0);
  const auto second = g.alloc(10, 16);
  CHECK(second % 16 == 0);
  CHECK(second >= 100);

  SimArena s(MemorySide::shared, 4096);
  s.alloc(5);
  CHECK(s.alloc(64) % 128 == 0);

  CHECK_THROWS_AS(s.alloc(8, 16), std::invalid_argument);
  CHECK_THROWS_AS(g.alloc(8, 24), std::invalid_argument);
  CHECK_THROWS_AS(g.alloc(5000), OutOfMemory);
}

TEST_CASE("allocations never overlap") {
  std::mt19937_64 rng(5);
  SimArena g(MemorySide::global, 1 << 24);
  for (int i = 0; i < 500; ++i) g.alloc(rng() % 3000, i % 3 == 0 ? 64 : 16);
  const auto& allocs = g.allocations();
  for (std::size_t i = 1; i < allocs.size(); ++i) {
    CHECK(allocs[i].base >= allocs[i - 1].base + allocs[i - 1].length);
    CHECK(allocs[i].base % allocs[i].alignment == 0);
  }
}

TEST_CASE("descriptors are frozen at launch") {
  DescriptorTable table;
  const auto d = table.create(2, 64, 128, 256);
  CHECK(d.id() == 0);
  CHECK(d.box_bytes() == 64 * 128 * 2);
  table.seal();
  CHECK_THROWS_AS(table.create(2, 1, 128, 256), std::logic_error);
  CHECK_THROWS_AS(table.create(0, 1, 1, 1), std::logic_error);
  DescriptorTable fresh;
  CHECK_THROWS_AS(fresh.create(2, 1, 0, 256), std::invalid_argument);
}

TEST_CASE("tma_copy moves the full box and logs it") {
  Rig rig;
  const auto src = rig.global.alloc(64 * 256 * 2);
  const auto dst = rig.shared.alloc(64 * 128 * 2);
  for (std::uint64_t i = 0; i < 64 * 256 * 2; ++i) rig.global.bytes(src + i, 1)[0] = static_cast<std::uint8_t>(i * 7);
  const auto d = rig.engine.descriptors().create(2, 64, 128, 512);
  rig.engine.descriptors().seal();

  rig.engine.tma_copy({d.id(), Direction::global_to_shared, src, dst});
  CHECK(rig.engine.summary() == TransferSummary{16384, 0, 1});
  // Row r of the box comes from src + r * stride.
  for (std::uint64_t r = 0; r < 64; ++r) {
    CHECK(rig.shared.bytes(dst + r * 256, 1)[0] == rig.global.bytes(src + r * 512, 1)[0]);
    CHECK(rig.shared.bytes(dst + r * 256 + 255, 1)[0] == rig.global.bytes(src + r * 512 + 255, 1)[0]);
  }

  rig.engine.tma_copy({d.id(), Direction::shared_to_global, src + 256, dst});
  CHECK(rig.engine.summary() == TransferSummary{16384, 16384, 2});
  CHECK(rig.engine.log()[1].seq == 1);
}

TEST_CASE("alignment violations name the side, address and modulus") {
  Rig rig;
  const auto src = rig.global.alloc(1 << 16);
  const auto dst = rig.shared.alloc(1 << 15);
  const auto d = rig.engine.descriptors().create(2, 64, 128, 256);
  rig.engine.descriptors().seal();

  try {
    rig.engine.tma_copy({d.id(), Direction::global_to_shared, src, dst + 64});
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(e.side() == MemorySide::shared);
    CHECK(e.address() == dst + 64);
    CHECK(e.modulus() == 128);
  }
  try {
    rig.engine.tma_copy({d.id(), Direction::shared_to_global, src + 8, dst});
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(e.side() == MemorySide::global);
    CHECK(e.address() == src + 8);
    CHECK(e.modulus() == 16);
  }
  CHECK(rig.engine.log().empty());
}

TEST_CASE("bounds violations are reported before any byte moves") {
  Rig rig;
  const auto a = rig.global.alloc(10 * 256);
  rig.global.alloc(4096);  // neighbour that must not be written
  const auto buf = rig.shared.alloc(64 * 256);
  const auto d = rig.engine.descriptors().create(2, 16, 128, 256);
  rig.engine.descriptors().seal();
  rig.global.fill(a + 10 * 256, 4096, 0xAB);

  try {
    rig.engine.tma_copy({d.id(), Direction::shared_to_global, a, buf});
    FAIL("expected BoundsError");
  } catch (const BoundsError& e) {
    CHECK(e.side() == MemorySide::global);
    CHECK(e.allocation_id() == 0);
    CHECK(e.row() == 10);
  }
  CHECK(rig.global.bytes(a + 10 * 256, 1)[0] == 0xAB);
  CHECK(rig.engine.log().empty());

  CHECK_THROWS_AS(rig.engine.tma_copy({d.id(), Direction::global_to_shared, a, buf + 64 * 128 + 128 * 40}),
                  BoundsError);
}

TEST_CASE("copies require a sealed table") {
  Rig rig;
  rig.global.alloc(4096);
  rig.shared.alloc(4096);
  const auto d = rig.engine.descriptors().create(1, 1, 16, 16);
  CHECK_THROWS_AS(rig.engine.tma_copy({d.id(), Direction::global_to_shared, 0, 0}), std::logic_error);
}

TEST_CASE("fuzz: AlignmentError exactly when a congruence fails") {
  std::mt19937_64 rng(1234);
  std::uint64_t raised = 0;
  std::uint64_t moved = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    Rig rig;
    const std::uint64_t block_n = 16 * (1 + rng() % 16);  // 16 .. 256, includes non-multiples of 64
    const std::uint64_t rows = 1 + rng() % 32;
    const std::uint64_t row_bytes = 2 * block_n;
    const auto g = rig.global.alloc(64 * row_bytes + 256);
    const auto s = rig.shared.alloc(64 * row_bytes + 256);
    const auto d = rig.engine.descriptors().create(2, rows, block_n, row_bytes);
    rig.engine.descriptors().seal();

    const std::uint64_t start_row = rng() % 32;
    const std::uint64_t gmem = g + (rng() % 4 == 0 ? rng() % 64 : 16 * (rng() % 8));
    const std::uint64_t smem = s + start_row * row_bytes;
    const bool should_fail = gmem % 16 != 0 || smem % 128 != 0;
    bool failed = false;
    try {
      rig.engine.tma_copy({d.id(), trial % 2 ? Direction::shared_to_global : Direction::global_to_shared, gmem, smem});
      ++moved;
    } catch (const AlignmentError&) {
      failed = true;
      ++raised;
    }
    REQUIRE(failed == should_fail);
  }
  CHECK(raised > 0);
  CHECK(moved > 0);
}

TEST_CASE("shared C-tile row offsets stay 128-byte aligned iff block_N is a multiple of 64") {
  for (std::uint64_t block_n = 64; block_n <= 512; block_n += 64) {
    for (std::uint64_t s = 0; s < 256; ++s) CHECK((s * 2 * block_n) % 128 == 0);
  }
  bool violated = false;
  for (std::uint64_t s = 0; s < 256; ++s) violated = violated || (s * 2 * 48) % 128 != 0;
  CHECK(violated);
}

TEST_CASE("transfer log totals match the analytic formula") {
  Rig rig;
  const auto g = rig.global.alloc(1 << 16);
  const auto s = rig.shared.alloc(1 << 15);
  const auto d = rig.engine.descriptors().create(2, 64, 128, 256);
  rig.engine.descriptors().seal();
  CHECK(rig.engine.summary() == TransferSummary{0, 0, 0});
  for (int i = 0; i < 5; ++i) rig.engine.tma_copy({d.id(), Direction::shared_to_global, g, s});
  CHECK(rig.engine.summary().total_bytes() == 64 * 128 * 2 * 5);
  CHECK(rig.engine.summary().op_count == 5);

  std::ostringstream csv;
  write_transfer_log_csv(csv, rig.engine.log());
  CHECK(csv.str().rfind("seq,direction,desc_id,gmem_base,smem_offset,rows,cols,bytes\n0,s2g,0,", 0) == 0);
}
