#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <random>

#include "tma_sim/errors.hpp"
#include "tma_sim/fixture_io.hpp"

using namespace tma_sim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / "tma_sim_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("header layout is 32 little-endian bytes") {
  BinaryArray a{DType::f32, 2, 3, std::vector<std::uint8_t>(24, 0x11)};
  const auto bytes = encode_array(a);
  REQUIRE(bytes.size() == 32 + 24);
  CHECK(bytes[0] == 'T');
  CHECK(bytes[3] == 'S');
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 2);
  CHECK(bytes[8] == 2);
  CHECK(bytes[16] == 3);
  for (int i = 24; i < 32; ++i) CHECK(bytes[i] == 0);
  CHECK(dtype_bytes(DType::e4m3) == 1);
  CHECK(dtype_bytes(DType::bf16) == 2);
  CHECK(dtype_bytes(DType::u64) == 8);
}

TEST_CASE("decode rejects malformed files") {
  BinaryArray a{DType::bf16, 1, 4, std::vector<std::uint8_t>(8, 0)};
  auto bytes = encode_array(a);
  CHECK(decode_array(bytes).payload == a.payload);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_array(bad_magic), InvalidInput);
  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_AS(decode_array(bad_version), InvalidInput);
  auto bad_dtype = bytes;
  bad_dtype[6] = 9;
  CHECK_THROWS_AS(decode_array(bad_dtype), InvalidInput);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_array(truncated), InvalidInput);
  CHECK_THROWS_AS(decode_array(std::span(bytes).first(10)), InvalidInput);
}

TEST_CASE("arrays round-trip through files") {
  std::mt19937_64 rng(4);
  const auto dir = scratch_dir("arrays");
  for (int i = 0; i < 50; ++i) {
    const DType t = static_cast<DType>(1 + rng() % 4);
    BinaryArray a{t, rng() % 9, rng() % 9, {}};
    a.payload.resize(a.rows * a.cols * dtype_bytes(t));
    for (auto& b : a.payload) b = static_cast<std::uint8_t>(rng());
    write_array(dir / "x.bin", a);
    const auto back = read_array(dir / "x.bin");
    REQUIRE(back.dtype == a.dtype);
    REQUIRE(back.rows == a.rows);
    REQUIRE(back.cols == a.cols);
    REQUIRE(back.payload == a.payload);
  }
  CHECK_THROWS_AS(read_array(dir / "missing.bin"), InvalidInput);
}

TEST_CASE("typed conversions preserve values") {
  std::vector<float> f{1.5f, -2.0f, 0.0f, 3.25f};
  CHECK(to_floats(to_array(2, 2, f)) == f);
  Fp8Tensor t{2, 2, {1, 2, 3, 0x7E}};
  const auto back = to_fp8(to_array(t));
  CHECK(back.codes == t.codes);
  CHECK(back.rows == 2);
  OutputMatrix m{1, 3, {1}, {0x3F80, 0xC000, 0x0001}};
  CHECK(to_bf16(to_array(m)) == m.bits);
  CHECK_THROWS_AS(to_floats(to_array(t)), InvalidInput);
}

TEST_CASE("fixture directories round-trip") {
  const auto dir = scratch_dir("fixture");
  ProblemConfig config;
  config.group_sizes = {30, 0, 100};
  config.n = 256;
  config.k = 192;
  config.block_n = 64;
  Fixture fx{config, make_random_operands(config, 3), {}};
  fx.golden = run_adaptive(fx.config, fx.operands).output;
  write_fixture(dir, fx);
  for (const char* name : {"fixture.txt", "a.bin", "sa.bin", "b.bin", "sb.bin", "c.bin"}) CHECK(fs::exists(dir / name));

  const auto back = read_fixture(dir);
  CHECK(back.config.group_sizes == config.group_sizes);
  CHECK(back.config.n == 256);
  CHECK(back.config.k == 192);
  CHECK(back.config.block_n == 64);
  CHECK(back.operands.a.codes == fx.operands.a.codes);
  CHECK(back.operands.sa.values == fx.operands.sa.values);
  CHECK(back.operands.b.codes == fx.operands.b.codes);
  CHECK(back.operands.sb.values == fx.operands.sb.values);
  CHECK(back.golden.bits == fx.golden.bits);
  CHECK(back.golden.group_sizes == config.group_sizes);
}
