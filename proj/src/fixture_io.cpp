#include "tma_sim/fixture_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "tma_sim/errors.hpp"
#include "tma_sim/run_config.hpp"

namespace tma_sim {
namespace {

constexpr std::uint8_t kMagic[4] = {'T', 'M', 'A', 'S'};

void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  return v;
}

void expect(const BinaryArray& a, DType t, const char* what) {
  if (a.dtype != t) throw InvalidInput(std::string(what) + ": unexpected dtype tag");
}

}  // namespace

std::size_t dtype_bytes(DType t) {
  switch (t) {
    case DType::e4m3:
      return 1;
    case DType::f32:
      return 4;
    case DType::bf16:
      return 2;
    case DType::u64:
      return 8;
  }
  throw InvalidInput("unknown dtype tag " + std::to_string(static_cast<int>(t)));
}

std::vector<std::uint8_t> encode_array(const BinaryArray& array) {
  if (array.payload.size() != array.rows * array.cols * dtype_bytes(array.dtype)) {
    throw InvalidInput("encode_array: payload size does not match rows x cols");
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le(out, kFixtureVersion, 2);
  put_le(out, static_cast<std::uint16_t>(array.dtype), 2);
  put_le(out, array.rows, 8);
  put_le(out, array.cols, 8);
  put_le(out, 0, 8);
  out.insert(out.end(), array.payload.begin(), array.payload.end());
  return out;
}

BinaryArray decode_array(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixtureHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw InvalidInput("not a TMAS array file");
  }
  if (get_le(bytes, 4, 2) != kFixtureVersion) throw InvalidInput("unsupported TMAS format version");
  BinaryArray a;
  a.dtype = static_cast<DType>(get_le(bytes, 6, 2));
  a.rows = get_le(bytes, 8, 8);
  a.cols = get_le(bytes, 16, 8);
  const std::size_t expected = a.rows * a.cols * dtype_bytes(a.dtype);
  if (bytes.size() - kFixtureHeaderBytes != expected) {
    throw InvalidInput("TMAS payload is " + std::to_string(bytes.size() - kFixtureHeaderBytes) + " bytes, expected " +
                       std::to_string(expected));
  }
  a.payload.assign(bytes.begin() + kFixtureHeaderBytes, bytes.end());
  return a;
}

void write_array(const std::filesystem::path& path, const BinaryArray& array) {
  const auto bytes = encode_array(array);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

BinaryArray read_array(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_array(bytes);
}

BinaryArray to_array(const Fp8Tensor& t) { return BinaryArray{DType::e4m3, t.rows, t.cols, t.codes}; }

BinaryArray to_array(std::uint64_t rows, std::uint64_t cols, std::span<const float> values) {
  BinaryArray a{DType::f32, rows, cols, {}};
  a.payload.reserve(values.size() * 4);
  for (const float v : values) put_le(a.payload, std::bit_cast<std::uint32_t>(v), 4);
  return a;
}

BinaryArray to_array(const OutputMatrix& m) {
  BinaryArray a{DType::bf16, m.rows, m.cols, {}};
  a.payload.reserve(m.bits.size() * 2);
  for (const auto v : m.bits) put_le(a.payload, v, 2);
  return a;
}

Fp8Tensor to_fp8(const BinaryArray& a) {
  expect(a, DType::e4m3, "fp8 tensor");
  return Fp8Tensor{a.rows, a.cols, a.payload};
}

std::vector<float> to_floats(const BinaryArray& a) {
  expect(a, DType::f32, "scale tensor");
  std::vector<float> out(a.rows * a.cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(a.payload, 4 * i, 4)));
  }
  return out;
}

std::vector<std::uint16_t> to_bf16(const BinaryArray& a) {
  expect(a, DType::bf16, "output matrix");
  std::vector<std::uint16_t> out(a.rows * a.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint16_t>(get_le(a.payload, 2 * i, 2));
  return out;
}

void write_fixture(const std::filesystem::path& dir, const Fixture& fx) {
  std::filesystem::create_directories(dir);
  KeyValues kv;
  kv["n"] = std::to_string(fx.config.n);
  kv["k"] = std::to_string(fx.config.k);
  kv["block_m"] = std::to_string(fx.config.block_m);
  kv["block_n"] = std::to_string(fx.config.block_n);
  kv["group_sizes"] = join_list(fx.config.group_sizes);
  write_key_values(dir / "fixture.txt", kv);

  const auto& ops = fx.operands;
  write_array(dir / "a.bin", to_array(ops.a));
  write_array(dir / "sa.bin", to_array(ops.sa.rows, ops.sa.cols, ops.sa.values));
  write_array(dir / "b.bin", to_array(ops.b));
  write_array(dir / "sb.bin", to_array(ops.sb.rows, ops.sb.cols, ops.sb.values));
  write_array(dir / "c.bin", to_array(fx.golden));
}

Fixture read_fixture(const std::filesystem::path& dir) {
  const KeyValues kv = read_key_values(dir / "fixture.txt");
  Fixture fx;
  fx.config.n = parse_u64(require_key(kv, "n"), "n");
  fx.config.k = parse_u64(require_key(kv, "k"), "k");
  fx.config.block_m = parse_u64(require_key(kv, "block_m"), "block_m");
  fx.config.block_n = parse_u64(require_key(kv, "block_n"), "block_n");
  fx.config.group_sizes = parse_u64_list(require_key(kv, "group_sizes"), "group_sizes");

  auto& ops = fx.operands;
  ops.group_sizes = fx.config.group_sizes;
  ops.a = to_fp8(read_array(dir / "a.bin"));
  const auto sa = read_array(dir / "sa.bin");
  ops.sa = ScaleTensorA{sa.rows, sa.cols, to_floats(sa)};
  ops.b = to_fp8(read_array(dir / "b.bin"));
  const auto sb = read_array(dir / "sb.bin");
  ops.sb = ScaleTensorB{sb.rows, sb.cols, to_floats(sb)};

  const auto c = read_array(dir / "c.bin");
  fx.golden = OutputMatrix{c.rows, c.cols, fx.config.group_sizes, to_bf16(c)};
  return fx;
}

}  // namespace tma_sim
