#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tma_sim/errors.hpp"
#include "tma_sim/fp8.hpp"

using namespace tma_sim;

TEST_CASE("decode matches the bit-field definition for all 256 codes") {
  for (int c = 0; c < 256; ++c) {
    const auto code = static_cast<std::uint8_t>(c);
    const double expected = oracle::e4m3_value(code);
    if (std::isnan(expected)) {
      CHECK(std::isnan(e4m3::decode(Fp8Value{code})));
      CHECK(e4m3::is_nan(Fp8Value{code}));
    } else {
      CHECK(static_cast<double>(e4m3::decode(Fp8Value{code})) == expected);
    }
  }
  CHECK(e4m3::decode(Fp8Value{0x7E}) == 448.0f);
  CHECK(e4m3::decode(Fp8Value{0x01}) == std::ldexp(1.0f, -9));
}

TEST_CASE("encode(decode(c)) == c for every non-NaN code") {
  int checked = 0;
  for (int c = 0; c < 256; ++c) {
    const Fp8Value v{static_cast<std::uint8_t>(c)};
    if (e4m3::is_nan(v)) continue;
    CHECK(e4m3::encode(e4m3::decode(v)).bits == v.bits);
    ++checked;
  }
  CHECK(checked == 254);
}

TEST_CASE("encode agrees with exhaustive nearest-code search") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> wide(-480.0, 480.0);
  std::uniform_real_distribution<double> exponent(-12.0, 9.0);
  for (int i = 0; i < 20000; ++i) {
    const double x = (i % 2 == 0) ? wide(rng) : std::copysign(std::exp2(exponent(rng)), wide(rng));
    REQUIRE(e4m3::encode(x).bits == oracle::e4m3_nearest(x));
  }
}

TEST_CASE("midpoints between neighbouring codes round to the even mantissa") {
  for (int c = 0; c < 0x7E; ++c) {
    const double lo = oracle::e4m3_value(static_cast<std::uint8_t>(c));
    const double hi = oracle::e4m3_value(static_cast<std::uint8_t>(c + 1));
    const double mid = (lo + hi) / 2.0;
    const std::uint8_t expected = (c & 1) == 0 ? c : c + 1;
    CHECK(e4m3::encode(mid).bits == expected);
    CHECK(e4m3::encode(-mid).bits == (expected | 0x80));
  }
}

TEST_CASE("saturation, signed zero and invalid input") {
  CHECK(e4m3::encode(448.0).bits == 0x7E);
  CHECK(e4m3::encode(464.0).bits == 0x7E);  // tie with the NaN slot resolves to 448
  CHECK(e4m3::encode(1e9).bits == 0x7E);
  CHECK(e4m3::encode(-1e9).bits == 0xFE);
  CHECK(e4m3::encode(INFINITY).bits == 0x7E);
  CHECK(e4m3::encode(0.0).bits == 0x00);
  CHECK(e4m3::encode(-0.0).bits == 0x80);
  CHECK(e4m3::encode(std::ldexp(1.0, -11)).bits == 0x00);  // below half the smallest subnormal
  CHECK_THROWS_AS(e4m3::encode(NAN), InvalidInput);
}

TEST_CASE("dequant examples") {
  CHECK(dequant(Fp8Value{0x00}, 3.0f) == 0.0f);
  CHECK(dequant(e4m3::encode(1.0), 2.0f) == 2.0f);
  CHECK(dequant(e4m3::encode(448.0), 0.5f) == 224.0f);
}

TEST_CASE("quantization error stays within half an ulp times the scale") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> value(-1000.0f, 1000.0f);
  std::uniform_real_distribution<float> scale_exp(-10.0f, 4.0f);
  for (int i = 0; i < 100000; ++i) {
    const float s = std::exp2(scale_exp(rng));
    const float x = value(rng) * s / 2.5f;
    const double q = static_cast<double>(x) / s;
    if (std::fabs(q) > 448.0) continue;
    const auto code = e4m3::encode(q);
    REQUIRE(code.bits == oracle::e4m3_nearest(q));
    const double err = std::fabs(static_cast<double>(x) - static_cast<double>(e4m3::decode(code)) * s);
    REQUIRE(err <= 0.5 * e4m3::ulp(q) * s * (1.0 + 0x1p-50));
  }
}

TEST_CASE("quantize_a: zero tile and max-value tile") {
  std::vector<float> zeros(128, 0.0f);
  auto [codes, scales] = quantize_a(zeros, 1, 128);
  CHECK(scales.rows == 1);
  CHECK(scales.cols == 1);
  CHECK(scales.values[0] == 1.0f);
  for (auto c : codes.codes) CHECK(c == 0);

  std::vector<float> tile(128, 1.0f);
  tile[5] = 448.0f;
  auto [codes2, scales2] = quantize_a(tile, 1, 128);
  CHECK(scales2.values[0] == 1.0f);
  CHECK(codes2.codes[5] == 0x7E);
  CHECK(codes2.codes[0] == e4m3::encode(1.0).bits);
}

TEST_CASE("quantize_a: random 4x256 round trip against the exhaustive oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<float> dist(0.0f, 3.0f);
  std::vector<float> m(4 * 256);
  for (auto& v : m) v = dist(rng);
  auto [codes, scales] = quantize_a(m, 4, 256);
  REQUIRE(scales.rows == 4);
  REQUIRE(scales.cols == 2);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t k = 0; k < 256; ++k) {
      const float s = scales.at(r, k / 128);
      const double q = static_cast<double>(m[r * 256 + k]) / s;
      CHECK(codes.at(r, k) == oracle::e4m3_nearest(q));
      const double err = std::fabs(m[r * 256 + k] - oracle::e4m3_value(codes.at(r, k)) * s);
      CHECK(err <= 0.5 * e4m3::ulp(std::min(std::fabs(q), 448.0)) * s * (1.0 + 0x1p-40));
    }
  }
}

TEST_CASE("quantize_b: shapes, zero block and random round trip") {
  std::vector<float> zeros(128 * 128, 0.0f);
  auto [zc, zs] = quantize_b(zeros, 128, 128);
  CHECK(zs.values == std::vector<float>{1.0f});
  for (auto c : zc.codes) CHECK(c == 0);

  std::vector<float> tall(192 * 128, 0.5f);
  auto [tc, ts] = quantize_b(tall, 192, 128);
  CHECK(ts.rows == 2);
  CHECK(ts.cols == 1);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> dist(-20.0f, 20.0f);
  std::vector<float> m(256 * 256);
  for (auto& v : m) v = dist(rng);
  auto [codes, scales] = quantize_b(m, 256, 256);
  REQUIRE(scales.rows == 2);
  REQUIRE(scales.cols == 2);
  for (std::size_t k = 0; k < 256; ++k) {
    for (std::size_t n = 0; n < 256; ++n) {
      const double q = static_cast<double>(m[k * 256 + n]) / scales.at(k / 128, n / 128);
      REQUIRE(codes.at(k, n) == oracle::e4m3_nearest(q));
    }
  }
}

TEST_CASE("scale shapes follow ceil(K/128) and ceil(N/128) across a grid") {
  for (std::size_t rows : {0u, 1u, 5u, 130u}) {
    for (std::size_t k : {16u, 128u, 129u, 192u, 384u}) {
      std::vector<float> a(rows * k, 1.0f);
      auto [ac, as] = quantize_a(a, rows, k);
      CHECK(as.rows == rows);
      CHECK(as.cols == (k + 127) / 128);
      CHECK(ac.codes.size() == rows * k);
      for (std::size_t n : {64u, 128u, 200u}) {
        std::vector<float> b(k * n, 1.0f);
        auto [bc, bs] = quantize_b(b, k, n);
        CHECK(bs.rows == (k + 127) / 128);
        CHECK(bs.cols == (n + 127) / 128);
      }
    }
  }
}

TEST_CASE("scales are positive and finite") {
  std::vector<float> m = {0.0f, -3.0f, 1e-30f, 5.0f};
  auto [codes, scales] = quantize_a(m, 4, 1);
  for (float s : scales.values) {
    CHECK(s > 0.0f);
    CHECK(std::isfinite(s));
  }
}

TEST_CASE("non-finite input is rejected") {
  std::vector<float> m(128, 1.0f);
  m[17] = INFINITY;
  CHECK_THROWS_AS(quantize_a(m, 1, 128), InvalidInput);
  m[17] = NAN;
  CHECK_THROWS_AS(quantize_b(m, 1, 128), InvalidInput);
  CHECK_THROWS_AS(quantize_a(std::vector<float>{}, 0, 0), InvalidInput);
}

TEST_CASE("bf16 cast rounds to nearest even") {
  CHECK(to_bf16_bits(1.0f) == 0x3F80);
  CHECK(to_bf16_bits(1.0f + 0x1p-8f) == 0x3F80);
  CHECK(to_bf16_bits(1.0f + 3 * 0x1p-8f) == 0x3F82);
  CHECK(to_bf16_bits(-2.0f) == 0xC000);
  CHECK(from_bf16_bits(0x3F80) == 1.0f);
}
