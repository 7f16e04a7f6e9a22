#include "acbench/bitlinalg.hpp"

#include <random>

#include "gtest/gtest.h"

namespace acbench {
namespace {

Bitstring B(const char* s) { return Bitstring::from_string(s); }

Bitstring random_bits(std::size_t n, std::mt19937_64& rng) {
  Bitstring b(n);
  for (std::size_t i = 0; i < n; ++i) b.set(i, rng() & 1U);
  return b;
}

TEST(BitstringTest, RoundTrips) {
  EXPECT_EQ(B("0110").to_uint(), 6U);
  EXPECT_EQ(Bitstring::from_uint(6, 4), B("0110"));
  EXPECT_EQ(B("0110").to_string(), "0110");
  EXPECT_EQ(B("01") + B("10"), B("0110"));
  EXPECT_EQ(B("011010").slice(2, 3), B("101"));
  EXPECT_EQ(B("1100") ^ B("1010"), B("0110"));
  EXPECT_THROW(B("012"), RejectedInput);
  EXPECT_THROW(B("01") ^ B("011"), RejectedInput);
  EXPECT_THROW(Bitstring::from_uint(4, 2), RejectedInput);
}

TEST(Gf2MatvecTest, Examples) {
  EXPECT_EQ(gf2_matvec(Gf2Matrix::identity(3), B("101")), B("101"));
  EXPECT_EQ(gf2_matvec(Gf2Matrix(2, 3), B("111")), B("00"));
  EXPECT_EQ(gf2_matvec(Gf2Matrix::from_rows({"11", "01"}), B("10")), B("10"));
  EXPECT_EQ(gf2_matvec(Gf2Matrix::from_rows({"11", "01"}), B("11")), B("01"));
  EXPECT_THROW(gf2_matvec(Gf2Matrix::identity(3), B("10")), RejectedInput);
}

TEST(Gf2MatvecTest, LinearityFuzz) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t r = 1 + rng() % 8, c = 1 + rng() % 8;
    Gf2Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m.set(i, j, rng() & 1U);
    const auto a = random_bits(c, rng), b = random_bits(c, rng);
    EXPECT_EQ(gf2_matvec(m, a ^ b), gf2_matvec(m, a) ^ gf2_matvec(m, b));
  }
}

TEST(ToeplitzTest, Examples) {
  EXPECT_EQ(toeplitz_from_seed(B("111"), 2, 2), Gf2Matrix::from_rows({"11", "11"}));
  EXPECT_EQ(toeplitz_from_seed(B("0000"), 2, 3), Gf2Matrix(2, 3));
  // entry(i, j) = seed[i - j + cols - 1]
  const auto t = toeplitz_from_seed(B("10110"), 3, 3);
  EXPECT_EQ(t, Gf2Matrix::from_rows({"101", "110", "011"}));
  EXPECT_EQ(t.row(0), B("101"));
  EXPECT_EQ(t.column(0), B("110"));
  EXPECT_THROW(toeplitz_from_seed(B("1011"), 3, 3), RejectedInput);
}

TEST(ToeplitzTest, DiagonalsConstantAndWordPathAgrees) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = 1 + rng() % 7, c = 1 + rng() % 7;
    const auto seed = random_bits(r + c - 1, rng);
    const auto t = toeplitz_from_seed(seed, r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (i + 1 < r && j + 1 < c) {
          EXPECT_EQ(t(i, j), t(i + 1, j + 1));
        }
    const auto x = random_bits(c, rng);
    EXPECT_EQ(toeplitz_apply_word(seed.to_uint(), x.to_uint(), r, c), gf2_matvec(t, x).to_uint());
  }
}

TEST(GfTest, Gf4Table) {
  const auto f = gf_field(2);
  const GfElement x(0b10, f), xp1(0b11, f);
  EXPECT_EQ(x * x, xp1);
  EXPECT_EQ(x * xp1, GfElement::one(f));
  EXPECT_EQ(xp1 * xp1, x);
  for (std::uint32_t b = 0; b < 4; ++b) {
    EXPECT_EQ(GfElement::one(f) * GfElement(b, f), GfElement(b, f));
    EXPECT_EQ(GfElement::zero(f) * GfElement(b, f), GfElement::zero(f));
  }
  EXPECT_THROW(gf_mul(GfElement(1, gf_field(2)), GfElement(1, gf_field(3))), RejectedInput);
}

TEST(GfTest, FieldAxiomsExhaustiveUpToDegreeFour) {
  for (unsigned m = 1; m <= 4; ++m) {
    const auto f = gf_field(m);
    const std::uint32_t q = 1U << m;
    for (std::uint32_t a = 0; a < q; ++a) {
      const GfElement ea(a, f);
      if (a != 0) {
        EXPECT_EQ(ea * ea.inverse(), GfElement::one(f));
      }
      for (std::uint32_t b = 0; b < q; ++b) {
        const GfElement eb(b, f);
        EXPECT_EQ(ea * eb, eb * ea);
        for (std::uint32_t c = 0; c < q; ++c) {
          const GfElement ec(c, f);
          EXPECT_EQ((ea * eb) * ec, ea * (eb * ec));
          EXPECT_EQ(ea * (eb + ec), ea * eb + ea * ec);
        }
      }
    }
  }
}

// A polynomial of degree m is irreducible iff no polynomial of degree
// 1..m/2 divides it; checked by long division.
bool irreducible(std::uint32_t poly, unsigned m) {
  auto mod = [](std::uint32_t a, std::uint32_t b) {
    const int db = 31 - std::countl_zero(b);
    while (a && 31 - std::countl_zero(a) >= db) a ^= b << ((31 - std::countl_zero(a)) - db);
    return a;
  };
  for (unsigned d = 1; d <= m / 2; ++d)
    for (std::uint32_t g = 1U << d; g < (2U << d); ++g)
      if (mod(poly, g) == 0) return false;
  return true;
}

TEST(GfTest, ModuliTableIsIrreducible) {
  for (unsigned m = 1; m <= 16; ++m) {
    const auto f = gf_field(m);
    EXPECT_EQ(31 - std::countl_zero(f.modulus), static_cast<int>(m));
    EXPECT_TRUE(irreducible(f.modulus, m)) << "degree " << m;
  }
  EXPECT_THROW(gf_field(17), RejectedInput);
}

TEST(GfTest, NonzeroElementsInvertibleAtDegreeEight) {
  const auto f = gf_field(8);
  for (std::uint32_t a = 1; a < 256; ++a) EXPECT_EQ(GfElement(a, f) * GfElement(a, f).inverse(), GfElement::one(f));
}

TEST(HammingTest, Examples) {
  EXPECT_EQ(hamming(B("0110"), B("0110")), 0U);
  EXPECT_EQ(hamming(B("000"), B("111")), 3U);
  EXPECT_EQ(hamming(B("0110"), B("0011")), 2U);
  EXPECT_THROW(hamming(B("01"), B("011")), RejectedInput);
}

TEST(HammingTest, MetricFuzz) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const auto a = random_bits(n, rng), b = random_bits(n, rng), c = random_bits(n, rng);
    EXPECT_EQ(hamming(a, b), hamming(b, a));
    EXPECT_EQ(hamming(a, b) == 0, a == b);
    EXPECT_LE(hamming(a, c), hamming(a, b) + hamming(b, c));
  }
}

TEST(BinaryEntropyTest, Values) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_NEAR(binary_entropy(0.25), 0.8112781244591328, 1e-15);
  EXPECT_THROW(binary_entropy(-0.1), RejectedInput);
  EXPECT_THROW(binary_entropy(1.5), RejectedInput);
}

TEST(BinaryEntropyTest, SymmetricAndConcave) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double p = u(rng), q = u(rng), l = u(rng);
    EXPECT_NEAR(binary_entropy(p), binary_entropy(1.0 - p), 1e-12);
    EXPECT_GE(binary_entropy(l * p + (1 - l) * q) + 1e-12, l * binary_entropy(p) + (1 - l) * binary_entropy(q));
  }
}

TEST(LinearCodeTest, MinDistance) {
  EXPECT_EQ(code_min_distance(LinearCode::from_strings({"000", "111"})), 3U);
  EXPECT_EQ(code_min_distance(LinearCode::from_strings({"00", "01", "10", "11"})), 1U);
  EXPECT_EQ(code_min_distance(LinearCode::from_strings({"0000", "0111", "1011", "1100"})), 2U);
  EXPECT_THROW(code_min_distance(LinearCode::from_strings({"000"})), RejectedInput);
  EXPECT_THROW(LinearCode::from_strings({"00", "000"}), RejectedInput);
  EXPECT_EQ(LinearCode::from_strings({"101"}).distance(), 3U);
}

}  // namespace
}  // namespace acbench
