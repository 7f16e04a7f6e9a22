#include "acbench/hashing.hpp"

#include <random>

#include "gtest/gtest.h"

namespace acbench {
namespace {

Bitstring B(const char* s) { return Bitstring::from_string(s); }

// Degenerate keyed functions used as negative and positive controls.
struct ConstantFamily {
  std::size_t n, m, r;
  std::size_t input_len() const { return n; }
  std::size_t output_len() const { return m; }
  std::size_t key_len() const { return r; }
  std::uint64_t eval_word(std::uint64_t, std::uint64_t) const { return 0; }
};

struct IdentityFamily {
  std::size_t n;
  std::size_t input_len() const { return n; }
  std::size_t output_len() const { return n; }
  std::size_t key_len() const { return 1; }
  std::uint64_t eval_word(std::uint64_t, std::uint64_t x) const { return x; }
};

// Independent oracle: build the Toeplitz matrix and multiply.
Bitstring toeplitz_oracle(const Bitstring& seed, const Bitstring& x, std::size_t m) {
  return gf2_matvec(toeplitz_from_seed(seed, m, x.size()), x);
}

// Flat source on the given support, uniform weights summing to `mass`.
ClassicalJoint flat_source(std::size_t n, const std::vector<std::uint64_t>& support, double mass = 1.0) {
  ClassicalJoint p(std::size_t{1} << n, 1);
  for (auto x : support) p.set(x, 0, mass / static_cast<double>(support.size()));
  return p;
}

std::vector<std::vector<std::uint64_t>> subsets_of_size(std::size_t universe, std::size_t k) {
  std::vector<std::vector<std::uint64_t>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << universe); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    std::vector<std::uint64_t> s;
    for (std::uint64_t i = 0; i < universe; ++i)
      if ((mask >> i) & 1U) s.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

TEST(HashEvalTest, Examples) {
  const auto f = HashFamily::toeplitz_affine(4, 2);
  EXPECT_EQ(f.key_len(), 7U);
  for (const auto& x : all_bitstrings(4)) EXPECT_EQ(hash_eval(f, Bitstring(7), x), B("00"));

  const auto g = HashFamily::gf_multiply_affine(4, 2);
  // key (y = 1, b = 0): output is phi(x), the first two bits of x
  for (const auto& x : all_bitstrings(4)) EXPECT_EQ(hash_eval(g, B("0001") + B("00"), x), x.slice(0, 2));

  const auto seed = B("10110"), b = B("01"), x = B("1101");
  EXPECT_EQ(hash_eval(f, seed + b, x), toeplitz_oracle(seed, x, 2) ^ b);
  EXPECT_THROW(hash_eval(f, B("101"), x), RejectedInput);
  EXPECT_THROW(hash_eval(f, seed + b, B("11")), RejectedInput);
}

TEST(HashEvalTest, MatchesMatrixOracleEverywhere) {
  const auto f = HashFamily::toeplitz_affine(4, 2);
  for (const auto& key : all_bitstrings(7))
    for (const auto& x : all_bitstrings(4))
      EXPECT_EQ(hash_eval(f, key, x), toeplitz_oracle(key.slice(0, 5), x, 2) ^ key.slice(5, 2));
}

TEST(UniversalityTest, Examples) {
  EXPECT_LE(audit_universality(HashFamily::toeplitz_affine(4, 2)).epsilon, 0.25);
  EXPECT_DOUBLE_EQ(audit_universality(ExtractorSpec::toeplitz(4, 2)).epsilon, 0.25);
  EXPECT_DOUBLE_EQ(audit_universality(ConstantFamily{3, 2, 2}).epsilon, 1.0);
  EXPECT_DOUBLE_EQ(audit_universality(IdentityFamily{3}).epsilon, 0.0);
  EXPECT_DOUBLE_EQ(audit_universality(HashFamily::gf_multiply_affine(3, 3)).epsilon, 0.125);
  const auto r = audit_universality(ConstantFamily{3, 1, 1});
  ASSERT_EQ(r.witness.size(), 2U);
  EXPECT_EQ(r.to_json()["epsilon"], 1.0);
}

TEST(UniversalityTest, BudgetIsEnforced) {
  try {
    audit_universality(HashFamily::toeplitz_affine(8, 4), 1000);
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.required(), std::uint64_t{1} << 31);  // 2^(15 + 2 * 8)
    EXPECT_EQ(e.budget(), 1000U);
  }
}

TEST(MacTest, Examples) {
  const auto spec = MacSpec::gf(2, 2);
  for (const auto& key : all_bitstrings(4)) EXPECT_EQ(mac_eval(spec, key, B("00")), key.slice(2, 2));
  // x * (x + 1) = x^2 + x = 1 in GF(4) with modulus x^2 + x + 1
  for (const auto& b : all_bitstrings(2)) EXPECT_EQ(mac_eval(spec, B("11") + b, B("10")), B("01") ^ b);
  // toggling b toggles the tag
  const auto t0 = mac_eval(spec, B("1100"), B("11"));
  EXPECT_EQ(mac_eval(spec, B("1110"), B("11")), t0 ^ B("10"));
}

TEST(StrongUniversalityTest, GfMacIsExactlyStronglyUniversal) {
  for (std::size_t m = 2; m <= 4; ++m) {
    const auto r = audit_strong_universality(MacSpec::gf(m, m).family);
    EXPECT_EQ(r.joint_max, std::exp2(-2.0 * static_cast<double>(m)));
    EXPECT_EQ(r.eps_mac, std::exp2(-static_cast<double>(m)));
  }
  // longer messages, shorter tags
  EXPECT_EQ(audit_strong_universality(MacSpec::gf(5, 2).family).eps_mac, 0.25);
}

TEST(StrongUniversalityTest, ConstantTagFamilyFails) {
  const auto r = audit_strong_universality(ConstantFamily{2, 2, 2});
  EXPECT_EQ(r.eps_mac, 4.0);
  EXPECT_GT(r.eps_mac, 1.0);
}

TEST(StrongUniversalityTest, ForgeryAcceptanceBoundedByEpsMac) {
  // For a fixed observed (x, t) and any forged (x' != x, t'), the fraction of
  // consistent keys that also accept the forgery is at most eps_mac.
  for (std::size_t m = 2; m <= 4; ++m) {
    const auto f = MacSpec::gf(m, m).family;
    const std::uint64_t nk = std::uint64_t{1} << f.key_len(), nx = std::uint64_t{1} << m;
    for (std::uint64_t x = 0; x < nx; ++x) {
      const std::uint64_t t = 0;
      std::vector<std::uint64_t> consistent;
      for (std::uint64_t k = 0; k < nk; ++k)
        if (f.eval_word(k, x) == t) consistent.push_back(k);
      for (std::uint64_t x2 = 0; x2 < nx; ++x2) {
        if (x2 == x) continue;
        for (std::uint64_t t2 = 0; t2 < nx; ++t2) {
          std::size_t ok = 0;
          for (auto k : consistent) ok += f.eval_word(k, x2) == t2 ? 1 : 0;
          EXPECT_LE(static_cast<double>(ok) / static_cast<double>(consistent.size()), std::exp2(-double(m)));
        }
      }
    }
  }
}

TEST(LinearityTest, FamiliesFlaggedLinearAreLinear) {
  EXPECT_TRUE(audit_linearity(HashFamily::toeplitz_affine(4, 2)));
  EXPECT_TRUE(audit_linearity(HashFamily::gf_multiply_affine(4, 2)));
  EXPECT_TRUE(audit_linearity(ExtractorSpec::gf_multiply(4, 4)));
  struct Squarer {
    std::size_t input_len() const { return 2; }
    std::size_t output_len() const { return 2; }
    std::size_t key_len() const { return 1; }
    std::uint64_t eval_word(std::uint64_t, std::uint64_t x) const { return (x >> 1) & x & 1U; }
  };
  EXPECT_FALSE(audit_linearity(Squarer{}));
}

TEST(ExtractorTest, EvalExamples) {
  const auto t = ExtractorSpec::toeplitz(4, 1);
  EXPECT_EQ(t.seed_len(), 4U);
  for (const auto& x : all_bitstrings(4)) EXPECT_EQ(ext_eval(t, x, Bitstring(4)), B("0"));
  // seed with a single one on the main diagonal gives the identity matrix
  const auto id = ExtractorSpec::toeplitz(3, 3);
  for (const auto& x : all_bitstrings(3)) EXPECT_EQ(ext_eval(id, x, B("00100")), x);
  const auto seed = B("1011"), x = B("0111");
  EXPECT_EQ(ext_eval(t, x, seed), toeplitz_oracle(seed, x, 1));
  EXPECT_THROW(ext_eval(t, x, B("101")), RejectedInput);
}

TEST(ExtractorTest, DistanceExamples) {
  const auto t = ExtractorSpec::toeplitz(4, 1);
  // Every nonzero seed maps uniform X to a uniform bit; the all-zero seed
  // (probability 1/16) outputs a constant, so the distance is 1/16 * 1/2.
  EXPECT_NEAR(measure_extractor_distance(t, ClassicalJoint::uniform(16)), 1.0 / 32.0, 1e-15);
  EXPECT_NEAR(measure_extractor_distance(ExtractorSpec::gf_multiply(4, 1), ClassicalJoint::uniform(16)), 1.0 / 32.0,
              1e-15);
  double worst = 0.0;
  for (const auto& s : subsets_of_size(16, 4)) worst = std::max(worst, measure_extractor_distance(t, flat_source(4, s)));
  EXPECT_LE(worst, 0.5 * std::sqrt(std::exp2(1.0 - 2.0)));
  EXPECT_LE(measure_extractor_distance(t, flat_source(4, {5})), 0.5 + 1e-15);
  EXPECT_GT(measure_extractor_distance(t, flat_source(4, {5})), 0.0);
}

TEST(ExtractorTest, SideInformationIsAccountedFor) {
  // E reveals the parity of the first two bits: still 2 bits of entropy left.
  const auto t = ExtractorSpec::toeplitz(4, 1);
  ClassicalJoint p(16, 2);
  for (std::uint64_t x = 0; x < 16; ++x) p.set(x, ((x >> 3) ^ (x >> 2)) & 1U, 1.0 / 16.0);
  EXPECT_LE(measure_extractor_distance(t, p), t.error_at(hmin_classical(p)));
}

TEST(ExtractorTest, LiftExamples) {
  const auto r = lift_to_subnormalized({ExtractorSpec::toeplitz(4, 1), 2.0, 0.25});
  EXPECT_EQ(r.k, 3.0);
  EXPECT_EQ(r.eps, 0.5);

  // mass 1/2 spread over four inputs: Hmin = 3
  const auto t = ExtractorSpec::toeplitz(4, 1);
  const auto lifted = lift_to_subnormalized(RatedExtractor::at(t, 2.0));
  for (const auto& s : subsets_of_size(16, 4)) {
    const auto src = flat_source(4, s, 0.5);
    ASSERT_NEAR(hmin_classical(src), 3.0, 1e-12);
    EXPECT_LE(measure_extractor_distance(t, src), lifted.eps);
  }
}

TEST(ExtractorTest, ComposeExamples) {
  const auto t = ExtractorSpec::toeplitz(4, 1);
  const auto e1 = RatedExtractor::at(t, 3.0);
  const auto same = compose_extractors(e1, {ExtractorSpec::empty(4), 2.0, 0.0});
  EXPECT_EQ(same.spec.kind(), ExtractorSpec::Kind::kToeplitz);
  EXPECT_EQ(same.eps, e1.eps);

  const auto e2 = RatedExtractor::at(t, 2.0);
  const auto c = compose_extractors(e1, e2);
  EXPECT_EQ(c.spec.output_len(), 2U);
  EXPECT_EQ(c.spec.seed_len(), 8U);
  for (const auto& s : subsets_of_size(16, 8)) {
    EXPECT_LE(measure_extractor_distance(c.spec, flat_source(4, s)), c.eps);
  }
  EXPECT_THROW(compose_extractors(e1, RatedExtractor::at(t, 3.0)), RejectedInput);

  // composite output is the concatenation of the parts
  const auto x = B("1011"), s1 = B("0110"), s2 = B("1100");
  EXPECT_EQ(ext_eval(c.spec, x, s1 + s2), ext_eval(t, x, s1) + ext_eval(t, x, s2));
}

TEST(KeyPrivateHashTest, UniformityAndToggle) {
  const auto h = key_private_hash(ExtractorSpec::toeplitz(3, 2));
  EXPECT_TRUE(audit_uniformity(h));
  EXPECT_TRUE(audit_uniformity(key_private_hash(ExtractorSpec::gf_multiply(3, 2))));
  EXPECT_FALSE(audit_uniformity(ConstantFamily{2, 1, 2}));
  const auto seed = B("1010"), x = B("110");
  EXPECT_EQ(hash_eval(h, seed + B("00"), x) ^ B("11"), hash_eval(h, seed + B("11"), x));
}

TEST(KeyPrivateHashTest, ChainedHashIsUniform) {
  const auto ss = HashFamily::toeplitz_affine(2, 1);
  const auto mac = HashFamily::gf_multiply_affine(4, 1);
  for (const auto& y : all_bitstrings(1)) {
    const ChainedHash chi(ss, mac, y);
    EXPECT_EQ(chi.key_len(), 3U + 5U);
    EXPECT_TRUE(audit_uniformity(chi));
    EXPECT_EQ(chi.nu(), 2.0);
  }
}

// Random classical instances satisfying the Markov condition L - XT - E.
template <KeyedFunction F>
double worst_realized_nu(const F& h, std::mt19937_64& rng, int instances) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t nx = std::size_t{1} << h.input_len(), nt = std::size_t{1} << h.output_len();
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    std::vector<double> px(nx);
    double tot = 0.0;
    const double sharp = 1.0 + 4.0 * u(rng);
    for (auto& v : px) tot += (v = std::pow(u(rng), sharp));
    const double mass = 0.3 + 0.7 * u(rng);
    for (auto& v : px) v *= mass / tot;
    const std::size_t ne = 1 + rng() % 4;
    std::vector<std::vector<double>> ch(nx * nt, std::vector<double>(ne));
    for (auto& row : ch) {
      double s = 0.0;
      for (auto& v : row) s += (v = std::pow(u(rng), 4.0));
      for (auto& v : row) v /= s;
    }
    worst = std::max(worst, measure_key_privacy(h, px, ch).realized_nu());
  }
  return worst;
}

TEST(KeyPrivacyTest, RealizedNuWithinConfiguredNu) {
  std::mt19937_64 rng(71);
  const auto h = key_private_hash(ExtractorSpec::toeplitz(3, 1));
  EXPECT_LE(worst_realized_nu(h, rng, 300), h.nu());
  const auto g = key_private_hash(ExtractorSpec::gf_multiply(3, 2));
  EXPECT_LE(worst_realized_nu(g, rng, 300), g.nu());
}

TEST(KeyPrivacyTest, ChainedHashWithinSummedNu) {
  std::mt19937_64 rng(73);
  const ChainedHash chi(HashFamily::toeplitz_affine(2, 1), HashFamily::gf_multiply_affine(4, 1), B("1"));
  EXPECT_LE(worst_realized_nu(chi, rng, 200), chi.nu());
}

TEST(KeyPrivacyTest, LeakyFunctionIsCaught) {
  // T reveals the key directly: far from private.
  struct KeyLeak {
    std::size_t input_len() const { return 2; }
    std::size_t output_len() const { return 2; }
    std::size_t key_len() const { return 2; }
    std::uint64_t eval_word(std::uint64_t k, std::uint64_t) const { return k; }
  };
  std::vector<double> px(4, 0.25);
  std::vector<std::vector<double>> ch(16, std::vector<double>{1.0});
  // Hmin(X|T) = 2 so the allowance is 1, but the key is fully exposed:
  // norm = 4 |1/4 - 1/16| + 12/16 = 1.5.
  const auto r = measure_key_privacy(KeyLeak{}, px, ch);
  EXPECT_NEAR(r.norm, 1.5, 1e-12);
  EXPECT_NEAR(r.bound_factor, 1.0, 1e-12);
  EXPECT_GT(r.realized_nu(), 1.0);
}

}  // namespace
}  // namespace acbench
