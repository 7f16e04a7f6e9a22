#include "acbench/distill.hpp"

#include <cstdlib>
#include <map>
#include <random>
#include <tuple>

#include "gtest/gtest.h"

namespace acbench {
namespace {

// corr by brute force over all of {0,1}^n with explicit Toeplitz matrices.
std::optional<Bitstring> corr_oracle(const Bitstring& key, std::size_t r, const Bitstring& y, const Bitstring& s,
                                     std::size_t radius) {
  const std::size_t n = y.size();
  const auto t = toeplitz_from_seed(key, r, n);
  std::optional<Bitstring> hit;
  int count = 0;
  for (const auto& z : all_bitstrings(n))
    if (hamming(z, y) <= radius && gf2_matvec(t, z) == s) {
      hit = z;
      ++count;
    }
  if (count != 1) return std::nullopt;
  return hit;
}

TEST(SketchTest, SingletonBallRecoversExactly) {
  const auto sk = ExtractorSpec::toeplitz(4, 2);
  for (const auto& x : all_bitstrings(4))
    for (const auto& key : all_bitstrings(sk.key_len())) {
      const auto got = corr(sk, x, synd(sk, x, key), key, 0);
      ASSERT_TRUE(got.has_value());
      EXPECT_EQ(*got, x);
    }
}

TEST(SketchTest, FailureAuditMatchesBruteForce) {
  // n = 6, r = 4, radius 1
  const std::size_t n = 6, r = 4, radius = 1;
  const auto sk = ExtractorSpec::toeplitz(n, r);
  const auto audit = audit_sketch_failure(sk, radius);
  const auto keys = all_bitstrings(sk.key_len());
  double worst = 0.0;
  for (const auto& x : all_bitstrings(n)) {
    for (const auto& y : all_bitstrings(n)) {
      if (hamming(x, y) > radius) continue;
      int fails = 0;
      for (const auto& key : keys) {
        const auto s = gf2_matvec(toeplitz_from_seed(key, r, n), x);
        const auto got = corr_oracle(key, r, y, s, radius);
        const auto fast = corr(sk, y, s, key, radius);
        EXPECT_EQ(got, fast);
        if (!got || *got != x) ++fails;
      }
      worst = std::max(worst, static_cast<double>(fails) / static_cast<double>(keys.size()));
    }
    if (x.to_uint() >= 3) break;  // the word path is checked on the rest below
  }
  EXPECT_DOUBLE_EQ(audit.epsilon, worst);
  EXPECT_GT(audit.epsilon, 0.0);
  EXPECT_LT(audit.epsilon, 1.0);
}

TEST(SketchTest, FailureDependsOnlyOnErrorPattern) {
  // the sketch is linear, so failure over keys is the same for every x
  const auto sk = ExtractorSpec::toeplitz(5, 3);
  const auto ball = hamming_ball_masks(5, 1);
  for (std::uint64_t e : ball) {
    std::vector<int> fails;
    for (std::uint64_t x = 0; x < 32; ++x) {
      int f = 0;
      for (std::uint64_t k = 0; k < 128; ++k) {
        const auto z = corr_word(sk, k, x ^ e, sk.eval_word(k, x), ball);
        if (!z || *z != x) ++f;
      }
      fails.push_back(f);
    }
    EXPECT_EQ(std::count(fails.begin(), fails.end(), fails.front()), 32);
  }
}

TEST(SketchTest, EmptySketchCorrectsOnlyAtRadiusZero) {
  const auto sk = ExtractorSpec::empty(3);
  EXPECT_EQ(corr(sk, Bitstring::from_string("101"), Bitstring(0), Bitstring(0), 0),
            Bitstring::from_string("101"));
  EXPECT_FALSE(corr(sk, Bitstring::from_string("101"), Bitstring(0), Bitstring(0), 1).has_value());
}

TEST(HammingBallTest, SizesAreBinomialSums) {
  EXPECT_EQ(hamming_ball_masks(6, 0).size(), 1U);
  EXPECT_EQ(hamming_ball_masks(6, 1).size(), 7U);
  EXPECT_EQ(hamming_ball_masks(6, 2).size(), 22U);
  EXPECT_EQ(correctable_radius(4, 0.25), 1U);
  EXPECT_EQ(correctable_radius(6, 1.0 / 6.0), 1U);
}

TEST(SourceTest, NoisyCorrelatedRatings) {
  const auto clean = make_noisy_correlated_source(4, 0.0, 4);
  for (const auto& o : clean.outcomes()) EXPECT_EQ(*o.x, *o.y);
  EXPECT_NEAR(clean.audited_hmin(), 4.0, 1e-12);
  for (std::size_t k = 0; k <= 5; ++k) {
    const auto src = make_noisy_correlated_source(5, 0.1, k);
    EXPECT_NEAR(src.audited_hmin(), static_cast<double>(k), 1e-12);
  }
  EXPECT_THROW(make_noisy_correlated_source(4, 0.1, 3, 2), RejectedInput);
  EXPECT_THROW(make_noisy_correlated_source(4, 0.1, 5), RejectedInput);
}

TEST(SourceTest, MassOutsideBallIsBinomialTail) {
  for (double q : {0.01, 0.05, 0.2}) {
    const auto src = make_noisy_correlated_source(6, q, 3);
    for (std::size_t rad = 0; rad <= 3; ++rad)
      EXPECT_NEAR(src.mass_outside_ball(rad), binomial_tail_above(6, q, rad), 1e-12);
  }
  EXPECT_EQ(make_bounded_noise_source(6, 1, 4).mass_outside_ball(1), 0.0);
}

TEST(SourceTest, ClassicalJointRatingIsAudited) {
  ClassicalJoint p(4, 2);
  for (std::size_t x = 0; x < 4; ++x) p.set(x, x & 1U, 0.2);  // mass 0.8, rest aborts
  const auto src = make_classical_joint_source(p, 1.0);
  EXPECT_NEAR(src.audited_hmin(), -std::log2(0.4), 1e-12);
  double bot = 0.0;
  for (const auto& o : src.outcomes())
    if (!o.x) bot += o.p;
  EXPECT_NEAR(bot, 0.2, 1e-12);
  EXPECT_THROW(make_classical_joint_source(p, 1.5), RejectedInput);
}

TEST(CorrStageTest, EmptySketchKeepsRating) {
  const auto src = make_noisy_correlated_source(4, 0.0, 3);
  const auto ec = EcParams::make(4, 0, 2, 0.0);
  EXPECT_NEAR(audit_hmin_after_corr(src, ec), src.audited_hmin(), 1e-12);
}

// Random classical sources with X = Y: the syndrome costs at most r bits, and
// verification at most t more.
TEST(CorrStageTest, LeakageAccountingFuzz) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 2, ne = 1 + rng() % 3;
    ClassicalJoint p(std::size_t{1} << n, ne);
    double tot = 0.0;
    for (std::size_t x = 0; x < p.nx(); ++x)
      for (std::size_t e = 0; e < ne; ++e) {
        const double v = std::pow(u(rng), 2.0);
        p.set(x, e, v);
        tot += v;
      }
    for (std::size_t x = 0; x < p.nx(); ++x)
      for (std::size_t e = 0; e < ne; ++e) p.set(x, e, p(x, e) / tot);
    const double k = hmin_classical(p);
    const auto src = make_classical_joint_source(p, k);
    const std::size_t r = 1 + rng() % 2, t = 1 + rng() % 2;
    const auto ec = EcParams::make(n, r, t, 0.0, rng());
    EXPECT_GE(audit_hmin_after_corr(src, ec), k - static_cast<double>(r) - 1e-9);
    EXPECT_GE(audit_hmin_after_verif(src, ec), k - static_cast<double>(r + t) - 1e-9);
  }
}

TEST(VerifStageTest, EqualStringsAlwaysAccept) {
  const auto ec = EcParams::make(5, 1, 3, 0.0);
  for (std::uint64_t x = 0; x < 32; ++x) EXPECT_EQ(verif_acceptance_fraction(ec, x, x), 1.0);
  EXPECT_FALSE(run_verif(3, std::nullopt, ec, 0).accept);
}

TEST(VerifStageTest, SoundnessExhaustiveAtTagLengthThree) {
  const std::size_t n = 4, t = 3;
  const auto ec = EcParams::make(n, 1, t, 0.0);
  EXPECT_DOUBLE_EQ(ec.eps_verif, 0.125);
  const auto f = gf_field(n);
  for (std::uint64_t x = 0; x < 16; ++x)
    for (std::uint64_t xh = 0; xh < 16; ++xh) {
      if (x == xh) continue;
      // oracle: affine key (a, b) accepts iff the top t bits of a * (x ^ xh) vanish
      int acc = 0;
      for (std::uint32_t a = 0; a < 16; ++a) {
        const auto prod = (GfElement(a, f) * GfElement(static_cast<std::uint32_t>(x ^ xh), f)).value();
        if ((prod >> (n - t)) == 0) acc += 1 << t;  // every offset b
      }
      const double oracle = acc / 128.0;
      EXPECT_DOUBLE_EQ(verif_acceptance_fraction(ec, x, xh), oracle);
      EXPECT_LE(verif_acceptance_fraction(ec, x, xh), 0.125);
    }
}

TEST(PaStageTest, ZeroLengthKeyIsIdeal) {
  const auto pa = PaParams::make(4, 0, 2.0);
  EXPECT_EQ(pa.eps_pa(), 0.0);
  ClassicalJoint p(16, 1);
  p.set(3, 0, 1.0);
  EXPECT_EQ(measure_extractor_distance(pa.ext, p), 0.0);
}

TEST(PaStageTest, FlatSourcesAtRatingTwo) {
  const auto pa = PaParams::make(4, 1, 2.0);
  for (std::uint64_t a = 0; a < 16; ++a)
    for (std::uint64_t b = a + 1; b < 16; ++b)
      for (std::uint64_t c = b + 1; c < 16; ++c)
        for (std::uint64_t d = c + 1; d < 16; ++d) {
          ClassicalJoint p(16, 1);
          for (auto x : {a, b, c, d}) p.set(x, 0, 0.25);
          EXPECT_LE(measure_extractor_distance(pa.ext, p), pa.eps_pa() + 1e-12);
        }
}

// Source whose raw min-entropy is low because of one heavy string, but which
// is delta-close to a flat source once the heavy excess is trimmed.
TEST(PaStageTest, SmoothedSourceWithinEpsPlusTwoDelta) {
  for (double spike : {0.05, 0.1, 0.2}) {
    ClassicalJoint p(16, 1);
    const double rest = (1.0 - spike) / 16.0;
    for (std::size_t x = 0; x < 16; ++x) p.set(x, 0, rest + (x == 5 ? spike : 0.0));
    const double delta = std::sqrt(2.0 * spike);
    const auto br = hmin_smooth_classical(p, delta);
    ASSERT_GT(br.lo, hmin_classical(p));
    const auto pa = PaParams::make(4, 1, br.lo, delta);
    EXPECT_LE(measure_extractor_distance(pa.ext, p), pa.eps_pa() + 2.0 * delta);
  }
}

// Independent tuple-keyed implementation of the final-key distance.
double final_distance_oracle(const SourceModel& src, const EcParams& ec, const PaParams& pa) {
  using View = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;
  std::map<std::tuple<View, std::uint64_t, std::uint64_t>, double> real;
  std::map<View, double> marginal;
  const std::uint64_t nf = 1ULL << ec.verif.key_len(), nz = 1ULL << pa.ext.seed_len(), nk = 1ULL << pa.m();
  const double w = 1.0 / static_cast<double>(nf * nz);
  for (const auto& o : src.outcomes()) {
    if (!o.x) continue;
    const auto xb = Bitstring::from_uint(*o.x, src.n()), yb = Bitstring::from_uint(*o.y, src.n());
    const auto key = Bitstring::from_uint(ec.sketch_key, ec.sketch.key_len());
    const auto s = ec.r ? synd(ec.sketch, xb, key) : Bitstring(0);
    const auto xh = corr(ec.sketch, yb, s, key, ec.radius());
    for (std::uint64_t f = 0; f < nf; ++f) {
      const auto fb = Bitstring::from_uint(f, ec.verif.key_len());
      const auto tag = hash_eval(ec.verif, fb, xb);
      if (!xh || hash_eval(ec.verif, fb, *xh) != tag) continue;
      for (std::uint64_t z = 0; z < nz; ++z) {
        const auto zb = Bitstring::from_uint(z, pa.ext.seed_len());
        const View v{o.e, s.size() ? s.to_uint() : 0, f, tag.to_uint(), z};
        real[{v, ext_eval(pa.ext, xb, zb).to_uint(), ext_eval(pa.ext, *xh, zb).to_uint()}] += o.p * w;
        marginal[v] += o.p * w;
      }
    }
  }
  double d = 0.0;
  for (const auto& [v, pv] : marginal)
    for (std::uint64_t a = 0; a < nk; ++a)
      for (std::uint64_t b = 0; b < nk; ++b) {
        const auto it = real.find({v, a, b});
        const double rv = it == real.end() ? 0.0 : it->second;
        d += std::abs(rv - (a == b ? pv / static_cast<double>(nk) : 0.0));
      }
  return 0.5 * d;
}

TEST(PipelineTest, ExactDistanceMatchesOracle) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 4;
    std::vector<std::uint64_t> tamper(16);
    for (auto& t : tamper) t = rng() & 15U;
    const auto src = make_adversarial_source(n, rng() & 15U, tamper);
    const auto ec = EcParams::make(n, 1, 1, 0.25, rng());
    const auto pa = PaParams::make(n, 1, src.k() - 2.0);
    EXPECT_NEAR(exact_final_distance(src, ec, pa), final_distance_oracle(src, ec, pa), 1e-12);
  }
}

TEST(PipelineTest, NoiselessTrivialLeakGivesEqualKeys) {
  const auto src = make_noisy_correlated_source(6, 0.0, 6);
  const auto ec = EcParams::make(6, 2, 2, 1.0 / 6.0, 0x2A);
  const auto pa = PaParams::make(6, 1, 2.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto res = distill_pipeline(src, ec, pa, seed);
    ASSERT_TRUE(res.transcript.accept);
    EXPECT_EQ(res.key_a, res.key_b);
  }
  const double d = exact_final_distance(src, ec, pa);
  EXPECT_LE(d, pipeline_bound(ec, pa));
  EXPECT_LE(d, pa.eps_pa());
}

TEST(PipelineTest, AdversarialBoundSmallSweep) {
  const std::size_t n = 6;
  const auto ec = EcParams::make(n, 2, 2, 1.0 / 6.0, 0x15);
  for (std::uint64_t mask : {0x00ULL, 0x01ULL, 0x21ULL, 0x0FULL, 0x3EULL}) {
    for (std::uint64_t flip : {0x00ULL, 0x01ULL, 0x03ULL}) {
      std::vector<std::uint64_t> tamper(64);
      for (std::uint64_t x = 0; x < 64; ++x) tamper[x] = x ^ flip;
      const auto src = make_adversarial_source(n, mask, tamper);
      const auto pa = PaParams::make(n, 1, src.k() - 4.0);
      EXPECT_LE(exact_final_distance(src, ec, pa), ec.eps_verif + pa.eps_pa() + 1e-12)
          << "mask " << mask << " flip " << flip;
    }
  }
}

TEST(PipelineTest, InconsistentBudgetIsRejected) {
  const auto src = make_noisy_correlated_source(6, 0.0, 5);
  const auto ec = EcParams::make(6, 2, 2, 0.0);
  EXPECT_THROW(distill_pipeline(src, ec, PaParams::make(6, 1, 2.0), 1), ConfigError);
  EXPECT_NO_THROW(distill_pipeline(src, ec, PaParams::make(6, 1, 1.0), 1));
}

TEST(PipelineTest, SourceAbortPropagates) {
  ClassicalJoint p(4, 1);
  p.set(1, 0, 0.5);
  p.set(2, 0, 0.4);
  const auto src = make_classical_joint_source(p, 0.9);
  const auto ec = EcParams::make(2, 0, 1, 0.0);
  const auto pa = PaParams::make(2, 1, src.k() - 1.0);
  int aborts = 0;
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    const auto res = distill_pipeline(src, ec, pa, seed);
    if (!res.transcript.s) {
      ++aborts;
      EXPECT_FALSE(res.key_a || res.key_b || res.transcript.accept);
    }
  }
  EXPECT_GT(aborts, 0);
}

TEST(PipelineTest, ReplayIsBitIdentical) {
  const auto src = make_noisy_correlated_source(6, 0.1, 3);
  const auto ec = EcParams::make(6, 2, 2, 1.0 / 6.0, 7);
  const auto pa = PaParams::make(6, 1, -1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = distill_pipeline(src, ec, pa, seed), b = distill_pipeline(src, ec, pa, seed);
    EXPECT_EQ(a.transcript, b.transcript);
    EXPECT_EQ(a.transcript.to_json().dump(), b.transcript.to_json().dump());
    EXPECT_EQ(a.key_a, b.key_a);
  }
}

TEST(RobustnessTest, BoundedNoiseAbortRateWithinEpsSs) {
  const auto src = make_bounded_noise_source(6, 1, 4);
  const auto ec = EcParams::make(6, 4, 2, 1.0 / 6.0);
  const double eps_ss = audit_sketch_failure(ec.sketch, ec.radius()).epsilon;
  const auto est = robustness_mc(src, ec, 10000, 99);
  EXPECT_EQ(est.trials, 10000U);
  EXPECT_LE(est.rate(), eps_ss + est.width());
}

TEST(RobustnessTest, IndependentOfWorkerCount) {
  const auto src = make_noisy_correlated_source(5, 0.1, 3);
  const auto ec = EcParams::make(5, 3, 2, 0.2);
  setenv("ACBENCH_WORKERS", "1", 1);
  const auto a = robustness_mc(src, ec, 5000, 5);
  setenv("ACBENCH_WORKERS", "3", 1);
  const auto b = robustness_mc(src, ec, 5000, 5);
  unsetenv("ACBENCH_WORKERS");
  EXPECT_EQ(a.aborts, b.aborts);
}

TEST(DistillConfigTest, ParsesAndRejects) {
  const auto cfg = distill_config_from_json(nlohmann::json::parse(R"({
    "source": {"kind": "adversarial", "n": 6, "leak_mask": "100001", "tamper_xor": "000001"},
    "ec": {"r": 2, "t": 2, "phi": 0.17},
    "pa": {"m": 1},
    "seed": 11})"));
  EXPECT_EQ(cfg.source.k(), 4.0);
  EXPECT_EQ(cfg.pa.k, 0.0);
  EXPECT_EQ(cfg.seed, 11U);
  EXPECT_THROW(distill_config_from_json(nlohmann::json::parse(R"({"source": {"kind": "nope", "n": 2}})")),
               ConfigError);
  EXPECT_THROW(distill_config_from_json(nlohmann::json::parse(R"({"source": {"kind": "bounded-noise"}})")),
               ConfigError);
}

}  // namespace
}  // namespace acbench
