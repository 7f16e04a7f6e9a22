#include "acbench/quantum.hpp"

#include <random>

#include "gtest/gtest.h"

namespace acbench {
namespace {

Bitstring B(const char* s) { return Bitstring::from_string(s); }

CMatrix ket_matrix(std::initializer_list<Complex> amps) {
  CVector v(static_cast<Eigen::Index>(amps.size()));
  Eigen::Index i = 0;
  for (auto a : amps) v[i++] = a;
  return v * v.adjoint();
}

const double kS = 1.0 / std::sqrt(2.0);

TEST(ConjugateCodeTest, Examples) {
  EXPECT_TRUE(conjugate_code_state(B("0"), B("0")).matrix().isApprox(ket_matrix({1, 0})));
  CMatrix minus(2, 2);
  minus << 0.5, -0.5, -0.5, 0.5;
  EXPECT_TRUE(conjugate_code_state(B("1"), B("1")).matrix().isApprox(minus, 1e-12));
  EXPECT_TRUE(conjugate_code_state(B("01"), B("00")).matrix().isApprox(ket_matrix({0, 1, 0, 0})));
  EXPECT_THROW(conjugate_code_state(B("01"), B("0")), RejectedInput);
  EXPECT_THROW(conjugate_code_state(Bitstring(11), Bitstring(11)), RejectedInput);
}

TEST(MeasureBbTest, Examples) {
  const auto zero = conjugate_code_state(B("0"), B("0"));
  auto out = measure_bb(zero, B("0"));
  EXPECT_NEAR(out[0].weight, 1.0, 1e-12);
  EXPECT_NEAR(out[1].weight, 0.0, 1e-12);
  out = measure_bb(zero, B("1"));
  EXPECT_NEAR(out[0].weight, 0.5, 1e-12);
  EXPECT_NEAR(out[1].weight, 0.5, 1e-12);
  out = measure_bb(conjugate_code_state(B("0"), B("1")), B("1"));
  EXPECT_NEAR(out[0].weight, 1.0, 1e-12);
  EXPECT_THROW(measure_bb(zero, B("01")), RejectedInput);
}

TEST(MeasureBbTest, SameBasisRecoversEncodedString) {
  for (std::size_t n = 1; n <= 3; ++n) {
    for (const auto& x : all_bitstrings(n)) {
      for (const auto& th : all_bitstrings(n)) {
        const auto out = measure_bb(conjugate_code_state(x, th), th);
        EXPECT_NEAR(out[x.to_uint()].weight, 1.0, 1e-12);
      }
    }
  }
}

TEST(MeasureBbTest, WeightsSumToTrace) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 3;
    const auto rho = random_subnormalized_state(std::size_t{1} << n, rng);
    const auto th = Bitstring::from_uint(rng() % (1U << n), n);
    double s = 0.0;
    for (const auto& o : measure_bb(rho, th)) s += o.weight;
    EXPECT_NEAR(s, rho.trace(), 1e-10);
  }
}

TEST(DistanceTest, Examples) {
  const auto z = conjugate_code_state(B("0"), B("0"));
  const auto o = conjugate_code_state(B("1"), B("0"));
  const auto p = conjugate_code_state(B("0"), B("1"));
  EXPECT_NEAR(trace_distance(z, z), 0.0, 1e-12);
  EXPECT_NEAR(trace_distance(z, o), 1.0, 1e-12);
  EXPECT_NEAR(trace_distance(z, p), kS, 1e-12);
  EXPECT_NEAR(purified_distance(z, z), 0.0, 1e-7);
  EXPECT_NEAR(purified_distance(z, p), kS, 1e-10);
  EXPECT_NEAR(purified_distance(z, o), 1.0, 1e-12);

  const auto half = z.scaled(0.5);
  const auto nothing = DensityOperator::zero(2);
  EXPECT_NEAR(generalized_trace_distance(half, nothing), 0.5, 1e-12);
  EXPECT_NEAR(generalized_trace_distance(half, half), 0.0, 1e-12);
  EXPECT_NEAR(generalized_trace_distance(z, p), trace_distance(z, p), 1e-12);
  EXPECT_THROW(trace_distance(z, DensityOperator::maximally_mixed(4)), RejectedInput);
}

TEST(DistanceTest, ChainOnRandomSubnormalizedPairs) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t d = 2 + rng() % 7;
    const auto a = random_subnormalized_state(d, rng);
    const auto b = random_subnormalized_state(d, rng);
    const double dbar = generalized_trace_distance(a, b);
    const double p = purified_distance(a, b);
    EXPECT_LE(dbar, p + 1e-9);
    EXPECT_LE(p, std::sqrt(2.0 * dbar) + 1e-9);
  }
}

TEST(DistanceTest, PureStatesPurifiedEqualsTrace) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 2 + rng() % 7;
    const auto a = random_state(d, rng, 1.0, 1);
    const auto b = random_state(d, rng, 1.0, 1);
    EXPECT_NEAR(purified_distance(a, b), trace_distance(a, b), 1e-6);
  }
}

TEST(DistanceTest, MetricAndContraction) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 2 + rng() % 3;
    const auto a = random_state(d, rng), b = random_state(d, rng), c = random_state(d, rng);
    EXPECT_NEAR(trace_distance(a, b), trace_distance(b, a), 1e-12);
    EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + 1e-12);
    // random channel with two Kraus operators from a random isometry
    const CMatrix u = random_unitary(2 * d, rng);
    const CMatrix k0 = u.block(0, 0, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const CMatrix k1 = u.block(static_cast<Eigen::Index>(d), 0, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const KrausChannel ch({k0, k1});
    EXPECT_TRUE(ch.trace_preserving());
    EXPECT_LE(trace_distance(apply_channel(ch, a), apply_channel(ch, b)), trace_distance(a, b) + 1e-9);
  }
}

TEST(ChannelTest, Examples) {
  const auto z = conjugate_code_state(B("0"), B("0"));
  EXPECT_TRUE(apply_channel(KrausChannel::identity(2), z).matrix().isApprox(z.matrix()));
  EXPECT_TRUE(apply_channel(KrausChannel::depolarizing(1.0), z)
                  .matrix()
                  .isApprox(DensityOperator::maximally_mixed(2).matrix(), 1e-12));
  EXPECT_TRUE(apply_channel(KrausChannel::unitary(KrausChannel::pauli_string("X")), z)
                  .matrix()
                  .isApprox(conjugate_code_state(B("1"), B("0")).matrix()));
  EXPECT_THROW(apply_channel(KrausChannel::identity(4), z), RejectedInput);
  EXPECT_THROW(KrausChannel({2.0 * CMatrix::Identity(2, 2)}), RejectedInput);
  EXPECT_FALSE(KrausChannel({0.5 * CMatrix::Identity(2, 2)}).trace_preserving());
}

TEST(PartialTraceTest, Examples) {
  std::mt19937_64 rng(29);
  const auto a = random_state(2, rng), b = random_state(3, rng);
  const auto ab = a.tensor(b);
  EXPECT_TRUE(partial_trace(ab, {true, false}, {2, 3}).matrix().isApprox(a.matrix(), 1e-12));
  EXPECT_TRUE(partial_trace(ab, {false, true}, {2, 3}).matrix().isApprox(b.matrix(), 1e-12));
  EXPECT_TRUE(partial_trace(ab, {true, true}, {2, 3}).matrix().isApprox(ab.matrix(), 1e-12));
  EXPECT_TRUE(partial_trace(epr_pairs(1), {true, false}, {2, 2})
                  .matrix()
                  .isApprox(DensityOperator::maximally_mixed(2).matrix(), 1e-12));
  EXPECT_THROW(partial_trace(ab, {true, false}, {2, 2}), RejectedInput);
}

TEST(PartialTraceTest, PreservesTrace) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_subnormalized_state(12, rng);
    EXPECT_NEAR(partial_trace(r, {false, true, false}, {2, 3, 2}).trace(), r.trace(), 1e-12);
  }
}

TEST(DensityOperatorTest, RejectsInvalid) {
  CMatrix m(2, 2);
  m << 1, 1, 0, 0;
  EXPECT_THROW(DensityOperator::from_matrix(m), RejectedInput);
  m << 1.5, 0, 0, 0;
  EXPECT_THROW(DensityOperator::from_matrix(m), RejectedInput);
  m << 1, 0, 0, -0.1;
  EXPECT_THROW(DensityOperator::from_matrix(m), RejectedInput);
}

}  // namespace
}  // namespace acbench
