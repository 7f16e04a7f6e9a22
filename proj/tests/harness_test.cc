#include "acbench/harness.hpp"

#include <gtest/gtest.h>

namespace acbench {
namespace {

CMatrix ket_density(const CVector& v) { return v * v.adjoint(); }

// (A1 B1 E1)(A2 B2 E2) -> (A1 A2)(B1 B2)(E1 E2), index by index.
CMatrix regroup_oracle(const CMatrix& s, const OutputLayout& l1, const OutputLayout& l2) {
  const std::size_t n = l1.total() * l2.total();
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  auto map = [&](std::size_t idx) {
    const std::size_t i2 = idx % l2.total(), i1 = idx / l2.total();
    const std::size_t a1 = i1 / (l1.b * l1.e), b1 = (i1 / l1.e) % l1.b, e1 = i1 % l1.e;
    const std::size_t a2 = i2 / (l2.b * l2.e), b2 = (i2 / l2.e) % l2.b, e2 = i2 % l2.e;
    const std::size_t a = a1 * l2.a + a2, b = b1 * l2.b + b2, e = e1 * l2.e + e2;
    return (a * l1.b * l2.b + b) * l1.e * l2.e + e;
  };
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out(static_cast<Eigen::Index>(map(r)), static_cast<Eigen::Index>(map(c))) =
          s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return out;
}

TEST(Comb, RejectsNonTracePreservingRounds) {
  CombRound r{1, 1, 1, {2, 1, 1}, {CMatrix::Zero(2, 1)}};
  EXPECT_THROW(Comb("bad", {r}), RejectedInput);
  CombRound chained{1, 2, 1, {2, 1, 1}, {CMatrix::Ones(2, 2) / 2.0}};
  EXPECT_THROW(Comb("bad", {chained}), RejectedInput);
}

TEST(Comb, EmitReproducesItsState) {
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const CMatrix s = ket_density(plus);
  const auto c = Comb::emit("plus", s, {2, 1, 1});
  EXPECT_LT((c.run({0}) - s).norm(), 1e-12);
}

TEST(Comb, OutputsAboveTheDimensionCapAreRejected) {
  std::vector<std::vector<double>> p(1, std::vector<double>(2 * kMaxDim, 0.0));
  p[0][0] = 1.0;
  const auto c = Comb::classical("wide", p, {2 * kMaxDim, 1, 1});
  EXPECT_THROW(c.run({0}), RejectedInput);
}

TEST(Comb, MemoryCarriesAcrossRounds) {
  // round 1 stores the input bit in memory, round 2 emits it on B
  CombRound r1{2, 1, 2, {1, 1, 1}, {CMatrix::Identity(2, 2)}};
  CombRound r2{1, 2, 1, {1, 2, 1}, {CMatrix::Identity(2, 2)}};
  const Comb c("memo", {r1, r2});
  for (std::size_t x = 0; x < 2; ++x) {
    const CMatrix out = c.run({x, 0});
    EXPECT_NEAR(out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)).real(), 1.0, 1e-12);
  }
  EXPECT_EQ(c.input_sequences().size(), 2u);
}

TEST(TensorPermutation, SwapsKroneckerFactors) {
  CMatrix a(2, 1), b(3, 1);
  a << 0.6, 0.8;
  b << 1.0, 2.0, 3.0;
  const CMatrix p = tensor_permutation({2, 3}, {1, 0});
  EXPECT_LT((p * kron(a, b) - kron(b, a)).norm(), 1e-12);
}

TEST(Distinguish, BiasedBitHasAdvantageEqualToBias) {
  for (double eps : {0.0, 0.05, 0.25, 0.5}) {
    const auto r = distinguish_exact(fixtures::shared_bit(eps), fixtures::shared_bit(0.0));
    EXPECT_NEAR(r.lo, eps, 1e-12);
    EXPECT_TRUE(r.exhaustive);
    EXPECT_DOUBLE_EQ(r.hi, r.lo);
  }
}

TEST(Distinguish, ZeroVersusPlusIsHelstrom) {
  CVector zero(2), plus(2);
  zero << 1.0, 0.0;
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto r = distinguish_exact(Comb::emit("zero", ket_density(zero), {1, 1, 2}),
                                   Comb::emit("plus", ket_density(plus), {1, 1, 2}));
  EXPECT_NEAR(r.lo, std::sqrt(0.5), 1e-9);
  // projector optimality: Tr P (rho - sigma) equals the distance
  const CMatrix diff = ket_density(zero) - ket_density(plus);
  EXPECT_NEAR((r.helstrom * diff).trace().real(), r.lo, 1e-9);
}

TEST(Distinguish, InputsAreSearchedExhaustivelyInOneRound) {
  const auto r = distinguish_exact(fixtures::echo(0.3), fixtures::echo(0.0));
  EXPECT_NEAR(r.lo, 0.3, 1e-12);
  EXPECT_TRUE(r.exhaustive);
  EXPECT_EQ(r.best_inputs.size(), 1u);
}

TEST(Distinguish, SeveralInputRoundsAreNotExhaustive) {
  const auto e = fixtures::echo(0.3);
  const Comb two("two", {e.rounds()[0], e.rounds()[0]});
  const auto r = distinguish_exact(two, two);
  EXPECT_FALSE(r.exhaustive);
  EXPECT_DOUBLE_EQ(r.hi, 1.0);
  EXPECT_NEAR(r.lo, 0.0, 1e-12);
}

TEST(Distinguish, MonteCarloStaysWithinItsWidth) {
  const auto a = fixtures::shared_bit(0.1), b = fixtures::shared_bit(0.0);
  const auto mc = distinguish_mc(a, b, 20000, 7);
  EXPECT_NEAR(mc.estimate, 0.1, 2 * mc.width);
  const auto again = distinguish_mc(a, b, 20000, 7);
  EXPECT_EQ(mc.estimate, again.estimate);
}

TEST(Claim, FixturesVerifyAndBrokenClaimFails) {
  for (const auto& c : {fixtures::biased_claim(0.1), fixtures::flip_claim(0.2), fixtures::leak_claim(0.3),
                        fixtures::identity_claim()}) {
    const auto chk = verify_claim(c);
    EXPECT_TRUE(chk.pass) << c.name;
    EXPECT_NEAR(chk.advantage.lo, c.epsilon, 1e-12) << c.name;
  }
  const auto broken = verify_claim(fixtures::broken_claim());
  EXPECT_FALSE(broken.pass);
  EXPECT_NEAR(broken.advantage.lo, 0.2, 1e-12);
}

TEST(Claim, SerialCompositionAddsErrorsAndChecksInterfaces) {
  const auto c = compose_serial(fixtures::biased_claim(0.1), fixtures::flip_claim(0.2));
  EXPECT_EQ(c.real_label, "R");
  EXPECT_EQ(c.ideal_label, "T");
  EXPECT_NEAR(c.epsilon, 0.3, 1e-15);
  const auto chk = verify_claim(c);
  EXPECT_TRUE(chk.pass);
  EXPECT_LE(chk.advantage.lo, 0.3 + 1e-12);
  EXPECT_THROW(compose_serial(fixtures::flip_claim(0.2), fixtures::biased_claim(0.1)), RejectedInput);
}

TEST(Claim, ParallelCompositionMatchesTensorOracle) {
  const auto c1 = fixtures::biased_claim(0.1), c2 = fixtures::leak_claim(0.25);
  const auto c = compose_parallel(c1, c2);
  const CMatrix oracle =
      regroup_oracle(kron(c1.real_system().run({0}), c2.real_system().run({0})), {2, 2, 1}, {2, 2, 3});
  EXPECT_LT((c.real_system().run({0}) - oracle).norm(), 1e-12);
  const CMatrix ideal =
      regroup_oracle(kron(c1.ideal_system().run({0}), c2.ideal_system().run({0})), {2, 2, 1}, {2, 2, 3});
  EXPECT_LT((c.ideal_system().run({0}) - ideal).norm(), 1e-12);
  const auto chk = verify_claim(c);
  EXPECT_TRUE(chk.pass);
  EXPECT_NEAR(c.epsilon, 0.35, 1e-15);
}

TEST(Claim, ParallelLiftsConvertersOnTheSecondComponent) {
  const auto c = compose_parallel(fixtures::leak_claim(0.4), fixtures::flip_claim(0.3));
  const CMatrix oracle = regroup_oracle(
      kron(fixtures::leak_claim(0.4).real_system().run({0}), fixtures::flip_claim(0.3).real_system().run({0})),
      {2, 2, 3}, {2, 2, 1});
  EXPECT_LT((c.real_system().run({0}) - oracle).norm(), 1e-12);
  EXPECT_TRUE(verify_claim(c).pass);
}

TEST(Converter, DistinctInterfacesCommute) {
  CMatrix perm = CMatrix::Zero(3, 3);
  perm(1, 0) = perm(0, 1) = perm(2, 2) = 1.0;
  const auto e = make_converter("swap-e", Interface::kE, {perm});
  const auto b = fixtures::noisy_b(0.3);
  const auto base = fixtures::leaky_bit(0.5);
  const CMatrix eb = apply_converters(base, {e, b}).run({0});
  const CMatrix be = apply_converters(base, {b, e}).run({0});
  EXPECT_LT((eb - be).norm(), 1e-12);
}

TEST(Converter, WrongShapeIsRejected) {
  auto on_e = fixtures::noisy_b(0.1);
  on_e.iface = Interface::kE;
  EXPECT_THROW(apply_converter(fixtures::leaky_bit(0.5), on_e), RejectedInput);
  EXPECT_THROW(make_converter("lossy", Interface::kA, {CMatrix::Zero(2, 2)}), RejectedInput);
}

TEST(ErrorClaim, AccountingChainsLabels) {
  const auto c = compose_serial(ErrorClaim{"a", "X", "Y", 0.1}, ErrorClaim{"b", "Y", "Z", 0.2});
  EXPECT_NEAR(c.epsilon, 0.3, 1e-15);
  EXPECT_EQ(c.ideal_label, "Z");
  EXPECT_THROW(compose_serial(ErrorClaim{"a", "X", "Y", 0.1}, ErrorClaim{"b", "W", "Z", 0.2}), RejectedInput);
}

}  // namespace
}  // namespace acbench
