#pragma once

// Named checks grouped into suites. Each check produces report records; the
// acceptance binary and the CLI share this registry.

#include <chrono>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "acbench/distill.hpp"
#include "acbench/entropy.hpp"
#include "acbench/error.hpp"
#include "acbench/fsauth.hpp"
#include "acbench/harness.hpp"
#include "acbench/hashing.hpp"
#include "acbench/quantum.hpp"
#include "acbench/report.hpp"
#include "acbench/util.hpp"
#include "json.hpp"

namespace acbench {

struct ExperimentOptions {
  std::uint64_t seed = 1;
  std::uint64_t trials = 100000;  // Monte Carlo sessions
  std::uint64_t fuzz = 10000;     // random instances for property checks
  double tolerance = 1e-9;

  nlohmann::json to_json() const {
    return {{"seed", seed}, {"trials", trials}, {"fuzz", fuzz}, {"tolerance", tolerance}};
  }
};

struct Check {
  std::string id;
  int criterion = 0;  // acceptance criterion number, 0 if none
  std::function<std::vector<ReportRecord>(const ExperimentOptions&)> run;

  std::string suite() const { return id.substr(0, id.find('/')); }
};

namespace checks {

using Records = std::vector<ReportRecord>;

inline ReportRecord seeded(ReportRecord r, std::uint64_t seed) {
  r.seeds.push_back(seed);
  return r;
}

// Flat source over `support` with total weight `mass`.
inline ClassicalJoint flat(std::size_t n, const std::vector<std::uint64_t>& support, double mass) {
  ClassicalJoint p(std::size_t{1} << n, 1);
  for (auto x : support) p.set(x, 0, mass / static_cast<double>(support.size()));
  return p;
}

template <class Fn>
void for_each_subset(std::size_t universe, std::size_t size, Fn&& fn) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << universe); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
    s.clear();
    for (std::uint64_t i = 0; i < universe; ++i)
      if ((mask >> i) & 1U) s.push_back(i);
    fn(s);
  }
}

// --- entropy ----------------------------------------------------------------------

inline Records pguess_examples(const ExperimentOptions& o) {
  Records out;
  ClassicalJoint copy(4, 4);
  for (std::size_t x = 0; x < 4; ++x) copy.set(x, x, 0.2);
  out.push_back(make_record("entropy/pguess-classical-uniform4", "pguess(X)", pguess_classical(ClassicalJoint::uniform(4)),
                            "==", 0.25, o.tolerance, Provenance::kExact));
  out.push_back(make_record("entropy/pguess-classical-copy", "pguess(X|E)", pguess_classical(copy), "==", 0.8,
                            o.tolerance, Provenance::kExact));
  out.push_back(make_record("entropy/pguess-classical-table", "pguess(X|E)",
                            pguess_classical(ClassicalJoint::from_table({{0.5, 0.0}, {0.25, 0.25}})), "==", 0.75,
                            o.tolerance, Provenance::kExact));
  const auto z = conjugate_code_state(Bitstring::from_string("0"), Bitstring::from_string("0"));
  const auto p = conjugate_code_state(Bitstring::from_string("0"), Bitstring::from_string("1"));
  const auto br = pguess_cq(CqState::from_branches({{"0", 0.5, z}, {"1", 0.5, p}}));
  auto r = make_record("entropy/pguess-zero-plus", "pguess(X|B)", br.lo, br.hi, "==", 0.5 + 0.5 / std::sqrt(2.0),
                       1e-9, Provenance::kExact);
  r.detail = {{"method", to_string(br.method)}};
  out.push_back(r);
  const auto u = hmin(CqState::from_classical(ClassicalJoint::uniform(8)));
  out.push_back(make_record("entropy/hmin-uniform8", "Hmin(X)", u.lo, u.hi, "==", 3.0, o.tolerance, Provenance::kExact));
  const auto sm = hmin_smooth_classical(ClassicalJoint::uniform(8), 0.3);
  out.push_back(
      make_record("entropy/smooth-hmin-uniform8", "Hmin^0.3(X)", sm.lo, ">=", 3.0, o.tolerance, Provenance::kExact));
  return out;
}

// Smoothing never lowers the entropy and is monotone in delta.
inline Records smooth_monotone(const ExperimentOptions& o, std::uint64_t seed) {
  Rng rng(seed);
  std::uint64_t violations = 0;
  const std::uint64_t count = std::max<std::uint64_t>(o.fuzz / 50, 1);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t nx = 2 + random_below(rng, 4), ne = 1 + random_below(rng, 3);
    ClassicalJoint p(nx, ne);
    double total = 0.0;
    std::vector<double> w(nx * ne);
    for (auto& v : w) total += (v = random_unit(rng));
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t e = 0; e < ne; ++e) p.set(x, e, w[x * ne + e] / total);
    double prev = hmin_classical(p);
    for (double d : {0.05, 0.1, 0.2}) {
      const double h = hmin_smooth_classical(p, d).lo;
      if (h < prev - 1e-9) ++violations;
      prev = h;
    }
  }
  auto r = make_record("entropy/smooth-hmin-monotone", "violations", static_cast<double>(violations), "==", 0.0, 0.0,
                       Provenance::kExact);
  r.detail = {{"instances", count}};
  return {seeded(r, seed)};
}

// --- lemmas -----------------------------------------------------------------------

inline Records distance_chain(const ExperimentOptions& o, std::uint64_t seed) {
  Rng rng(seed);
  std::uint64_t violations = 0;
  double worst_lower = -kInf, worst_upper = -kInf;
  for (std::uint64_t i = 0; i < o.fuzz; ++i) {
    const std::size_t d = 2 + random_below(rng, 7);
    const auto a = random_subnormalized_state(d, rng);
    const auto b = random_subnormalized_state(d, rng);
    const double dbar = generalized_trace_distance(a, b), p = purified_distance(a, b);
    worst_lower = std::max(worst_lower, dbar - p);
    worst_upper = std::max(worst_upper, p - std::sqrt(2.0 * dbar));
    if (dbar > p + 1e-9 || p > std::sqrt(2.0 * dbar) + 1e-9) ++violations;
  }
  auto r = make_record("lemmas/distance-chain", "violations", static_cast<double>(violations), "==", 0.0, 0.0,
                       Provenance::kExact);
  r.detail = {{"instances", o.fuzz},
              {"tolerance", 1e-9},
              {"max_gd_minus_p", worst_lower},
              {"max_p_minus_sqrt_2gd", worst_upper}};
  return {seeded(r, seed)};
}

inline ClassicalJoint random_joint(Rng& rng, std::size_t nx, std::size_t ne) {
  ClassicalJoint p(nx, ne);
  std::vector<double> w(nx * ne);
  double total = 0.0;
  for (auto& v : w) {
    v = random_below(rng, 4) == 0 ? 0.0 : random_unit(rng);  // sparse entries exercise zero columns
    total += v;
  }
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  const double mass = random_below(rng, 3) == 0 ? 0.25 + 0.75 * random_unit(rng) : 1.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t e = 0; e < ne; ++e) p.set(x, e, w[x * ne + e] / total * mass * (1.0 - 1e-15));
  return p;
}

inline Records chain_rule_fuzz(const ExperimentOptions& o, std::uint64_t seed) {
  Rng rng(seed);
  std::uint64_t chain = 0, event = 0;
  for (std::uint64_t i = 0; i < o.fuzz; ++i) {
    const std::size_t nx = 1 + random_below(rng, 8), nz = 1 + random_below(rng, 8), nb = 1 + random_below(rng, 3);
    if (!check_chain_rule(random_joint(rng, nx, nb * nz), nz, o.tolerance).holds) ++chain;
    const std::size_t ex = 1 + random_below(rng, 8), eb = 1 + random_below(rng, 4);
    if (!check_event_conditioning(random_joint(rng, ex, eb * 2), o.tolerance).holds) ++event;
  }
  auto a = make_record("lemmas/chain-rule", "violations", static_cast<double>(chain), "==", 0.0, 0.0,
                       Provenance::kExact);
  a.detail = {{"instances", o.fuzz}, {"max_x", 8}, {"max_z", 8}};
  auto b = make_record("lemmas/event-conditioning", "violations", static_cast<double>(event), "==", 0.0, 0.0,
                       Provenance::kExact);
  b.detail = {{"instances", o.fuzz}, {"max_x", 8}};
  return {seeded(a, seed), seeded(b, seed)};
}

inline Records guessing_lemmas(const ExperimentOptions& o) {
  const auto inst = check_guessing_lemmas({1, 2}, {0.0, 0.5}, o.tolerance);
  Records out;
  for (const char* lemma : {"uncertainty", "projected"}) {
    double worst = -kInf;
    std::uint64_t count = 0, failed = 0;
    nlohmann::json witness;
    for (const auto& g : inst) {
      if (g.lemma != lemma) continue;
      ++count;
      failed += !g.holds;
      const double margin = g.lhs.hi - g.pg_theta.lo * g.factor;
      if (margin > worst) {
        worst = margin;
        witness = g.to_json();
      }
    }
    auto r = make_record(std::string("lemmas/guessing-") + lemma, "max lhs.hi - pguess(Theta|E).lo * factor", worst,
                         "<=", 0.0, o.tolerance, Provenance::kExhaustive);
    r.pass = r.pass && failed == 0 && count > 0;
    r.detail = {{"instances", count}, {"failed", failed}, {"worst", witness}};
    out.push_back(r);
  }
  return out;
}

// --- hash audits ------------------------------------------------------------------

inline Records strong_universality(const ExperimentOptions&) {
  Records out;
  for (std::size_t n : {2, 3, 4}) {
    const auto mac = MacSpec::gf(n, n);
    const auto a = audit_strong_universality(mac.family);
    auto r = make_record("hash-audit/strong-universality-n" + std::to_string(n), "max joint tag probability",
                         a.joint_max, "==", std::exp2(-2.0 * static_cast<double>(n)), 0.0, Provenance::kExhaustive);
    r.detail = a.to_json();
    out.push_back(r);
  }
  return out;
}

inline Records extractor_flat(const ExperimentOptions& o) {
  const auto t = ExtractorSpec::toeplitz(4, 1);
  double worst = 0.0;
  std::uint64_t sources = 0;
  std::vector<std::uint64_t> witness;
  for_each_subset(16, 4, [&](const std::vector<std::uint64_t>& s) {
    ++sources;
    const double d = measure_extractor_distance(t, flat(4, s, 1.0));
    if (d > worst) {
      worst = d;
      witness = s;
    }
  });
  auto r = make_record("hash-audit/toeplitz-flat-sources", "max extractor distance", worst, "<=", t.error_at(2.0),
                       o.tolerance, Provenance::kExhaustive);
  r.detail = {{"n", 4}, {"m", 1}, {"hmin", 2}, {"sources", sources}, {"witness_support", witness}};
  return {r};
}

inline Records subnormalized_lift(const ExperimentOptions& o) {
  const auto t = ExtractorSpec::toeplitz(4, 1);
  Records out;
  for (double mass : {0.25, 0.5}) {
    double worst = -kInf;
    std::uint64_t sources = 0;
    nlohmann::json witness;
    for (std::size_t size : {1, 2, 4, 8}) {
      for_each_subset(16, size, [&](const std::vector<std::uint64_t>& s) {
        const auto src = flat(4, s, mass);
        // rated at k + 1 = Hmin, so the normalized rating is k = Hmin - 1
        const auto lifted = lift_to_subnormalized(RatedExtractor::at(t, hmin_classical(src) - 1.0));
        const double margin = measure_extractor_distance(t, src) - lifted.eps;
        ++sources;
        if (margin > worst) {
          worst = margin;
          witness = {{"support", s}, {"rating", lifted.k}, {"bound", lifted.eps}};
        }
      });
    }
    auto r = make_record("hash-audit/subnormalized-lift-mass-" + format_value(mass), "max distance - 2 eps(k)", worst,
                         "<=", 0.0, o.tolerance, Provenance::kExhaustive);
    r.detail = {{"mass", mass}, {"sources", sources}, {"worst", witness}};
    out.push_back(r);
  }
  return out;
}

inline Records verif_soundness(const ExperimentOptions&) {
  const std::size_t n = 6, t = 3;
  const auto ec = EcParams::make(n, 2, t, 1.0 / 6.0);
  double worst = 0.0;
  std::uint64_t pairs = 0;
  for (std::uint64_t x = 0; x < (1U << n); ++x)
    for (std::uint64_t xh = 0; xh < (1U << n); ++xh) {
      if (x == xh) continue;
      ++pairs;
      worst = std::max(worst, verif_acceptance_fraction(ec, x, xh));
    }
  auto r = make_record("hash-audit/verif-soundness-t3", "max acceptance over x != xhat", worst, "<=", 0.125, 0.0,
                       Provenance::kExhaustive);
  r.detail = {{"n", n}, {"t", t}, {"pairs", pairs}, {"keys", std::uint64_t{1} << ec.verif.key_len()}};
  return {r};
}

// --- distill ----------------------------------------------------------------------

inline Records pipeline_adversarial(const ExperimentOptions& o) {
  const std::size_t n = 6;
  double worst = -kInf;
  std::uint64_t instances = 0;
  nlohmann::json witness;
  for (std::uint64_t key : {0x15ULL, 0x6AULL}) {
    const auto ec = EcParams::make(n, 2, 2, 1.0 / 6.0, key);
    for (std::uint64_t mask = 0; mask < 64; ++mask)
      for (std::uint64_t flip : {0x00ULL, 0x01ULL, 0x03ULL, 0x21ULL}) {
        std::vector<std::uint64_t> tamper(64);
        for (std::uint64_t x = 0; x < 64; ++x) tamper[x] = x ^ flip;
        const auto src = make_adversarial_source(n, mask, tamper);
        const auto pa = PaParams::make(n, 1, src.k() - 4.0);
        const double bound = ec.eps_verif + pa.eps_pa();
        const double margin = exact_final_distance(src, ec, pa) - bound;
        ++instances;
        if (margin > worst) {
          worst = margin;
          witness = {{"leak_mask", Bitstring::from_uint(mask, n).to_string()},
                     {"tamper_xor", Bitstring::from_uint(flip, n).to_string()},
                     {"sketch_key", key},
                     {"bound", bound}};
        }
      }
  }
  auto r = make_record("distill/pipeline-adversarial-n6", "max final distance - (eps_verif + eps_pa)", worst, "<=", 0.0,
                       o.tolerance, Provenance::kExhaustive);
  r.detail = {{"n", n}, {"r", 2}, {"t", 2}, {"m", 1}, {"delta", 0}, {"instances", instances}, {"worst", witness}};
  return {r};
}

inline Records distill_robustness(const ExperimentOptions& o, std::uint64_t seed) {
  const auto src = make_bounded_noise_source(6, 1, 4);
  const auto ec = EcParams::make(6, 4, 2, 1.0 / 6.0);
  const double eps_ss = audit_sketch_failure(ec.sketch, ec.radius()).epsilon;
  const auto est = robustness_mc(src, ec, o.trials, seed);
  auto r = make_record("distill/robustness-bounded-noise", "abort rate", est.rate(), "<=", eps_ss + est.width(), 0.0,
                       Provenance::kMonteCarlo);
  r.trials = est.trials;
  r.width = est.width();
  r.detail = est.to_json();
  r.detail["eps_ss"] = eps_ss;
  return {seeded(r, seed)};
}

// --- fsauth -----------------------------------------------------------------------

inline FsParams robustness_params() {
  return FsParams::make(4, 1, LinearCode::from_strings({"0000", "1111"}), 2, 2, 0.25, 1.0);
}

inline FsParams small_fs_params(std::size_t m_mac) {
  return FsParams::make(2, 1, LinearCode::from_strings({"00", "11"}), 1, m_mac, 0.5, 1.0);
}

inline Records fs_completeness(const ExperimentOptions& o, std::uint64_t seed) {
  const auto p = robustness_params();
  Records out;
  const auto honest = honest_completeness(p);
  auto a = make_record("fsauth/honest-completeness", "min accept rate, no noise", honest.rate, "==", 1.0, 0.0,
                       Provenance::kExhaustive);
  a.detail = {{"instances", honest.instances}, {"params", p.to_json()}};
  out.push_back(a);
  const auto noisy = noisy_reject_rate(p);
  auto b = make_record("fsauth/noisy-reject-exhaustive", "max reject rate, <= phi n flips", noisy.rate, "<=", p.eps_ss,
                       o.tolerance, Provenance::kExhaustive);
  b.detail = {{"instances", noisy.instances}, {"witness", noisy.witness}};
  out.push_back(b);
  SessionStrategy st;
  st.kind = "noise";
  const auto mc = fs_session_mc(p, ThetaSource::uniform(p.code), st, o.trials, seed);
  const double bound = eps_noise(p, 0.0);
  auto c = make_record("fsauth/noisy-reject-mc", "real-vs-ideal advantage (reject rate)", mc.reject_rate(), "<=",
                       bound + mc.width(), 0.0, Provenance::kMonteCarlo);
  c.pass = c.pass && mc.theta_leaks == 0;
  c.trials = mc.trials;
  c.width = mc.width();
  c.detail = mc.to_json();
  c.detail["eps_noise"] = bound;
  out.push_back(seeded(c, seed));
  return out;
}

inline Records fs_impersonation(const ExperimentOptions& o) {
  Records out;
  for (std::size_t m_mac : {2, 3}) {
    const auto p = small_fs_params(m_mac);
    const auto w = worst_impersonation(p, ThetaSource::uniform(p.code));
    auto r = make_record("fsauth/impersonation-mmac" + std::to_string(m_mac), "max forgery acceptance", w.rate, "<=",
                         std::exp2(-static_cast<double>(m_mac)), o.tolerance, Provenance::kExhaustive);
    r.detail = {{"forgeries", w.instances}, {"witness", w.witness}, {"eps_mac", p.eps_mac}};
    out.push_back(r);
  }
  return out;
}

inline Records fs_recycled_entropy(const ExperimentOptions&) {
  const auto p = small_fs_params(2);
  const auto src = ThetaSource::uniform(p.code);
  Records out;
  for (const auto& ins : substitution_library(p)) {
    for (std::uint64_t y = 0; y < 2; ++y) {
      const auto e = recycled_key_entropy(p, ins, src, y);
      auto r = make_record("fsauth/recycled-entropy/" + ins.name + "/y" + std::to_string(y),
                           "Hmin(Theta' | view), accept branch", e.hmin.lo, e.hmin.hi, ">=", e.k, 1e-6,
                           Provenance::kExhaustive);
      r.detail = e.to_json();
      out.push_back(r);
    }
  }
  return out;
}

// --- bounds -----------------------------------------------------------------------

inline Records closed_forms(const ExperimentOptions& o) {
  Records out;
  const double v = eps_adv_formula(1, 1, 2, 3, 3, 0, 1, 2, 1, 0.25);
  // h(0) = 0: 1/4 + 2 sqrt(4 (2 + 2^{-1/2} + 1/4))
  const double direct = 0.25 + 2.0 * std::sqrt(4.0 * (2.0 + 1.0 / std::sqrt(2.0) + 0.25));
  out.push_back(make_record("bounds/eps-adv-toy", "eps_adv", v, "==", direct, 1e-12, Provenance::kExact));
  out.push_back(make_record("bounds/eps-adv-toy-rounded", "eps_adv", v, "==", 7.13, 0.005, Provenance::kExact));
  out.push_back(make_record("bounds/eps-noise", "eps + eps_ss", eps_noise(0.01, 0.02), "==", 0.03, 1e-15,
                            Provenance::kExact));
  const double kp = replacement_rating(3, 3);
  out.push_back(make_record("bounds/replacement-rating", "k'", kp, "==", 2.0, o.tolerance, Provenance::kExact));
  return out;
}

inline Records key_replacement(const ExperimentOptions&) {
  const auto a = audit_key_replacement(3, 3);
  auto r1 = make_record("bounds/key-replacement-pguess", "audited pguess(Theta_out|E)", a.audited_pguess, "==",
                        2.0 * std::exp2(-3.0), 0.0, Provenance::kExhaustive);
  r1.detail = {{"instances", a.instances},
               {"max_joint_pguess", a.max_joint_pguess},
               {"max_bottom_term", a.max_bottom_term},
               {"max_theta_term", a.max_theta_term},
               {"bound", a.bound}};
  auto r2 = make_record("bounds/key-replacement-kprime", "k'", a.audited_k_prime(), "==", 2.0, 0.0,
                        Provenance::kExhaustive);
  auto r3 = make_record("bounds/key-replacement-joint", "max joint pguess", a.max_joint_pguess, "<=", a.bound, 0.0,
                        Provenance::kExhaustive);
  return {r1, r2, r3};
}

inline ReportRecord claim_record(const std::string& id, const ConstructionClaim& c, double tol) {
  const auto chk = verify_claim(c, tol);
  auto r = make_record(id, "distinguishing advantage", chk.advantage.lo, chk.advantage.hi, "<=", c.epsilon, tol,
                       chk.advantage.exhaustive ? Provenance::kExhaustive : Provenance::kExact);
  // only the strategy-set side is certified when the set is not exhaustive
  r.pass = chk.pass;
  r.detail = chk.to_json();
  return r;
}

inline Records composition(const ExperimentOptions& o) {
  const double eps = 0.1, delta = 0.2, leak = 0.25;
  Records out;
  const auto biased = fixtures::biased_claim(eps), flip = fixtures::flip_claim(delta), leaky = fixtures::leak_claim(leak);
  for (const auto* c : {&biased, &flip, &leaky}) {
    auto r = claim_record("bounds/composition-fixture-" + c->name, *c, o.tolerance);
    // the fixtures have exact advantages equal to their claimed errors
    r.pass = r.pass && std::abs(r.lo - c->epsilon) <= o.tolerance;
    out.push_back(r);
  }
  out.push_back(claim_record("bounds/composition-serial", compose_serial(biased, flip), o.tolerance));
  out.push_back(claim_record("bounds/composition-parallel", compose_parallel(biased, leaky), o.tolerance));
  out.push_back(claim_record("bounds/composition-parallel-flip", compose_parallel(leaky, flip), o.tolerance));
  {
    const auto c = compose_parallel(biased, fixtures::identity_claim());
    auto r = claim_record("bounds/composition-parallel-identity", c, o.tolerance);
    r.pass = r.pass && c.epsilon == eps && std::abs(r.lo - eps) <= o.tolerance;
    out.push_back(r);
  }
  {
    bool rejected = false;
    try {
      compose_serial(flip, biased);
    } catch (const RejectedInput&) {
      rejected = true;
    }
    out.push_back(make_record("bounds/composition-interface-mismatch", "mismatched composition rejected",
                              rejected ? 1.0 : 0.0, "==", 1.0, 0.0, Provenance::kExact));
  }
  {
    const auto chk = verify_claim(fixtures::broken_claim(), o.tolerance);
    auto r = make_record("bounds/composition-negative-control", "broken claim advantage exceeds its epsilon",
                         chk.advantage.lo, ">=", chk.epsilon + 2 * o.tolerance, 0.0, Provenance::kExhaustive);
    r.pass = r.pass && !chk.pass;
    r.detail = chk.to_json();
    out.push_back(r);
  }
  return out;
}

inline Records harness_examples(const ExperimentOptions& o) {
  Records out;
  CVector zero(2), plus(2);
  zero << 1.0, 0.0;
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto d = distinguish_exact(Comb::emit("zero", zero * zero.adjoint(), {1, 1, 2}),
                                   Comb::emit("plus", plus * plus.adjoint(), {1, 1, 2}));
  out.push_back(make_record("bounds/helstrom-zero-plus", "distinguishing advantage", d.lo, d.hi, "==", 0.70711, 5e-6,
                            Provenance::kExhaustive));
  // converters at distinct interfaces commute
  CMatrix perm = CMatrix::Zero(3, 3);
  perm(1, 0) = perm(0, 1) = perm(2, 2) = 1.0;
  const auto e = make_converter("swap-e", Interface::kE, {perm});
  const auto b = fixtures::noisy_b(0.3);
  const auto base = fixtures::leaky_bit(0.5);
  const double diff =
      (apply_converters(base, {e, b}).run({0}) - apply_converters(base, {b, e}).run({0})).cwiseAbs().maxCoeff();
  out.push_back(make_record("bounds/converter-commutation", "max entry difference", diff, "<=", 1e-10, 0.0,
                            Provenance::kExact));
  // distillation as serial accounting: corr (0) ; verif ; pa
  const auto ec = EcParams::make(6, 2, 2, 1.0 / 6.0, 0x15);
  std::vector<std::uint64_t> tamper(64);
  for (std::uint64_t x = 0; x < 64; ++x) tamper[x] = x ^ 1U;
  const auto src = make_adversarial_source(6, 0x03, tamper);
  const auto pa = PaParams::make(6, 1, src.k() - 4.0);
  const auto chain = compose_serial(compose_serial(ErrorClaim{"corr", "R", "R'", 0.0},
                                                   ErrorClaim{"verif", "R'", "R''", ec.eps_verif}),
                                    ErrorClaim{"pa", "R''", "K", pa.eps_pa() + 2.0 * pa.delta});
  out.push_back(make_record("bounds/distill-serial-accounting", "composed epsilon", chain.epsilon, "==",
                            pipeline_bound(ec, pa), o.tolerance, Provenance::kExact));
  auto r = make_record("bounds/distill-real-vs-ideal", "exact advantage over classical transcripts",
                       exact_final_distance(src, ec, pa), "<=", chain.epsilon, o.tolerance, Provenance::kExhaustive);
  r.detail = {{"source", src.to_json()}, {"ec", ec.to_json()}, {"pa", pa.to_json()}};
  out.push_back(r);
  return out;
}

inline Records broken_fixture(const ExperimentOptions& o) {
  return {claim_record("broken-fixture/claim", fixtures::broken_claim(), o.tolerance)};
}

}  // namespace checks

inline const std::vector<Check>& check_registry() {
  using namespace checks;
  using Plain = Records (*)(const ExperimentOptions&);
  using Seeded = Records (*)(const ExperimentOptions&, std::uint64_t);
  auto plain = [](std::string id, int crit, Plain fn) {
    return Check{std::move(id), crit, [fn](const ExperimentOptions& o) { return fn(o); }};
  };
  // checks that draw randomness get their own seed stream
  auto seeded_check = [](std::string id, int crit, Seeded fn) {
    const std::uint64_t stream = fnv1a64(id);
    return Check{std::move(id), crit,
                 [fn, stream](const ExperimentOptions& o) { return fn(o, derive_seed(o.seed, stream)); }};
  };
  static const std::vector<Check> reg{
      plain("entropy/examples", 0, pguess_examples),
      seeded_check("entropy/smooth-monotone", 0, smooth_monotone),
      seeded_check("lemmas/distance-chain", 1, distance_chain),
      plain("hash-audit/strong-universality", 2, strong_universality),
      plain("hash-audit/toeplitz-flat", 3, extractor_flat),
      plain("hash-audit/subnormalized-lift", 4, subnormalized_lift),
      plain("distill/pipeline-adversarial", 5, pipeline_adversarial),
      seeded_check("distill/robustness", 0, distill_robustness),
      plain("hash-audit/verif-soundness", 6, verif_soundness),
      seeded_check("fsauth/completeness", 7, fs_completeness),
      plain("fsauth/impersonation", 8, fs_impersonation),
      plain("fsauth/recycled-entropy", 9, fs_recycled_entropy),
      plain("lemmas/guessing", 10, guessing_lemmas),
      plain("bounds/key-replacement", 11, key_replacement),
      plain("bounds/composition", 12, composition),
      plain("bounds/closed-forms", 0, closed_forms),
      plain("bounds/harness-examples", 0, harness_examples),
      seeded_check("lemmas/chain-rule", 13, chain_rule_fuzz),
      plain("broken-fixture/claim", 0, broken_fixture),
  };
  return reg;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"entropy", "hash-audit", "distill", "fsauth", "bounds", "lemmas", "full"};
  return names;
}

// "full" is the union of the named suites; "broken-fixture" is a planted
// failure used to check that a bad claim fails its suite.
inline std::vector<const Check*> suite_checks(const std::string& suite) {
  const bool known = suite == "broken-fixture" ||
                     std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end();
  if (!known) throw ConfigError("unknown suite: " + suite);
  std::vector<const Check*> out;
  for (const auto& c : check_registry()) {
    const auto s = c.suite();
    if (s == suite || (suite == "full" && s != "broken-fixture")) out.push_back(&c);
  }
  return out;
}

inline Report run_checks(const std::vector<const Check*>& list, const ExperimentOptions& o) {
  std::vector<std::vector<ReportRecord>> slots(list.size());
  parallel_for(list.size(), [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto recs = list[i]->run(o);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : recs) r.runtime_s = dt;
    slots[i] = std::move(recs);
  });
  Report rep;
  for (auto& s : slots)
    for (auto& r : s) rep.records.push_back(std::move(r));
  rep.sort();
  for (std::size_t i = 1; i < rep.records.size(); ++i)
    ACBENCH_ENFORCE(rep.records[i - 1].id != rep.records[i].id, "duplicate record id " + rep.records[i].id);
  return rep;
}

struct ExperimentConfig {
  std::vector<std::string> suites;
  ExperimentOptions options;

  nlohmann::json to_json() const {
    auto j = options.to_json();
    j["suites"] = suites;
    return j;
  }
};

// {"suites": [...] | "suite": "...", "seed": u64, "trials": u64, "fuzz": u64, "tolerance": real}
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> keys{"suite", "suites", "seed", "trials", "fuzz", "tolerance"};
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError("unknown config key: " + k);
  if (j.contains("suite") && j.contains("suites")) throw ConfigError("give either suite or suites, not both");
  ExperimentConfig c;
  try {
    if (j.contains("suite")) c.suites = {j.at("suite").get<std::string>()};
    if (j.contains("suites")) c.suites = j.at("suites").get<std::vector<std::string>>();
    c.options.seed = j.value("seed", c.options.seed);
    c.options.trials = j.value("trials", c.options.trials);
    c.options.fuzz = j.value("fuzz", c.options.fuzz);
    c.options.tolerance = j.value("tolerance", c.options.tolerance);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (c.options.trials == 0) throw ConfigError("trials must be at least 1");
  if (!(c.options.tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");
  for (const auto& s : c.suites) suite_checks(s);
  return c;
}

inline Report run_experiment(const ExperimentConfig& cfg) {
  std::vector<const Check*> list;
  std::set<std::string> seen;
  for (const auto& s : cfg.suites)
    for (const Check* c : suite_checks(s))
      if (seen.insert(c->id).second) list.push_back(c);
  Report rep = run_checks(list, cfg.options);
  rep.suites = cfg.suites;
  rep.config = cfg.to_json();
  return rep;
}

}  // namespace acbench
