#pragma once

// Key distillation: secure-sketch error correction, hash verification and
// privacy amplification over synthetic min-entropy sources, with exact
// audits of every stage on enumerable instances.
//
// Strings are n-bit words (index 0 = MSB). Eve's view of a run is exactly the
// authentic-channel record (s, f, tag, decision, z).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acbench/bitlinalg.hpp"
#include "acbench/entropy.hpp"
#include "acbench/error.hpp"
#include "acbench/hashing.hpp"
#include "acbench/util.hpp"
#include "json.hpp"

namespace acbench {

// All n-bit error patterns of weight <= radius, lightest first.
inline std::vector<std::uint64_t> hamming_ball_masks(std::size_t n, std::size_t radius) {
  ACBENCH_ENFORCE(n <= 24, "hamming ball enumeration limited to n <= 24");
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v)
    if (static_cast<std::size_t>(std::popcount(v)) <= radius) out.push_back(v);
  std::stable_sort(out.begin(), out.end(), [](std::uint64_t a, std::uint64_t b) {
    return std::popcount(a) < std::popcount(b);
  });
  return out;
}

inline std::size_t correctable_radius(std::size_t n, double phi) {
  ACBENCH_ENFORCE(phi >= 0.0 && phi <= 1.0, "phi must lie in [0, 1]");
  return static_cast<std::size_t>(std::floor(phi * static_cast<double>(n) + 1e-9));
}

// --- secure sketch ----------------------------------------------------------------

template <KeyedFunction F>
std::uint64_t synd_word(const F& sketch, std::uint64_t key, std::uint64_t x) {
  return sketch.eval_word(key, x);
}

// Recovery rules. kUnique: the unique ball member whose sketch matches s.
// kNearest: the unique match of smallest distance to y (ties fail), so y = x
// always recovers.
enum class Recovery { kUnique, kNearest };

// nullopt on no match or ambiguity. `ball` must be ordered lightest first.
template <KeyedFunction F>
std::optional<std::uint64_t> corr_word(const F& sketch, std::uint64_t key, std::uint64_t y, std::uint64_t s,
                                       const std::vector<std::uint64_t>& ball, Recovery rule = Recovery::kUnique) {
  std::optional<std::uint64_t> found;
  int found_weight = -1;
  for (std::uint64_t e : ball) {
    const int w = std::popcount(e);
    if (rule == Recovery::kNearest && found && w > found_weight) break;
    const std::uint64_t z = y ^ e;
    if (sketch.eval_word(key, z) != s) continue;
    if (found) return std::nullopt;
    found = z;
    found_weight = w;
  }
  return found;
}

inline Bitstring synd(const ExtractorSpec& sketch, const Bitstring& x, const Bitstring& key) {
  return eval_bits(sketch, key, x);
}

inline std::optional<Bitstring> corr(const ExtractorSpec& sketch, const Bitstring& y, const Bitstring& s,
                                     const Bitstring& key, std::size_t radius) {
  ACBENCH_ENFORCE(y.size() == sketch.input_len(), "corr input has the wrong length");
  ACBENCH_ENFORCE(s.size() == sketch.output_len(), "syndrome has the wrong length");
  ACBENCH_ENFORCE(key.size() == sketch.key_len(), "sketch key has the wrong length");
  const auto z = corr_word(sketch, key.to_uint(), y.to_uint(), s.to_uint(), hamming_ball_masks(y.size(), radius));
  if (!z) return std::nullopt;
  return Bitstring::from_uint(*z, y.size());
}

// eps_ss = max over x and error patterns e in the ball of
// Pr_key[corr(x ^ e, synd(x)) != x].
template <KeyedFunction F>
AuditResult audit_sketch_failure(const F& sketch, std::size_t radius, std::uint64_t budget = kDefaultAuditBudget,
                                 Recovery rule = Recovery::kUnique) {
  const std::size_t n = sketch.input_len();
  const auto ball = hamming_ball_masks(n, radius);
  const double b = static_cast<double>(ball.size());
  check_budget("audit_sketch_failure", std::exp2(static_cast<double>(n + sketch.key_len())) * b * b, budget);
  const std::uint64_t nk = std::uint64_t{1} << sketch.key_len();
  std::uint64_t worst = 0, wx = 0, we = 0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    for (std::uint64_t e : ball) {
      std::uint64_t fails = 0;
      for (std::uint64_t k = 0; k < nk; ++k) {
        const auto z = corr_word(sketch, k, x ^ e, sketch.eval_word(k, x), ball, rule);
        if (!z || *z != x) ++fails;
      }
      if (fails > worst) {
        worst = fails;
        wx = x;
        we = e;
      }
    }
  }
  return {static_cast<double>(worst) / static_cast<double>(nk),
          {Bitstring::from_uint(wx, n).to_string(), Bitstring::from_uint(we, n).to_string()}};
}

// --- parameters -------------------------------------------------------------------

struct EcParams {
  std::size_t n = 0, r = 0, t = 0;
  double phi = 0.0;
  ExtractorSpec sketch = ExtractorSpec::empty(1);
  std::uint64_t sketch_key = 0;
  HashFamily verif = HashFamily::gf_multiply_affine(1, 1);
  double eps_verif = 1.0;

  // Builds the Toeplitz sketch (empty when r = 0) and the GF verification
  // family, auditing eps_verif exhaustively.
  static EcParams make(std::size_t n, std::size_t r, std::size_t t, double phi, std::uint64_t sketch_key = 0,
                       std::uint64_t budget = kDefaultAuditBudget) {
    ACBENCH_ENFORCE(n >= 1 && n <= 16, "error correction needs 1 <= n <= 16");
    ACBENCH_ENFORCE(r <= n && t >= 1 && t <= n, "need r <= n and 1 <= t <= n");
    EcParams p;
    p.n = n;
    p.r = r;
    p.t = t;
    p.phi = phi;
    correctable_radius(n, phi);
    p.sketch = r == 0 ? ExtractorSpec::empty(n) : ExtractorSpec::toeplitz(n, r);
    p.sketch_key = sketch_key & low_mask(p.sketch.key_len());
    p.verif = HashFamily::gf_multiply_affine(n, t);
    p.eps_verif = audit_universality(p.verif, budget).epsilon;
    return p;
  }

  std::size_t radius() const { return correctable_radius(n, phi); }

  EcParams with_sketch_key(std::uint64_t key) const {
    EcParams p = *this;
    p.sketch_key = key & low_mask(sketch.key_len());
    return p;
  }

  nlohmann::json to_json() const {
    return {{"n", n},
            {"r", r},
            {"t", t},
            {"phi", phi},
            {"sketch", sketch.to_json()},
            {"sketch_key", Bitstring::from_uint(sketch_key, sketch.key_len()).to_string()},
            {"verif", verif.to_json()},
            {"eps_verif", eps_verif}};
  }
};

struct PaParams {
  ExtractorSpec ext = ExtractorSpec::empty(1);
  double k = 0.0;
  double delta = 0.0;

  static PaParams make(std::size_t n, std::size_t m, double k, double delta = 0.0) {
    ACBENCH_ENFORCE(delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
    return {m == 0 ? ExtractorSpec::empty(n) : ExtractorSpec::toeplitz(n, m), k, delta};
  }
  std::size_t m() const { return ext.output_len(); }
  double eps_pa() const { return ext.error_at(k); }

  nlohmann::json to_json() const {
    return {{"ext", ext.to_json()}, {"m", m()}, {"k", k}, {"delta", delta}, {"eps_pa", eps_pa()}};
  }
};

// eps_verif + eps_pa + 2 delta
inline double pipeline_bound(const EcParams& ec, const PaParams& pa) {
  return ec.eps_verif + pa.eps_pa() + 2.0 * pa.delta;
}

// --- sources ----------------------------------------------------------------------

struct SourceOutcome {
  double p = 0.0;
  std::optional<std::uint64_t> x, y;  // both empty on the abort branch
  std::uint64_t e = 0;
};

class SourceModel {
 public:
  enum class Kind { kClassicalJoint, kNoisyCorrelated, kAdversarial };

  SourceModel(Kind kind, std::size_t n, std::size_t e_card, double k, double delta, std::vector<SourceOutcome> out)
      : kind_(kind), n_(n), e_card_(e_card), k_(k), delta_(delta), outcomes_(std::move(out)) {
    ACBENCH_ENFORCE(n_ >= 1 && n_ <= 16 && e_card_ >= 1, "source size out of range");
    double acc = 0.0;
    for (const auto& o : outcomes_) {
      ACBENCH_ENFORCE(o.p >= 0.0 && o.e < e_card_, "malformed source outcome");
      ACBENCH_ENFORCE(o.x.has_value() == o.y.has_value(), "Bob outputs abort exactly when Alice does");
      ACBENCH_ENFORCE(!o.x || (*o.x >> n_) == 0, "source string longer than n");
      acc += o.p;
      cumulative_.push_back(acc);
    }
    ACBENCH_ENFORCE(std::abs(acc - 1.0) <= 1e-9, "source outcome probabilities must sum to 1");
  }

  Kind kind() const noexcept { return kind_; }
  std::string kind_name() const {
    switch (kind_) {
      case Kind::kClassicalJoint: return "classical-joint";
      case Kind::kNoisyCorrelated: return "noisy-correlated";
      case Kind::kAdversarial: return "adversarial";
    }
    return "?";
  }
  std::size_t n() const noexcept { return n_; }
  std::size_t e_card() const noexcept { return e_card_; }
  double k() const noexcept { return k_; }
  double delta() const noexcept { return delta_; }
  const std::vector<SourceOutcome>& outcomes() const noexcept { return outcomes_; }

  const SourceOutcome& sample(Rng& rng) const {
    const double u = random_unit(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return outcomes_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

  // Subnormalized p(x, e) of the non-abort branch.
  ClassicalJoint x_e_joint() const {
    ClassicalJoint j(std::size_t{1} << n_, e_card_);
    for (const auto& o : outcomes_)
      if (o.x && o.p > 0.0) j.add(*o.x, o.e, o.p);
    return j;
  }

  double audited_hmin() const { return hmin_classical(x_e_joint()); }

  // Largest Pr[w(X, Y) > radius] contribution; 0 for sources inside the
  // correctable set.
  double mass_outside_ball(std::size_t radius) const {
    double m = 0.0;
    for (const auto& o : outcomes_)
      if (o.x && static_cast<std::size_t>(std::popcount(*o.x ^ *o.y)) > radius) m += o.p;
    return m;
  }

  nlohmann::json to_json() const {
    return {{"kind", kind_name()}, {"n", n_}, {"e_card", e_card_}, {"k", k_}, {"delta", delta_},
            {"outcomes", outcomes_.size()}};
  }

 private:
  Kind kind_;
  std::size_t n_, e_card_;
  double k_, delta_;
  std::vector<SourceOutcome> outcomes_;
  std::vector<double> cumulative_;
};

// X = Y drawn from p(x, e); missing mass is the abort branch. The declared
// rating is checked against the audited (smooth) min-entropy.
inline SourceModel make_classical_joint_source(const ClassicalJoint& p, double k, double delta = 0.0) {
  const std::size_t nx = p.nx();
  ACBENCH_ENFORCE(std::has_single_bit(nx) && nx >= 2, "classical-joint source needs |X| = 2^n");
  const std::size_t n = static_cast<std::size_t>(std::countr_zero(nx));
  const double certified = delta == 0.0 ? hmin_classical(p) : hmin_smooth_classical(p, delta).lo;
  ACBENCH_ENFORCE(k <= certified + 1e-9, "declared rating exceeds the audited min-entropy");
  std::vector<SourceOutcome> out;
  for (std::uint64_t x = 0; x < nx; ++x)
    for (std::size_t e = 0; e < p.ne(); ++e)
      if (p(x, e) > 0.0) out.push_back({p(x, e), x, x, e});
  const double bot = 1.0 - p.mass();
  if (bot > 1e-15) out.push_back({bot, std::nullopt, std::nullopt, 0});
  return SourceModel(SourceModel::Kind::kClassicalJoint, n, p.ne(), k, delta, std::move(out));
}

// X uniform, Y = X with i.i.d. flips, E = the first `leak` bits of X.
inline SourceModel make_noisy_correlated_source(std::size_t n, double flip_rate, std::size_t k,
                                                std::optional<std::size_t> leak = std::nullopt) {
  ACBENCH_ENFORCE(n >= 1 && n <= 10, "noisy-correlated source needs 1 <= n <= 10");
  ACBENCH_ENFORCE(flip_rate >= 0.0 && flip_rate <= 1.0, "flip rate must lie in [0, 1]");
  const std::size_t l = leak.value_or(n >= k ? n - k : 0);
  ACBENCH_ENFORCE(l <= n && k + l <= n, "infeasible rating: k > n - leak");
  const std::uint64_t nx = std::uint64_t{1} << n;
  std::vector<SourceOutcome> out;
  for (std::uint64_t x = 0; x < nx; ++x)
    for (std::uint64_t f = 0; f < nx; ++f) {
      const int w = std::popcount(f);
      const double pf = std::pow(flip_rate, w) * std::pow(1.0 - flip_rate, static_cast<double>(n) - w);
      if (pf > 0.0) out.push_back({pf / static_cast<double>(nx), x, x ^ f, x >> (n - l)});
    }
  return SourceModel(SourceModel::Kind::kNoisyCorrelated, n, std::size_t{1} << l, static_cast<double>(k), 0.0,
                     std::move(out));
}

// Noisy source restricted to the correctable set: the flip pattern is uniform
// over the ball of radius max_flips.
inline SourceModel make_bounded_noise_source(std::size_t n, std::size_t max_flips, std::size_t k) {
  ACBENCH_ENFORCE(n >= 1 && n <= 10 && k <= n, "bounded-noise source parameters out of range");
  const std::size_t l = n - k;
  const auto ball = hamming_ball_masks(n, max_flips);
  const std::uint64_t nx = std::uint64_t{1} << n;
  const double p = 1.0 / static_cast<double>(nx * ball.size());
  std::vector<SourceOutcome> out;
  for (std::uint64_t x = 0; x < nx; ++x)
    for (std::uint64_t f : ball) out.push_back({p, x, x ^ f, x >> (n - l)});
  return SourceModel(SourceModel::Kind::kNoisyCorrelated, n, std::size_t{1} << l, static_cast<double>(k), 0.0,
                     std::move(out));
}

// X uniform, Bob holds tamper[x] (arbitrary), Eve holds x & leak_mask.
inline SourceModel make_adversarial_source(std::size_t n, std::uint64_t leak_mask,
                                           const std::vector<std::uint64_t>& tamper) {
  ACBENCH_ENFORCE(n >= 1 && n <= 12, "adversarial source needs 1 <= n <= 12");
  const std::uint64_t nx = std::uint64_t{1} << n;
  ACBENCH_ENFORCE(tamper.size() == nx, "tamper table must cover {0,1}^n");
  ACBENCH_ENFORCE((leak_mask >> n) == 0, "leak mask longer than n");
  std::vector<SourceOutcome> out;
  for (std::uint64_t x = 0; x < nx; ++x) {
    ACBENCH_ENFORCE((tamper[x] >> n) == 0, "tampered string longer than n");
    out.push_back({1.0 / static_cast<double>(nx), x, tamper[x], x & leak_mask});
  }
  const double k = static_cast<double>(n) - std::popcount(leak_mask);
  return SourceModel(SourceModel::Kind::kAdversarial, n, nx, k, 0.0, std::move(out));
}

// --- stages -----------------------------------------------------------------------

struct PipelineTranscript {
  std::optional<Bitstring> s, f, tag;
  bool accept = false;
  std::optional<Bitstring> z;

  nlohmann::json to_json() const {
    auto opt = [](const std::optional<Bitstring>& b) -> nlohmann::json {
      return b ? nlohmann::json(b->to_string()) : nlohmann::json(nullptr);
    };
    return {{"s", opt(s)}, {"f", opt(f)}, {"tag", opt(tag)}, {"decision", accept ? "accept" : "abort"},
            {"z", opt(z)}};
  }
  bool operator==(const PipelineTranscript&) const = default;
};

struct CorrOutput {
  std::uint64_t x;
  std::optional<std::uint64_t> xhat;  // empty on recovery failure
  std::uint64_t s;
};

inline CorrOutput run_corr(std::uint64_t x, std::uint64_t y, const EcParams& ec,
                           const std::vector<std::uint64_t>& ball) {
  const std::uint64_t s = synd_word(ec.sketch, ec.sketch_key, x);
  return {x, corr_word(ec.sketch, ec.sketch_key, y, s, ball), s};
}

inline CorrOutput run_corr(std::uint64_t x, std::uint64_t y, const EcParams& ec) {
  return run_corr(x, y, ec, hamming_ball_masks(ec.n, ec.radius()));
}

struct VerifOutput {
  bool accept;
  std::uint64_t f, tag;
};

// Alice sends (f, f(x)); Bob accepts iff his estimate exists and hashes to the tag.
inline VerifOutput run_verif(std::uint64_t x, std::optional<std::uint64_t> xhat, const EcParams& ec,
                             std::uint64_t f) {
  const std::uint64_t tag = ec.verif.eval_word(f, x);
  return {xhat.has_value() && ec.verif.eval_word(f, *xhat) == tag, f, tag};
}

inline VerifOutput run_verif(std::uint64_t x, std::optional<std::uint64_t> xhat, const EcParams& ec, Rng& rng) {
  return run_verif(x, xhat, ec, random_word(rng, ec.verif.key_len()));
}

inline std::uint64_t run_pa(std::uint64_t x, const PaParams& pa, std::uint64_t z) {
  return pa.ext.eval_word(z, x);
}

// Fraction of verification keys accepting x_hat against x.
inline double verif_acceptance_fraction(const EcParams& ec, std::uint64_t x, std::uint64_t xhat) {
  const std::uint64_t nk = std::uint64_t{1} << ec.verif.key_len();
  std::uint64_t acc = 0;
  for (std::uint64_t f = 0; f < nk; ++f) acc += run_verif(x, xhat, ec, f).accept;
  return static_cast<double>(acc) / static_cast<double>(nk);
}

struct PipelineResult {
  std::optional<Bitstring> key_a, key_b;
  PipelineTranscript transcript;
};

inline void check_pipeline_budget(const SourceModel& src, const EcParams& ec, const PaParams& pa) {
  if (ec.n != src.n() || pa.ext.input_len() != src.n())
    throw ConfigError("pipeline stages disagree on the string length");
  const double expected = src.k() - static_cast<double>(ec.r + ec.t);
  if (std::abs(pa.k - expected) > 1e-9)
    throw ConfigError("inconsistent entropy budget: pa.k must equal source k - r - t = " +
                      format_value(expected));
}

// One seeded run of corr -> verif -> pa.
inline PipelineResult distill_pipeline(const SourceModel& src, const EcParams& ec, const PaParams& pa,
                                       std::uint64_t seed) {
  check_pipeline_budget(src, ec, pa);
  Rng rng(seed);
  const SourceOutcome& o = src.sample(rng);
  const std::uint64_t f = random_word(rng, ec.verif.key_len());
  const std::uint64_t z = random_word(rng, pa.ext.seed_len());
  PipelineResult res;
  if (!o.x) return res;
  const auto c = run_corr(*o.x, *o.y, ec);
  const auto v = run_verif(c.x, c.xhat, ec, f);
  res.transcript.s = Bitstring::from_uint(c.s, ec.r);
  res.transcript.f = Bitstring::from_uint(f, ec.verif.key_len());
  res.transcript.tag = Bitstring::from_uint(v.tag, ec.t);
  res.transcript.accept = v.accept;
  if (!v.accept) return res;
  res.transcript.z = Bitstring::from_uint(z, pa.ext.seed_len());
  res.key_a = Bitstring::from_uint(run_pa(c.x, pa, z), pa.m());
  res.key_b = Bitstring::from_uint(run_pa(*c.xhat, pa, z), pa.m());
  return res;
}

// --- exact audits -----------------------------------------------------------------

// Hmin(X | E S) of the non-abort branch.
inline double audit_hmin_after_corr(const SourceModel& src, const EcParams& ec) {
  const std::size_t ns = std::size_t{1} << ec.r;
  ClassicalJoint j(std::size_t{1} << src.n(), src.e_card() * ns);
  for (const auto& o : src.outcomes())
    if (o.x && o.p > 0.0) j.add(*o.x, o.e * ns + synd_word(ec.sketch, ec.sketch_key, *o.x), o.p);
  return hmin_classical(j);
}

// Hmin(X | E S F T) of the subnormalized accept branch.
inline double audit_hmin_after_verif(const SourceModel& src, const EcParams& ec,
                                     std::uint64_t budget = kDefaultAuditBudget) {
  const std::size_t ns = std::size_t{1} << ec.r, nt = std::size_t{1} << ec.t;
  const std::uint64_t nf = std::uint64_t{1} << ec.verif.key_len();
  const double cols = static_cast<double>(src.e_card() * ns * nt) * static_cast<double>(nf);
  check_budget("audit_hmin_after_verif", cols + static_cast<double>(src.outcomes().size() * nf), budget);
  const auto ball = hamming_ball_masks(ec.n, ec.radius());
  const double inv_nf = 1.0 / static_cast<double>(nf);
  std::vector<double> best(static_cast<std::size_t>(cols), 0.0), buf(best.size(), 0.0);
  std::vector<std::size_t> touched;
  std::vector<std::vector<const SourceOutcome*>> by_x(std::size_t{1} << src.n());
  for (const auto& o : src.outcomes())
    if (o.x && o.p > 0.0) by_x[*o.x].push_back(&o);
  for (const auto& group : by_x) {
    for (const SourceOutcome* o : group) {
      const auto c = run_corr(*o->x, *o->y, ec, ball);
      for (std::uint64_t f = 0; f < nf; ++f) {
        const auto v = run_verif(c.x, c.xhat, ec, f);
        if (!v.accept) continue;
        const std::size_t col = static_cast<std::size_t>(((o->e * ns + c.s) * nf + f) * nt + v.tag);
        if (buf[col] == 0.0) touched.push_back(col);
        buf[col] += o->p * inv_nf;
      }
    }
    for (std::size_t col : touched) {
      best[col] = std::max(best[col], buf[col]);
      buf[col] = 0.0;
    }
    touched.clear();
  }
  double pg = 0.0;
  for (double b : best) pg += b;
  return pg <= 0.0 ? kInf : -std::log2(pg);
}

// Exact (1/2)||rho_real - rho_ideal||_1 over (K_A, K_B, E, s, f, tag,
// decision, z), where the ideal replaces accepted key pairs by a shared
// uniform key with the same view marginal. Aborts output bottom in both.
inline double exact_final_distance(const SourceModel& src, const EcParams& ec, const PaParams& pa,
                                   std::uint64_t budget = kDefaultAuditBudget) {
  check_pipeline_budget(src, ec, pa);
  const std::uint64_t nf = std::uint64_t{1} << ec.verif.key_len();
  const std::uint64_t nz = std::uint64_t{1} << pa.ext.seed_len();
  const std::size_t nk = std::size_t{1} << pa.m(), ns = std::size_t{1} << ec.r, nt = std::size_t{1} << ec.t;
  const std::size_t nx = std::size_t{1} << src.n();
  check_budget("exact_final_distance",
               static_cast<double>(nf) * static_cast<double>(nz) * static_cast<double>(src.outcomes().size()),
               budget);

  struct Live {
    double p;
    std::uint64_t x, xhat;
    std::size_t view;  // e * ns + s
  };
  const auto ball = hamming_ball_masks(ec.n, ec.radius());
  std::vector<Live> live;
  for (const auto& o : src.outcomes()) {
    if (!o.x || o.p == 0.0) continue;
    const auto c = run_corr(*o.x, *o.y, ec, ball);
    if (c.xhat) live.push_back({o.p, c.x, *c.xhat, o.e * ns + c.s});
  }

  std::vector<std::uint64_t> ext(nz * nx);
  for (std::uint64_t z = 0; z < nz; ++z)
    for (std::uint64_t x = 0; x < nx; ++x) ext[z * nx + x] = pa.ext.eval_word(z, x);

  std::vector<double> acc(src.e_card() * ns * nt * nk * nk, 0.0);
  std::vector<std::uint64_t> tag(nx);
  std::vector<std::size_t> views;
  std::vector<char> seen(src.e_card() * ns * nt, 0);
  double total = 0.0;
  const double uniform = 1.0 / static_cast<double>(nk);
  for (std::uint64_t f = 0; f < nf; ++f) {
    for (std::size_t x = 0; x < nx; ++x) tag[x] = ec.verif.eval_word(f, x);
    for (std::uint64_t z = 0; z < nz; ++z) {
      for (const auto& l : live) {
        if (tag[l.xhat] != tag[l.x]) continue;
        const std::size_t v = l.view * nt + tag[l.x];
        if (!seen[v]) {
          seen[v] = 1;
          views.push_back(v);
        }
        acc[(v * nk + ext[z * nx + l.x]) * nk + ext[z * nx + l.xhat]] += l.p;
      }
      for (std::size_t v : views) {
        double pv = 0.0;
        for (std::size_t i = 0; i < nk * nk; ++i) pv += acc[v * nk * nk + i];
        for (std::size_t a = 0; a < nk; ++a)
          for (std::size_t b = 0; b < nk; ++b) {
            double& cell = acc[(v * nk + a) * nk + b];
            total += std::abs(cell - (a == b ? pv * uniform : 0.0));
            cell = 0.0;
          }
        seen[v] = 0;
      }
      views.clear();
    }
  }
  return 0.5 * total / (static_cast<double>(nf) * static_cast<double>(nz));
}

// --- robustness -------------------------------------------------------------------

struct RobustnessEstimate {
  std::uint64_t trials = 0, aborts = 0;
  double rate() const { return trials ? static_cast<double>(aborts) / static_cast<double>(trials) : 0.0; }
  double width() const { return hoeffding_width(trials); }

  nlohmann::json to_json() const {
    return {{"trials", trials}, {"aborts", aborts}, {"abort_rate", rate()}, {"hoeffding_width", width()},
            {"confidence", 0.99}};
  }
};

// Seeded Monte Carlo abort rate of corr + verif. Each trial draws a fresh
// sketch key and verification key; trials run in fixed chunks so the count
// does not depend on the worker count.
inline RobustnessEstimate robustness_mc(const SourceModel& src, const EcParams& ec, std::uint64_t trials,
                                        std::uint64_t seed) {
  constexpr std::uint64_t kChunk = 1024;
  const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
  const auto ball = hamming_ball_masks(ec.n, ec.radius());
  std::vector<std::uint64_t> aborts(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::uint64_t hi = std::min(trials, (c + 1) * kChunk);
    for (std::uint64_t i = c * kChunk; i < hi; ++i) {
      const std::uint64_t key = random_word(rng, ec.sketch.key_len());
      const SourceOutcome& o = src.sample(rng);
      const std::uint64_t f = random_word(rng, ec.verif.key_len());
      if (!o.x) {
        ++aborts[c];
        continue;
      }
      const std::uint64_t s = synd_word(ec.sketch, key, *o.x);
      const auto xhat = corr_word(ec.sketch, key, *o.y, s, ball);
      if (!run_verif(*o.x, xhat, ec, f).accept) ++aborts[c];
    }
  });
  RobustnessEstimate est;
  est.trials = trials;
  for (auto a : aborts) est.aborts += a;
  return est;
}

// --- configuration ----------------------------------------------------------------

struct DistillConfig {
  SourceModel source;
  EcParams ec;
  PaParams pa;
  std::uint64_t seed;
};

// {source: {kind, n, ...}, ec: {r, t, phi, sketch_key}, pa: {m, k, delta}, seed}
inline SourceModel source_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto n = j.at("n").get<std::size_t>();
  if (kind == "noisy-correlated") {
    std::optional<std::size_t> leak;
    if (j.contains("leak")) leak = j.at("leak").get<std::size_t>();
    return make_noisy_correlated_source(n, j.value("flip_rate", 0.0), j.at("k").get<std::size_t>(), leak);
  }
  if (kind == "bounded-noise")
    return make_bounded_noise_source(n, j.at("max_flips").get<std::size_t>(), j.at("k").get<std::size_t>());
  if (kind == "adversarial") {
    const auto mask = Bitstring::from_string(j.at("leak_mask").get<std::string>());
    ACBENCH_ENFORCE(mask.size() == n, "leak_mask must have n bits");
    std::uint64_t flip = 0;
    if (j.contains("tamper_xor")) flip = Bitstring::from_string(j.at("tamper_xor").get<std::string>()).to_uint();
    std::vector<std::uint64_t> tamper(std::size_t{1} << n);
    for (std::uint64_t x = 0; x < tamper.size(); ++x) tamper[x] = (x ^ flip) & low_mask(n);
    return make_adversarial_source(n, mask.to_uint(), tamper);
  }
  if (kind == "classical-joint") {
    const auto rows = j.at("p").get<std::vector<std::vector<double>>>();
    ACBENCH_ENFORCE(rows.size() == (std::size_t{1} << n), "classical-joint table needs 2^n rows");
    return make_classical_joint_source(ClassicalJoint::from_table(rows), j.at("k").get<double>(),
                                       j.value("delta", 0.0));
  }
  throw ConfigError("unknown source kind: " + kind);
}

inline DistillConfig distill_config_from_json(const nlohmann::json& j) {
  try {
    auto src = source_from_json(j.at("source"));
    const auto& e = j.at("ec");
    auto ec = EcParams::make(src.n(), e.at("r").get<std::size_t>(), e.at("t").get<std::size_t>(),
                             e.value("phi", 0.0), e.value("sketch_key", std::uint64_t{0}));
    const auto& p = j.at("pa");
    const double k = p.contains("k") ? p.at("k").get<double>() : src.k() - static_cast<double>(ec.r + ec.t);
    auto pa = PaParams::make(src.n(), p.at("m").get<std::size_t>(), k, p.value("delta", 0.0));
    return {std::move(src), std::move(ec), std::move(pa), j.value("seed", std::uint64_t{1})};
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("distill config: ") + ex.what());
  } catch (const RejectedInput& ex) {
    throw ConfigError(std::string("distill config: ") + ex.what());
  }
}

}  // namespace acbench
