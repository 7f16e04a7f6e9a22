#pragma once

// Keyed hash families, strongly universal MACs, seeded extractors and the
// exhaustive audits that measure their figures of merit.
//
// Every keyed function here exposes the same word-level interface
// (input_len, output_len, key_len, eval_word) so the audits also run on test
// doubles. Words hold the big-endian value of the corresponding bitstring.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "acbench/bitlinalg.hpp"
#include "acbench/entropy.hpp"
#include "acbench/error.hpp"
#include "json.hpp"

namespace acbench {

template <class F>
concept KeyedFunction = requires(const F& f, std::uint64_t key, std::uint64_t x) {
  { f.input_len() } -> std::convertible_to<std::size_t>;
  { f.output_len() } -> std::convertible_to<std::size_t>;
  { f.key_len() } -> std::convertible_to<std::size_t>;
  { f.eval_word(key, x) } -> std::convertible_to<std::uint64_t>;
};

template <KeyedFunction F>
Bitstring eval_bits(const F& f, const Bitstring& key, const Bitstring& x) {
  ACBENCH_ENFORCE(key.size() == f.key_len(), "key has the wrong length");
  ACBENCH_ENFORCE(x.size() == f.input_len(), "input has the wrong length");
  return Bitstring::from_uint(f.eval_word(key.to_uint(), x.to_uint()), f.output_len());
}

// phi(x * y): the first m bits of the GF(2^n) product.
inline std::uint64_t gf_product_prefix(std::uint64_t x, std::uint64_t y, std::size_t n, std::size_t m) {
  const auto f = gf_field(static_cast<unsigned>(n));
  const std::uint32_t p = gf_mul_raw(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), f);
  return static_cast<std::uint64_t>(p) >> (n - m);
}

// --- extractors -----------------------------------------------------------------

// Seeded extractor {0,1}^n x {0,1}^d -> {0,1}^m with claimed error
// (nu / 2) sqrt(2^(m - k)) at min-entropy k.
class ExtractorSpec {
 public:
  enum class Kind { kToeplitz, kGfMultiply, kComposite, kEmpty };

  static ExtractorSpec toeplitz(std::size_t n, std::size_t m, double nu = 1.0) {
    ACBENCH_ENFORCE(n >= 1 && m >= 1 && n + m - 1 <= 62, "toeplitz extractor size out of range");
    return ExtractorSpec(Kind::kToeplitz, n, m, n + m - 1, nu);
  }
  // Seed y in GF(2^n); output the first m bits of x * y.
  static ExtractorSpec gf_multiply(std::size_t n, std::size_t m, double nu = 1.0) {
    ACBENCH_ENFORCE(n >= 1 && n <= 16, "gf_multiply extractor needs 1 <= n <= 16");
    ACBENCH_ENFORCE(m >= 1 && m <= n, "gf_multiply extractor needs 1 <= m <= n");
    return ExtractorSpec(Kind::kGfMultiply, n, m, n, nu);
  }
  static ExtractorSpec empty(std::size_t n) { return ExtractorSpec(Kind::kEmpty, n, 0, 0, 0.0); }

  // (x, z1 || z2) -> E1(x, z1) || E2(x, z2)
  static ExtractorSpec composite(const ExtractorSpec& a, const ExtractorSpec& b) {
    ACBENCH_ENFORCE(a.n_ == b.n_, "composed extractors must share the input length");
    ACBENCH_ENFORCE(a.d_ + b.d_ <= 62 && a.m_ + b.m_ <= 62, "composed extractor too large");
    if (b.kind_ == Kind::kEmpty) return a;
    if (a.kind_ == Kind::kEmpty) return b;
    ExtractorSpec c(Kind::kComposite, a.n_, a.m_ + b.m_, a.d_ + b.d_, a.nu_ + b.nu_);
    c.parts_ = std::make_shared<std::pair<ExtractorSpec, ExtractorSpec>>(a, b);
    return c;
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t input_len() const noexcept { return n_; }
  std::size_t output_len() const noexcept { return m_; }
  std::size_t key_len() const noexcept { return d_; }
  std::size_t seed_len() const noexcept { return d_; }
  double nu() const noexcept { return nu_; }
  bool linear() const noexcept { return true; }

  double error_at(double k) const {
    if (m_ == 0) return 0.0;
    return nu_ / 2.0 * std::sqrt(std::exp2(static_cast<double>(m_) - k));
  }

  std::uint64_t eval_word(std::uint64_t seed, std::uint64_t x) const {
    switch (kind_) {
      case Kind::kToeplitz: return toeplitz_apply_word(seed, x, m_, n_);
      case Kind::kGfMultiply: return gf_product_prefix(x, seed, n_, m_);
      case Kind::kEmpty: return 0;
      case Kind::kComposite: {
        const auto& [a, b] = *parts_;
        const std::uint64_t s1 = seed >> b.d_, s2 = seed & low_mask(b.d_);
        return (a.eval_word(s1, x) << b.m_) | b.eval_word(s2, x);
      }
    }
    return 0;
  }

  std::string kind_name() const {
    switch (kind_) {
      case Kind::kToeplitz: return "toeplitz";
      case Kind::kGfMultiply: return "gf-multiply";
      case Kind::kComposite: return "composite";
      case Kind::kEmpty: return "empty";
    }
    return "?";
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", kind_name()}, {"n", n_}, {"m", m_}, {"d", d_}, {"nu", nu_}};
    if (parts_) j["parts"] = {parts_->first.to_json(), parts_->second.to_json()};
    return j;
  }

 private:
  ExtractorSpec(Kind kind, std::size_t n, std::size_t m, std::size_t d, double nu)
      : kind_(kind), n_(n), m_(m), d_(d), nu_(nu) {}

  Kind kind_;
  std::size_t n_, m_, d_;
  double nu_;
  std::shared_ptr<const std::pair<ExtractorSpec, ExtractorSpec>> parts_;
};

inline Bitstring ext_eval(const ExtractorSpec& spec, const Bitstring& x, const Bitstring& seed) {
  return eval_bits(spec, seed, x);
}

// An extractor together with the (k, eps) rating it is used at.
struct RatedExtractor {
  ExtractorSpec spec;
  double k;
  double eps;

  static RatedExtractor at(const ExtractorSpec& spec, double k) { return {spec, k, spec.error_at(k)}; }
};

// A (k, eps) extractor for normalized states is a (k + 1, 2 eps) extractor
// for subnormalized ones.
inline RatedExtractor lift_to_subnormalized(const RatedExtractor& r) { return {r.spec, r.k + 1.0, 2.0 * r.eps}; }

// (k, e1) and (k - m1, e2) compose to (k, e1 + e2) on concatenated seeds.
inline RatedExtractor compose_extractors(const RatedExtractor& e1, const RatedExtractor& e2) {
  ACBENCH_ENFORCE(std::abs(e2.k - (e1.k - static_cast<double>(e1.spec.output_len()))) <= 1e-12,
                  "second extractor must be rated at k - m1");
  return {ExtractorSpec::composite(e1.spec, e2.spec), e1.k, e1.eps + e2.eps};
}

// --- hash families ------------------------------------------------------------

// Affine keyed families h(x, l1 || l2) = f(x, l1) XOR l2. Both are linear in x.
class HashFamily {
 public:
  enum class Kind { kToeplitzAffine, kGfMultiplyAffine };

  static HashFamily toeplitz_affine(std::size_t n, std::size_t m, double nu = 1.0) {
    return HashFamily(Kind::kToeplitzAffine, ExtractorSpec::toeplitz(n, m, nu));
  }
  static HashFamily gf_multiply_affine(std::size_t n, std::size_t m, double nu = 1.0) {
    return HashFamily(Kind::kGfMultiplyAffine, ExtractorSpec::gf_multiply(n, m, nu));
  }
  // Key-private hash built from an arbitrary extractor.
  static HashFamily key_private(const ExtractorSpec& ext) {
    return HashFamily(ext.kind() == ExtractorSpec::Kind::kGfMultiply ? Kind::kGfMultiplyAffine
                                                                     : Kind::kToeplitzAffine,
                      ext);
  }

  Kind kind() const noexcept { return kind_; }
  const ExtractorSpec& extractor() const noexcept { return ext_; }
  std::size_t input_len() const noexcept { return ext_.input_len(); }
  std::size_t output_len() const noexcept { return ext_.output_len(); }
  std::size_t key_len() const noexcept { return ext_.seed_len() + ext_.output_len(); }
  double nu() const noexcept { return ext_.nu(); }
  bool linear() const noexcept { return true; }

  std::uint64_t eval_word(std::uint64_t key, std::uint64_t x) const {
    const std::size_t m = output_len();
    return ext_.eval_word(key >> m, x) ^ (key & low_mask(m));
  }

  std::string kind_name() const {
    return kind_ == Kind::kToeplitzAffine ? "toeplitz-affine" : "gf-multiply-affine";
  }

  nlohmann::json to_json() const {
    return {{"kind", kind_name()}, {"n", input_len()}, {"m", output_len()}, {"r", key_len()}, {"nu", nu()}};
  }

  static HashFamily from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const auto n = j.at("n").get<std::size_t>(), m = j.at("m").get<std::size_t>();
    const double nu = j.value("nu", 1.0);
    if (kind == "toeplitz-affine") return toeplitz_affine(n, m, nu);
    if (kind == "gf-multiply-affine") return gf_multiply_affine(n, m, nu);
    throw ConfigError("unknown hash family kind: " + kind);
  }

 private:
  HashFamily(Kind kind, ExtractorSpec ext) : kind_(kind), ext_(std::move(ext)) {}
  Kind kind_;
  ExtractorSpec ext_;
};

inline Bitstring hash_eval(const HashFamily& f, const Bitstring& key, const Bitstring& x) {
  return eval_bits(f, key, x);
}

inline HashFamily key_private_hash(const ExtractorSpec& spec) { return HashFamily::key_private(spec); }

// mac(x, y || b) = phi(x * y) XOR b over GF(2^n_mac), phi = first m_mac bits.
struct MacSpec {
  HashFamily family;
  double eps_mac;

  static MacSpec gf(std::size_t n_mac, std::size_t m_mac) {
    return {HashFamily::gf_multiply_affine(n_mac, m_mac), std::exp2(-static_cast<double>(m_mac))};
  }
  std::size_t msg_len() const { return family.input_len(); }
  std::size_t tag_len() const { return family.output_len(); }
  std::size_t key_len() const { return family.key_len(); }
};

inline Bitstring mac_eval(const MacSpec& spec, const Bitstring& key, const Bitstring& msg) {
  return eval_bits(spec.family, key, msg);
}

// t || h2(x || t, l2) with t = h1(x, l1); the key is l1 || l2. `y` is a fixed
// string spliced between x and t in the second input, so the composed hash is
// chi_y(x, l1 || l2) = s || mac(x || y || s, l2).
class ChainedHash {
 public:
  ChainedHash(HashFamily first, HashFamily second, Bitstring y)
      : first_(std::move(first)), second_(std::move(second)), y_(std::move(y)) {
    ACBENCH_ENFORCE(second_.input_len() == first_.input_len() + y_.size() + first_.output_len(),
                    "second hash input must be |x| + |y| + |t|");
    ACBENCH_ENFORCE(key_len() <= 62 && output_len() <= 62, "chained hash too large");
  }
  std::size_t input_len() const { return first_.input_len(); }
  std::size_t output_len() const { return first_.output_len() + second_.output_len(); }
  std::size_t key_len() const { return first_.key_len() + second_.key_len(); }
  double nu() const { return first_.nu() + second_.nu(); }

  std::uint64_t eval_word(std::uint64_t key, std::uint64_t x) const {
    const std::uint64_t k1 = key >> second_.key_len(), k2 = key & low_mask(second_.key_len());
    const std::uint64_t t = first_.eval_word(k1, x);
    const std::uint64_t in2 = (((x << y_.size()) | y_.to_uint()) << first_.output_len()) | t;
    return (t << second_.output_len()) | second_.eval_word(k2, in2);
  }

 private:
  HashFamily first_, second_;
  Bitstring y_;
};

// --- audits -------------------------------------------------------------------

struct AuditResult {
  double epsilon = 0.0;
  std::vector<std::string> witness;  // bitstrings attaining the maximum

  nlohmann::json to_json() const { return {{"epsilon", epsilon}, {"witness", witness}}; }
};

inline void check_budget(const std::string& what, double required, std::uint64_t budget) {
  if (required > static_cast<double>(budget)) {
    throw BudgetExceeded(what, required >= 1.8e19 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(required),
                         budget);
  }
}

// Exact max over x != x' of Pr_key[f(x) = f(x')].
template <KeyedFunction F>
AuditResult audit_universality(const F& f, std::uint64_t budget = kDefaultAuditBudget) {
  const std::size_t n = f.input_len(), r = f.key_len();
  check_budget("audit_universality", std::exp2(static_cast<double>(r + 2 * n)), budget);
  ACBENCH_ENFORCE(n >= 1, "universality needs at least two inputs");
  const std::uint64_t nx = std::uint64_t{1} << n, nk = std::uint64_t{1} << r;
  std::vector<std::uint64_t> collisions(nx * nx, 0), out(nx);
  for (std::uint64_t k = 0; k < nk; ++k) {
    for (std::uint64_t x = 0; x < nx; ++x) out[x] = f.eval_word(k, x);
    for (std::uint64_t x = 0; x < nx; ++x)
      for (std::uint64_t y = x + 1; y < nx; ++y)
        if (out[x] == out[y]) ++collisions[x * nx + y];
  }
  std::uint64_t best = 0, bx = 0, by = 1;
  for (std::uint64_t x = 0; x < nx; ++x)
    for (std::uint64_t y = x + 1; y < nx; ++y)
      if (collisions[x * nx + y] > best) {
        best = collisions[x * nx + y];
        bx = x;
        by = y;
      }
  return {static_cast<double>(best) / static_cast<double>(nk),
          {Bitstring::from_uint(bx, n).to_string(), Bitstring::from_uint(by, n).to_string()}};
}

struct StrongUniversalityResult {
  double joint_max = 0.0;  // max Pr[f(x1) = t1 and f(x2) = t2]
  double eps_mac = 0.0;    // joint_max * 2^m
  std::vector<std::string> witness;  // x1, x2, t1, t2

  nlohmann::json to_json() const {
    return {{"epsilon", eps_mac}, {"joint_max", joint_max}, {"witness", witness}};
  }
};

template <KeyedFunction F>
StrongUniversalityResult audit_strong_universality(const F& f, std::uint64_t budget = kDefaultAuditBudget) {
  const std::size_t n = f.input_len(), m = f.output_len(), r = f.key_len();
  check_budget("audit_strong_universality", std::exp2(static_cast<double>(r + 2 * n)), budget);
  const std::uint64_t nx = std::uint64_t{1} << n, nk = std::uint64_t{1} << r, nt = std::uint64_t{1} << m;
  // tags[k * nx + x]
  std::vector<std::uint64_t> tags(nk * nx);
  for (std::uint64_t k = 0; k < nk; ++k)
    for (std::uint64_t x = 0; x < nx; ++x) tags[k * nx + x] = f.eval_word(k, x);
  StrongUniversalityResult res;
  std::uint64_t best = 0;
  std::vector<std::uint64_t> count(nt * nt);
  for (std::uint64_t x1 = 0; x1 < nx; ++x1) {
    for (std::uint64_t x2 = 0; x2 < nx; ++x2) {
      if (x1 == x2) continue;  // the definition only constrains distinct messages
      std::fill(count.begin(), count.end(), 0);
      for (std::uint64_t k = 0; k < nk; ++k) ++count[tags[k * nx + x1] * nt + tags[k * nx + x2]];
      for (std::uint64_t c = 0; c < nt * nt; ++c) {
        if (count[c] > best) {
          best = count[c];
          res.witness = {Bitstring::from_uint(x1, n).to_string(), Bitstring::from_uint(x2, n).to_string(),
                         Bitstring::from_uint(c / nt, m).to_string(), Bitstring::from_uint(c % nt, m).to_string()};
        }
      }
    }
  }
  res.joint_max = static_cast<double>(best) / static_cast<double>(nk);
  res.eps_mac = res.joint_max * static_cast<double>(nt);
  return res;
}

// Affine-linearity identity f(k, a ^ b) ^ f(k, 0) == f(k, a) ^ f(k, b) for all (k, a, b).
template <KeyedFunction F>
bool audit_linearity(const F& f, std::uint64_t budget = kDefaultAuditBudget) {
  const std::size_t n = f.input_len(), r = f.key_len();
  check_budget("audit_linearity", std::exp2(static_cast<double>(r + 2 * n)), budget);
  const std::uint64_t nx = std::uint64_t{1} << n, nk = std::uint64_t{1} << r;
  for (std::uint64_t k = 0; k < nk; ++k) {
    const std::uint64_t z = f.eval_word(k, 0);
    for (std::uint64_t a = 0; a < nx; ++a)
      for (std::uint64_t b = 0; b < nx; ++b)
        if ((f.eval_word(k, a ^ b) ^ z) != (f.eval_word(k, a) ^ f.eval_word(k, b))) return false;
  }
  return true;
}

// For every fixed x the key-averaged output is exactly uniform.
template <KeyedFunction F>
bool audit_uniformity(const F& f, std::uint64_t budget = kDefaultAuditBudget) {
  const std::size_t n = f.input_len(), m = f.output_len(), r = f.key_len();
  check_budget("audit_uniformity", std::exp2(static_cast<double>(r + n)), budget);
  const std::uint64_t nx = std::uint64_t{1} << n, nk = std::uint64_t{1} << r, nt = std::uint64_t{1} << m;
  if (nk % nt != 0) return false;
  std::vector<std::uint64_t> count(nt);
  for (std::uint64_t x = 0; x < nx; ++x) {
    std::fill(count.begin(), count.end(), 0);
    for (std::uint64_t k = 0; k < nk; ++k) ++count[f.eval_word(k, x)];
    for (auto c : count)
      if (c != nk / nt) return false;
  }
  return true;
}

// Exact (1/2) || rho_{Ext(X,Z) Z E} - tau_K (x) tau_Z (x) rho_E ||_1 for a
// classical source whose X index is the input word.
template <KeyedFunction F>
double measure_extractor_distance(const F& ext, const ClassicalJoint& source,
                                  std::uint64_t budget = kDefaultAuditBudget) {
  const std::size_t n = ext.input_len(), m = ext.output_len(), d = ext.key_len();
  ACBENCH_ENFORCE(source.nx() == (std::size_t{1} << n), "source alphabet must be {0,1}^n");
  check_budget("measure_extractor_distance",
               std::exp2(static_cast<double>(d + n)) * static_cast<double>(source.ne()), budget);
  const std::uint64_t nz = std::uint64_t{1} << d, nk = std::uint64_t{1} << m;
  const double inv = 1.0 / static_cast<double>(nz);
  const double ideal_scale = 1.0 / static_cast<double>(nz * nk);
  std::vector<double> col(nk);
  double dist = 0.0;
  for (std::size_t e = 0; e < source.ne(); ++e) {
    const double pe = source.column_mass(e);
    if (pe == 0.0) continue;
    for (std::uint64_t z = 0; z < nz; ++z) {
      std::fill(col.begin(), col.end(), 0.0);
      for (std::uint64_t x = 0; x < source.nx(); ++x) {
        const double p = source(x, e);
        if (p != 0.0) col[ext.eval_word(z, x)] += p * inv;
      }
      for (std::uint64_t k = 0; k < nk; ++k) dist += std::abs(col[k] - pe * ideal_scale);
    }
  }
  return 0.5 * dist;
}

// Realized key privacy on a classical instance. X has distribution p_x over
// {0,1}^n, L is uniform and independent, T = h(X, L), and E is produced from
// (X, T) by the stochastic map e_given_xt[x * 2^m + t][e]. Returns the full
// trace norm || rho_LTE - tau_L (x) rho_TE ||_1 together with Hmin(X|TE).
struct KeyPrivacyMeasurement {
  double norm = 0.0;
  double hmin_x_given_te = 0.0;
  double bound_factor = 0.0;  // sqrt(2^(-Hmin + m))
  double realized_nu() const { return bound_factor > 0.0 ? norm / bound_factor : 0.0; }
};

template <KeyedFunction F>
KeyPrivacyMeasurement measure_key_privacy(const F& h, const std::vector<double>& p_x,
                                          const std::vector<std::vector<double>>& e_given_xt,
                                          std::uint64_t budget = kDefaultAuditBudget) {
  const std::size_t n = h.input_len(), m = h.output_len(), r = h.key_len();
  const std::uint64_t nx = std::uint64_t{1} << n, nt = std::uint64_t{1} << m, nl = std::uint64_t{1} << r;
  ACBENCH_ENFORCE(p_x.size() == nx, "p_x must cover {0,1}^n");
  ACBENCH_ENFORCE(e_given_xt.size() == nx * nt, "E channel must be indexed by (x, t)");
  const std::size_t ne = e_given_xt.front().size();
  check_budget("measure_key_privacy", static_cast<double>(nl * nx * ne), budget);

  // joint p(l, t, e) and p(x, t, e)
  std::vector<double> p_lte(nl * nt * ne, 0.0), p_te(nt * ne, 0.0);
  ClassicalJoint p_x_te(nx, nt * ne);
  const double pl = 1.0 / static_cast<double>(nl);
  for (std::uint64_t l = 0; l < nl; ++l) {
    for (std::uint64_t x = 0; x < nx; ++x) {
      if (p_x[x] == 0.0) continue;
      const std::uint64_t t = h.eval_word(l, x);
      const auto& ch = e_given_xt[x * nt + t];
      for (std::size_t e = 0; e < ne; ++e) {
        const double v = pl * p_x[x] * ch[e];
        if (v == 0.0) continue;
        p_lte[(l * nt + t) * ne + e] += v;
        p_te[t * ne + e] += v;
        p_x_te.add(x, t * ne + e, v);
      }
    }
  }
  KeyPrivacyMeasurement res;
  for (std::uint64_t l = 0; l < nl; ++l)
    for (std::uint64_t te = 0; te < nt * ne; ++te) res.norm += std::abs(p_lte[l * nt * ne + te] - pl * p_te[te]);
  res.hmin_x_given_te = hmin_classical(p_x_te);
  res.bound_factor = std::sqrt(std::exp2(-res.hmin_x_given_te + static_cast<double>(m)));
  return res;
}

}  // namespace acbench
