#pragma once

// Quantum authentication with key recycling over conjugate coding.
//
// Alice picks a uniform x, sends H^theta |x> together with y || s || t where
// s = ss(x, l_ss) and t = mac(x || y || s, l_mac). Bob measures in theta,
// recovers x' from (x~, s', l_ss), and accepts iff the recovery succeeds and
// the tag matches. On accept all three keys are recycled; on reject theta is
// discarded.
//
// Words are big-endian (bit index 0 = MSB, qubit 0 = leftmost factor). The
// mac input is the concatenation x || y || s read as one word.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "acbench/bitlinalg.hpp"
#include "acbench/distill.hpp"
#include "acbench/entropy.hpp"
#include "acbench/error.hpp"
#include "acbench/hashing.hpp"
#include "acbench/quantum.hpp"
#include "acbench/util.hpp"
#include "json.hpp"

namespace acbench {

// --- parameters ---------------------------------------------------------------

struct FsParams {
  std::size_t n = 0;
  std::size_t m = 0;
  LinearCode code = LinearCode({Bitstring(1)});
  std::size_t m_ss = 0;
  std::size_t m_mac = 0;
  double phi = 0.0;
  double k = 0.0;
  HashFamily ss = HashFamily::toeplitz_affine(1, 1);
  MacSpec mac = MacSpec::gf(1, 1);
  double nu_ss = 1.0;
  double nu_mac = 1.0;
  double eps_ss = 0.0;   // audited recovery failure
  double eps_mac = 0.0;  // audited strong universality constant

  static FsParams make(std::size_t n, std::size_t m, LinearCode code, std::size_t m_ss, std::size_t m_mac,
                       double phi, double k, std::uint64_t budget = kDefaultAuditBudget) {
    ACBENCH_ENFORCE(n >= 1 && n <= 8, "fsauth supports 1 <= n <= 8");
    ACBENCH_ENFORCE(code.length() == n, "code length must equal n");
    ACBENCH_ENFORCE(m_ss >= 1 && m_ss <= n, "need 1 <= m_ss <= n");
    ACBENCH_ENFORCE(m_mac >= 1, "need m_mac >= 1");
    ACBENCH_ENFORCE(k >= 0.0, "min-entropy rating must be non-negative");
    const std::size_t n_mac = n + m + m_ss;
    ACBENCH_ENFORCE(n_mac <= 16 && m_mac <= n_mac, "mac input n + m + m_ss must be <= 16 and >= m_mac");
    FsParams p;
    p.n = n;
    p.m = m;
    p.code = std::move(code);
    p.m_ss = m_ss;
    p.m_mac = m_mac;
    p.phi = phi;
    p.k = k;
    p.ss = HashFamily::toeplitz_affine(n, m_ss);
    p.mac = MacSpec::gf(n_mac, m_mac);
    p.nu_ss = p.ss.nu();
    p.nu_mac = p.mac.family.nu();
    p.eps_ss = audit_sketch_failure(p.ss, p.radius(), budget, Recovery::kNearest).epsilon;
    p.eps_mac = audit_strong_universality(p.mac.family, budget).eps_mac;
    p.mac.eps_mac = p.eps_mac;
    return p;
  }

  std::size_t radius() const { return correctable_radius(n, phi); }
  std::size_t r_ss() const { return ss.key_len(); }
  std::size_t r_mac() const { return mac.key_len(); }
  std::size_t n_mac() const { return mac.msg_len(); }
  std::uint64_t mac_message(std::uint64_t x, std::uint64_t y, std::uint64_t s) const {
    return (((x << m) | y) << m_ss) | s;
  }
  std::uint64_t codeword(std::size_t i) const { return code.codewords().at(i).to_uint(); }
  bool is_codeword(std::uint64_t w) const { return code.contains(Bitstring::from_uint(w, n)); }

  nlohmann::json to_json() const {
    std::vector<std::string> cw;
    for (const auto& c : code.codewords()) cw.push_back(c.to_string());
    return {{"n", n},         {"m", m},           {"code", cw},          {"d", code.distance()},
            {"m_ss", m_ss},   {"m_mac", m_mac},   {"phi", phi},          {"k", k},
            {"r_ss", r_ss()}, {"r_mac", r_mac()}, {"nu_ss", nu_ss},      {"nu_mac", nu_mac},
            {"eps_ss", eps_ss}, {"eps_mac", eps_mac}, {"ss", ss.to_json()}, {"mac", mac.family.to_json()}};
  }
};

// Prior over codeword indices for the theta resource.
struct ThetaSource {
  std::vector<double> prior;

  static ThetaSource uniform(const LinearCode& c) {
    return {std::vector<double>(c.size(), 1.0 / static_cast<double>(c.size()))};
  }
  double hmin() const { return -std::log2(*std::max_element(prior.begin(), prior.end())); }
  std::size_t sample(Rng& rng) const {
    double u = random_unit(rng), acc = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
      acc += prior[i];
      if (u < acc) return i;
    }
    return prior.size() - 1;
  }
};

inline void check_theta_source(const FsParams& p, const ThetaSource& src) {
  ACBENCH_ENFORCE(src.prior.size() == p.code.size(), "theta prior must cover every codeword");
  double s = 0.0;
  for (double v : src.prior) {
    ACBENCH_ENFORCE(v >= 0.0, "theta prior must be non-negative");
    s += v;
  }
  ACBENCH_ENFORCE(std::abs(s - 1.0) < 1e-9, "theta prior must sum to 1");
}

struct FsKeys {
  std::uint64_t l_ss = 0;
  std::uint64_t l_mac = 0;
  std::optional<std::uint64_t> theta;  // codeword word, nullopt = bottom

  // A discarded theta is omitted rather than written as null.
  nlohmann::json to_json(const FsParams& p) const {
    nlohmann::json j{{"l_ss", Bitstring::from_uint(l_ss, p.r_ss()).to_string()},
                     {"l_mac", Bitstring::from_uint(l_mac, p.r_mac()).to_string()}};
    if (theta) j["theta"] = Bitstring::from_uint(*theta, p.n).to_string();
    return j;
  }
  friend bool operator==(const FsKeys&, const FsKeys&) = default;
};

inline FsKeys random_keys(const FsParams& p, const ThetaSource& src, Rng& rng) {
  FsKeys k;
  k.l_ss = random_word(rng, p.r_ss());
  k.l_mac = random_word(rng, p.r_mac());
  k.theta = p.codeword(src.sample(rng));
  return k;
}

// --- cipher -------------------------------------------------------------------------

// H^bases |bits>, kept symbolic on the honest path.
struct ProductQubits {
  std::uint64_t bits = 0;
  std::uint64_t bases = 0;
  friend bool operator==(const ProductQubits&, const ProductQubits&) = default;
};

using QuantumPart = std::variant<ProductQubits, DensityOperator>;

struct Cipher {
  std::uint64_t y = 0, s = 0, t = 0;
  QuantumPart quantum;

  nlohmann::json classical_json(const FsParams& p) const {
    return {{"y", Bitstring::from_uint(y, p.m).to_string()},
            {"s", Bitstring::from_uint(s, p.m_ss).to_string()},
            {"t", Bitstring::from_uint(t, p.m_mac).to_string()}};
  }
};

inline CMatrix dense_state(const QuantumPart& q, std::size_t n) {
  if (const auto* pq = std::get_if<ProductQubits>(&q))
    return conjugate_code_state(Bitstring::from_uint(pq->bits, n), Bitstring::from_uint(pq->bases, n)).matrix();
  const auto& rho = std::get<DensityOperator>(q);
  ACBENCH_ENFORCE(rho.dim() == (std::size_t{1} << n), "quantum cipher has the wrong dimension");
  return rho.matrix();
}

// Distribution of Bob's outcome when measuring every qubit in theta.
inline std::vector<double> outcome_distribution(const QuantumPart& q, std::size_t n, std::uint64_t theta) {
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> out(dim, 0.0);
  if (const auto* pq = std::get_if<ProductQubits>(&q)) {
    // matching basis: deterministic bit; otherwise uniform
    const std::uint64_t agree = ~(pq->bases ^ theta) & low_mask(n);
    const double w = std::exp2(-static_cast<double>(n - static_cast<std::size_t>(std::popcount(agree))));
    for (std::uint64_t xt = 0; xt < dim; ++xt)
      if (((xt ^ pq->bits) & agree) == 0) out[xt] = w;
    return out;
  }
  const auto o = measure_bb(std::get<DensityOperator>(q), Bitstring::from_uint(theta, n));
  for (std::size_t v = 0; v < dim; ++v) out[v] = o[v].weight;
  return out;
}

struct Encryption {
  Cipher cipher;
  std::uint64_t x = 0;  // kept for audits only
};

inline Cipher encrypt_with(const FsParams& p, const FsKeys& keys, std::uint64_t y, std::uint64_t x) {
  if (!keys.theta) throw RejectedInput("protocol not runnable: theta is bottom");
  ACBENCH_ENFORCE(p.is_codeword(*keys.theta), "theta must be a codeword");
  ACBENCH_ENFORCE(y <= low_mask(p.m), "message has the wrong length");
  Cipher c;
  c.y = y;
  c.s = p.ss.eval_word(keys.l_ss, x);
  c.t = p.mac.family.eval_word(keys.l_mac, p.mac_message(x, y, c.s));
  c.quantum = ProductQubits{x, *keys.theta};
  return c;
}

inline Encryption fs_encrypt(const FsParams& p, const FsKeys& keys, std::uint64_t y, std::uint64_t seed) {
  Rng rng(seed);
  const std::uint64_t x = random_word(rng, p.n);
  return {encrypt_with(p, keys, y, x), x};
}

inline Encryption fs_encrypt(const FsParams& p, const FsKeys& keys, const Bitstring& y, std::uint64_t seed) {
  ACBENCH_ENFORCE(y.size() == p.m, "message has the wrong length");
  return fs_encrypt(p, keys, y.to_uint(), seed);
}

// Bob's classical decision on measurement outcome xt: the recovered x', or
// nullopt on reject. Recovery decodes to the nearest sketch match inside the
// ball, which enforces w(x', xt) <= phi n.
inline std::optional<std::uint64_t> bob_decide(const FsParams& p, std::uint64_t l_ss, std::uint64_t l_mac,
                                               std::uint64_t xt, std::uint64_t y, std::uint64_t s, std::uint64_t t,
                                               const std::vector<std::uint64_t>& ball) {
  const auto xp = corr_word(p.ss, l_ss, xt, s, ball, Recovery::kNearest);
  if (!xp) return std::nullopt;
  if (p.mac.family.eval_word(l_mac, p.mac_message(*xp, y, s)) != t) return std::nullopt;
  return xp;
}

struct Decryption {
  bool accept = false;
  std::optional<std::uint64_t> y;
  FsKeys recycled;
  std::uint64_t xt = 0;
};

inline FsKeys recycle(const FsKeys& keys, bool accept) {
  FsKeys out = keys;
  if (!accept) out.theta.reset();
  return out;
}

inline Decryption decide_on(const FsParams& p, const FsKeys& keys, const Cipher& c, std::uint64_t xt) {
  const auto ball = hamming_ball_masks(p.n, p.radius());
  const bool ok = bob_decide(p, keys.l_ss, keys.l_mac, xt, c.y, c.s, c.t, ball).has_value();
  return {ok, ok ? std::optional<std::uint64_t>(c.y) : std::nullopt, recycle(keys, ok), xt};
}

inline std::uint64_t sample_outcome(const std::vector<double>& dist, Rng& rng) {
  const double u = random_unit(rng);
  double acc = 0.0;
  std::uint64_t last = 0;
  for (std::uint64_t v = 0; v < dist.size(); ++v) {
    if (dist[v] <= 0.0) continue;
    acc += dist[v];
    last = v;
    if (u < acc) return v;
  }
  return last;
}

inline Decryption fs_decrypt(const FsParams& p, const FsKeys& keys, const Cipher& c, std::uint64_t seed) {
  if (!keys.theta) throw RejectedInput("protocol not runnable: theta is bottom");
  Rng rng(seed);
  return decide_on(p, keys, c, sample_outcome(outcome_distribution(c.quantum, p.n, *keys.theta), rng));
}

// Exact acceptance probability over Bob's measurement.
inline double accept_probability(const FsParams& p, const FsKeys& keys, const Cipher& c) {
  if (!keys.theta) throw RejectedInput("protocol not runnable: theta is bottom");
  const auto ball = hamming_ball_masks(p.n, p.radius());
  const auto dist = outcome_distribution(c.quantum, p.n, *keys.theta);
  double acc = 0.0;
  for (std::uint64_t xt = 0; xt < dist.size(); ++xt)
    if (dist[xt] > 0.0 && bob_decide(p, keys.l_ss, keys.l_mac, xt, c.y, c.s, c.t, ball)) acc += dist[xt];
  return acc;
}

// --- adversary library ----------------------------------------------------------------

// Substitution instrument: Kraus operators Q -> Q (x) E acting on the quantum
// cipher plus XOR masks applied to the classical part. E is Eve's register.
struct Instrument {
  std::string name;
  std::vector<CMatrix> kraus;
  std::size_t dim_e = 1;
  std::uint64_t y_mask = 0, s_mask = 0, t_mask = 0;

  CMatrix apply(const CMatrix& rho) const {
    CMatrix out = CMatrix::Zero(rho.rows() * static_cast<Eigen::Index>(dim_e),
                                rho.cols() * static_cast<Eigen::Index>(dim_e));
    for (const auto& k : kraus) out += k * rho * k.adjoint();
    return out;
  }
};

inline Instrument make_instrument(std::string name, std::vector<CMatrix> kraus, std::size_t dim_e,
                                  std::uint64_t y_mask = 0, std::uint64_t s_mask = 0, std::uint64_t t_mask = 0) {
  ACBENCH_ENFORCE(!kraus.empty(), "instrument needs at least one Kraus operator");
  const auto din = kraus.front().cols();
  CMatrix sum = CMatrix::Zero(din, din);
  for (const auto& k : kraus) {
    ACBENCH_ENFORCE(k.cols() == din && k.rows() == din * static_cast<Eigen::Index>(dim_e),
                    "Kraus operator has the wrong shape");
    sum += k.adjoint() * k;
  }
  ACBENCH_ENFORCE((sum - CMatrix::Identity(din, din)).norm() < 1e-9, "instrument must be trace preserving");
  return {std::move(name), std::move(kraus), dim_e, y_mask, s_mask, t_mask};
}

inline Instrument identity_instrument(std::size_t n) {
  return make_instrument("identity", {CMatrix::Identity(1 << n, 1 << n)}, 1);
}

inline Instrument pauli_instrument(const std::string& letters) {
  return make_instrument("pauli:" + letters, {KrausChannel::pauli_string(letters)}, 1);
}

// Measure in basis b, resend the outcome in the same basis, keep a classical copy.
inline Instrument measure_resend_instrument(std::size_t n, std::uint64_t basis) {
  const auto dim = static_cast<Eigen::Index>(1) << n;
  const Bitstring b = Bitstring::from_uint(basis, n);
  std::vector<CMatrix> ops;
  for (Eigen::Index v = 0; v < dim; ++v) {
    const CVector psi = conjugate_code_vector(Bitstring::from_uint(static_cast<std::uint64_t>(v), n), b);
    CVector e = CVector::Zero(dim);
    e[v] = 1.0;
    CVector out(dim * dim);
    for (Eigen::Index i = 0; i < dim; ++i) out.segment(i * dim, dim) = psi[i] * e;
    ops.push_back(out * psi.adjoint());
  }
  return make_instrument("measure-resend:" + b.to_string(), std::move(ops), static_cast<std::size_t>(dim));
}

inline Instrument classical_tamper_instrument(std::size_t n, std::uint64_t y_mask, std::uint64_t s_mask,
                                              std::uint64_t t_mask) {
  return make_instrument("tamper:" + std::to_string(y_mask) + "," + std::to_string(s_mask) + "," +
                             std::to_string(t_mask),
                         {CMatrix::Identity(1 << n, 1 << n)}, 1, y_mask, s_mask, t_mask);
}

// Cipher reordering: exchange qubits i and j.
inline Instrument swap_instrument(std::size_t n, std::size_t i, std::size_t j) {
  ACBENCH_ENFORCE(i < n && j < n && i != j, "swap needs two distinct qubits");
  const std::size_t dim = std::size_t{1} << n;
  CMatrix u = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const std::uint64_t bi = std::uint64_t{1} << (n - 1 - i), bj = std::uint64_t{1} << (n - 1 - j);
  for (std::uint64_t v = 0; v < dim; ++v) {
    std::uint64_t w = v & ~(bi | bj);
    if (v & bi) w |= bj;
    if (v & bj) w |= bi;
    u(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(v)) = 1.0;
  }
  return make_instrument("swap:" + std::to_string(i) + ":" + std::to_string(j), {u}, 1);
}

// Moves qubit q into Eve's register and replaces it by |0>.
inline Instrument store_qubit_instrument(std::size_t n, std::size_t q) {
  ACBENCH_ENFORCE(q < n, "qubit index out of range");
  const std::size_t dim = std::size_t{1} << n;
  const std::uint64_t bq = std::uint64_t{1} << (n - 1 - q);
  CMatrix v = CMatrix::Zero(static_cast<Eigen::Index>(2 * dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t a = 0; a < dim; ++a) {
    const std::uint64_t row = ((a & ~bq) << 1) | ((a & bq) ? 1 : 0);
    v(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(a)) = 1.0;
  }
  return make_instrument("store:" + std::to_string(q), {v}, 2);
}

inline std::vector<std::string> pauli_strings(std::size_t n) {
  std::vector<std::string> out{""};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> next;
    for (const auto& s : out)
      for (char c : std::string("IXYZ")) next.push_back(s + c);
    out = std::move(next);
  }
  return out;
}

// Identity, every Pauli string, measure-resend in every basis and tag tampering.
inline std::vector<Instrument> substitution_library(const FsParams& p, bool with_extras = false) {
  std::vector<Instrument> lib{identity_instrument(p.n)};
  for (const auto& s : pauli_strings(p.n))
    if (s != std::string(p.n, 'I')) lib.push_back(pauli_instrument(s));
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << p.n); ++b) lib.push_back(measure_resend_instrument(p.n, b));
  lib.push_back(classical_tamper_instrument(p.n, 0, 0, 1));
  lib.push_back(classical_tamper_instrument(p.n, 0, 0, low_mask(p.m_mac)));
  if (with_extras) {
    if (p.m > 0) lib.push_back(classical_tamper_instrument(p.n, 1, 0, 0));
    lib.push_back(classical_tamper_instrument(p.n, 0, 1, 0));
    if (p.n >= 2) lib.push_back(swap_instrument(p.n, 0, 1));
    lib.push_back(store_qubit_instrument(p.n, 0));
  }
  return lib;
}

// --- attacks and transcripts --------------------------------------------------------

struct AttackStrategy {
  enum class Kind { kNone, kNoise, kSubstitution, kImpersonation };
  Kind kind = Kind::kNone;
  std::uint64_t noise_pattern = 0;
  std::optional<Instrument> instrument;
  std::optional<Cipher> forgery;

  static AttackStrategy none() { return {}; }
  static AttackStrategy noise(std::uint64_t pattern) { return {Kind::kNoise, pattern, std::nullopt, std::nullopt}; }
  static AttackStrategy substitution(Instrument ins) {
    return {Kind::kSubstitution, 0, std::move(ins), std::nullopt};
  }
  static AttackStrategy impersonation(Cipher forged) {
    return {Kind::kImpersonation, 0, std::nullopt, std::move(forged)};
  }
  std::string kind_name() const {
    switch (kind) {
      case Kind::kNone: return "none";
      case Kind::kNoise: return "noise";
      case Kind::kSubstitution: return "substitution";
      case Kind::kImpersonation: return "impersonation";
    }
    return "?";
  }
};

struct AttackEvent {
  std::string name;
  nlohmann::json data;
};

struct AttackTranscript {
  std::string strategy;
  std::vector<AttackEvent> events;
  bool accept = false;
  std::optional<std::uint64_t> y_out;
  FsKeys recycled;
  std::optional<std::size_t> eve_record;  // Kraus index seen by Eve

  std::vector<std::string> event_names() const {
    std::vector<std::string> out;
    for (const auto& e : events) out.push_back(e.name);
    return out;
  }

  // Protocol outputs on a reject never carry theta.
  bool reject_hides_theta() const {
    if (accept) return true;
    if (recycled.theta) return false;
    for (const auto& e : events)
      if (e.data.is_object() && e.data.contains("theta") && !e.data["theta"].is_null()) return false;
    return true;
  }

  nlohmann::json to_json(const FsParams& p) const {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : events) ev.push_back({{"event", e.name}, {"data", e.data}});
    return {{"strategy", strategy},
            {"events", ev},
            {"decision", accept ? "accept" : "reject"},
            {"y_out", y_out ? nlohmann::json(Bitstring::from_uint(*y_out, p.m).to_string()) : nlohmann::json()},
            {"recycled", recycled.to_json(p)},
            {"eve_record", eve_record ? nlohmann::json(*eve_record) : nlohmann::json()}};
  }
};

// Applies a sampled Kraus branch; returns Bob's state and Eve's index.
inline std::pair<DensityOperator, std::size_t> sample_instrument(const Instrument& ins, const CMatrix& rho,
                                                                 std::size_t n, Rng& rng) {
  const double u = random_unit(rng);
  double acc = 0.0;
  std::vector<bool> keep(n + 1, true);
  keep[n] = false;
  std::vector<std::size_t> dims(n, 2);
  dims.push_back(ins.dim_e);
  std::size_t chosen = ins.kraus.size() - 1;
  std::vector<double> w(ins.kraus.size());
  for (std::size_t i = 0; i < ins.kraus.size(); ++i) {
    w[i] = (ins.kraus[i] * rho * ins.kraus[i].adjoint()).trace().real();
    acc += w[i];
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  while (w[chosen] <= 0.0 && chosen > 0) --chosen;
  const CMatrix out = ins.kraus[chosen] * rho * ins.kraus[chosen].adjoint();
  CMatrix bob = partial_trace(out, keep, dims);
  bob /= bob.trace().real();
  return {DensityOperator::from_matrix(hermitian_part(bob), 1e-8), chosen};
}

inline Cipher substitute(const Cipher& c, const Instrument& ins, std::size_t n, Rng& rng, std::size_t& record) {
  Cipher out = c;
  out.y ^= ins.y_mask;
  out.s ^= ins.s_mask;
  out.t ^= ins.t_mask;
  auto [bob, idx] = sample_instrument(ins, dense_state(c.quantum, n), n, rng);
  out.quantum = std::move(bob);
  record = idx;
  return out;
}

// One session against a strategy. Random draws come from Rng(seed) in the
// order: x, channel branch, Bob's outcome.
inline AttackTranscript run_attack(const FsParams& p, const FsKeys& keys, const AttackStrategy& st, std::uint64_t y,
                                   std::uint64_t seed) {
  Rng rng(seed);
  AttackTranscript tr;
  tr.strategy = st.kind_name();
  auto decide = [&](const Cipher& c) {
    if (!keys.theta) {
      tr.accept = false;
      tr.recycled = recycle(keys, false);
      return;
    }
    const auto dist = outcome_distribution(c.quantum, p.n, *keys.theta);
    const auto d = decide_on(p, keys, c, sample_outcome(dist, rng));
    tr.accept = d.accept;
    tr.y_out = d.y;
    tr.recycled = d.recycled;
  };
  auto bob_events = [&](const Cipher& c) {
    tr.events.push_back({"bob-receive", c.classical_json(p)});
    decide(c);
    tr.events.push_back({"bob-decide", nlohmann::json::object()});
    tr.events.push_back({"decision-bit", {{"accept", tr.accept}}});
    tr.events.push_back(
        {"bob-output",
         {{"y", tr.y_out ? nlohmann::json(Bitstring::from_uint(*tr.y_out, p.m).to_string()) : nlohmann::json()}}});
  };
  auto released = [&] { return tr.recycled.to_json(p); };

  if (st.kind == AttackStrategy::Kind::kImpersonation) {
    ACBENCH_ENFORCE(st.forgery.has_value(), "impersonation needs a forged cipher");
    tr.events.push_back({"eve-forge", st.forgery->classical_json(p)});
    bob_events(*st.forgery);
    tr.events.push_back({"keys-released", released()});
    tr.events.push_back({"alice-input", {{"y", Bitstring::from_uint(y, p.m).to_string()}}});
    if (!tr.recycled.theta) {
      tr.events.push_back({"alice-blocked", {{"reason", "theta discarded"}}});
    } else {
      const auto enc = fs_encrypt(p, tr.recycled, y, rng());
      tr.events.push_back({"alice-encrypt", enc.cipher.classical_json(p)});
    }
    return tr;
  }

  tr.events.push_back({"alice-input", {{"y", Bitstring::from_uint(y, p.m).to_string()}}});
  const std::uint64_t x = random_word(rng, p.n);
  const Cipher c = encrypt_with(p, keys, y, x);
  tr.events.push_back({"alice-encrypt", c.classical_json(p)});
  Cipher delivered = c;
  if (st.kind == AttackStrategy::Kind::kNoise) {
    auto q = std::get<ProductQubits>(c.quantum);
    q.bits ^= st.noise_pattern & low_mask(p.n);
    delivered.quantum = q;
    tr.events.push_back({"channel-noise", {{"weight", std::popcount(st.noise_pattern & low_mask(p.n))}}});
  } else if (st.kind == AttackStrategy::Kind::kSubstitution) {
    ACBENCH_ENFORCE(st.instrument.has_value(), "substitution needs an instrument");
    std::size_t rec = 0;
    delivered = substitute(c, *st.instrument, p.n, rng, rec);
    tr.eve_record = rec;
    tr.events.push_back({"eve-intercept", {{"instrument", st.instrument->name}, {"record", rec}}});
  }
  bob_events(delivered);
  tr.events.push_back({"keys-released", released()});
  return tr;
}

// Exact acceptance probability of a substitution attack on a fixed key,
// averaged over Alice's x.
inline double substitution_accept_probability(const FsParams& p, const FsKeys& keys, const Instrument& ins,
                                              std::uint64_t y) {
  ACBENCH_ENFORCE(keys.theta.has_value(), "protocol not runnable: theta is bottom");
  const auto ball = hamming_ball_masks(p.n, p.radius());
  const Bitstring th = Bitstring::from_uint(*keys.theta, p.n);
  const std::size_t dim = std::size_t{1} << p.n;
  double acc = 0.0;
  for (std::uint64_t x = 0; x < dim; ++x) {
    const Cipher c = encrypt_with(p, keys, y, x);
    const auto blocks = measure_bb_partial(ins.apply(dense_state(c.quantum, p.n)), th, ins.dim_e);
    for (std::uint64_t xt = 0; xt < dim; ++xt) {
      const double w = blocks[xt].trace().real();
      if (w > 1e-15 && bob_decide(p, keys.l_ss, keys.l_mac, xt, y ^ ins.y_mask, c.s ^ ins.s_mask,
                                  c.t ^ ins.t_mask, ball))
        acc += w;
    }
  }
  return acc / static_cast<double>(dim);
}

// --- exhaustive audits ----------------------------------------------------------------

struct KeyEnumeration {
  double rate = 0.0;  // worst case over the enumerated instances
  std::uint64_t instances = 0;
  nlohmann::json witness;
};

// Honest completeness: accept probability over every key, theta, x and y
// with no channel noise; returns the minimum acceptance.
inline KeyEnumeration honest_completeness(const FsParams& p) {
  const auto ball = hamming_ball_masks(p.n, p.radius());
  KeyEnumeration out{1.0, 0, nullptr};
  for (std::size_t ci = 0; ci < p.code.size(); ++ci)
    for (std::uint64_t lss = 0; lss < (std::uint64_t{1} << p.r_ss()); ++lss)
      for (std::uint64_t lmac = 0; lmac < (std::uint64_t{1} << p.r_mac()); ++lmac)
        for (std::uint64_t y = 0; y < (std::uint64_t{1} << p.m); ++y)
          for (std::uint64_t x = 0; x < (std::uint64_t{1} << p.n); ++x) {
            const FsKeys k{lss, lmac, p.codeword(ci)};
            const Cipher c = encrypt_with(p, k, y, x);
            ++out.instances;
            // same basis: Bob's outcome is exactly x
            const auto xp = bob_decide(p, lss, lmac, x, c.y, c.s, c.t, ball);
            if (!xp || *xp != x) {
              out.rate = 0.0;
              out.witness = {{"x", x}, {"y", y}, {"l_ss", lss}, {"l_mac", lmac}};
            }
          }
  return out;
}

// For each x, theta, y and encoding-basis flip pattern of weight <= phi n,
// the reject fraction over all (l_ss, l_mac); returns the worst.
inline KeyEnumeration noisy_reject_rate(const FsParams& p) {
  const auto ball = hamming_ball_masks(p.n, p.radius());
  const std::uint64_t nss = std::uint64_t{1} << p.r_ss(), nmac = std::uint64_t{1} << p.r_mac();
  KeyEnumeration out{0.0, 0, nullptr};
  for (std::size_t ci = 0; ci < p.code.size(); ++ci)
    for (std::uint64_t y = 0; y < (std::uint64_t{1} << p.m); ++y)
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << p.n); ++x)
        for (std::uint64_t e : ball) {
          std::uint64_t rejects = 0;
          for (std::uint64_t lss = 0; lss < nss; ++lss)
            for (std::uint64_t lmac = 0; lmac < nmac; ++lmac) {
              const FsKeys k{lss, lmac, p.codeword(ci)};
              const Cipher c = encrypt_with(p, k, y, x);
              if (!bob_decide(p, lss, lmac, x ^ e, c.y, c.s, c.t, ball)) ++rejects;
            }
          ++out.instances;
          const double r = static_cast<double>(rejects) / static_cast<double>(nss * nmac);
          if (r > out.rate) {
            out.rate = r;
            out.witness = {{"x", Bitstring::from_uint(x, p.n).to_string()},
                           {"e", Bitstring::from_uint(e, p.n).to_string()},
                           {"y", y},
                           {"theta", Bitstring::from_uint(p.codeword(ci), p.n).to_string()}};
          }
        }
  return out;
}

// Impersonation: acceptance of one forged cipher averaged over the keys
// (l_ss, l_mac uniform, theta from the prior).
inline double impersonation_acceptance(const FsParams& p, const ThetaSource& src, const Cipher& forged) {
  check_theta_source(p, src);
  const auto ball = hamming_ball_masks(p.n, p.radius());
  const std::uint64_t nss = std::uint64_t{1} << p.r_ss(), nmac = std::uint64_t{1} << p.r_mac();
  double acc = 0.0;
  for (std::size_t ci = 0; ci < p.code.size(); ++ci) {
    if (src.prior[ci] <= 0.0) continue;
    const auto dist = outcome_distribution(forged.quantum, p.n, p.codeword(ci));
    std::uint64_t hits = 0;
    double mass = 0.0;
    for (std::uint64_t xt = 0; xt < dist.size(); ++xt) {
      if (dist[xt] <= 0.0) continue;
      hits = 0;
      for (std::uint64_t lss = 0; lss < nss; ++lss)
        for (std::uint64_t lmac = 0; lmac < nmac; ++lmac)
          if (bob_decide(p, lss, lmac, xt, forged.y, forged.s, forged.t, ball)) ++hits;
      mass += dist[xt] * static_cast<double>(hits);
    }
    acc += src.prior[ci] * mass / static_cast<double>(nss * nmac);
  }
  return acc;
}

// Every classical (y, s, t) combined with every product state H^b |v>.
inline KeyEnumeration worst_impersonation(const FsParams& p, const ThetaSource& src) {
  KeyEnumeration out{0.0, 0, nullptr};
  const std::uint64_t nq = std::uint64_t{1} << p.n;
  for (std::uint64_t y = 0; y < (std::uint64_t{1} << p.m); ++y)
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << p.m_ss); ++s)
      for (std::uint64_t t = 0; t < (std::uint64_t{1} << p.m_mac); ++t)
        for (std::uint64_t b = 0; b < nq; ++b)
          for (std::uint64_t v = 0; v < nq; ++v) {
            const Cipher f{y, s, t, ProductQubits{v, b}};
            const double a = impersonation_acceptance(p, src, f);
            ++out.instances;
            if (a > out.rate) {
              out.rate = a;
              out.witness = {{"y", y}, {"s", s}, {"t", t}, {"bits", v}, {"bases", b}};
            }
          }
  return out;
}

// --- recycled-key entropy --------------------------------------------------------------

struct RecycledEntropy {
  Bracket hmin;          // Hmin(Theta' | Z Z' E) on the accept branch
  double accept_mass = 0.0;
  double k = 0.0;        // rating of the theta source
  bool holds(double tol = 1e-6) const { return hmin.lo >= k - tol; }
  nlohmann::json to_json() const {
    return {{"hmin_lo", format_value(hmin.lo)}, {"hmin_hi", format_value(hmin.hi)}, {"method", to_string(hmin.method)},
            {"accept_mass", accept_mass}, {"k", k}};
  }
};

namespace detail {

// Calls fn(theta_index, x, l_ss, l_mac, s, t, xt, accept, block) for every
// branch of a substitution attack with nonzero weight.
template <class Fn>
void for_each_substitution_branch(const FsParams& p, const Instrument& ins, std::uint64_t y, Fn&& fn) {
  const auto ball = hamming_ball_masks(p.n, p.radius());
  const std::size_t dim = std::size_t{1} << p.n;
  const std::uint64_t nss = std::uint64_t{1} << p.r_ss(), nmac = std::uint64_t{1} << p.r_mac();
  for (std::size_t ci = 0; ci < p.code.size(); ++ci) {
    const Bitstring th = Bitstring::from_uint(p.codeword(ci), p.n);
    for (std::uint64_t x = 0; x < dim; ++x) {
      const CMatrix rho = conjugate_code_state(Bitstring::from_uint(x, p.n), th).matrix();
      const auto blocks = measure_bb_partial(ins.apply(rho), th, ins.dim_e);
      std::vector<std::uint64_t> live;
      for (std::uint64_t xt = 0; xt < dim; ++xt)
        if (blocks[xt].trace().real() > 1e-15) live.push_back(xt);
      for (std::uint64_t lss = 0; lss < nss; ++lss) {
        const std::uint64_t s = p.ss.eval_word(lss, x);
        for (std::uint64_t lmac = 0; lmac < nmac; ++lmac) {
          const std::uint64_t t = p.mac.family.eval_word(lmac, p.mac_message(x, y, s));
          for (std::uint64_t xt : live) {
            const auto xp = bob_decide(p, lss, lmac, xt, y ^ ins.y_mask, s ^ ins.s_mask, t ^ ins.t_mask, ball);
            fn(ci, x, lss, lmac, s, t, xt, xp, blocks[xt]);
          }
        }
      }
    }
  }
}

}  // namespace detail

// Eve's view is (Z, Z', E) with Z = (s, t); Z' is a fixed function of Z under
// the instrument, and y is fixed. Exhaustive over x, theta and both keys.
inline RecycledEntropy recycled_key_entropy(const FsParams& p, const Instrument& ins, const ThetaSource& src,
                                            std::uint64_t y, const PguessOptions& opt = {}) {
  check_theta_source(p, src);
  ACBENCH_ENFORCE(p.n <= 3 && p.code.size() <= 4, "recycled_key_entropy supports n <= 3 and |C| <= 4");
  check_budget("recycled_key_entropy",
               static_cast<double>(p.code.size()) * std::exp2(static_cast<double>(2 * p.n + p.r_ss() + p.r_mac())),
               kDefaultAuditBudget);
  const std::size_t nviews = std::size_t{1} << (p.m_ss + p.m_mac);
  const auto de = static_cast<Eigen::Index>(ins.dim_e);
  std::vector<std::vector<CMatrix>> acc(nviews, std::vector<CMatrix>(p.code.size(), CMatrix::Zero(de, de)));
  const double base = std::exp2(-static_cast<double>(p.n + p.r_ss() + p.r_mac()));
  double mass = 0.0;
  detail::for_each_substitution_branch(
      p, ins, y,
      [&](std::size_t ci, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t s, std::uint64_t t,
          std::uint64_t, const std::optional<std::uint64_t>& xp, const CMatrix& block) {
        if (!xp) return;
        const double w = src.prior[ci] * base;
        acc[(s << p.m_mac) | t][ci] += w * block;
        mass += w * block.trace().real();
      });
  Bracket pg = Bracket::exact(0.0);
  for (const auto& ops : acc) pg = pg + pguess_operators(ops, opt);
  return {neg_log2(pg), mass, src.hmin()};
}

// Real-vs-ideal distance of one substitution attack with the recycled keys
// handed to the distinguisher. Real: Bob's decision, recycled (l_ss, l_mac),
// theta on accept. Ideal: accept only when Z' = Z and x' = x, and fresh
// uniform keys are released. Registers: L, Theta', Z, E.
struct RecyclingDistance {
  double distance = 0.0;
  double key_marginal_deviation = 0.0;  // max |Pr[L = l] - 2^-|L|| on the accept branch, normalized
  double accept_mass = 0.0;
};

inline RecyclingDistance recycling_distance(const FsParams& p, const Instrument& ins, const ThetaSource& src,
                                            std::uint64_t y) {
  check_theta_source(p, src);
  const std::size_t nviews = std::size_t{1} << (p.m_ss + p.m_mac);
  const std::size_t nc = p.code.size() + 1;  // last slot = bottom
  const std::size_t nl = std::size_t{1} << (p.r_ss() + p.r_mac());
  const auto de = static_cast<Eigen::Index>(ins.dim_e);
  const bool tampered = ins.y_mask != 0 || ins.s_mask != 0 || ins.t_mask != 0;
  // real[l][theta'][view], ideal marginal over keys [theta'][view]
  std::vector<CMatrix> real(nl * nc * nviews, CMatrix::Zero(de, de));
  std::vector<CMatrix> ideal(nc * nviews, CMatrix::Zero(de, de));
  std::vector<double> accept_by_key(nl, 0.0);
  const double base = std::exp2(-static_cast<double>(p.n + p.r_ss() + p.r_mac()));
  double mass = 0.0;
  detail::for_each_substitution_branch(
      p, ins, y,
      [&](std::size_t ci, std::uint64_t x, std::uint64_t lss, std::uint64_t lmac, std::uint64_t s, std::uint64_t t,
          std::uint64_t, const std::optional<std::uint64_t>& xp, const CMatrix& block) {
        const double w = src.prior[ci] * base;
        const std::size_t l = static_cast<std::size_t>((lss << p.r_mac()) | lmac);
        const std::size_t view = static_cast<std::size_t>((s << p.m_mac) | t);
        const std::size_t th_real = xp ? ci : nc - 1;
        const std::size_t th_ideal = (xp && !tampered && *xp == x) ? ci : nc - 1;
        real[(l * nc + th_real) * nviews + view] += w * block;
        ideal[th_ideal * nviews + view] += w * block;
        if (xp) {
          accept_by_key[l] += w * block.trace().real();
          mass += w * block.trace().real();
        }
      });
  RecyclingDistance out;
  const double inv_l = 1.0 / static_cast<double>(nl);
  double d = 0.0;
  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t v = 0; v < nviews; ++v)
        d += trace_norm_hermitian(real[(l * nc + c) * nviews + v] - inv_l * ideal[c * nviews + v]);
  out.distance = 0.5 * d;
  out.accept_mass = mass;
  if (mass > 0.0)
    for (double a : accept_by_key) out.key_marginal_deviation = std::max(out.key_marginal_deviation, std::abs(a / mass - inv_l));
  return out;
}

// --- closed-form bounds ------------------------------------------------------------------

inline double eps_adv_formula(double nu_ss, double nu_mac, double code_size, double d, double n, double phi,
                              double m_ss, double m_mac, double k, double eps_mac) {
  const double inner = 2.0 + code_size / std::exp2(d / 2.0) +
                       code_size * std::exp2(binary_entropy(phi) * n) / std::exp2(d);
  return eps_mac + (nu_ss + nu_mac) * std::sqrt(inner * std::exp2(m_ss + m_mac - k));
}

inline double eps_adv(const FsParams& p) {
  return eps_adv_formula(p.nu_ss, p.nu_mac, static_cast<double>(p.code.size()), static_cast<double>(p.code.distance()),
                         static_cast<double>(p.n), p.phi, static_cast<double>(p.m_ss),
                         static_cast<double>(p.m_mac), p.k, p.eps_mac);
}

inline double eps_noise(double channel_eps, double eps_ss) {
  ACBENCH_ENFORCE(channel_eps >= 0.0 && eps_ss >= 0.0, "error terms must be non-negative");
  return channel_eps + eps_ss;
}

inline double eps_noise(const FsParams& p, double channel_eps) { return eps_noise(channel_eps, p.eps_ss); }

// --- key replacement --------------------------------------------------------------------

struct KeyReplacement {
  std::optional<std::uint64_t> spare;  // fresh key kept aside when theta survives
  std::uint64_t theta_out = 0;
  double k_prime = 0.0;
};

inline double replacement_rating(double n, double k) {
  return -std::log2(std::exp2(-n) + std::exp2(-k));
}

// theta != bottom: keep theta and the fresh key as spare. theta = bottom: the
// fresh key takes theta's place.
inline KeyReplacement key_replace(std::size_t n, double k, std::uint64_t k_new, std::optional<std::uint64_t> theta) {
  ACBENCH_ENFORCE(k_new <= low_mask(n), "fresh key has the wrong length");
  const double kp = replacement_rating(static_cast<double>(n), k);
  if (theta) return {k_new, *theta, kp};
  return {std::nullopt, k_new, kp};
}

struct ReplacementAudit {
  double max_joint_pguess = 0.0;       // max over instances of pguess(Theta_out | E)
  double max_bottom_term = 0.0;        // max over instances of the bottom-branch term
  double max_theta_term = 0.0;         // max over instances of the theta-branch term
  double audited_pguess = 0.0;         // max_bottom_term + max_theta_term
  double bound = 0.0;                  // 2^-n + 2^-k
  std::uint64_t instances = 0;
  double audited_k_prime() const { return -std::log2(audited_pguess); }
};

// Classical instances over an index space of size 2^n. A fraction q of the mass
// is bottom, the rest is uniform over the first `spread` indices with Eve
// holding theta mod `classes`; the bottom branch either shows Eve a dedicated
// symbol or shares the symbols of the theta branch. Instances whose
// theta-branch Hmin falls below k are dropped.
inline ReplacementAudit audit_key_replacement(std::size_t n, double k) {
  ACBENCH_ENFORCE(n >= 1 && n <= 6, "audit_key_replacement supports 1 <= n <= 6");
  const std::size_t big_n = std::size_t{1} << n;
  ReplacementAudit out;
  out.bound = std::exp2(-static_cast<double>(n)) + std::exp2(-k);
  for (std::size_t qi = 0; qi <= 8; ++qi) {
    const double q = static_cast<double>(qi) / 8.0;
    for (std::size_t spread = 1; spread <= big_n; ++spread)
      for (std::size_t classes = 1; classes <= spread; ++classes)
        for (int shared = 0; shared <= 1; ++shared) {
          const std::size_t ne = classes + (shared ? 0 : 1);
          ClassicalJoint in(big_n + 1, ne);  // row big_n = bottom
          for (std::size_t th = 0; th < spread; ++th)
            in.add(th, th % classes, (1.0 - q) / static_cast<double>(spread));
          if (q > 0.0) {
            if (shared)
              for (std::size_t e = 0; e < classes; ++e) in.add(big_n, e, q / static_cast<double>(classes));
            else
              in.add(big_n, classes, q);
          }
          // Hmin of the subnormalized non-bottom part
          ClassicalJoint part(big_n, ne);
          for (std::size_t th = 0; th < big_n; ++th)
            for (std::size_t e = 0; e < ne; ++e) part.set(th, e, in(th, e));
          const double pg_theta = pguess_classical(part);
          if (pg_theta > std::exp2(-k) + 1e-12) continue;
          ++out.instances;
          ClassicalJoint outj(big_n, ne);
          ClassicalJoint bot(big_n, ne);
          for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t th = 0; th < big_n; ++th) outj.add(th, e, in(th, e));
            for (std::uint64_t kn = 0; kn < big_n; ++kn) {
              const double w = in(big_n, e) / static_cast<double>(big_n);
              outj.add(kn, e, w);
              bot.add(kn, e, w);
            }
          }
          out.max_joint_pguess = std::max(out.max_joint_pguess, pguess_classical(outj));
          out.max_bottom_term = std::max(out.max_bottom_term, pguess_classical(bot));
          out.max_theta_term = std::max(out.max_theta_term, pg_theta);
        }
  }
  out.audited_pguess = out.max_bottom_term + out.max_theta_term;
  return out;
}

// --- guessing-game checks ---------------------------------------------------------------

struct GuessingInstance {
  std::string lemma;  // "uncertainty" or "projected"
  std::string code, side, prep, channel;
  double phi = 0.0;
  Bracket lhs;        // pguess(X|B) or the projected pguess(X|Theta C)
  Bracket pg_theta;   // pguess(Theta|E)
  double factor = 0.0;
  bool holds = false;

  nlohmann::json to_json() const {
    return {{"lemma", lemma},       {"code", code},         {"side", side},       {"prep", prep},
            {"channel", channel},   {"phi", phi},           {"lhs_hi", lhs.hi},   {"pguess_theta_lo", pg_theta.lo},
            {"factor", factor},     {"rhs", pg_theta.lo * factor}, {"holds", holds}};
  }
};

namespace detail {

struct SideInfo {
  std::string name;
  std::vector<CMatrix> ops;  // weighted operators on E, one per codeword
};

inline std::vector<SideInfo> side_info_library(std::size_t c) {
  std::vector<SideInfo> out;
  const double u = 1.0 / static_cast<double>(c);
  {
    SideInfo s{"none", {}};
    for (std::size_t i = 0; i < c; ++i) s.ops.push_back(CMatrix::Constant(1, 1, u));
    out.push_back(std::move(s));
  }
  {
    SideInfo s{"skewed-prior", {}};
    double rest = c > 1 ? 0.3 / static_cast<double>(c - 1) : 0.0;
    for (std::size_t i = 0; i < c; ++i) s.ops.push_back(CMatrix::Constant(1, 1, i == 0 ? (c > 1 ? 0.7 : 1.0) : rest));
    out.push_back(std::move(s));
  }
  if (c > 1) {
    SideInfo s{"noisy-copy", {}};
    const auto dc = static_cast<Eigen::Index>(c);
    for (std::size_t i = 0; i < c; ++i) {
      CMatrix m = CMatrix::Identity(dc, dc) * (0.25 * u * u);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += 0.75 * u;
      s.ops.push_back(m);
    }
    out.push_back(std::move(s));
    SideInfo k{"known", {}};
    for (std::size_t i = 0; i < c; ++i) {
      CMatrix m = CMatrix::Zero(dc, dc);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = u;
      k.ops.push_back(m);
    }
    out.push_back(std::move(k));
  }
  if (c == 2) {
    SideInfo s{"qubit-hint", {}};
    const CVector zero = conjugate_code_vector(Bitstring::from_string("0"), Bitstring::from_string("0"));
    const CVector plus = conjugate_code_vector(Bitstring::from_string("0"), Bitstring::from_string("1"));
    s.ops.push_back(0.5 * zero * zero.adjoint());
    s.ops.push_back(0.5 * plus * plus.adjoint());
    out.push_back(std::move(s));
  }
  return out;
}

struct BChannel {
  std::string name;
  std::vector<CMatrix> kraus;  // on n qubits
};

inline std::vector<BChannel> b_channel_library(std::size_t n) {
  std::vector<BChannel> out;
  for (const auto& s : pauli_strings(n))
    out.push_back({s == std::string(n, 'I') ? "identity" : "pauli:" + s, {KrausChannel::pauli_string(s)}});
  const auto dim = static_cast<Eigen::Index>(1) << n;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
    BChannel ch{"measure-resend:" + Bitstring::from_uint(b, n).to_string(), {}};
    for (Eigen::Index v = 0; v < dim; ++v) {
      const CVector psi =
          conjugate_code_vector(Bitstring::from_uint(static_cast<std::uint64_t>(v), n), Bitstring::from_uint(b, n));
      ch.kraus.push_back(psi * psi.adjoint());
    }
    out.push_back(std::move(ch));
  }
  return out;
}

// Sum_r 2^-n (H^basis |r>)^{(x)2} (x) (optional |r> on C), pure or classical
// in r, ordered A B C.
inline CMatrix correlated_state(std::size_t n, std::uint64_t basis, bool coherent, bool with_c) {
  const std::size_t dq = std::size_t{1} << n;
  const std::size_t dc = with_c ? dq : 1;
  const auto dim = static_cast<Eigen::Index>(dq * dq * dc);
  const Bitstring b = Bitstring::from_uint(basis, n);
  CVector sum = CVector::Zero(dim);
  CMatrix mix = CMatrix::Zero(dim, dim);
  for (std::uint64_t r = 0; r < dq; ++r) {
    const CVector a = conjugate_code_vector(Bitstring::from_uint(r, n), b);
    CVector c = CVector::Zero(static_cast<Eigen::Index>(dc));
    c[with_c ? static_cast<Eigen::Index>(r) : 0] = 1.0;
    CVector v(dim);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      for (Eigen::Index j = 0; j < a.size(); ++j)
        for (Eigen::Index k = 0; k < c.size(); ++k) v[idx++] = a[i] * a[j] * c[k];
    sum += v;
    mix += v * v.adjoint();
  }
  const double norm = 1.0 / static_cast<double>(dq);
  return coherent ? CMatrix(norm * sum * sum.adjoint()) : CMatrix(norm * mix);
}

inline CMatrix apply_on_b(const std::vector<CMatrix>& kraus, const CMatrix& rho, std::size_t n, std::size_t dc) {
  const auto dq = static_cast<Eigen::Index>(1) << n;
  const CMatrix ia = CMatrix::Identity(dq, dq), ic = CMatrix::Identity(static_cast<Eigen::Index>(dc), static_cast<Eigen::Index>(dc));
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : kraus) {
    const CMatrix full = kron(kron(ia, k), ic);
    out += full * rho * full.adjoint();
  }
  return out;
}

struct Prep {
  std::string name;
  std::size_t dc;
  // for every codeword index, the state on ABC (weight included)
  std::vector<CMatrix> states;
};

// E -> A B (C). The guess-prepare map measures E in its computational basis,
// reads the outcome g as a codeword index and prepares states correlated in
// basis c_g.
inline std::vector<Prep> preparations(const LinearCode& code, const SideInfo& side, bool lemma2) {
  const std::size_t n = code.length(), c = code.size();
  const std::size_t dq = std::size_t{1} << n;
  std::vector<Prep> out;
  auto independent = [&](const std::string& name, const CMatrix& st, std::size_t dc) {
    Prep p{name, dc, {}};
    for (const auto& w : side.ops) p.states.push_back(w.trace().real() * st);
    out.push_back(std::move(p));
  };
  if (!lemma2) {
    independent("epr", correlated_state(n, 0, true, false), 1);
  } else {
    independent("epr-ab", correlated_state(n, 0, true, false), 1);
    independent("ghz", correlated_state(n, 0, true, true), dq);
    independent("classical-copy", correlated_state(n, 0, false, true), dq);
  }
  Prep g{"guess-prepare", lemma2 ? dq : 1, {}};
  for (const auto& w : side.ops) {
    CMatrix st = CMatrix::Zero(static_cast<Eigen::Index>(dq * dq * g.dc), static_cast<Eigen::Index>(dq * dq * g.dc));
    for (Eigen::Index e = 0; e < w.rows(); ++e) {
      const double pe = w(e, e).real();
      if (pe <= 0.0) continue;
      const std::uint64_t basis = code.codewords()[static_cast<std::size_t>(e) % c].to_uint();
      st += pe * correlated_state(n, basis, false, lemma2);
    }
    g.states.push_back(st);
  }
  out.push_back(std::move(g));
  return out;
}

inline std::string code_name(const LinearCode& c) {
  std::string s = "{";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + c.codewords()[i].to_string();
  return s + "}";
}

}  // namespace detail

inline std::vector<LinearCode> guessing_code_library(std::size_t n) {
  if (n == 1) return {LinearCode::from_strings({"0", "1"}), LinearCode::from_strings({"0"})};
  if (n == 2)
    return {LinearCode::from_strings({"00", "11"}), LinearCode::from_strings({"01", "10"}),
            LinearCode::from_strings({"00", "01", "10", "11"}), LinearCode::from_strings({"00"})};
  throw RejectedInput("guessing-lemma checks support n in {1, 2}");
}

// Both guessing-game inequalities over the code, side-information, preparation
// and B-channel libraries. The comparison is conservative: lhs.hi against
// pguess(Theta|E).lo times the factor.
inline std::vector<GuessingInstance> check_guessing_lemmas(const std::vector<std::size_t>& sizes = {1, 2},
                                                           const std::vector<double>& phis = {0.0, 0.5},
                                                           double tol = 1e-9, const PguessOptions& opt = {}) {
  std::vector<GuessingInstance> out;
  for (std::size_t n : sizes) {
    const auto channels = detail::b_channel_library(n);
    const std::size_t dq = std::size_t{1} << n;
    for (const auto& code : guessing_code_library(n)) {
      const double cs = static_cast<double>(code.size()), d = static_cast<double>(code.distance());
      for (const auto& side : detail::side_info_library(code.size())) {
        const Bracket pg_theta = pguess_operators(side.ops, opt);
        // uncertainty relation: pguess(X|B) <= pguess(Theta|E)(1 + |C|/2^{d/2})
        const double f1 = 1.0 + cs / std::exp2(d / 2.0);
        for (const auto& prep : detail::preparations(code, side, false)) {
          for (const auto& ch : channels) {
            std::vector<CMatrix> ops(dq, CMatrix::Zero(static_cast<Eigen::Index>(dq), static_cast<Eigen::Index>(dq)));
            for (std::size_t ci = 0; ci < code.size(); ++ci) {
              const CMatrix rho = detail::apply_on_b(ch.kraus, prep.states[ci], n, 1);
              const auto blocks = measure_bb_partial(rho, code.codewords()[ci], dq);
              for (std::size_t x = 0; x < dq; ++x) ops[x] += blocks[x];
            }
            GuessingInstance gi{"uncertainty", detail::code_name(code), side.name, prep.name, ch.name, 0.0,
                                pguess_operators(ops, opt), pg_theta, f1, false};
            gi.holds = gi.lhs.hi <= pg_theta.lo * f1 + tol;
            out.push_back(std::move(gi));
          }
        }
        // projected version: A and B both measured in theta, weight <= phi n
        for (double phi : phis) {
          const double f2 = 1.0 + cs * std::exp2(binary_entropy(phi) * static_cast<double>(n)) / std::exp2(d);
          const std::size_t radius = correctable_radius(n, phi);
          for (const auto& prep : detail::preparations(code, side, true)) {
            const auto dc = static_cast<Eigen::Index>(prep.dc);
            for (const auto& ch : channels) {
              Bracket lhs = Bracket::exact(0.0);
              for (std::size_t ci = 0; ci < code.size(); ++ci) {
                const CMatrix rho = detail::apply_on_b(ch.kraus, prep.states[ci], n, prep.dc);
                const Bitstring th = code.codewords()[ci] + code.codewords()[ci];
                const auto blocks = measure_bb_partial(rho, th, prep.dc);
                std::vector<CMatrix> ops(dq, CMatrix::Zero(dc, dc));
                for (std::uint64_t x = 0; x < dq; ++x)
                  for (std::uint64_t xb = 0; xb < dq; ++xb)
                    if (static_cast<std::size_t>(std::popcount(x ^ xb)) <= radius) ops[x] += blocks[x * dq + xb];
                lhs = lhs + pguess_operators(ops, opt);
              }
              GuessingInstance gi{"projected", detail::code_name(code), side.name, prep.name, ch.name, phi,
                                  lhs, pg_theta, f2, false};
              gi.holds = gi.lhs.hi <= pg_theta.lo * f2 + tol;
              out.push_back(std::move(gi));
            }
          }
        }
      }
    }
  }
  return out;
}

// --- sessions -------------------------------------------------------------------------

struct SessionStats {
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  std::uint64_t theta_leaks = 0;  // rejects whose outputs carried theta (must stay 0)
  double accept_rate() const { return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0.0; }
  double reject_rate() const { return 1.0 - accept_rate(); }
  double width() const { return hoeffding_width(std::max<std::uint64_t>(trials, 1)); }
  nlohmann::json to_json() const {
    return {{"trials", trials},          {"accepts", accepts},           {"accept_rate", accept_rate()},
            {"reject_rate", reject_rate()}, {"width", width()},          {"theta_leaks", theta_leaks}};
  }
};

// Strategy used by the Monte Carlo sessions. "noise" draws a fresh flip
// pattern of weight <= phi n per trial unless `pattern` is set.
struct SessionStrategy {
  std::string kind = "none";
  std::optional<std::uint64_t> pattern;
  std::optional<Instrument> instrument;
  std::optional<Cipher> forgery;
};

// Independent sessions with fresh keys, theta and message per trial; chunks of
// 1024 trials are seeded with derive_seed so results do not depend on the
// worker count.
inline SessionStats fs_session_mc(const FsParams& p, const ThetaSource& src, const SessionStrategy& st,
                                  std::uint64_t trials, std::uint64_t seed) {
  check_theta_source(p, src);
  constexpr std::uint64_t kChunk = 1024;
  const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
  const auto ball = hamming_ball_masks(p.n, p.radius());
  std::vector<SessionStats> part(chunks);
  parallel_for(chunks, [&](std::size_t ci) {
    Rng rng(derive_seed(seed, ci));
    const std::uint64_t lo = ci * kChunk, hi = std::min(trials, lo + kChunk);
    SessionStats& s = part[ci];
    for (std::uint64_t i = lo; i < hi; ++i) {
      const FsKeys keys = random_keys(p, src, rng);
      const std::uint64_t y = random_word(rng, p.m);
      AttackStrategy a;
      if (st.kind == "noise") {
        a = AttackStrategy::noise(st.pattern ? *st.pattern : ball[random_below(rng, ball.size())]);
      } else if (st.kind == "substitution") {
        a = AttackStrategy::substitution(*st.instrument);
      } else if (st.kind == "impersonation") {
        a = AttackStrategy::impersonation(*st.forgery);
      }
      const auto tr = run_attack(p, keys, a, y, rng());
      ++s.trials;
      if (tr.accept) ++s.accepts;
      if (!tr.reject_hides_theta()) ++s.theta_leaks;
    }
  });
  SessionStats total;
  for (const auto& s : part) {
    total.trials += s.trials;
    total.accepts += s.accepts;
    total.theta_leaks += s.theta_leaks;
  }
  return total;
}

// --- configuration ----------------------------------------------------------------------

struct FsSessionConfig {
  FsParams params;
  SessionStrategy strategy;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

inline Instrument instrument_from_name(const FsParams& p, const std::string& name) {
  auto arg = [&](std::size_t pos) { return name.substr(pos); };
  if (name == "identity") return identity_instrument(p.n);
  if (name.rfind("pauli:", 0) == 0) {
    ACBENCH_ENFORCE(arg(6).size() == p.n, "Pauli string length must equal n");
    return pauli_instrument(arg(6));
  }
  if (name.rfind("measure-resend:", 0) == 0) {
    const auto b = Bitstring::from_string(arg(15));
    ACBENCH_ENFORCE(b.size() == p.n, "basis length must equal n");
    return measure_resend_instrument(p.n, b.to_uint());
  }
  if (name.rfind("tag-tamper:", 0) == 0) {
    const auto b = Bitstring::from_string(arg(11));
    ACBENCH_ENFORCE(b.size() == p.m_mac, "tag mask length must equal m_mac");
    return classical_tamper_instrument(p.n, 0, 0, b.to_uint());
  }
  if (name.rfind("store:", 0) == 0) return store_qubit_instrument(p.n, std::stoul(arg(6)));
  if (name.rfind("swap:", 0) == 0) {
    const auto rest = arg(5);
    const auto colon = rest.find(':');
    ACBENCH_ENFORCE(colon != std::string::npos, "swap needs two indices");
    return swap_instrument(p.n, std::stoul(rest.substr(0, colon)), std::stoul(rest.substr(colon + 1)));
  }
  throw RejectedInput("unknown instrument: " + name);
}

inline FsParams fs_params_from_json(const nlohmann::json& j) {
  const auto words = j.at("code").get<std::vector<std::string>>();
  return FsParams::make(j.at("n").get<std::size_t>(), j.at("m").get<std::size_t>(), LinearCode::from_strings(words),
                        j.at("m_ss").get<std::size_t>(), j.at("m_mac").get<std::size_t>(), j.at("phi").get<double>(),
                        j.at("k").get<double>());
}

inline FsSessionConfig fs_session_from_json(const nlohmann::json& j) {
  try {
    FsSessionConfig c;
    c.params = fs_params_from_json(j);
    ACBENCH_ENFORCE(c.params.k <= ThetaSource::uniform(c.params.code).hmin() + 1e-9,
                    "rating k exceeds log2 |C| of the uniform theta source");
    c.trials = j.value("trials", std::uint64_t{10000});
    c.seed = j.value("seed", std::uint64_t{0});
    const auto st = j.value("strategy", nlohmann::json{{"kind", "none"}});
    const auto kind = st.is_string() ? st.get<std::string>() : st.at("kind").get<std::string>();
    c.strategy.kind = kind;
    if (kind == "none") {
    } else if (kind == "noise") {
      if (st.is_object() && st.contains("pattern")) {
        const auto b = Bitstring::from_string(st.at("pattern").get<std::string>());
        ACBENCH_ENFORCE(b.size() == c.params.n, "noise pattern length must equal n");
        c.strategy.pattern = b.to_uint();
      }
    } else if (kind == "substitution") {
      c.strategy.instrument = instrument_from_name(c.params, st.at("instrument").get<std::string>());
    } else if (kind == "impersonation") {
      auto word = [&](const char* key, std::size_t len) {
        const auto b = Bitstring::from_string(st.at(key).get<std::string>());
        ACBENCH_ENFORCE(b.size() == len, std::string("forged field has the wrong length: ") + key);
        return b.to_uint();
      };
      c.strategy.forgery = Cipher{word("y", c.params.m), word("s", c.params.m_ss), word("t", c.params.m_mac),
                                  ProductQubits{word("bits", c.params.n), word("bases", c.params.n)}};
    } else {
      throw RejectedInput("unknown strategy kind: " + kind);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("fsauth config: ") + e.what());
  } catch (const RejectedInput& e) {
    throw ConfigError(std::string("fsauth config: ") + e.what());
  }
}

}  // namespace acbench
