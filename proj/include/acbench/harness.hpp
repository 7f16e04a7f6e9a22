#pragma once

// Interactive resources as quantum combs, interface converters, construction
// claims with error accounting, and distinguishing-advantage estimators.
//
// A comb round takes a classical input x_i and the memory M, and emits an
// output Y_i = A_i (x) B_i (x) E_i (one factor per interface) plus new memory:
// each round's Kraus operators map (M (x) X_i) -> (Y_i (x) M'). Round i only
// ever sees (X_i, M), so causality holds by construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "acbench/error.hpp"
#include "acbench/quantum.hpp"
#include "acbench/util.hpp"
#include "json.hpp"

namespace acbench {

enum class Interface { kA, kB, kE };

inline const char* to_string(Interface i) {
  switch (i) {
    case Interface::kA: return "A";
    case Interface::kB: return "B";
    case Interface::kE: return "E";
  }
  return "?";
}

struct OutputLayout {
  std::size_t a = 1, b = 1, e = 1;
  std::size_t total() const { return a * b * e; }
  std::size_t& at(Interface i) { return i == Interface::kA ? a : (i == Interface::kB ? b : e); }
  std::size_t at(Interface i) const { return i == Interface::kA ? a : (i == Interface::kB ? b : e); }
  friend bool operator==(const OutputLayout&, const OutputLayout&) = default;
};

struct CombRound {
  std::size_t dim_in = 1;
  std::size_t mem_in = 1, mem_out = 1;
  OutputLayout out;
  std::vector<CMatrix> kraus;  // (out.total() * mem_out) x (mem_in * dim_in)
};

// Factor permutation: output factor j is input factor perm[j].
inline CMatrix tensor_permutation(const std::vector<std::size_t>& dims, const std::vector<std::size_t>& perm) {
  ACBENCH_ENFORCE(dims.size() == perm.size(), "permutation and dims disagree");
  const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  std::vector<std::size_t> out_dims(dims.size());
  for (std::size_t j = 0; j < perm.size(); ++j) out_dims[j] = dims[perm[j]];
  CMatrix p = CMatrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  std::vector<std::size_t> digit(dims.size());
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (std::size_t f = dims.size(); f-- > 0;) {
      digit[f] = r % dims[f];
      r /= dims[f];
    }
    std::size_t out = 0;
    for (std::size_t j = 0; j < perm.size(); ++j) out = out * out_dims[j] + digit[perm[j]];
    p(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(idx)) = 1.0;
  }
  return p;
}

class Comb {
 public:
  Comb() = default;
  Comb(std::string name, std::vector<CombRound> rounds) : name_(std::move(name)), rounds_(std::move(rounds)) {
    std::size_t mem = 1;
    for (const auto& r : rounds_) {
      ACBENCH_ENFORCE(r.mem_in == mem, "round memory does not chain");
      ACBENCH_ENFORCE(!r.kraus.empty(), "round needs Kraus operators");
      const auto rows = static_cast<Eigen::Index>(r.out.total() * r.mem_out);
      const auto cols = static_cast<Eigen::Index>(r.mem_in * r.dim_in);
      CMatrix sum = CMatrix::Zero(cols, cols);
      for (const auto& k : r.kraus) {
        ACBENCH_ENFORCE(k.rows() == rows && k.cols() == cols, "round Kraus operator has the wrong shape");
        sum += k.adjoint() * k;
      }
      ACBENCH_ENFORCE((sum - CMatrix::Identity(cols, cols)).norm() < 1e-9, "round must be trace preserving");
      mem = r.mem_out;
    }
  }

  // One round, no input, emitting a fixed state on A (x) B (x) E.
  static Comb emit(std::string name, const CMatrix& state, OutputLayout layout) {
    ACBENCH_ENFORCE(static_cast<std::size_t>(state.rows()) == layout.total(), "state does not match the layout");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(state));
    std::vector<CMatrix> ops;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double l = es.eigenvalues()[i];
      if (l > 1e-15) ops.push_back(std::sqrt(l) * es.eigenvectors().col(i));
    }
    return Comb(std::move(name), {CombRound{1, 1, 1, layout, std::move(ops)}});
  }

  // One classical round: input x, output index y with probability p[x][y].
  static Comb classical(std::string name, const std::vector<std::vector<double>>& p, OutputLayout layout) {
    std::vector<CMatrix> ops;
    const auto dy = static_cast<Eigen::Index>(layout.total());
    for (std::size_t x = 0; x < p.size(); ++x) {
      ACBENCH_ENFORCE(static_cast<Eigen::Index>(p[x].size()) == dy, "row length must equal the output dimension");
      for (std::size_t y = 0; y < p[x].size(); ++y) {
        if (p[x][y] <= 0.0) continue;
        CMatrix k = CMatrix::Zero(dy, static_cast<Eigen::Index>(p.size()));
        k(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = std::sqrt(p[x][y]);
        ops.push_back(k);
      }
    }
    return Comb(std::move(name), {CombRound{p.size(), 1, 1, layout, std::move(ops)}});
  }

  const std::string& name() const { return name_; }
  const std::vector<CombRound>& rounds() const { return rounds_; }
  std::size_t output_dim() const {
    std::size_t d = 1;
    for (const auto& r : rounds_) d *= r.out.total();
    return d;
  }

  // Joint state of all outputs Y_1 ... Y_r for a classical input sequence;
  // the final memory is traced out.
  CMatrix run(const std::vector<std::size_t>& inputs) const {
    ACBENCH_ENFORCE(inputs.size() == rounds_.size(), "one input per round");
    ACBENCH_ENFORCE(output_dim() <= kMaxDim, "comb output exceeds the dense dimension cap");
    CMatrix state = CMatrix::Ones(1, 1);  // Y_1..Y_{i-1} (x) M
    std::size_t ydim = 1;
    for (std::size_t i = 0; i < rounds_.size(); ++i) {
      const auto& r = rounds_[i];
      ACBENCH_ENFORCE(inputs[i] < r.dim_in, "input out of range");
      CMatrix x = CMatrix::Zero(static_cast<Eigen::Index>(r.dim_in), static_cast<Eigen::Index>(r.dim_in));
      x(static_cast<Eigen::Index>(inputs[i]), static_cast<Eigen::Index>(inputs[i])) = 1.0;
      const CMatrix full = kron(state, x);
      const CMatrix id = CMatrix::Identity(static_cast<Eigen::Index>(ydim), static_cast<Eigen::Index>(ydim));
      CMatrix next = CMatrix::Zero(static_cast<Eigen::Index>(ydim * r.out.total() * r.mem_out),
                                   static_cast<Eigen::Index>(ydim * r.out.total() * r.mem_out));
      for (const auto& k : r.kraus) {
        const CMatrix kk = kron(id, k);
        next += kk * full * kk.adjoint();
      }
      state = std::move(next);
      ydim *= r.out.total();
    }
    std::vector<bool> keep{true, false};
    return partial_trace(state, keep, {ydim, rounds_.empty() ? 1 : rounds_.back().mem_out});
  }

  std::vector<std::vector<std::size_t>> input_sequences() const {
    std::vector<std::vector<std::size_t>> out{{}};
    for (const auto& r : rounds_) {
      std::vector<std::vector<std::size_t>> next;
      for (const auto& s : out)
        for (std::size_t x = 0; x < r.dim_in; ++x) {
          auto t = s;
          t.push_back(x);
          next.push_back(std::move(t));
        }
      out = std::move(next);
    }
    return out;
  }

 private:
  std::string name_;
  std::vector<CombRound> rounds_;
};

// --- converters -------------------------------------------------------------------

// A stateless channel applied at one interface in every round whose output at
// that interface has dimension left * din * right (per round; empty frames mean
// left = right = 1). Rounds with a trivial output at the interface are skipped.
struct Converter {
  std::string name;
  Interface iface = Interface::kA;
  std::vector<CMatrix> kraus;  // dout x din
  std::vector<std::size_t> left, right;

  std::size_t din() const { return static_cast<std::size_t>(kraus.front().cols()); }
  std::size_t dout() const { return static_cast<std::size_t>(kraus.front().rows()); }
};

inline Converter make_converter(std::string name, Interface iface, std::vector<CMatrix> kraus) {
  ACBENCH_ENFORCE(!kraus.empty(), "converter needs Kraus operators");
  const auto din = kraus.front().cols();
  CMatrix sum = CMatrix::Zero(din, din);
  for (const auto& k : kraus) {
    ACBENCH_ENFORCE(k.cols() == din && k.rows() == kraus.front().rows(), "converter Kraus shapes disagree");
    sum += k.adjoint() * k;
  }
  ACBENCH_ENFORCE((sum - CMatrix::Identity(din, din)).norm() < 1e-9, "converter must be trace preserving");
  return {std::move(name), iface, std::move(kraus), {}, {}};
}

inline Comb apply_converter(const Comb& comb, const Converter& c) {
  std::vector<CombRound> rounds;
  for (std::size_t i = 0; i < comb.rounds().size(); ++i) {
    CombRound r = comb.rounds()[i];
    const std::size_t l = c.left.empty() ? 1 : c.left.at(i), rr = c.right.empty() ? 1 : c.right.at(i);
    const std::size_t d = r.out.at(c.iface);
    if (d == 1 && l * c.din() * rr != 1) {
      rounds.push_back(std::move(r));
      continue;
    }
    ACBENCH_ENFORCE(d == l * c.din() * rr, "converter does not fit the interface of round " + std::to_string(i));
    OutputLayout nl = r.out;
    nl.at(c.iface) = l * c.dout() * rr;
    // factors before and after the interface inside (A B E M')
    std::size_t before = 1, after = r.mem_out;
    if (c.iface == Interface::kA) after *= r.out.b * r.out.e;
    if (c.iface == Interface::kB) {
      before = r.out.a;
      after *= r.out.e;
    }
    if (c.iface == Interface::kE) before = r.out.a * r.out.b;
    const CMatrix ib = CMatrix::Identity(static_cast<Eigen::Index>(before * l), static_cast<Eigen::Index>(before * l));
    const CMatrix ia = CMatrix::Identity(static_cast<Eigen::Index>(rr * after), static_cast<Eigen::Index>(rr * after));
    std::vector<CMatrix> ops;
    for (const auto& ck : c.kraus) {
      const CMatrix f = kron(kron(ib, ck), ia);
      for (const auto& k : r.kraus) ops.push_back(f * k);
    }
    r.kraus = std::move(ops);
    r.out = nl;
    rounds.push_back(std::move(r));
  }
  return Comb(comb.name() + "|" + c.name, std::move(rounds));
}

inline Comb apply_converters(Comb comb, const std::vector<Converter>& cs) {
  for (const auto& c : cs) comb = apply_converter(comb, c);
  return comb;
}

// Round-wise tensor product with outputs regrouped per interface:
// A = A1 A2, B = B1 B2, E = E1 E2, memory M1 M2, inputs X1 X2.
inline Comb parallel(const Comb& c1, const Comb& c2) {
  ACBENCH_ENFORCE(c1.rounds().size() == c2.rounds().size(), "parallel combs need equal round counts");
  std::vector<CombRound> rounds;
  for (std::size_t i = 0; i < c1.rounds().size(); ++i) {
    const auto& r1 = c1.rounds()[i];
    const auto& r2 = c2.rounds()[i];
    CombRound r;
    r.dim_in = r1.dim_in * r2.dim_in;
    r.mem_in = r1.mem_in * r2.mem_in;
    r.mem_out = r1.mem_out * r2.mem_out;
    r.out = {r1.out.a * r2.out.a, r1.out.b * r2.out.b, r1.out.e * r2.out.e};
    // input (M1 M2 X1 X2) -> (M1 X1 M2 X2)
    const CMatrix pin = tensor_permutation({r1.mem_in, r2.mem_in, r1.dim_in, r2.dim_in}, {0, 2, 1, 3});
    // output (A1 B1 E1 M1' A2 B2 E2 M2') -> (A1 A2 B1 B2 E1 E2 M1' M2')
    const CMatrix pout = tensor_permutation(
        {r1.out.a, r1.out.b, r1.out.e, r1.mem_out, r2.out.a, r2.out.b, r2.out.e, r2.mem_out}, {0, 4, 1, 5, 2, 6, 3, 7});
    for (const auto& k1 : r1.kraus)
      for (const auto& k2 : r2.kraus) r.kraus.push_back(pout * kron(k1, k2) * pin);
    rounds.push_back(std::move(r));
  }
  return Comb(c1.name() + "||" + c2.name(), std::move(rounds));
}

// Lifts a converter of one parallel component to the composed comb.
inline Converter lift_converter(const Converter& c, const Comb& own, const Comb& other, bool own_is_first) {
  Converter out = c;
  out.left.assign(own.rounds().size(), 1);
  out.right.assign(own.rounds().size(), 1);
  for (std::size_t i = 0; i < own.rounds().size(); ++i) {
    const std::size_t l0 = c.left.empty() ? 1 : c.left[i], r0 = c.right.empty() ? 1 : c.right[i];
    const std::size_t od = other.rounds()[i].out.at(c.iface);
    out.left[i] = own_is_first ? l0 : od * l0;
    out.right[i] = own_is_first ? r0 * od : r0;
  }
  return out;
}

// --- distinguishing -----------------------------------------------------------------

struct DistinguishResult {
  double lo = 0.0;  // best advantage over the strategy set
  double hi = 1.0;  // = lo when the set is exhaustive for the instance
  bool exhaustive = false;
  std::vector<std::size_t> best_inputs;
  CMatrix helstrom;  // optimal final projector for best_inputs

  nlohmann::json to_json() const {
    return {{"lo", lo}, {"hi", hi}, {"exhaustive", exhaustive}, {"best_inputs", best_inputs}};
  }
};

inline CMatrix positive_projector(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  CMatrix p = CMatrix::Zero(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 0.0) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  return p;
}

// Strategies: every classical input sequence fed non-adaptively, all outputs
// kept coherently and measured with the Helstrom projector. The set is
// exhaustive when at most one round takes a nontrivial input.
inline DistinguishResult distinguish_exact(const Comb& r1, const Comb& r2) {
  ACBENCH_ENFORCE(r1.rounds().size() == r2.rounds().size(), "combs must have the same number of rounds");
  std::size_t with_input = 0;
  for (std::size_t i = 0; i < r1.rounds().size(); ++i) {
    ACBENCH_ENFORCE(r1.rounds()[i].dim_in == r2.rounds()[i].dim_in, "input dimensions differ");
    ACBENCH_ENFORCE(r1.rounds()[i].out.total() == r2.rounds()[i].out.total(), "output dimensions differ");
    with_input += r1.rounds()[i].dim_in > 1;
  }
  DistinguishResult res;
  res.lo = -1.0;
  for (const auto& in : r1.input_sequences()) {
    const CMatrix diff = r1.run(in) - r2.run(in);
    const double d = 0.5 * trace_norm_hermitian(diff);
    if (d > res.lo) {
      res.lo = d;
      res.best_inputs = in;
      res.helstrom = positive_projector(diff);
    }
  }
  res.exhaustive = with_input <= 1;
  res.hi = res.exhaustive ? res.lo : 1.0;
  return res;
}

struct McEstimate {
  double estimate = 0.0;
  double width = 0.0;
  std::uint64_t trials = 0;
  nlohmann::json to_json() const { return {{"estimate", estimate}, {"width", width}, {"trials", trials}}; }
};

// Pr[D(r1) = 1] - Pr[D(r2) = 1] from `trials` runs of each system, where D
// feeds `inputs` and outputs 1 on the projector `accept`.
inline McEstimate distinguish_mc(const Comb& r1, const Comb& r2, const std::vector<std::size_t>& inputs,
                                 const CMatrix& accept, std::uint64_t trials, std::uint64_t seed) {
  ACBENCH_ENFORCE(trials >= 1, "need at least one trial");
  const double p1 = std::clamp((accept * r1.run(inputs)).trace().real(), 0.0, 1.0);
  const double p2 = std::clamp((accept * r2.run(inputs)).trace().real(), 0.0, 1.0);
  Rng rng(seed);
  std::uint64_t h1 = 0, h2 = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    h1 += bernoulli(rng, p1);
    h2 += bernoulli(rng, p2);
  }
  const double n = static_cast<double>(trials);
  return {static_cast<double>(h1) / n - static_cast<double>(h2) / n, hoeffding_width(trials), trials};
}

inline McEstimate distinguish_mc(const Comb& r1, const Comb& r2, std::uint64_t trials, std::uint64_t seed) {
  const auto ex = distinguish_exact(r1, r2);
  return distinguish_mc(r1, r2, ex.best_inputs, ex.helstrom, trials, seed);
}

// --- construction claims -------------------------------------------------------------

// protocol applied to `real` is claimed epsilon-close to simulator applied to `ideal`.
struct ConstructionClaim {
  std::string name;
  std::string real_label, ideal_label;
  Comb real, ideal;
  std::vector<Converter> protocol, simulator;
  double epsilon = 0.0;

  Comb real_system() const { return apply_converters(real, protocol); }
  Comb ideal_system() const { return apply_converters(ideal, simulator); }
};

inline ConstructionClaim make_claim(std::string name, std::string real_label, Comb real, std::string ideal_label,
                                    Comb ideal, std::vector<Converter> protocol, std::vector<Converter> simulator,
                                    double epsilon) {
  ACBENCH_ENFORCE(epsilon >= 0.0, "claimed error must be non-negative");
  return {std::move(name), std::move(real_label), std::move(ideal_label), std::move(real), std::move(ideal),
          std::move(protocol), std::move(simulator), epsilon};
}

struct ClaimCheck {
  std::string name;
  double epsilon = 0.0;
  DistinguishResult advantage;
  bool pass = false;
  nlohmann::json to_json() const {
    return {{"claim", name}, {"epsilon", epsilon}, {"advantage", advantage.to_json()}, {"pass", pass}};
  }
};

// Passes iff every strategy in the set stays within epsilon + tol.
inline ClaimCheck verify_claim(const ConstructionClaim& c, double tol = 1e-9) {
  ClaimCheck out{c.name, c.epsilon, distinguish_exact(c.real_system(), c.ideal_system()), false};
  out.pass = out.advantage.lo <= c.epsilon + tol;
  return out;
}

inline bool same_shape(const Comb& a, const Comb& b) {
  if (a.rounds().size() != b.rounds().size()) return false;
  for (std::size_t i = 0; i < a.rounds().size(); ++i)
    if (a.rounds()[i].dim_in != b.rounds()[i].dim_in || !(a.rounds()[i].out == b.rounds()[i].out)) return false;
  return true;
}

// R -> S (eps) and S -> T (delta) give R -> T (eps + delta) with protocol
// pi o gamma and simulator sigma_1 o sigma_2 (sigma_2 acts on T first).
inline ConstructionClaim compose_serial(const ConstructionClaim& c1, const ConstructionClaim& c2) {
  if (c1.ideal_label != c2.real_label || !same_shape(c1.ideal, c2.real))
    throw RejectedInput("interface mismatch: " + c1.ideal_label + " vs " + c2.real_label);
  ConstructionClaim out;
  out.name = "(" + c1.name + ";" + c2.name + ")";
  out.real_label = c1.real_label;
  out.ideal_label = c2.ideal_label;
  out.real = c1.real;
  out.ideal = c2.ideal;
  out.protocol = c1.protocol;
  out.protocol.insert(out.protocol.end(), c2.protocol.begin(), c2.protocol.end());
  out.simulator = c2.simulator;
  out.simulator.insert(out.simulator.end(), c1.simulator.begin(), c1.simulator.end());
  out.epsilon = c1.epsilon + c2.epsilon;
  return out;
}

inline ConstructionClaim compose_parallel(const ConstructionClaim& c1, const ConstructionClaim& c2) {
  if (c1.real.rounds().size() != c2.real.rounds().size() || c1.ideal.rounds().size() != c2.ideal.rounds().size())
    throw RejectedInput("parallel composition needs matching round counts");
  ConstructionClaim out;
  out.name = "(" + c1.name + "|" + c2.name + ")";
  out.real_label = c1.real_label + "||" + c2.real_label;
  out.ideal_label = c1.ideal_label + "||" + c2.ideal_label;
  out.real = parallel(c1.real, c2.real);
  out.ideal = parallel(c1.ideal, c2.ideal);
  // converters of each side act on that side's factor; the frames are taken
  // from the other component as it looks when the converter runs
  Comb r1 = c1.real, r2 = c2.real;
  for (const auto& c : c1.protocol) {
    out.protocol.push_back(lift_converter(c, r1, r2, true));
    r1 = apply_converter(r1, c);
  }
  for (const auto& c : c2.protocol) {
    out.protocol.push_back(lift_converter(c, r2, r1, false));
    r2 = apply_converter(r2, c);
  }
  Comb i1 = c1.ideal, i2 = c2.ideal;
  for (const auto& c : c1.simulator) {
    out.simulator.push_back(lift_converter(c, i1, i2, true));
    i1 = apply_converter(i1, c);
  }
  for (const auto& c : c2.simulator) {
    out.simulator.push_back(lift_converter(c, i2, i1, false));
    i2 = apply_converter(i2, c);
  }
  out.epsilon = c1.epsilon + c2.epsilon;
  return out;
}

// Accounting-only composition for claims whose systems are too large to
// build: the labels must chain and the errors add.
struct ErrorClaim {
  std::string name, real_label, ideal_label;
  double epsilon = 0.0;
};

inline ErrorClaim compose_serial(const ErrorClaim& a, const ErrorClaim& b) {
  if (a.ideal_label != b.real_label) throw RejectedInput("interface mismatch: " + a.ideal_label + " vs " + b.real_label);
  return {"(" + a.name + ";" + b.name + ")", a.real_label, b.ideal_label, a.epsilon + b.epsilon};
}

// --- fixtures with known advantages ------------------------------------------------------

namespace fixtures {

// A and B receive the same bit, equal to 1 with probability 1/2 + bias.
inline Comb shared_bit(double bias) {
  ACBENCH_ENFORCE(std::abs(bias) <= 0.5, "bias must lie in [-1/2, 1/2]");
  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 0) = 0.5 - bias;
  s(3, 3) = 0.5 + bias;
  return Comb::emit("shared-bit", s, {2, 2, 1});
}

// Uniform shared bit; E learns it with probability delta, otherwise sees bottom (2).
inline Comb leaky_bit(double delta) {
  CMatrix s = CMatrix::Zero(12, 12);
  for (std::size_t k = 0; k < 2; ++k) {
    const std::size_t ab = k * 2 + k;
    s(static_cast<Eigen::Index>(ab * 3 + k), static_cast<Eigen::Index>(ab * 3 + k)) = 0.5 * delta;
    s(static_cast<Eigen::Index>(ab * 3 + 2), static_cast<Eigen::Index>(ab * 3 + 2)) = 0.5 * (1.0 - delta);
  }
  return Comb::emit("leaky-bit", s, {2, 2, 3});
}

// B's bit flipped with probability delta.
inline Converter noisy_b(double delta) {
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return make_converter("flip", Interface::kB,
                        {std::sqrt(1.0 - delta) * CMatrix::Identity(2, 2), std::sqrt(delta) * x});
}

// Simulator that shows E the bottom symbol.
inline Converter bottom_simulator() {
  CMatrix k = CMatrix::Zero(3, 1);
  k(2, 0) = 1.0;
  return make_converter("bottom", Interface::kE, {k});
}

inline ConstructionClaim biased_claim(double eps) {
  return make_claim("biased", "R", shared_bit(eps), "S", shared_bit(0.0), {}, {}, eps);
}

inline ConstructionClaim flip_claim(double delta) {
  return make_claim("flip", "S", shared_bit(0.0), "T", shared_bit(0.0), {noisy_b(delta)}, {}, delta);
}

inline ConstructionClaim leak_claim(double delta) {
  return make_claim("leak", "R2", leaky_bit(delta), "S2", shared_bit(0.0), {}, {bottom_simulator()}, delta);
}

inline ConstructionClaim identity_claim() {
  return make_claim("identity", "S", shared_bit(0.0), "S", shared_bit(0.0), {}, {}, 0.0);
}

// Negative control: claims far less error than the bias it carries.
inline ConstructionClaim broken_claim() {
  return make_claim("broken", "R", shared_bit(0.2), "S", shared_bit(0.0), {}, {}, 0.01);
}

// Input-driven fixture: the bit x is echoed to B; E sees it with probability delta.
inline Comb echo(double delta) {
  std::vector<std::vector<double>> p(2, std::vector<double>(2 * 3, 0.0));
  for (std::size_t x = 0; x < 2; ++x) {
    p[x][x * 3 + x] = delta;
    p[x][x * 3 + 2] = 1.0 - delta;
  }
  return Comb::classical("echo", p, {1, 2, 3});
}

}  // namespace fixtures

}  // namespace acbench
