#pragma once

// Guessing probability and (smooth) min-entropy over classical-quantum states.
//
// Where no closed form exists the result is a Bracket [lo, hi] that contains
// the true value: lo comes from an explicit measurement, hi from a feasible
// dual operator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "acbench/error.hpp"
#include "acbench/quantum.hpp"

namespace acbench {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class BracketMethod { kExact, kHelstrom, kPrimalDual, kSearch };

inline const char* to_string(BracketMethod m) {
  switch (m) {
    case BracketMethod::kExact: return "exact";
    case BracketMethod::kHelstrom: return "helstrom";
    case BracketMethod::kPrimalDual: return "primal-dual";
    case BracketMethod::kSearch: return "search";
  }
  return "?";
}

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  BracketMethod method = BracketMethod::kExact;
  std::size_t iterations = 0;

  static Bracket exact(double v, BracketMethod m = BracketMethod::kExact) { return {v, v, m, 0}; }
  double width() const { return (std::isinf(lo) && std::isinf(hi)) ? 0.0 : hi - lo; }
  double mid() const { return std::isinf(lo) ? lo : 0.5 * (lo + hi); }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

// Sum of independent brackets (e.g. guessing probability over classical blocks).
// The result keeps the weakest method tag.
inline Bracket operator+(const Bracket& a, const Bracket& b) {
  Bracket r{a.lo + b.lo, a.hi + b.hi, std::max(a.method, b.method), a.iterations + b.iterations};
  return r;
}

// -log2 of a guessing-probability bracket; zero mass maps to +inf.
inline Bracket neg_log2(const Bracket& pg) {
  auto f = [](double p) { return p <= 0.0 ? kInf : -std::log2(p); };
  return {f(pg.hi), f(pg.lo), pg.method, pg.iterations};
}

inline std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// --- classical joints --------------------------------------------------------

// Dense table p(x, e), subnormalized allowed.
class ClassicalJoint {
 public:
  ClassicalJoint(std::size_t nx, std::size_t ne) : nx_(nx), ne_(ne), p_(nx * ne, 0.0) {
    ACBENCH_ENFORCE(nx > 0 && ne > 0, "ClassicalJoint needs nonempty alphabets");
  }

  static ClassicalJoint from_table(const std::vector<std::vector<double>>& rows) {
    ACBENCH_ENFORCE(!rows.empty() && !rows.front().empty(), "empty probability table");
    ClassicalJoint j(rows.size(), rows.front().size());
    for (std::size_t x = 0; x < rows.size(); ++x) {
      ACBENCH_ENFORCE(rows[x].size() == j.ne_, "ragged probability table");
      for (std::size_t e = 0; e < j.ne_; ++e) j.set(x, e, rows[x][e]);
    }
    j.validate();
    return j;
  }

  // X uniform over nx values, no side information.
  static ClassicalJoint uniform(std::size_t nx, double mass = 1.0) {
    ClassicalJoint j(nx, 1);
    for (std::size_t x = 0; x < nx; ++x) j.set(x, 0, mass / static_cast<double>(nx));
    return j;
  }

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ne() const noexcept { return ne_; }
  double operator()(std::size_t x, std::size_t e) const { return p_[x * ne_ + e]; }
  void set(std::size_t x, std::size_t e, double v) {
    ACBENCH_ENFORCE(x < nx_ && e < ne_, "ClassicalJoint index out of range");
    ACBENCH_ENFORCE(v >= 0.0 && std::isfinite(v), "probabilities must be nonnegative");
    p_[x * ne_ + e] = v;
  }
  void add(std::size_t x, std::size_t e, double v) { set(x, e, (*this)(x, e) + v); }

  double mass() const {
    double s = 0.0;
    for (double v : p_) s += v;
    return s;
  }
  double column_mass(std::size_t e) const {
    double s = 0.0;
    for (std::size_t x = 0; x < nx_; ++x) s += (*this)(x, e);
    return s;
  }
  std::vector<double> x_marginal() const {
    std::vector<double> m(nx_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t e = 0; e < ne_; ++e) m[x] += (*this)(x, e);
    return m;
  }

  void validate() const {
    ACBENCH_ENFORCE(mass() <= 1.0 + 1e-12, "ClassicalJoint mass exceeds 1");
  }

  // CSV rows "x,e,p" with a header line.
  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "x,e,p\n";
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t e = 0; e < ne_; ++e)
        if ((*this)(x, e) != 0.0) os << x << ',' << e << ',' << (*this)(x, e) << '\n';
    return os.str();
  }

  static ClassicalJoint from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::tuple<std::size_t, std::size_t, double>> rows;
    std::size_t nx = 0, ne = 0;
    bool first = true;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (first && line.rfind("x,", 0) == 0) {
        first = false;
        continue;
      }
      first = false;
      std::istringstream ls(line);
      std::string a, b, c;
      if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
        throw RejectedInput("malformed ClassicalJoint CSV line: " + line);
      }
      try {
        const std::size_t x = std::stoul(a), e = std::stoul(b);
        const double p = std::stod(c);
        rows.emplace_back(x, e, p);
        nx = std::max(nx, x + 1);
        ne = std::max(ne, e + 1);
      } catch (const std::logic_error&) {
        throw RejectedInput("malformed ClassicalJoint CSV line: " + line);
      }
    }
    ACBENCH_ENFORCE(!rows.empty(), "ClassicalJoint CSV has no entries");
    ClassicalJoint j(nx, ne);
    for (auto [x, e, p] : rows) j.add(x, e, p);
    j.validate();
    return j;
  }

 private:
  std::size_t nx_, ne_;
  std::vector<double> p_;
};

// sum_e max_x p(x, e)
inline double pguess_classical(const ClassicalJoint& p) {
  double s = 0.0;
  for (std::size_t e = 0; e < p.ne(); ++e) {
    double best = 0.0;
    for (std::size_t x = 0; x < p.nx(); ++x) best = std::max(best, p(x, e));
    s += best;
  }
  return s;
}

inline double hmin_classical(const ClassicalJoint& p) {
  const double pg = pguess_classical(p);
  return pg <= 0.0 ? kInf : -std::log2(pg);
}

// --- cq states ---------------------------------------------------------------

struct CqBranch {
  std::string symbol;
  double weight = 0.0;
  DensityOperator conditional;  // unit trace
};

class CqState {
 public:
  CqState() = default;

  // Branches given as unnormalized operators w_x rho_x.
  static CqState from_unnormalized(const std::vector<std::pair<std::string, CMatrix>>& ops) {
    CqState s;
    ACBENCH_ENFORCE(!ops.empty(), "CqState needs at least one branch");
    const auto dim = ops.front().second.rows();
    for (const auto& [sym, m] : ops) {
      ACBENCH_ENFORCE(m.rows() == dim, "CqState conditionals must share a dimension");
      const double w = std::max(0.0, m.trace().real());
      CqBranch b;
      b.symbol = sym;
      b.weight = w;
      b.conditional = w > 1e-300 ? DensityOperator::from_matrix(m / w, 1e-8)
                                 : DensityOperator::maximally_mixed(static_cast<std::size_t>(dim));
      s.branches_.push_back(std::move(b));
    }
    s.validate();
    return s;
  }

  static CqState from_branches(std::vector<CqBranch> branches) {
    CqState s;
    s.branches_ = std::move(branches);
    s.validate();
    return s;
  }

  // Classical side information embedded as diagonal conditionals.
  static CqState from_classical(const ClassicalJoint& p) {
    std::vector<std::pair<std::string, CMatrix>> ops;
    for (std::size_t x = 0; x < p.nx(); ++x) {
      CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(p.ne()), static_cast<Eigen::Index>(p.ne()));
      for (std::size_t e = 0; e < p.ne(); ++e) m(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) = p(x, e);
      ops.emplace_back(std::to_string(x), m);
    }
    return from_unnormalized(ops);
  }

  const std::vector<CqBranch>& branches() const noexcept { return branches_; }
  std::size_t side_dim() const { return branches_.front().conditional.dim(); }
  double total_weight() const {
    double s = 0.0;
    for (const auto& b : branches_) s += b.weight;
    return s;
  }
  std::vector<CMatrix> weighted_operators() const {
    std::vector<CMatrix> out;
    out.reserve(branches_.size());
    for (const auto& b : branches_) out.push_back(b.weight * b.conditional.matrix());
    return out;
  }

  // Applies a channel to the side information of every branch.
  CqState process_side(const KrausChannel& ch) const {
    CqState s;
    for (const auto& b : branches_) {
      s.branches_.push_back({b.symbol, b.weight, apply_channel(ch, b.conditional)});
    }
    return s;
  }

 private:
  void validate() const {
    ACBENCH_ENFORCE(!branches_.empty(), "CqState needs at least one branch");
    const std::size_t d = branches_.front().conditional.dim();
    for (const auto& b : branches_) {
      ACBENCH_ENFORCE(b.weight >= 0.0, "negative branch weight");
      ACBENCH_ENFORCE(b.conditional.dim() == d, "CqState conditionals must share a dimension");
      ACBENCH_ENFORCE(std::abs(b.conditional.trace() - 1.0) <= 1e-8, "conditionals must have unit trace");
    }
    ACBENCH_ENFORCE(total_weight() <= 1.0 + 1e-10, "CqState total weight exceeds 1");
  }

  std::vector<CqBranch> branches_;
};

// --- guessing probability ------------------------------------------------------

struct PguessOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 10000;
};

namespace detail {

inline bool all_diagonal(const std::vector<CMatrix>& ops) {
  return std::all_of(ops.begin(), ops.end(), [](const CMatrix& m) { return is_diagonal(m); });
}

// Iterated rescaling of the pretty-good measurement towards the optimal
// minimum-error POVM, with a dual certificate at every step.
inline Bracket pguess_iterative(const std::vector<CMatrix>& a, const PguessOptions& opt) {
  const auto d = a.front().rows();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix total = CMatrix::Zero(d, d);
  for (const auto& m : a) total += m;

  // POVM from rescaled operators G^{-1/2} B_x G^{-1/2}, kernel assigned to outcome 0.
  auto normalize = [&](std::vector<CMatrix>& b) {
    CMatrix g = CMatrix::Zero(d, d);
    for (const auto& m : b) g += m;
    const CMatrix gi = psd_inv_sqrt(g, 1e-14);
    CMatrix sum = CMatrix::Zero(d, d);
    for (auto& m : b) {
      m = hermitian_part(gi * m * gi);
      sum += m;
    }
    b.front() += hermitian_part(id - sum);
  };

  std::vector<CMatrix> povm = a;  // pretty-good measurement
  normalize(povm);

  double best_lo = 0.0;
  for (const auto& m : a) best_lo = std::max(best_lo, m.trace().real());
  // Y = sum_x A_x dominates every A_x.
  double best_hi = total.trace().real();

  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    double lo = 0.0;
    CMatrix y = CMatrix::Zero(d, d);
    for (std::size_t x = 0; x < a.size(); ++x) {
      lo += (a[x] * povm[x]).trace().real();
      y += a[x] * povm[x];
    }
    y = hermitian_part(y);
    double c = 0.0;
    for (const auto& m : a) c = std::max(c, lambda_max(m - y));
    const double hi = y.trace().real() + static_cast<double>(d) * c;
    best_lo = std::max(best_lo, lo);
    best_hi = std::min(best_hi, hi);
    if (best_hi - best_lo <= opt.tolerance) break;

    std::vector<CMatrix> next(a.size());
    for (std::size_t x = 0; x < a.size(); ++x) next[x] = hermitian_part(a[x] * povm[x] * a[x]);
    normalize(next);
    povm = std::move(next);
  }
  return {best_lo, std::max(best_lo, best_hi), BracketMethod::kPrimalDual, it};
}

}  // namespace detail

// Guessing probability of X from the side information described by the
// unnormalized operators a[x] = w_x rho_x.
inline Bracket pguess_operators(const std::vector<CMatrix>& a, const PguessOptions& opt = {}) {
  ACBENCH_ENFORCE(!a.empty(), "pguess needs at least one branch");
  const auto d = a.front().rows();
  for (const auto& m : a) ACBENCH_ENFORCE(m.rows() == d && m.cols() == d, "pguess: dimension mismatch");

  if (detail::all_diagonal(a)) {
    double s = 0.0;
    for (Eigen::Index e = 0; e < d; ++e) {
      double best = 0.0;
      for (const auto& m : a) best = std::max(best, m(e, e).real());
      s += best;
    }
    return Bracket::exact(s);
  }

  // Branches with no weight never help the guesser.
  std::vector<CMatrix> live;
  for (const auto& m : a)
    if (m.trace().real() > 1e-15) live.push_back(m);
  if (live.empty()) return Bracket::exact(0.0);
  if (live.size() == 1) return Bracket::exact(live.front().trace().real());
  if (live.size() == 2) {
    const double v = 0.5 * (live[0].trace().real() + live[1].trace().real() +
                            trace_norm_hermitian(live[0] - live[1]));
    return Bracket::exact(v, BracketMethod::kHelstrom);
  }
  return detail::pguess_iterative(live, opt);
}

inline Bracket pguess_cq(const CqState& rho, const PguessOptions& opt = {}) {
  return pguess_operators(rho.weighted_operators(), opt);
}

inline Bracket hmin(const CqState& rho, const PguessOptions& opt = {}) {
  return neg_log2(pguess_cq(rho, opt));
}

// --- smooth min-entropy (classical) --------------------------------------------

namespace detail {

// Purified distance between two classical subnormalized distributions.
inline double purified_distance_classical(const ClassicalJoint& q, const ClassicalJoint& p) {
  double f = 0.0;
  for (std::size_t x = 0; x < p.nx(); ++x)
    for (std::size_t e = 0; e < p.ne(); ++e) f += std::sqrt(q(x, e) * p(x, e));
  f += std::sqrt(std::max(0.0, 1.0 - q.mass()) * std::max(0.0, 1.0 - p.mass()));
  f = std::min(1.0, f);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

// Caps every conditional probability p(x|e) at c. When `keep_mass` is set the
// removed mass is handed to the entries below the cap in proportion to their
// headroom, which keeps each column's mass.
inline ClassicalJoint capped(const ClassicalJoint& p, double c, bool keep_mass) {
  ClassicalJoint q(p.nx(), p.ne());
  for (std::size_t e = 0; e < p.ne(); ++e) {
    const double pe = p.column_mass(e);
    const double cap = c * pe;
    double excess = 0.0, headroom = 0.0;
    for (std::size_t x = 0; x < p.nx(); ++x) {
      const double v = p(x, e);
      if (v > cap) {
        excess += v - cap;
        q.set(x, e, cap);
      } else {
        q.set(x, e, v);
        headroom += cap - v;
      }
    }
    if (keep_mass && excess > 0.0 && headroom > 0.0) {
      const double scale = std::min(1.0, excess / headroom);
      for (std::size_t x = 0; x < p.nx(); ++x) {
        const double v = q(x, e);
        if (v < cap) q.set(x, e, v + scale * (cap - v));
      }
    }
  }
  return q;
}

inline double max_conditional(const ClassicalJoint& p) {
  double c = 0.0;
  for (std::size_t e = 0; e < p.ne(); ++e) {
    const double pe = p.column_mass(e);
    if (pe <= 0.0) continue;
    for (std::size_t x = 0; x < p.nx(); ++x) c = std::max(c, p(x, e) / pe);
  }
  return c;
}

}  // namespace detail

// Lower bound on the delta-smooth min-entropy from explicit capped candidates.
// hi - lo is the residual of the threshold search, not a certified optimum.
inline Bracket hmin_smooth_classical(const ClassicalJoint& p, double delta) {
  ACBENCH_ENFORCE(delta >= 0.0 && delta < 1.0, "smoothing parameter must lie in [0, 1)");
  const double base = hmin_classical(p);
  if (delta == 0.0 || std::isinf(base)) return Bracket::exact(base);

  const double c_floor = 1.0 / static_cast<double>(p.nx());
  const double c_top = detail::max_conditional(p);
  if (c_top <= c_floor) return Bracket::exact(base);

  Bracket best = Bracket::exact(base, BracketMethod::kSearch);
  for (bool keep_mass : {true, false}) {
    auto feasible = [&](double c) {
      return detail::purified_distance_classical(detail::capped(p, c, keep_mass), p) <= delta;
    };
    double lo_c = c_floor, hi_c = c_top;  // hi_c always feasible (no capping)
    if (feasible(lo_c)) {
      hi_c = lo_c;
    } else {
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo_c + hi_c);
        (feasible(mid) ? hi_c : lo_c) = mid;
      }
    }
    const double ent = hmin_classical(detail::capped(p, hi_c, keep_mass));
    const double ent_infeasible = hmin_classical(detail::capped(p, lo_c, keep_mass));
    if (ent > best.lo) {
      best.lo = ent;
      best.hi = std::max(ent, ent_infeasible);
    }
  }
  best.hi = std::max(best.hi, best.lo);
  best.method = BracketMethod::kSearch;
  return best;
}

// --- lemma checks -------------------------------------------------------------

struct LemmaCheck {
  bool holds = false;
  double lhs = 0.0;  // conservative value of the side claimed to be larger
  double rhs = 0.0;
};

// X held against side information (B, Z) flattened as e = b * nz + z.
// Checks Hmin(X|BZ) >= Hmin(X|B) - log2 |Z| with exact classical values.
inline LemmaCheck check_chain_rule(const ClassicalJoint& p_xbz, std::size_t nz, double tol = 1e-9) {
  ACBENCH_ENFORCE(nz > 0 && p_xbz.ne() % nz == 0, "side alphabet is not a multiple of |Z|");
  const std::size_t nb = p_xbz.ne() / nz;
  ClassicalJoint p_xb(p_xbz.nx(), nb);
  for (std::size_t x = 0; x < p_xbz.nx(); ++x)
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t z = 0; z < nz; ++z) p_xb.add(x, b, p_xbz(x, b * nz + z));
  LemmaCheck r;
  r.lhs = hmin_classical(p_xbz);
  r.rhs = hmin_classical(p_xb) - std::log2(static_cast<double>(nz));
  r.holds = std::isinf(r.lhs) || r.lhs >= r.rhs - tol;
  return r;
}

// Quantum-side version: the side operators live on B (x) Z with Z the last
// factor of dimension nz and classical (block diagonal).
inline LemmaCheck check_chain_rule(const CqState& rho_xbz, std::size_t nz, const PguessOptions& opt = {}) {
  const std::size_t d = rho_xbz.side_dim();
  ACBENCH_ENFORCE(nz > 0 && d % nz == 0, "side dimension is not a multiple of |Z|");
  const auto ops = rho_xbz.weighted_operators();
  const auto db = static_cast<Eigen::Index>(d / nz);
  // Hmin(X|BZ) splits over the classical Z blocks.
  Bracket lhs_pg = Bracket::exact(0.0);
  std::vector<CMatrix> marg(ops.size(), CMatrix::Zero(db, db));
  for (std::size_t z = 0; z < nz; ++z) {
    std::vector<CMatrix> block;
    for (std::size_t x = 0; x < ops.size(); ++x) {
      CMatrix m(db, db);
      for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
          m(i, j) = ops[x](i * static_cast<Eigen::Index>(nz) + static_cast<Eigen::Index>(z),
                           j * static_cast<Eigen::Index>(nz) + static_cast<Eigen::Index>(z));
      marg[x] += m;
      block.push_back(std::move(m));
    }
    lhs_pg = lhs_pg + pguess_operators(block, opt);
  }
  const Bracket lhs = neg_log2(lhs_pg);
  const Bracket rhs = neg_log2(pguess_operators(marg, opt));
  LemmaCheck r;
  r.lhs = lhs.lo;
  r.rhs = rhs.hi - std::log2(static_cast<double>(nz));
  r.holds = std::isinf(r.lhs) || r.lhs >= r.rhs - 1e-9;
  return r;
}

// Selects the Z = `value` branch of a joint whose side register ends in a
// binary flag (e = b * 2 + z). The result is subnormalized over (X, B).
inline ClassicalJoint condition_on_event(const ClassicalJoint& p_xbz, std::size_t value = 0) {
  ACBENCH_ENFORCE(p_xbz.ne() % 2 == 0, "no binary flag register on the side information");
  ACBENCH_ENFORCE(value < 2, "flag value must be 0 or 1");
  const std::size_t nb = p_xbz.ne() / 2;
  ClassicalJoint out(p_xbz.nx(), nb);
  for (std::size_t x = 0; x < p_xbz.nx(); ++x)
    for (std::size_t b = 0; b < nb; ++b) out.set(x, b, p_xbz(x, b * 2 + value));
  return out;
}

// Quantum version: the flag is the last (dimension-2) factor of the side
// register and must be classical.
inline CqState condition_on_event(const CqState& rho_xbz, std::size_t value = 0) {
  const std::size_t d = rho_xbz.side_dim();
  ACBENCH_ENFORCE(d % 2 == 0, "no binary flag register on the side information");
  ACBENCH_ENFORCE(value < 2, "flag value must be 0 or 1");
  const auto db = static_cast<Eigen::Index>(d / 2);
  std::vector<std::pair<std::string, CMatrix>> out;
  for (const auto& b : rho_xbz.branches()) {
    const CMatrix m = b.weight * b.conditional.matrix();
    for (Eigen::Index i = 0; i < db; ++i)
      for (Eigen::Index j = 0; j < db; ++j)
        ACBENCH_ENFORCE(std::abs(m(2 * i, 2 * j + 1)) <= 1e-10 && std::abs(m(2 * i + 1, 2 * j)) <= 1e-10,
                        "flag register is not classical");
    CMatrix sel(db, db);
    for (Eigen::Index i = 0; i < db; ++i)
      for (Eigen::Index j = 0; j < db; ++j)
        sel(i, j) = m(2 * i + static_cast<Eigen::Index>(value), 2 * j + static_cast<Eigen::Index>(value));
    out.emplace_back(b.symbol, sel);
  }
  return CqState::from_unnormalized(out);
}

// Marginal over (X, B) of a flagged joint.
inline ClassicalJoint drop_flag(const ClassicalJoint& p_xbz) {
  ACBENCH_ENFORCE(p_xbz.ne() % 2 == 0, "no binary flag register on the side information");
  const std::size_t nb = p_xbz.ne() / 2;
  ClassicalJoint out(p_xbz.nx(), nb);
  for (std::size_t x = 0; x < p_xbz.nx(); ++x)
    for (std::size_t b = 0; b < nb; ++b) out.set(x, b, p_xbz(x, 2 * b) + p_xbz(x, 2 * b + 1));
  return out;
}

// Hmin of the selected branch is never below Hmin of the whole state.
inline LemmaCheck check_event_conditioning(const ClassicalJoint& p_xbz, double tol = 1e-9) {
  LemmaCheck r;
  r.lhs = hmin_classical(condition_on_event(p_xbz, 0));
  r.rhs = hmin_classical(drop_flag(p_xbz));
  r.holds = std::isinf(r.lhs) || r.lhs >= r.rhs - tol;
  return r;
}

}  // namespace acbench
