#pragma once

// Dense finite-dimensional density-operator engine.
//
// Qubit 0 is the leftmost tensor factor, so the basis state |x> of an n-qubit
// register has index x.to_uint(). Subnormalized operators (trace in [0, 1])
// are first-class because conditioning on events produces them.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "acbench/bitlinalg.hpp"
#include "acbench/error.hpp"

namespace acbench {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr std::size_t kMaxQubits = 10;
inline constexpr std::size_t kMaxDim = std::size_t{1} << kMaxQubits;
inline constexpr double kStateTolerance = 1e-10;

// --- spectral helpers -------------------------------------------------------

inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }

inline RVector hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// f(M) for Hermitian M via eigendecomposition; eigenvalues above -1e-10 are
// clamped at zero before f is applied when `clamp` is set.
template <class F>
CMatrix hermitian_function(const CMatrix& m, F&& f, bool clamp = true) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  RVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double v = ev[i];
    if (clamp && v < 0.0) v = 0.0;
    ev[i] = f(v);
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMatrix psd_sqrt(const CMatrix& m) {
  return hermitian_function(m, [](double v) { return std::sqrt(v); });
}

// Moore-Penrose style inverse square root on the support (eigenvalues > tol).
inline CMatrix psd_inv_sqrt(const CMatrix& m, double tol = 1e-13) {
  return hermitian_function(m, [tol](double v) { return v > tol ? 1.0 / std::sqrt(v) : 0.0; });
}

inline double trace_norm_hermitian(const CMatrix& m) {
  return hermitian_eigenvalues(m).cwiseAbs().sum();
}

inline double lambda_max(const CMatrix& m) { return hermitian_eigenvalues(m).maxCoeff(); }

inline bool is_diagonal(const CMatrix& m, double tol = 1e-14) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && std::abs(m(i, j)) > tol) return false;
  return true;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// --- DensityOperator --------------------------------------------------------

class DensityOperator {
 public:
  DensityOperator() : m_(CMatrix::Zero(1, 1)) {}

  // Validates Hermiticity, positivity and 0 <= tr <= 1 within 1e-10.
  static DensityOperator from_matrix(CMatrix m, double tol = kStateTolerance) {
    ACBENCH_ENFORCE(m.rows() == m.cols() && m.rows() > 0, "density operator must be square");
    ACBENCH_ENFORCE(static_cast<std::size_t>(m.rows()) <= kMaxDim * kMaxDim,
                    "density operator exceeds dimension cap");
    ACBENCH_ENFORCE((m - m.adjoint()).cwiseAbs().maxCoeff() <= tol,
                    "density operator is not Hermitian");
    const double tr = m.trace().real();
    ACBENCH_ENFORCE(tr >= -tol && tr <= 1.0 + tol, "trace outside [0, 1]");
    ACBENCH_ENFORCE(hermitian_eigenvalues(m).minCoeff() >= -tol,
                    "density operator has a negative eigenvalue");
    DensityOperator d;
    d.m_ = hermitian_part(m);
    return d;
  }

  static DensityOperator zero(std::size_t dim) {
    DensityOperator d;
    d.m_ = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    return d;
  }

  static DensityOperator maximally_mixed(std::size_t dim) {
    DensityOperator d;
    d.m_ = CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) /
           static_cast<double>(dim);
    return d;
  }

  static DensityOperator pure(const CVector& psi) {
    return from_matrix(psi * psi.adjoint());
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }
  double trace() const { return m_.trace().real(); }

  DensityOperator scaled(double w) const {
    ACBENCH_ENFORCE(w >= 0.0, "scale must be nonnegative");
    return from_matrix(m_ * w);
  }

  DensityOperator tensor(const DensityOperator& o) const {
    return from_matrix(kron(m_, o.m_));
  }

 private:
  CMatrix m_;
};

// --- conjugate coding --------------------------------------------------------

inline const CMatrix& hadamard() {
  static const CMatrix h = [] {
    CMatrix m(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    m << s, s, s, -s;
    return m;
  }();
  return h;
}

// H^theta |x> as a state vector.
inline CVector conjugate_code_vector(const Bitstring& x, const Bitstring& theta) {
  ACBENCH_ENFORCE(x.size() == theta.size(), "x and theta must have equal length");
  ACBENCH_ENFORCE(x.size() <= kMaxQubits, "too many qubits for the dense engine");
  CVector psi = CVector::Ones(1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CVector q = CVector::Zero(2);
    q[x[i] ? 1 : 0] = 1.0;
    if (theta[i]) q = hadamard() * q;
    CVector next(psi.size() * 2);
    for (Eigen::Index a = 0; a < psi.size(); ++a) {
      next[2 * a] = psi[a] * q[0];
      next[2 * a + 1] = psi[a] * q[1];
    }
    psi = std::move(next);
  }
  return psi;
}

inline DensityOperator conjugate_code_state(const Bitstring& x, const Bitstring& theta) {
  return DensityOperator::pure(conjugate_code_vector(x, theta));
}

inline std::size_t qubit_count(std::size_t dim) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  ACBENCH_ENFORCE((std::size_t{1} << n) == dim, "dimension is not a power of two");
  return n;
}

// U_q rho U_q^dagger for a single-qubit unitary acting on qubit q of an
// n-qubit register embedded in a larger space whose trailing factor has
// dimension `tail` (tail = 1 for a pure n-qubit register).
inline CMatrix apply_one_qubit(const CMatrix& rho, std::size_t n, std::size_t q,
                               const CMatrix& u, std::size_t tail = 1) {
  const std::size_t dim = (std::size_t{1} << n) * tail;
  const std::size_t stride = (std::size_t{1} << (n - 1 - q)) * tail;
  CMatrix left = rho;
  // left-multiply by U on qubit q
  for (std::size_t idx = 0; idx < dim; ++idx) {
    if (idx & stride) continue;
    const std::size_t i0 = idx, i1 = idx | stride;
    for (std::size_t c = 0; c < dim; ++c) {
      const Complex a = rho(i0, c), b = rho(i1, c);
      left(i0, c) = u(0, 0) * a + u(0, 1) * b;
      left(i1, c) = u(1, 0) * a + u(1, 1) * b;
    }
  }
  CMatrix out = left;
  const CMatrix ua = u.adjoint();
  for (std::size_t idx = 0; idx < dim; ++idx) {
    if (idx & stride) continue;
    const std::size_t j0 = idx, j1 = idx | stride;
    for (std::size_t r = 0; r < dim; ++r) {
      const Complex a = left(r, j0), b = left(r, j1);
      out(r, j0) = a * ua(0, 0) + b * ua(1, 0);
      out(r, j1) = a * ua(0, 1) + b * ua(1, 1);
    }
  }
  return out;
}

// H^theta rho H^theta
inline CMatrix rotate_to_basis(const CMatrix& rho, const Bitstring& theta, std::size_t tail = 1) {
  CMatrix r = rho;
  for (std::size_t q = 0; q < theta.size(); ++q) {
    if (theta[q]) r = apply_one_qubit(r, theta.size(), q, hadamard(), tail);
  }
  return r;
}

struct BbOutcome {
  Bitstring x;
  double weight;
};

// Measurement of every qubit in the basis selected by theta. Outcome x has
// weight tr(P_x rho P_x) with P_x = H^theta |x><x| H^theta; the post-measurement
// operator is weight * conjugate_code_state(x, theta).
inline std::vector<BbOutcome> measure_bb(const DensityOperator& rho, const Bitstring& theta) {
  ACBENCH_ENFORCE(rho.dim() == (std::size_t{1} << theta.size()),
                  "measure_bb: rho dimension must be 2^|theta|");
  const CMatrix r = rotate_to_basis(rho.matrix(), theta);
  std::vector<BbOutcome> out;
  out.reserve(rho.dim());
  for (std::size_t v = 0; v < rho.dim(); ++v) {
    out.push_back({Bitstring::from_uint(v, theta.size()),
                   std::max(0.0, r(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)).real())});
  }
  return out;
}

// Same measurement on the first n qubits of a register Q (x) E. Returns, for
// every outcome x, the unnormalized post-measurement operator on E.
inline std::vector<CMatrix> measure_bb_partial(const CMatrix& rho_qe, const Bitstring& theta,
                                               std::size_t dim_e) {
  const std::size_t dq = std::size_t{1} << theta.size();
  ACBENCH_ENFORCE(static_cast<std::size_t>(rho_qe.rows()) == dq * dim_e,
                  "measure_bb_partial: dimension mismatch");
  const CMatrix r = rotate_to_basis(rho_qe, theta, dim_e);
  std::vector<CMatrix> out;
  out.reserve(dq);
  const auto de = static_cast<Eigen::Index>(dim_e);
  for (std::size_t v = 0; v < dq; ++v) {
    out.push_back(r.block(static_cast<Eigen::Index>(v) * de, static_cast<Eigen::Index>(v) * de, de, de));
  }
  return out;
}

// --- distances ----------------------------------------------------------------

inline void check_same_dim(const DensityOperator& a, const DensityOperator& b) {
  ACBENCH_ENFORCE(a.dim() == b.dim(), "operators have different dimensions");
}

// D(rho, sigma) = 1/2 ||rho - sigma||_1
inline double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_dim(rho, sigma);
  return 0.5 * trace_norm_hermitian(rho.matrix() - sigma.matrix());
}

// D(rho, sigma) + 1/2 |tr rho - tr sigma|
inline double generalized_trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  return trace_distance(rho, sigma) + 0.5 * std::abs(rho.trace() - sigma.trace());
}

// F(rho, sigma) = tr sqrt(rho^1/2 sigma rho^1/2)
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_dim(rho, sigma);
  const CMatrix& a = rho.matrix();
  const CMatrix& b = sigma.matrix();
  if (is_diagonal(a) && is_diagonal(b)) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      f += std::sqrt(std::max(0.0, a(i, i).real()) * std::max(0.0, b(i, i).real()));
    }
    return f;
  }
  const CMatrix sa = psd_sqrt(a);
  const RVector ev = hermitian_eigenvalues(sa * b * sa);
  double f = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) f += std::sqrt(std::max(0.0, ev[i]));
  return f;
}

// F(rho, sigma) + sqrt((1 - tr rho)(1 - tr sigma))
inline double generalized_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  const double slack = std::max(0.0, 1.0 - rho.trace()) * std::max(0.0, 1.0 - sigma.trace());
  return fidelity(rho, sigma) + std::sqrt(slack);
}

// P(rho, sigma) = sqrt(1 - Fbar^2)
inline double purified_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  const double f = std::min(1.0, generalized_fidelity(rho, sigma));
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

// --- channels ---------------------------------------------------------------

class KrausChannel {
 public:
  explicit KrausChannel(std::vector<CMatrix> ops, double tol = 1e-10) : ops_(std::move(ops)) {
    ACBENCH_ENFORCE(!ops_.empty(), "a channel needs at least one Kraus operator");
    const auto din = ops_.front().cols();
    const auto dout = ops_.front().rows();
    CMatrix sum = CMatrix::Zero(din, din);
    for (const auto& k : ops_) {
      ACBENCH_ENFORCE(k.cols() == din && k.rows() == dout, "Kraus operators disagree on dimensions");
      sum += k.adjoint() * k;
    }
    const RVector ev = hermitian_eigenvalues(sum);
    ACBENCH_ENFORCE(ev.maxCoeff() <= 1.0 + tol, "Kraus operators are trace increasing");
    trace_preserving_ = (sum - CMatrix::Identity(din, din)).cwiseAbs().maxCoeff() <= tol;
  }

  static KrausChannel identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return KrausChannel({CMatrix::Identity(d, d)});
  }
  static KrausChannel unitary(const CMatrix& u) { return KrausChannel({u}); }

  // rho -> (1 - lambda) rho + lambda I/2 on one qubit.
  static KrausChannel depolarizing(double lambda) {
    ACBENCH_ENFORCE(lambda >= 0.0 && lambda <= 4.0 / 3.0, "depolarizing parameter out of range");
    const auto& p = paulis();
    return KrausChannel({std::sqrt(1.0 - 3.0 * lambda / 4.0) * p[0], std::sqrt(lambda / 4.0) * p[1],
                         std::sqrt(lambda / 4.0) * p[2], std::sqrt(lambda / 4.0) * p[3]});
  }

  // {I, X, Y, Z}
  static const std::array<CMatrix, 4>& paulis() {
    static const std::array<CMatrix, 4> p = [] {
      std::array<CMatrix, 4> a;
      a[0] = CMatrix::Identity(2, 2);
      a[1] = CMatrix::Zero(2, 2);
      a[1](0, 1) = a[1](1, 0) = 1.0;
      a[2] = CMatrix::Zero(2, 2);
      a[2](0, 1) = Complex(0, -1);
      a[2](1, 0) = Complex(0, 1);
      a[3] = CMatrix::Identity(2, 2);
      a[3](1, 1) = -1.0;
      return a;
    }();
    return p;
  }

  // Pauli string such as "XZ" (qubit 0 first).
  static CMatrix pauli_string(std::string_view s) {
    CMatrix u = CMatrix::Identity(1, 1);
    for (char c : s) {
      int idx = 0;
      switch (c) {
        case 'I': idx = 0; break;
        case 'X': idx = 1; break;
        case 'Y': idx = 2; break;
        case 'Z': idx = 3; break;
        default: throw RejectedInput(std::string("unknown Pauli letter: ") + c);
      }
      u = kron(u, paulis()[static_cast<std::size_t>(idx)]);
    }
    return u;
  }

  const std::vector<CMatrix>& operators() const noexcept { return ops_; }
  std::size_t dim_in() const { return static_cast<std::size_t>(ops_.front().cols()); }
  std::size_t dim_out() const { return static_cast<std::size_t>(ops_.front().rows()); }
  bool trace_preserving() const noexcept { return trace_preserving_; }

 private:
  std::vector<CMatrix> ops_;
  bool trace_preserving_ = false;
};

inline CMatrix apply_kraus(const std::vector<CMatrix>& ops, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(ops.front().rows(), ops.front().rows());
  for (const auto& k : ops) out += k * rho * k.adjoint();
  return hermitian_part(out);
}

inline DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho) {
  ACBENCH_ENFORCE(ch.dim_in() == rho.dim(), "apply_channel: dimension mismatch");
  return DensityOperator::from_matrix(apply_kraus(ch.operators(), rho.matrix()));
}

// Reduced operator on the factors with keep[i] set. dims lists the factor
// dimensions in tensor order.
inline CMatrix partial_trace(const CMatrix& rho, const std::vector<bool>& keep,
                             const std::vector<std::size_t>& dims) {
  ACBENCH_ENFORCE(keep.size() == dims.size(), "partial_trace: keep mask and dims disagree");
  std::size_t total = 1;
  for (auto d : dims) {
    ACBENCH_ENFORCE(d > 0, "partial_trace: zero-dimensional factor");
    total *= d;
  }
  ACBENCH_ENFORCE(total == static_cast<std::size_t>(rho.rows()) && rho.rows() == rho.cols(),
                  "partial_trace: factor dimensions do not multiply to the operator dimension");
  const std::size_t k = dims.size();
  std::size_t kept_dim = 1, traced_dim = 1;
  for (std::size_t i = 0; i < k; ++i) (keep[i] ? kept_dim : traced_dim) *= dims[i];

  // digits -> (kept index, traced index)
  std::vector<std::size_t> kept_index(total), traced_index(total);
  std::vector<std::size_t> digit(k, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t i = k; i-- > 0;) {
      digit[i] = rem % dims[i];
      rem /= dims[i];
    }
    std::size_t ki = 0, ti = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (keep[i]) ki = ki * dims[i] + digit[i];
      else ti = ti * dims[i] + digit[i];
    }
    kept_index[idx] = ki;
    traced_index[idx] = ti;
  }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(kept_dim), static_cast<Eigen::Index>(kept_dim));
  for (std::size_t r = 0; r < total; ++r) {
    for (std::size_t c = 0; c < total; ++c) {
      if (traced_index[r] != traced_index[c]) continue;
      out(static_cast<Eigen::Index>(kept_index[r]), static_cast<Eigen::Index>(kept_index[c])) +=
          rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

inline DensityOperator partial_trace(const DensityOperator& rho, const std::vector<bool>& keep,
                                     const std::vector<std::size_t>& dims) {
  return DensityOperator::from_matrix(partial_trace(rho.matrix(), keep, dims));
}

// Maximally entangled state on n qubit pairs, ordered A_1..A_n B_1..B_n.
inline DensityOperator epr_pairs(std::size_t n) {
  const std::size_t d = std::size_t{1} << n;
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(d * d));
  for (std::size_t v = 0; v < d; ++v) psi[static_cast<Eigen::Index>(v * d + v)] = 1.0;
  psi /= std::sqrt(static_cast<double>(d));
  return DensityOperator::pure(psi);
}

// --- random states for property tests and the lemma suites -----------------

template <class Rng>
CMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// Random state of the given rank (0 = full rank) scaled to the given trace.
template <class Rng>
DensityOperator random_state(std::size_t dim, Rng& rng, double trace = 1.0, std::size_t rank = 0) {
  if (rank == 0 || rank > dim) rank = dim;
  const CMatrix g = random_ginibre(dim, rank, rng);
  CMatrix m = g * g.adjoint();
  m *= trace / m.trace().real();
  return DensityOperator::from_matrix(hermitian_part(m));
}

template <class Rng>
DensityOperator random_subnormalized_state(std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> r(1, dim);
  return random_state(dim, rng, u(rng), r(rng));
}

// Random unitary from the QR decomposition of a Ginibre matrix.
template <class Rng>
CMatrix random_unitary(std::size_t dim, Rng& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_ginibre(dim, dim, rng));
  return qr.householderQ() * CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

}  // namespace acbench
