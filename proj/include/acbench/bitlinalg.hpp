#pragma once

// GF(2) vectors and matrices, GF(2^m) arithmetic, Hamming geometry and small
// explicit codes.
//
// Bit order: index 0 is the leftmost / most significant bit everywhere. A
// Bitstring "0110" converts to the integer 6, its bit 0 is the coefficient of
// x^{m-1} when read as a field element, and the Toeplitz seed index 0 is the
// first character of the seed string.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "acbench/error.hpp"

namespace acbench {

class Bitstring {
 public:
  Bitstring() = default;
  explicit Bitstring(std::size_t len, bool value = false)
      : bits_(len, value ? 1 : 0) {}

  static Bitstring from_string(std::string_view s) {
    Bitstring b;
    b.bits_.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') {
        throw RejectedInput("bitstring may only contain '0' and '1': " +
                            std::string(s));
      }
      b.bits_.push_back(c == '1' ? 1 : 0);
    }
    return b;
  }

  // The len-bit big-endian representation of v (bit 0 is the MSB).
  static Bitstring from_uint(std::uint64_t v, std::size_t len) {
    ACBENCH_ENFORCE(len <= 64, "from_uint supports at most 64 bits");
    ACBENCH_ENFORCE(len == 64 || (v >> len) == 0,
                    "value does not fit in the requested length");
    Bitstring b(len);
    for (std::size_t i = 0; i < len; ++i) {
      b.bits_[i] = static_cast<std::uint8_t>((v >> (len - 1 - i)) & 1U);
    }
    return b;
  }

  std::uint64_t to_uint() const {
    ACBENCH_ENFORCE(bits_.size() <= 64, "to_uint supports at most 64 bits");
    std::uint64_t v = 0;
    for (auto bit : bits_) v = (v << 1) | bit;
    return v;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool at(std::size_t i) const {
    ACBENCH_ENFORCE(i < bits_.size(), "bit index out of range");
    return bits_[i] != 0;
  }
  void set(std::size_t i, bool v) {
    ACBENCH_ENFORCE(i < bits_.size(), "bit index out of range");
    bits_[i] = v ? 1 : 0;
  }
  void flip(std::size_t i) {
    ACBENCH_ENFORCE(i < bits_.size(), "bit index out of range");
    bits_[i] ^= 1U;
  }

  std::size_t weight() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto bit : bits_) s.push_back(bit ? '1' : '0');
    return s;
  }

  Bitstring operator^(const Bitstring& o) const {
    ACBENCH_ENFORCE(size() == o.size(), "xor of bitstrings with different lengths");
    Bitstring r(*this);
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] ^= o.bits_[i];
    return r;
  }

  // Concatenation x || y.
  Bitstring operator+(const Bitstring& o) const {
    Bitstring r(*this);
    r.bits_.insert(r.bits_.end(), o.bits_.begin(), o.bits_.end());
    return r;
  }

  Bitstring slice(std::size_t pos, std::size_t len) const {
    ACBENCH_ENFORCE(pos + len <= size(), "slice out of range");
    Bitstring r;
    r.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
                   bits_.begin() + static_cast<std::ptrdiff_t>(pos + len));
    return r;
  }

  friend bool operator==(const Bitstring&, const Bitstring&) = default;
  friend auto operator<=>(const Bitstring& a, const Bitstring& b) {
    if (a.size() != b.size()) return a.size() <=> b.size();
    return a.bits_ <=> b.bits_;
  }

 private:
  std::vector<std::uint8_t> bits_;
};

// All 2^len bitstrings in increasing integer order.
inline std::vector<Bitstring> all_bitstrings(std::size_t len) {
  ACBENCH_ENFORCE(len < 32, "refusing to enumerate more than 2^31 bitstrings");
  std::vector<Bitstring> out;
  out.reserve(std::size_t{1} << len);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
    out.push_back(Bitstring::from_uint(v, len));
  }
  return out;
}

class Gf2Matrix {
 public:
  Gf2Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

  static Gf2Matrix identity(std::size_t n) {
    Gf2Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  static Gf2Matrix from_rows(const std::vector<std::string>& rows) {
    ACBENCH_ENFORCE(!rows.empty(), "matrix needs at least one row");
    Gf2Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ACBENCH_ENFORCE(rows[i].size() == m.cols_, "ragged matrix rows");
      auto r = Bitstring::from_string(rows[i]);
      for (std::size_t j = 0; j < m.cols_; ++j) m.set(i, j, r[j]);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  bool operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j] != 0;
  }
  void set(std::size_t i, std::size_t j, bool v) {
    ACBENCH_ENFORCE(i < rows_ && j < cols_, "matrix index out of range");
    entries_[i * cols_ + j] = v ? 1 : 0;
  }

  Bitstring row(std::size_t i) const {
    Bitstring r(cols_);
    for (std::size_t j = 0; j < cols_; ++j) r.set(j, (*this)(i, j));
    return r;
  }
  Bitstring column(std::size_t j) const {
    Bitstring c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c.set(i, (*this)(i, j));
    return c;
  }

  friend bool operator==(const Gf2Matrix&, const Gf2Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> entries_;
};

// result_i = XOR_j m_ij x_j
inline Bitstring gf2_matvec(const Gf2Matrix& m, const Bitstring& x) {
  ACBENCH_ENFORCE(x.size() == m.cols(), "gf2_matvec: x.len must equal m.cols");
  Bitstring out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < m.cols(); ++j) acc ^= (m(i, j) && x[j]);
    out.set(i, acc);
  }
  return out;
}

// entry(i, j) = seed[i - j + cols - 1]
inline Gf2Matrix toeplitz_from_seed(const Bitstring& seed, std::size_t rows,
                                    std::size_t cols) {
  ACBENCH_ENFORCE(rows > 0 && cols > 0, "toeplitz matrix needs positive dimensions");
  ACBENCH_ENFORCE(seed.size() == rows + cols - 1,
                  "toeplitz seed must have rows + cols - 1 bits");
  Gf2Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m.set(i, j, seed[i + cols - 1 - j]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Word-level helpers. Words hold the big-endian value of a bitstring of known
// length; these are the fast paths used by exhaustive audits.

inline std::uint64_t low_mask(std::size_t len) {
  return len >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << len) - 1);
}

inline std::uint64_t reverse_bits(std::uint64_t v, std::size_t len) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < len; ++i) r |= ((v >> i) & 1U) << (len - 1 - i);
  return r;
}

inline int parity(std::uint64_t v) { return std::popcount(v) & 1; }

// Toeplitz product on words. `seed` is the (rows + cols - 1)-bit word.
inline std::uint64_t toeplitz_apply_word(std::uint64_t seed, std::uint64_t x,
                                         std::size_t rows, std::size_t cols) {
  const std::size_t len = rows + cols - 1;
  const std::uint64_t rev = reverse_bits(seed, len);
  const std::uint64_t mask = low_mask(cols);
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    out = (out << 1) | static_cast<std::uint64_t>(parity((rev >> i) & mask & x));
  }
  return out;
}

// ---------------------------------------------------------------------------
// GF(2^m)

struct GfField {
  unsigned degree = 0;
  std::uint32_t modulus = 0;  // includes the x^degree term

  friend bool operator==(const GfField&, const GfField&) = default;
};

// Low-weight irreducible polynomials, indexed by degree.
inline GfField gf_field(unsigned degree) {
  static constexpr std::uint32_t kModuli[17] = {
      0,        0x3,    0x7,    0xB,    0x13,   0x25,   0x43,
      0x83,     0x11B,  0x211,  0x409,  0x805,  0x1053, 0x201B,
      0x4443,   0x8003, 0x1100B};
  ACBENCH_ENFORCE(degree >= 1 && degree <= 16,
                  "GF(2^m) is only tabulated for 1 <= m <= 16");
  return GfField{degree, kModuli[degree]};
}

// Carry-less multiply then reduce modulo the field polynomial.
inline std::uint32_t gf_mul_raw(std::uint32_t a, std::uint32_t b,
                                const GfField& f) {
  std::uint64_t acc = 0;
  for (unsigned i = 0; i < f.degree; ++i) {
    if ((b >> i) & 1U) acc ^= static_cast<std::uint64_t>(a) << i;
  }
  for (int bit = static_cast<int>(2 * f.degree) - 2;
       bit >= static_cast<int>(f.degree); --bit) {
    if ((acc >> bit) & 1U) {
      acc ^= static_cast<std::uint64_t>(f.modulus) << (bit - static_cast<int>(f.degree));
    }
  }
  return static_cast<std::uint32_t>(acc);
}

class GfElement {
 public:
  GfElement(std::uint32_t value, GfField field) : value_(value), field_(field) {
    ACBENCH_ENFORCE(field.degree >= 1 && field.degree <= 31, "bad field degree");
    ACBENCH_ENFORCE((value >> field.degree) == 0, "element exceeds field size");
  }
  static GfElement from_bits(const Bitstring& b) {
    return GfElement(static_cast<std::uint32_t>(b.to_uint()),
                     gf_field(static_cast<unsigned>(b.size())));
  }
  static GfElement zero(GfField f) { return GfElement(0, f); }
  static GfElement one(GfField f) { return GfElement(1, f); }

  std::uint32_t value() const noexcept { return value_; }
  const GfField& field() const noexcept { return field_; }
  Bitstring bits() const { return Bitstring::from_uint(value_, field_.degree); }

  GfElement operator+(const GfElement& o) const {
    ACBENCH_ENFORCE(field_ == o.field_, "field element modulus mismatch");
    return GfElement(value_ ^ o.value_, field_);
  }

  // a^(2^m - 2)
  GfElement inverse() const {
    ACBENCH_ENFORCE(value_ != 0, "zero has no multiplicative inverse");
    GfElement result = one(field_);
    GfElement base = *this;
    std::uint64_t e = (std::uint64_t{1} << field_.degree) - 2;
    while (e) {
      if (e & 1U) result = GfElement(gf_mul_raw(result.value_, base.value_, field_), field_);
      base = GfElement(gf_mul_raw(base.value_, base.value_, field_), field_);
      e >>= 1U;
    }
    return result;
  }

  friend bool operator==(const GfElement&, const GfElement&) = default;

 private:
  std::uint32_t value_;
  GfField field_;
};

inline GfElement gf_mul(const GfElement& a, const GfElement& b) {
  ACBENCH_ENFORCE(a.field() == b.field(), "gf_mul: modulus mismatch");
  return GfElement(gf_mul_raw(a.value(), b.value(), a.field()), a.field());
}

inline GfElement operator*(const GfElement& a, const GfElement& b) {
  return gf_mul(a, b);
}

// ---------------------------------------------------------------------------

inline std::size_t hamming(const Bitstring& x, const Bitstring& y) {
  ACBENCH_ENFORCE(x.size() == y.size(), "hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] != y[i]) ? 1 : 0;
  return d;
}

// h(p) = -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0.
inline double binary_entropy(double phi) {
  ACBENCH_ENFORCE(phi >= 0.0 && phi <= 1.0, "binary_entropy: phi must lie in [0, 1]");
  if (phi == 0.0 || phi == 1.0) return 0.0;
  return -phi * std::log2(phi) - (1.0 - phi) * std::log2(1.0 - phi);
}

class LinearCode {
 public:
  explicit LinearCode(std::vector<Bitstring> codewords)
      : codewords_(std::move(codewords)) {
    ACBENCH_ENFORCE(!codewords_.empty(), "a code needs at least one codeword");
    for (const auto& c : codewords_) {
      ACBENCH_ENFORCE(c.size() == codewords_.front().size(),
                      "codewords must share a common length");
    }
    std::sort(codewords_.begin(), codewords_.end());
    ACBENCH_ENFORCE(std::adjacent_find(codewords_.begin(), codewords_.end()) ==
                        codewords_.end(),
                    "duplicate codeword");
  }

  static LinearCode from_strings(const std::vector<std::string>& words) {
    std::vector<Bitstring> cw;
    for (const auto& w : words) cw.push_back(Bitstring::from_string(w));
    return LinearCode(std::move(cw));
  }

  const std::vector<Bitstring>& codewords() const noexcept { return codewords_; }
  std::size_t size() const noexcept { return codewords_.size(); }
  std::size_t length() const noexcept { return codewords_.front().size(); }

  bool contains(const Bitstring& b) const {
    return std::binary_search(codewords_.begin(), codewords_.end(), b);
  }
  std::size_t index_of(const Bitstring& b) const {
    auto it = std::lower_bound(codewords_.begin(), codewords_.end(), b);
    ACBENCH_ENFORCE(it != codewords_.end() && *it == b, "not a codeword");
    return static_cast<std::size_t>(it - codewords_.begin());
  }

  // Minimum distance; a single-codeword code is assigned distance n.
  std::size_t distance() const;

 private:
  std::vector<Bitstring> codewords_;
};

inline std::size_t code_min_distance(const LinearCode& c) {
  ACBENCH_ENFORCE(c.size() >= 2, "code_min_distance needs at least two codewords");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  const auto& w = c.codewords();
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      best = std::min(best, hamming(w[i], w[j]));
    }
  }
  return best;
}

inline std::size_t LinearCode::distance() const {
  return size() >= 2 ? code_min_distance(*this) : length();
}

}  // namespace acbench

template <>
struct std::hash<acbench::Bitstring> {
  std::size_t operator()(const acbench::Bitstring& b) const noexcept {
    return std::hash<std::string>{}(b.to_string());
  }
};
