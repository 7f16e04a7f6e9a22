#pragma once

// Seeding, bit sampling, worker pool and small statistics helpers.
//
// Sampling uses raw 64-bit outputs of std::mt19937_64 (fully specified by the
// standard) instead of the implementation-defined distributions, so equal
// seeds give bit-identical runs on every platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "acbench/bitlinalg.hpp"

namespace acbench {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (base, stream).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ (stream * 0xD1B54A32D192ED03ULL + 1));
}

inline std::uint64_t random_word(Rng& rng, std::size_t len) { return len == 0 ? 0 : rng() & low_mask(len); }

inline Bitstring random_bitstring(Rng& rng, std::size_t len) {
  Bitstring b(len);
  for (std::size_t i = 0; i < len; ++i) b.set(i, (rng() >> 63) != 0);
  return b;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double random_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return random_unit(rng) < p; }

inline std::uint64_t random_below(Rng& rng, std::uint64_t bound) {
  // rejection sampling keeps the draw exactly uniform
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % bound;
}

// Worker count from ACBENCH_WORKERS, else the hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("ACBENCH_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, count) across the worker pool. Results must be
// written to per-index slots so aggregation stays order independent.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Two-sided Hoeffding half-width at confidence 1 - alpha.
inline double hoeffding_width(std::uint64_t trials, double alpha = 0.01) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(trials)));
}

// Pr[Binomial(n, p) > k]
inline double binomial_tail_above(std::size_t n, double p, std::size_t k) {
  double tail = 0.0;
  for (std::size_t j = k + 1; j <= n; ++j) {
    const double logc = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(j) + 1) -
                        std::lgamma(static_cast<double>(n - j) + 1);
    const double lp = (p > 0.0 ? static_cast<double>(j) * std::log(p) : (j == 0 ? 0.0 : -INFINITY));
    const double lq = (p < 1.0 ? static_cast<double>(n - j) * std::log1p(-p) : (n == j ? 0.0 : -INFINITY));
    tail += std::exp(logc + lp + lq);
  }
  return std::min(1.0, tail);
}

}  // namespace acbench
