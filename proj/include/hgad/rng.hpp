#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hgad {

// Deterministic random stream used everywhere randomness is needed (injection,
// parameter init, dropout, mini-batch shuffles, synthetic data).
//
// All helpers draw from a single mt19937_64 engine in a documented order, and
// none of them go through std::uniform_*_distribution (whose output is
// implementation-defined); the same seed therefore reproduces the same stream
// on any platform.
//
// Draw order contract (what one call consumes):
//   next()                      1 engine step
//   uniform()                   1 engine step
//   below(n)                    >=1 engine steps (unbiased rejection sampling)
//   normal()                    2 uniform() draws (Box-Muller, no caching)
//   shuffle(v)                  len(v)-1 below() calls, from the back
//   sample_indices(n, k)        k below() calls (partial Fisher-Yates)
//   sample_from(pool, k)        k below() calls
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be > 0");
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % n;
    }
  }

  // Standard normal via Box-Muller; consumes exactly two uniform() draws.
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), returned in draw order.
  std::vector<int> sample_indices(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("Rng::sample_indices: need 0 <= k <= n");
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
  }

  // k distinct elements of pool, in draw order; pool is taken by value.
  std::vector<int> sample_from(std::vector<int> pool, int k) {
    const int n = static_cast<int>(pool.size());
    if (k < 0 || k > n) throw std::invalid_argument("Rng::sample_from: need 0 <= k <= |pool|");
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hgad
