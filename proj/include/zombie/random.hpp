#ifndef ZOMBIE_RANDOM_HPP
#define ZOMBIE_RANDOM_HPP

// Portable draws on top of std::mt19937_64:
//   unit(rng)          = (rng() >> 11) * 2^-53
//   bernoulli(rng, p)  = unit(rng) < p
//   below(rng, n)      = rng() % n, rejecting draws < (2^64 mod n)
//   shuffle            = Fisher-Yates from the back, swap(i, below(i + 1))

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace zombie::random {

using Engine = std::mt19937_64;

inline double unit(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Engine& rng, double p) { return unit(rng) < p; }

/// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t below(Engine& rng, std::uint64_t n) {
  const std::uint64_t limit = -n % n; // 2^64 mod n
  std::uint64_t x = rng();
  while (x < limit) x = rng();
  return x % n;
}

/// Uniform integer in [lo, hi].
inline std::uint64_t between(Engine& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + below(rng, hi - lo + 1);
}

template <typename T>
void shuffle(std::span<T> items, Engine& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = below(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

} // namespace zombie::random

#endif // ZOMBIE_RANDOM_HPP
