#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace admd {

/// Generator seeded from a tuple of integers, e.g. (seed, epoch, trajectory).
/// Independent streams for each tuple keep serial and parallel runs identical.
inline std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  words.reserve(key.size() * 2);
  for (std::uint64_t k : key) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

/// Standard normal sample rejected outside [-bound, bound].
template <class Rng> double truncated_standard_normal(Rng &rng, double bound) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double u = normal(rng);
    if (u >= -bound && u <= bound) {
      return u;
    }
  }
}

} // namespace admd
