#pragma once

#include <cstddef>
#include <cstdint>

#include "rpg/linalg.hpp"

namespace rpg {

/// Counter-based random stream: output k is a pure function of (seed, k), so
/// a stream can be replayed from any (seed, counter) pair. Distributions are
/// implemented here rather than through <random> so sequences are identical
/// across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two draws.
  double normal();

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  /// +1 or -1 with equal probability.
  double sign();

  /// Independent stream keyed by `key`; does not advance this stream.
  [[nodiscard]] RngStream substream(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

/// i.i.d. +/-1 entries.
Vector rademacher_probe(RngStream& rng, int n);

}  // namespace rpg
