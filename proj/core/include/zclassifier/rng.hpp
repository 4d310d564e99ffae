#pragma once

#include <cstdint>

#include "zclassifier/tensor.hpp"

namespace zc {

/// Counter-based pseudo-random generator (SplitMix64 finalizer over a
/// keyed counter). State is (seed, stream, counter), so a generator can be
/// split into independent streams: shuffling, weight init, and epsilon
/// sampling each get their own stream and stay reproducible regardless of
/// how many draws the others consume.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent child stream. Children of the same (seed, stream) with
  /// distinct ids never overlap.
  Rng stream(std::uint64_t id) const;

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1).
  double uniform();
  /// Uniform draw in [lo, hi); lo >= hi is an error.
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller on the uniform stream.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  Tensor normal_tensor(Shape shape);
  Tensor uniform_tensor(Shape shape, double lo, double hi);

  /// Fisher-Yates shuffle of [0, n) index order.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace zc
