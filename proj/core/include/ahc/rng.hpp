#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ahc {

/// Derives an independent child seed from a parent seed and a stream id
/// (splitmix64 finalizer over the pair).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random stream. Every stochastic component owns one; children are
/// split deterministically so that per-UE and per-tree streams do not depend
/// on evaluation order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  std::size_t index(std::size_t n);

  RandomStream split(std::uint64_t stream) const {
    return RandomStream(mix_seed(seed_, stream));
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ahc
