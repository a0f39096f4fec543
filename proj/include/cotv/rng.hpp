#pragma once

// Seeded randomness. Every stream is an mt19937_64 keyed by a splitmix64 hash of
// (master seed, stream id, sub-stream id), and all distributions are implemented
// here so draws are identical across standard libraries.

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace cotv {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based key derivation: distinct (stream, sub) pairs give independent seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t sub = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_stream(std::uint64_t master, std::uint64_t stream, std::uint64_t sub = 0) {
    return Rng(derive_seed(master, stream, sub));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Standard normal via Box–Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF sampler over a finite weighted support.
class WeightedSampler {
 public:
  WeightedSampler() = default;
  /// Weights must be nonnegative with a positive sum; they are normalized internally.
  explicit WeightedSampler(std::span<const double> weights);

  std::size_t size() const noexcept { return cumulative_.size(); }
  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
};

}  // namespace cotv
