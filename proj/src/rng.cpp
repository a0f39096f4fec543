#include "cotv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cotv/errors.hpp"

namespace cotv {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t sub) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ (sub * 0xd1b54a32d192ed03ULL));
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) {
    throw InvalidInput("uniform_index over an empty range");
  }
  // Rejection sampling on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return x % n;
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) {
    u1 = uniform01();
  }
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

WeightedSampler::WeightedSampler(std::span<const double> weights) {
  if (weights.empty()) {
    throw InvalidInput("weighted sampler needs a nonempty support");
  }
  cumulative_.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidInput("sampling weights must be finite and nonnegative");
    }
    total += w;
    cumulative_.push_back(total);
  }
  if (!(total > 0.0)) {
    throw InvalidInput("sampling weights sum to zero");
  }
  for (double& c : cumulative_) {
    c /= total;
  }
  cumulative_.back() = 1.0;
}

std::size_t WeightedSampler::sample(Rng& rng) const {
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
      it - cumulative_.begin(), static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
}

}  // namespace cotv
