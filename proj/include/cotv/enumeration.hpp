#pragma once

// Lexicographic enumeration and ranking of sequences over Σ.

#include <cstdint>
#include <vector>

#include "cotv/core.hpp"

namespace cotv {

/// Rank of `trace` among sequences of its length, in lexicographic order.
std::uint64_t trace_rank(Prefix trace, std::size_t alphabet_size);

/// Inverse of trace_rank.
Trace trace_from_rank(std::uint64_t rank, std::size_t length, std::size_t alphabet_size);

/// Calls `fn(const Trace&)` for every sequence of `length` over Σ in lexicographic order.
template <typename Fn>
void for_each_trace(std::size_t alphabet_size, std::size_t length, Fn&& fn) {
  Trace trace(length, 0);
  if (length == 0 || alphabet_size == 0) {
    return;
  }
  const auto top = static_cast<Step>(alphabet_size - 1);
  while (true) {
    fn(static_cast<const Trace&>(trace));
    std::size_t pos = length;
    while (pos > 0 && trace[pos - 1] == top) {
      trace[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) {
      return;
    }
    ++trace[pos - 1];
  }
}

/// Dense index over all nonempty prefixes of length ≤ T:
/// index(p) = Σ_{l<|p|} |Σ|^l + rank(p), with children of p at rank(p)·|Σ| + s.
class PrefixIndexer {
 public:
  PrefixIndexer() = default;
  PrefixIndexer(std::size_t alphabet_size, std::size_t horizon, std::uint64_t budget);

  std::size_t alphabet_size() const noexcept { return alphabet_; }
  std::size_t horizon() const noexcept { return horizon_; }
  /// Number of nonempty prefixes of length ≤ T.
  std::uint64_t size() const noexcept { return offsets_.back(); }

  std::uint64_t index(Prefix prefix) const {
    return offsets_[prefix.size() - 1] + trace_rank(prefix, alphabet_);
  }
  /// Index of a prefix of `length` with the given lexicographic rank.
  std::uint64_t index_of_rank(std::size_t length, std::uint64_t rank) const {
    return offsets_[length - 1] + rank;
  }

 private:
  std::size_t alphabet_ = 1;
  std::size_t horizon_ = 0;
  std::vector<std::uint64_t> offsets_{0};
};

}  // namespace cotv
