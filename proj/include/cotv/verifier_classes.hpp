#pragma once

// Verifier families H: finite enumerated classes, the structured examples
// (interval, linear threshold, graph path, axiom subset) and the partition class
// used by the lower-bound constructions.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cotv/core.hpp"
#include "cotv/enumeration.hpp"

namespace cotv {

/// Absolute tolerance applied to every real-valued threshold comparison.
inline constexpr double kThresholdTolerance = 1e-9;

/// Default cap on |Σ|^T for exhaustive operations.
inline constexpr std::uint64_t kDefaultEnumerationBudget = 1u << 22;

// ---------------------------------------------------------------------------
// Member families

/// Arbitrary behavior stored as one bit per (problem, prefix). Requires an
/// enumerated problem space with a finite problem_count.
class TableVerifier final : public Verifier {
 public:
  TableVerifier(TraceSpace space, std::vector<std::uint64_t> bits, std::string name);

  /// Builds the table from `pred(problem_index, prefix)`.
  template <typename Pred>
  static std::shared_ptr<TableVerifier> tabulate(TraceSpace space, Pred&& pred, std::string name);

  bool accepts(const Problem& problem, Prefix prefix) const override;
  TraceVerdict run(const Problem& problem, Prefix trace) const override;
  std::string describe() const override { return name_; }

  const PrefixIndexer& indexer() const noexcept { return indexer_; }
  bool bit(std::size_t problem, std::uint64_t prefix_index) const {
    const std::uint64_t k = problem * stride_ + prefix_index;
    return (bits_[k >> 6] >> (k & 63)) & 1u;
  }
  const std::vector<std::uint64_t>& bits() const noexcept { return bits_; }
  /// Number of bits per problem.
  std::uint64_t stride() const noexcept { return stride_; }

 private:
  std::size_t problem_index(const Problem& problem) const;

  PrefixIndexer indexer_;
  std::uint64_t stride_ = 0;
  std::vector<std::uint64_t> bits_;
  std::string name_;
};

/// h_{r1,r2}: YES iff r1 ≤ x₀ − Σ_j x_j ≤ r2 (steps take their integer values).
class IntervalVerifier final : public Verifier {
 public:
  IntervalVerifier(TraceSpace space, double r1, double r2);
  bool accepts(const Problem& problem, Prefix prefix) const override;
  std::string describe() const override;
  double r1() const noexcept { return r1_; }
  double r2() const noexcept { return r2_; }

  /// x₀ − Σ_j x_j for a real problem.
  static double distance(const Problem& problem, Prefix prefix);

 private:
  double r1_;
  double r2_;
};

/// h_{w,w0}: YES iff w0 + w1·x₀ + w[−l:]·τ[−l:] ≥ 0 with l = min(|τ|, d−1).
class LinearThresholdVerifier final : public Verifier {
 public:
  LinearThresholdVerifier(TraceSpace space, double w0, std::vector<double> w);
  bool accepts(const Problem& problem, Prefix prefix) const override;
  std::string describe() const override;
  double w0() const noexcept { return w0_; }
  const std::vector<double>& w() const noexcept { return w_; }

 private:
  double w0_;
  std::vector<double> w_;
};

/// Number of edges of the complete graph on n vertices.
constexpr std::size_t complete_graph_edges(std::size_t n) { return n * (n - 1) / 2; }
/// Edge id of {u, v} in lexicographic order (0,1),(0,2),…,(n−2,n−1).
Step edge_id(std::size_t n, std::uint32_t u, std::uint32_t v);
std::pair<std::uint32_t, std::uint32_t> edge_endpoints(std::size_t n, Step id);

/// h_Ẽ: YES iff every step lies in E₀ ∪ Ẽ. Steps are edge ids; n ≤ 11.
class GraphPathVerifier final : public Verifier {
 public:
  GraphPathVerifier(TraceSpace space, std::size_t n, std::uint64_t extra_edges);
  bool accepts(const Problem& problem, Prefix prefix) const override;
  std::string describe() const override;
  std::size_t vertices() const noexcept { return n_; }
  std::uint64_t extra_edges() const noexcept { return extra_; }

  static bool accepts_mask(std::uint64_t extra, const Problem& problem, Prefix prefix);

 private:
  std::size_t n_;
  std::uint64_t extra_;
};

/// h_σ: YES iff every step lies in σ. |Σ| ≤ 64.
class AxiomSubsetVerifier final : public Verifier {
 public:
  AxiomSubsetVerifier(TraceSpace space, std::uint64_t sigma);
  bool accepts(const Problem&, Prefix prefix) const override { return accepts_mask(sigma_, prefix); }
  std::string describe() const override;
  std::uint64_t sigma() const noexcept { return sigma_; }

  static bool accepts_mask(std::uint64_t sigma, Prefix prefix) {
    for (Step s : prefix) {
      if (((sigma >> s) & 1u) == 0) return false;
    }
    return true;
  }

 private:
  std::uint64_t sigma_;
};

// ---------------------------------------------------------------------------
// Classes

/// A family H with optional enumeration and optional intersection-closed structure.
class VerifierClass {
 public:
  explicit VerifierClass(TraceSpace space) : space_(space) {}
  virtual ~VerifierClass() = default;

  const TraceSpace& space() const noexcept { return space_; }
  virtual std::string family() const = 0;

  /// Member count for enumerable classes, nullopt otherwise.
  virtual std::optional<std::uint64_t> size() const = 0;
  /// Throws InvalidInput for an unknown id.
  virtual VerifierHandle member(std::uint64_t id) const = 0;

  /// Unchecked member evaluation; classes override these to avoid materializing members.
  virtual bool accepts(std::uint64_t id, const Problem& problem, Prefix prefix) const;
  virtual TraceVerdict run(std::uint64_t id, const Problem& problem, Prefix trace) const;

  virtual std::optional<std::uint64_t> truth_index() const { return std::nullopt; }

  virtual bool intersection_closed() const { return false; }
  /// Clos_H(positives): the smallest member accepting every positive under run semantics.
  virtual VerifierHandle closure(std::span<const ProblemTrace> positives) const;

  /// size(), or throws InvalidInput when the class is not enumerable.
  std::uint64_t enumerable_size() const;

 private:
  TraceSpace space_;
};

using ClassHandle = std::shared_ptr<const VerifierClass>;

/// An explicit list of members.
class FiniteClass final : public VerifierClass {
 public:
  FiniteClass(TraceSpace space, std::vector<VerifierHandle> members,
              std::optional<std::uint64_t> truth_index, std::string name = "finite");

  std::string family() const override { return name_; }
  std::optional<std::uint64_t> size() const override { return members_.size(); }
  VerifierHandle member(std::uint64_t id) const override;
  bool accepts(std::uint64_t id, const Problem& problem, Prefix prefix) const override {
    return members_[id]->accepts(problem, prefix);
  }
  TraceVerdict run(std::uint64_t id, const Problem& problem, Prefix trace) const override {
    return members_[id]->run(problem, trace);
  }
  std::optional<std::uint64_t> truth_index() const override { return truth_; }
  const std::vector<VerifierHandle>& members() const noexcept { return members_; }

 private:
  std::vector<VerifierHandle> members_;
  std::optional<std::uint64_t> truth_;
  std::string name_;
};

/// All 2^|Σ| axiom-subset verifiers; member id = σ bitmask. Intersection-closed.
class AxiomSubsetClass final : public VerifierClass {
 public:
  explicit AxiomSubsetClass(TraceSpace space, std::optional<std::uint64_t> truth_sigma = std::nullopt);

  std::string family() const override { return "axiom_subset"; }
  std::optional<std::uint64_t> size() const override;
  VerifierHandle member(std::uint64_t id) const override;
  bool accepts(std::uint64_t id, const Problem&, Prefix prefix) const override {
    return AxiomSubsetVerifier::accepts_mask(id, prefix);
  }
  std::optional<std::uint64_t> truth_index() const override { return truth_; }
  bool intersection_closed() const override { return true; }
  /// σ̂ = union of steps appearing in the positives.
  VerifierHandle closure(std::span<const ProblemTrace> positives) const override;

 private:
  std::optional<std::uint64_t> truth_;
};

/// All 2^{n(n−1)/2} graph-path verifiers; member id = Ẽ bitmask. Intersection-closed.
class GraphPathClass final : public VerifierClass {
 public:
  GraphPathClass(std::size_t n, std::size_t horizon,
                 std::optional<std::uint64_t> truth_edges = std::nullopt);

  std::string family() const override { return "graph_path"; }
  std::optional<std::uint64_t> size() const override;
  VerifierHandle member(std::uint64_t id) const override;
  bool accepts(std::uint64_t id, const Problem& problem, Prefix prefix) const override {
    return GraphPathVerifier::accepts_mask(id, problem, prefix);
  }
  std::optional<std::uint64_t> truth_index() const override { return truth_; }
  bool intersection_closed() const override { return true; }
  /// Ẽ̂ = union of positive-trace edges not already in their problem's E₀.
  VerifierHandle closure(std::span<const ProblemTrace> positives) const override;
  std::size_t vertices() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::optional<std::uint64_t> truth_;
};

/// Interval verifiers over a real problem space. Not enumerable; intersection-closed.
class IntervalClass final : public VerifierClass {
 public:
  explicit IntervalClass(TraceSpace space) : VerifierClass(space) {}

  std::string family() const override { return "interval"; }
  std::optional<std::uint64_t> size() const override { return std::nullopt; }
  VerifierHandle member(std::uint64_t id) const override;
  bool intersection_closed() const override { return true; }
  /// [r1, r2] = [min, max] of x₀ − Σ x_j over every prefix of every positive.
  /// Returns accept-all when no member contains the positives (a negative
  /// distance) and reject-all for an empty sample.
  VerifierHandle closure(std::span<const ProblemTrace> positives) const override;
};

/// The lower-bound construction: full traces are ranked lexicographically and
/// striped round-robin into H cells; h_i accepts everything except cell S_i.
/// Prefixes shorter than T are always accepted.
class PartitionClass final : public VerifierClass {
 public:
  PartitionClass(TraceSpace space, std::size_t cells, std::size_t hidden_index);

  std::string family() const override { return "partition"; }
  std::optional<std::uint64_t> size() const override { return cells_; }
  VerifierHandle member(std::uint64_t id) const override;
  bool accepts(std::uint64_t id, const Problem&, Prefix prefix) const override {
    return prefix.size() < space().horizon || cell_of(prefix) != id;
  }
  std::optional<std::uint64_t> truth_index() const override { return hidden_; }

  std::size_t cells() const noexcept { return cells_; }
  std::size_t hidden_index() const noexcept { return hidden_; }
  std::uint64_t total_traces() const noexcept { return total_; }
  std::size_t cell_of(Prefix full_trace) const {
    return static_cast<std::size_t>(trace_rank(full_trace, space().alphabet_size) % cells_);
  }
  std::size_t cell_of_rank(std::uint64_t rank) const { return static_cast<std::size_t>(rank % cells_); }
  std::uint64_t cell_size(std::size_t cell) const;

 private:
  std::size_t cells_;
  std::size_t hidden_;
  std::uint64_t total_;
};

// ---------------------------------------------------------------------------
// Operations

/// Checked member evaluation.
Verdict class_evaluate(const VerifierClass& cls, std::uint64_t id, const Problem& problem,
                       Prefix prefix);

/// C_h(x): the full-length traces whose every prefix is accepted, in lexicographic order.
std::vector<Trace> enumerate_accepted(const Verifier& verifier, const Problem& problem,
                                      std::uint64_t budget = kDefaultEnumerationBudget);
std::vector<Trace> enumerate_accepted(const VerifierClass& cls, std::uint64_t id,
                                      const Problem& problem,
                                      std::uint64_t budget = kDefaultEnumerationBudget);

/// Clos_H(positives); throws ClosureUnsupported for classes without closure structure.
VerifierHandle closure_of_positives(const VerifierClass& cls, std::span<const ProblemTrace> positives);

/// Run-semantics behavior of a verifier: one bit per (problem, prefix) saying whether
/// every prefix up to and including it is accepted. Equal signatures ⇔ equal behavior.
std::vector<std::uint64_t> behavior_signature(const Verifier& verifier,
                                              std::span<const Problem> problems,
                                              std::uint64_t budget = kDefaultEnumerationBudget);

/// Keeps the first member of each behavior class; the truth index follows its behavior.
std::shared_ptr<FiniteClass> deduplicate_by_behavior(const FiniteClass& cls,
                                                     std::span<const Problem> problems,
                                                     std::uint64_t budget = kDefaultEnumerationBudget);

/// Enumerated problems 0..count−1.
std::vector<Problem> enumerated_problems(std::size_t count);

// ---------------------------------------------------------------------------

template <typename Pred>
std::shared_ptr<TableVerifier> TableVerifier::tabulate(TraceSpace space, Pred&& pred, std::string name) {
  if (space.problem_kind != ProblemKind::Enumerated || space.problem_count == 0) {
    throw InvalidInput("table verifiers need a finite enumerated problem space");
  }
  const PrefixIndexer indexer(space.alphabet_size, space.horizon, kDefaultEnumerationBudget);
  const std::uint64_t stride = indexer.size();
  std::vector<std::uint64_t> bits((space.problem_count * stride + 63) / 64, 0);
  for (std::size_t p = 0; p < space.problem_count; ++p) {
    for (std::size_t len = 1; len <= space.horizon; ++len) {
      std::uint64_t rank = 0;
      for_each_trace(space.alphabet_size, len, [&](const Trace& prefix) {
        if (pred(p, Prefix(prefix))) {
          const std::uint64_t k = p * stride + indexer.index_of_rank(len, rank);
          bits[k >> 6] |= std::uint64_t{1} << (k & 63);
        }
        ++rank;
      });
    }
  }
  return std::make_shared<TableVerifier>(space, std::move(bits), std::move(name));
}

}  // namespace cotv
