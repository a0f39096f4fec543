#pragma once

// Gold-standard reasoners g : X → 2^{Σ^T}, their trace trees, deviation
// negatives, and per-problem soundness / completeness checks.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cotv/core.hpp"
#include "cotv/rng.hpp"
#include "cotv/verifier_classes.hpp"

namespace cotv {

/// Prefix tree of g(x). Node 0 is the root (the problem); every other node is a step.
class TraceTree {
 public:
  struct Node {
    Step step = 0;
    std::size_t depth = 0;
    std::size_t parent = 0;
    /// (step, node index), sorted by step.
    std::vector<std::pair<Step, std::size_t>> children;
  };

  TraceTree() = default;
  /// `traces` must be distinct; every root-to-leaf path then spells one trace.
  TraceTree(Problem root, std::span<const Trace> traces);

  const Problem& root() const noexcept { return root_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const noexcept { return leaves_; }
  /// Node reached by following `step` from `node`, if any.
  std::optional<std::size_t> child(std::size_t node, Step step) const;
  /// Length of the longest prefix of `trace` that is a tree path.
  std::size_t matched_depth(Prefix trace) const;
  bool contains_prefix(Prefix prefix) const { return matched_depth(prefix) == prefix.size(); }
  /// Steps from the root to `node`.
  Trace path(std::size_t node) const;

 private:
  Problem root_;
  std::vector<Node> nodes_{Node{}};
  std::size_t leaves_ = 0;
};

/// g(x) for one problem: traces sorted lexicographically, weights normalized to sum 1.
struct GoldEntry {
  std::vector<Trace> traces;
  std::vector<double> weights;
  TraceTree tree;
  WeightedSampler sampler;
};

class GoldReasoner {
 public:
  explicit GoldReasoner(TraceSpace space, std::optional<std::size_t> k_bound = std::nullopt);

  /// Registers g(problem). Traces must have length T and be distinct; empty
  /// weights mean the uniform conditional distribution.
  void add(Problem problem, std::vector<Trace> traces, std::vector<double> weights = {});

  const TraceSpace& space() const noexcept { return space_; }
  std::optional<std::size_t> k_bound() const noexcept { return k_bound_; }
  bool contains(const Problem& problem) const { return entries_.count(problem) != 0; }
  /// Throws ProblemNotInSupport.
  const GoldEntry& entry(const Problem& problem) const;
  const std::vector<Trace>& traces(const Problem& problem) const { return entry(problem).traces; }
  std::vector<Problem> problems() const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  TraceSpace space_;
  std::optional<std::size_t> k_bound_;
  std::map<Problem, GoldEntry> entries_;
};

/// A tree prefix (YES) or a one-step deviation from the tree (NO).
struct AugmentedExample {
  Problem problem;
  Trace prefix;
  Verdict label = Verdict::Yes;
};

TraceTree build_trace_tree(const GoldReasoner& gold, const Problem& problem);

/// YES examples for every tree prefix followed by one NO example per internal
/// node and step outside that node's children.
std::vector<AugmentedExample> generate_negatives(const TraceTree& tree, std::size_t alphabet_size);

/// Σ over internal nodes of (|Σ| − |children|).
std::size_t deviation_count(const TraceTree& tree, std::size_t alphabet_size);

/// One trace drawn from the conditional distribution over g(problem).
Trace sample_positive(const GoldReasoner& gold, const Problem& problem, Rng& rng);

enum class StatusMode { Exhaustive, Deviation };

struct ProblemStatus {
  /// Conditional mass of g(x) accepted under run semantics.
  double complete_fraction = 0.0;
  /// No run-accepted prefix (partial or full) leaves the trace tree; implies C_h(x) ⊆ g(x).
  bool sound = false;

  bool complete_and_sound() const noexcept { return sound && complete_fraction == 1.0; }
  bool gamma_complete_and_sound(double gamma) const noexcept {
    return sound && complete_fraction >= gamma - 1e-12;
  }
  bool operator==(const ProblemStatus&) const = default;
};

/// Exhaustive mode enumerates all |Σ|^T traces; deviation mode walks the tree
/// and its one-step deviations only (at most kT|Σ| evaluations).
ProblemStatus per_problem_status(const Verifier& verifier, const GoldReasoner& gold,
                                 const Problem& problem, StatusMode mode,
                                 std::uint64_t budget = kDefaultEnumerationBudget);

/// YES exactly on prefixes of g(x); NO for problems outside the support.
class TreeCharacteristicVerifier final : public Verifier {
 public:
  explicit TreeCharacteristicVerifier(std::shared_ptr<const GoldReasoner> gold);
  bool accepts(const Problem& problem, Prefix prefix) const override;
  std::string describe() const override { return "tree_characteristic"; }
  const GoldReasoner& gold() const noexcept { return *gold_; }

 private:
  std::shared_ptr<const GoldReasoner> gold_;
};

}  // namespace cotv
