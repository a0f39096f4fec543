#pragma once

// Problems, traces, prefix-run semantics and the loss indicators every learner uses.
//
// All public interfaces use 1-based prefix indices: prefix j of a trace is its
// first j steps, and a fault is reported as the smallest j whose prefix the
// verifier rejects.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cotv/errors.hpp"

namespace cotv {

/// Reasoning steps are identified with the integers 0..|Σ|−1.
using Step = std::uint32_t;
using Trace = std::vector<Step>;
using Prefix = std::span<const Step>;

enum class Verdict : std::uint8_t { No = 0, Yes = 1 };

constexpr Verdict to_verdict(bool yes) noexcept { return yes ? Verdict::Yes : Verdict::No; }

struct ProblemId {
  std::int64_t value = 0;
  auto operator<=>(const ProblemId&) const = default;
};

/// Graph problem x₀ = (v₀, E₀); edges are ids into the complete graph on n vertices.
struct GraphProblem {
  std::uint32_t start = 0;
  std::vector<Step> edges;
  auto operator<=>(const GraphProblem&) const = default;
};

using Problem = std::variant<ProblemId, double, GraphProblem>;

enum class ProblemKind : std::uint8_t { Enumerated, RealScalar, Graph };

std::string to_string(ProblemKind kind);

/// Σ, T and the problem family.
struct TraceSpace {
  std::size_t alphabet_size = 1;
  std::size_t horizon = 1;
  ProblemKind problem_kind = ProblemKind::Enumerated;
  /// For enumerated problems: ids must lie in [0, problem_count). Zero means unbounded.
  std::size_t problem_count = 0;

  TraceSpace() = default;
  TraceSpace(std::size_t alphabet, std::size_t horizon_len,
             ProblemKind kind = ProblemKind::Enumerated, std::size_t problems = 0);

  /// |Σ|^length, or nullopt on 64-bit overflow.
  std::optional<std::uint64_t> trace_count(std::size_t length) const;
  /// |Σ|^T; throws BudgetExceeded when that exceeds `budget`.
  std::uint64_t full_trace_count(std::uint64_t budget) const;
  /// Σ_{l=1..T} |Σ|^l; throws BudgetExceeded when that exceeds `budget`.
  std::uint64_t prefix_count(std::uint64_t budget) const;

  void validate_prefix(Prefix prefix) const;
  void validate_problem(const Problem& problem) const;

  bool operator==(const TraceSpace&) const = default;
};

/// f(h,(x₀,τ)) rendered as a verdict: Accepted, or the 1-based index of the first NO.
class TraceVerdict {
 public:
  static constexpr TraceVerdict accepted() noexcept { return TraceVerdict{0}; }
  static TraceVerdict fault_at(std::size_t index);

  constexpr bool is_accepted() const noexcept { return fault_ == 0; }
  /// 1-based fault index; 0 when accepted.
  constexpr std::size_t fault_index() const noexcept { return fault_; }
  /// Stopping index for a trace of length t: the fault index, or t when accepted.
  constexpr std::size_t stopping_index(std::size_t length) const noexcept {
    return fault_ == 0 ? length : fault_;
  }

  bool operator==(const TraceVerdict&) const = default;

 private:
  constexpr explicit TraceVerdict(std::size_t fault) noexcept : fault_(fault) {}
  std::size_t fault_;
};

std::string to_string(const TraceVerdict& verdict);

struct LabeledTrace {
  Problem problem;
  Trace trace;
  TraceVerdict label = TraceVerdict::accepted();
};

/// An unlabeled (problem, trace) pair, e.g. a positive drawn from a gold reasoner.
struct ProblemTrace {
  Problem problem;
  Trace trace;
};

/// A verifier h : X × Σ* → {YES, NO}. Implementations are immutable and thread-safe.
class Verifier {
 public:
  explicit Verifier(TraceSpace space) : space_(space) {}
  virtual ~Verifier() = default;

  const TraceSpace& space() const noexcept { return space_; }

  /// Verdict on a single nonempty prefix. Unchecked: callers validate inputs.
  virtual bool accepts(const Problem& problem, Prefix prefix) const = 0;

  /// Runs the verifier on every prefix of `trace`. Unchecked. Returns the
  /// first rejected prefix, or Accepted.
  virtual TraceVerdict run(const Problem& problem, Prefix trace) const;

  virtual std::string describe() const = 0;

 private:
  TraceSpace space_;
};

using VerifierHandle = std::shared_ptr<const Verifier>;

/// h(x₀, prefix), with input validation.
Verdict evaluate_prefix(const Verifier& verifier, const Problem& problem, Prefix prefix);

/// f(h, (x₀, τ)) under prefix-run semantics, with input validation.
TraceVerdict run_on_trace(const Verifier& verifier, const Problem& problem, Prefix trace);

/// ℓ_h(x₀,τ): true iff h disagrees with `truth` on some prefix j ≤ f(truth,(x₀,τ)).
bool simple_loss(const Verifier& verifier, const Verifier& truth, const Problem& problem,
                 Prefix trace);

/// The verdict a label vector induces: FaultAt(first NO) or Accepted.
TraceVerdict verdict_of_labels(std::span<const Verdict> labels);

/// ℓ_h(x,τ;y): true iff h's prefix verdict differs from y_j for some j ≤ f(y).
bool agnostic_loss(const Verifier& verifier, const Problem& problem, Prefix trace,
                   std::span<const Verdict> labels);

/// Per-prefix verdicts of `truth` on each prefix of `trace` (the label vector it induces).
std::vector<Verdict> verdict_vector(const Verifier& truth, const Problem& problem, Prefix trace);

// Simple verifiers.

class AcceptAllVerifier final : public Verifier {
 public:
  using Verifier::Verifier;
  bool accepts(const Problem&, Prefix) const override { return true; }
  TraceVerdict run(const Problem&, Prefix) const override { return TraceVerdict::accepted(); }
  std::string describe() const override { return "accept_all"; }
};

class RejectAllVerifier final : public Verifier {
 public:
  using Verifier::Verifier;
  bool accepts(const Problem&, Prefix) const override { return false; }
  std::string describe() const override { return "reject_all"; }
};

/// Wraps an arbitrary predicate; mostly useful in tests and ad-hoc experiments.
class FunctionVerifier final : public Verifier {
 public:
  using Predicate = std::function<bool(const Problem&, Prefix)>;
  FunctionVerifier(TraceSpace space, Predicate predicate, std::string name);
  bool accepts(const Problem& problem, Prefix prefix) const override {
    return predicate_(problem, prefix);
  }
  std::string describe() const override { return name_; }

 private:
  Predicate predicate_;
  std::string name_;
};

std::string format_problem(const Problem& problem);
std::string format_trace(Prefix trace);

}  // namespace cotv
