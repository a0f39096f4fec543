#pragma once

// Learning procedures. Every ERM-style learner scans members in index order and
// keeps the first best one, so outputs never depend on scheduling.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cotv/core.hpp"
#include "cotv/gold.hpp"
#include "cotv/verifier_classes.hpp"

namespace cotv {

/// A chosen class member plus its empirical loss on the training sample.
struct MemberChoice {
  std::uint64_t id = 0;
  VerifierHandle verifier;
  double empirical_loss = 0.0;
};

/// g(x) as revealed to the learner for one sampled problem.
struct GoldSample {
  Problem problem;
  std::vector<Trace> traces;
};

/// A trace with an arbitrary per-prefix label vector (agnostic setting).
struct AgnosticExample {
  Problem problem;
  Trace trace;
  std::vector<Verdict> labels;
};

/// H_S: ids of the members consistent with a sample.
struct ConsistentSet {
  ClassHandle cls;
  std::vector<std::uint64_t> member_ids;
};

/// h′ = ∧_{h ∈ H_S} h. Improper in general.
class IntersectionVerifier final : public Verifier {
 public:
  explicit IntersectionVerifier(ConsistentSet base);
  bool accepts(const Problem& problem, Prefix prefix) const override;
  TraceVerdict run(const Problem& problem, Prefix trace) const override;
  std::string describe() const override;
  const ConsistentSet& base() const noexcept { return base_; }

 private:
  ConsistentSet base_;
};

/// Lowest-index member with run(h) = label on every sample element.
/// Throws NoConsistentVerifier when none exists.
MemberChoice svpac_learn(const VerifierClass& cls, std::span<const LabeledTrace> sample);

/// YES on every tree prefix and NO on every one-step deviation, for all sampled problems.
std::vector<AugmentedExample> augmented_sample(std::span<const GoldSample> gold_samples,
                                               std::size_t alphabet_size);

/// Lowest-index member consistent with the augmented sample.
/// Throws NoConsistentVerifier when none exists.
MemberChoice tvpac_learn(const VerifierClass& cls, std::span<const GoldSample> gold_samples);
/// Convenience form: reveals g(x) for each listed problem (duplicates are skipped).
MemberChoice tvpac_learn(const VerifierClass& cls, const GoldReasoner& gold,
                         std::span<const Problem> problems);

/// Algorithm 1: members accepting every positive under run semantics, intersected.
/// Throws NoConsistentVerifier when H_S is empty.
std::shared_ptr<const IntersectionVerifier> intersect_consistent_learn(
    ClassHandle cls, std::span<const ProblemTrace> positives);

/// Clos_H(positives) for an intersection-closed class.
VerifierHandle closure_learn(const VerifierClass& cls, std::span<const ProblemTrace> positives);

/// Greedy generation: at each depth take the lowest step whose extended prefix the
/// verifier accepts. `evaluations` receives the number of prefix evaluations.
/// Throws GenerationDeadEnd when no step is accepted at some depth.
Trace generate_from_verifier(const Verifier& verifier, const Problem& problem,
                             std::size_t alphabet_size, std::size_t horizon,
                             std::size_t* evaluations = nullptr);

/// Lowest-index member minimizing Σ agnostic_loss over the sample.
MemberChoice agnostic_svpac_learn(const VerifierClass& cls, std::span<const AgnosticExample> sample);

/// Lowest-index member minimizing the fraction of sampled problems on which it is
/// not {1-complete AND sound} (deviation mode). Unlike tvpac_learn, problems are
/// counted with multiplicity.
MemberChoice agnostic_tvpac_learn(const VerifierClass& cls, const GoldReasoner& gold,
                                  std::span<const Problem> problems);

// ---------------------------------------------------------------------------
// Online subspace verification

/// Singular values below kSpanTolerance · max(1, σ_max) count as zero.
inline constexpr double kSpanTolerance = 1e-8;

/// Orthonormal basis (columns) of the column span of `vectors`.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& vectors);
/// Whether v lies in the span of the columns of `vectors`.
bool in_span(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& v);
/// Basis of span(a) ∩ span(b).
Eigen::MatrixXd subspace_intersection(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// Columns of a and b side by side.
Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Ground truth: x₁ is valid iff x₁ ∈ span(x₀, h*).
bool subspace_truth(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1, const Eigen::MatrixXd& hstar);

enum class SubspaceVariant { Orthogonal, General };

struct OnlineStepResult {
  Verdict prediction = Verdict::No;
  bool mistake = false;
};

class OnlineSubspaceLearner {
 public:
  OnlineSubspaceLearner(SubspaceVariant variant, std::size_t dim);

  /// Predicts on (x₀, x₁). Throws InvalidInput on a dimension mismatch.
  Verdict predict(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1) const;
  /// Predicts, then updates with the revealed truth.
  OnlineStepResult step(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1, bool truth);
  OnlineStepResult step(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1,
                        const Eigen::MatrixXd& hstar) {
    return step(x0, x1, subspace_truth(x0, x1, hstar));
  }

  SubspaceVariant variant() const noexcept { return variant_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t mistakes() const noexcept { return mistakes_; }
  bool initialized() const noexcept { return initialized_; }
  /// Orthogonal variant: learned h. General variant: S* (identity basis before the first mistake).
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }

 private:
  enum class Case { PreFirstMistake, Contained, ContainedYes, NotContained, Orthogonal };
  Case classify(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1) const;
  void check_dims(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1) const;

  SubspaceVariant variant_;
  std::size_t dim_;
  std::size_t mistakes_ = 0;
  bool initialized_ = false;
  Eigen::MatrixXd basis_;
};

}  // namespace cotv
