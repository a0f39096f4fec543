#include "cotv/learners.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace cotv {

IntersectionVerifier::IntersectionVerifier(ConsistentSet base)
    : Verifier(base.cls->space()), base_(std::move(base)) {}

bool IntersectionVerifier::accepts(const Problem& problem, Prefix prefix) const {
  for (std::uint64_t id : base_.member_ids) {
    if (!base_.cls->accepts(id, problem, prefix)) return false;
  }
  return true;
}

TraceVerdict IntersectionVerifier::run(const Problem& problem, Prefix trace) const {
  std::size_t first_fault = 0;
  for (std::uint64_t id : base_.member_ids) {
    const TraceVerdict v = base_.cls->run(id, problem, trace);
    if (!v.is_accepted() && (first_fault == 0 || v.fault_index() < first_fault)) {
      first_fault = v.fault_index();
      if (first_fault == 1) break;
    }
  }
  return first_fault == 0 ? TraceVerdict::accepted() : TraceVerdict::fault_at(first_fault);
}

std::string IntersectionVerifier::describe() const {
  return "intersection(" + base_.cls->family() + ", " + std::to_string(base_.member_ids.size()) +
         " members)";
}

MemberChoice svpac_learn(const VerifierClass& cls, std::span<const LabeledTrace> sample) {
  for (const auto& ex : sample) {
    cls.space().validate_problem(ex.problem);
    cls.space().validate_prefix(ex.trace);
  }
  const std::uint64_t n = cls.enumerable_size();
  for (std::uint64_t id = 0; id < n; ++id) {
    const bool consistent = std::all_of(sample.begin(), sample.end(), [&](const LabeledTrace& ex) {
      return cls.run(id, ex.problem, ex.trace) == ex.label;
    });
    if (consistent) return {id, cls.member(id), 0.0};
  }
  throw NoConsistentVerifier("no member of " + cls.family() + " is consistent with " +
                             std::to_string(sample.size()) + " labeled traces");
}

std::vector<AugmentedExample> augmented_sample(std::span<const GoldSample> gold_samples,
                                               std::size_t alphabet_size) {
  std::vector<AugmentedExample> out;
  std::set<Problem> seen;
  for (const auto& gs : gold_samples) {
    if (!seen.insert(gs.problem).second) continue;
    std::vector<Trace> traces = gs.traces;
    std::sort(traces.begin(), traces.end());
    traces.erase(std::unique(traces.begin(), traces.end()), traces.end());
    const TraceTree tree(gs.problem, traces);
    auto examples = generate_negatives(tree, alphabet_size);
    out.insert(out.end(), std::make_move_iterator(examples.begin()),
               std::make_move_iterator(examples.end()));
  }
  return out;
}

MemberChoice tvpac_learn(const VerifierClass& cls, std::span<const GoldSample> gold_samples) {
  for (const auto& gs : gold_samples) {
    cls.space().validate_problem(gs.problem);
    for (const auto& t : gs.traces) cls.space().validate_prefix(t);
  }
  const auto examples = augmented_sample(gold_samples, cls.space().alphabet_size);
  const std::uint64_t n = cls.enumerable_size();
  for (std::uint64_t id = 0; id < n; ++id) {
    const bool consistent =
        std::all_of(examples.begin(), examples.end(), [&](const AugmentedExample& ex) {
          return to_verdict(cls.accepts(id, ex.problem, ex.prefix)) == ex.label;
        });
    if (consistent) return {id, cls.member(id), 0.0};
  }
  throw NoConsistentVerifier("no member of " + cls.family() + " is consistent with " +
                             std::to_string(examples.size()) + " augmented examples");
}

MemberChoice tvpac_learn(const VerifierClass& cls, const GoldReasoner& gold,
                         std::span<const Problem> problems) {
  std::vector<GoldSample> samples;
  std::set<Problem> seen;
  for (const auto& p : problems) {
    if (seen.insert(p).second) samples.push_back({p, gold.traces(p)});
  }
  return tvpac_learn(cls, samples);
}

std::shared_ptr<const IntersectionVerifier> intersect_consistent_learn(
    ClassHandle cls, std::span<const ProblemTrace> positives) {
  for (const auto& pt : positives) {
    cls->space().validate_problem(pt.problem);
    cls->space().validate_prefix(pt.trace);
  }
  const std::uint64_t n = cls->enumerable_size();
  ConsistentSet hs{cls, {}};
  for (std::uint64_t id = 0; id < n; ++id) {
    const bool consistent = std::all_of(positives.begin(), positives.end(), [&](const ProblemTrace& pt) {
      return cls->run(id, pt.problem, pt.trace).is_accepted();
    });
    if (consistent) hs.member_ids.push_back(id);
  }
  if (hs.member_ids.empty()) {
    throw NoConsistentVerifier("H_S is empty: no member accepts all " +
                               std::to_string(positives.size()) + " positives");
  }
  return std::make_shared<IntersectionVerifier>(std::move(hs));
}

VerifierHandle closure_learn(const VerifierClass& cls, std::span<const ProblemTrace> positives) {
  return closure_of_positives(cls, positives);
}

Trace generate_from_verifier(const Verifier& verifier, const Problem& problem,
                             std::size_t alphabet_size, std::size_t horizon,
                             std::size_t* evaluations) {
  verifier.space().validate_problem(problem);
  Trace trace;
  trace.reserve(horizon);
  std::size_t evals = 0;
  for (std::size_t depth = 1; depth <= horizon; ++depth) {
    trace.push_back(0);
    bool found = false;
    for (Step s = 0; s < alphabet_size; ++s) {
      trace.back() = s;
      ++evals;
      if (verifier.accepts(problem, trace)) {
        found = true;
        break;
      }
    }
    if (!found) {
      if (evaluations) *evaluations = evals;
      throw GenerationDeadEnd(depth);
    }
  }
  if (evaluations) *evaluations = evals;
  return trace;
}

MemberChoice agnostic_svpac_learn(const VerifierClass& cls, std::span<const AgnosticExample> sample) {
  for (const auto& ex : sample) {
    cls.space().validate_problem(ex.problem);
    cls.space().validate_prefix(ex.trace);
    if (ex.labels.size() != ex.trace.size()) {
      throw InvalidInput("label vector length differs from trace length");
    }
  }
  const std::uint64_t n = cls.enumerable_size();
  std::uint64_t best_id = 0;
  std::size_t best_loss = std::numeric_limits<std::size_t>::max();
  for (std::uint64_t id = 0; id < n && best_loss > 0; ++id) {
    std::size_t loss = 0;
    for (const auto& ex : sample) {
      // ℓ = [run(h) ≠ verdict(y)]: both stop at their first NO.
      if (cls.run(id, ex.problem, ex.trace) != verdict_of_labels(ex.labels)) ++loss;
      if (loss >= best_loss) break;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_id = id;
    }
  }
  const double denom = sample.empty() ? 1.0 : static_cast<double>(sample.size());
  return {best_id, cls.member(best_id), static_cast<double>(best_loss) / denom};
}

MemberChoice agnostic_tvpac_learn(const VerifierClass& cls, const GoldReasoner& gold,
                                  std::span<const Problem> problems) {
  const std::uint64_t n = cls.enumerable_size();
  std::uint64_t best_id = 0;
  std::size_t best_loss = std::numeric_limits<std::size_t>::max();
  for (std::uint64_t id = 0; id < n && best_loss > 0; ++id) {
    const VerifierHandle h = cls.member(id);
    std::size_t loss = 0;
    for (const auto& p : problems) {
      const auto status = per_problem_status(*h, gold, p, StatusMode::Deviation);
      if (!status.complete_and_sound()) ++loss;
      if (loss >= best_loss) break;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_id = id;
    }
  }
  const double denom = problems.empty() ? 1.0 : static_cast<double>(problems.size());
  return {best_id, cls.member(best_id), static_cast<double>(best_loss) / denom};
}

// ---------------------------------------------------------------------------

namespace {

double rank_threshold(const Eigen::VectorXd& singular) {
  const double top = singular.size() > 0 ? singular.maxCoeff() : 0.0;
  return kSpanTolerance * std::max(1.0, top);
}

}  // namespace

Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw InvalidInput("hstack: row counts differ");
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& vectors) {
  if (vectors.cols() == 0) return Eigen::MatrixXd(vectors.rows(), 0);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(vectors, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = rank_threshold(s);
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

bool in_span(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& v) {
  if (vectors.cols() > 0 && vectors.rows() != v.size()) {
    throw InvalidInput("in_span: dimension mismatch");
  }
  const Eigen::MatrixXd basis = orthonormal_basis(vectors);
  const Eigen::VectorXd residual =
      basis.cols() == 0 ? v : Eigen::VectorXd(v - basis * (basis.transpose() * v));
  return residual.norm() <= kSpanTolerance * std::max(1.0, v.norm());
}

Eigen::MatrixXd subspace_intersection(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd ba = orthonormal_basis(a);
  const Eigen::MatrixXd bb = orthonormal_basis(b);
  const Eigen::Index d = a.rows();
  if (ba.cols() == 0 || bb.cols() == 0) return Eigen::MatrixXd(d, 0);
  // v = ba·c lies in span(b) iff (I − P_b)·ba·c = 0.
  const Eigen::MatrixXd m = ba - bb * (bb.transpose() * ba);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = kSpanTolerance;
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > tol) ++rank;
  const Eigen::MatrixXd null = svd.matrixV().rightCols(ba.cols() - rank);
  return orthonormal_basis(ba * null);
}

bool subspace_truth(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1, const Eigen::MatrixXd& hstar) {
  return in_span(hstack(x0, hstar), x1);
}

OnlineSubspaceLearner::OnlineSubspaceLearner(SubspaceVariant variant, std::size_t dim)
    : variant_(variant), dim_(dim) {
  if (dim == 0) throw InvalidInput("subspace dimension must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  basis_ = variant == SubspaceVariant::Orthogonal ? Eigen::MatrixXd(d, 0)
                                                  : Eigen::MatrixXd::Identity(d, d);
}

void OnlineSubspaceLearner::check_dims(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  if (x1.size() != d || (x0.cols() > 0 && x0.rows() != d)) {
    throw InvalidInput("online subspace step: expected vectors of dimension " + std::to_string(dim_));
  }
}

namespace {

bool contained_in(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& span_of) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    if (!in_span(span_of, basis.col(c))) return false;
  }
  return true;
}

}  // namespace

OnlineSubspaceLearner::Case OnlineSubspaceLearner::classify(const Eigen::MatrixXd& x0,
                                                            const Eigen::VectorXd& x1) const {
  if (variant_ == SubspaceVariant::Orthogonal) return Case::Orthogonal;
  if (!initialized_) return Case::PreFirstMistake;
  const Eigen::MatrixXd x01 = hstack(x0, x1);
  if (contained_in(basis_, x01)) {
    return contained_in(basis_, x0) ? Case::Contained : Case::ContainedYes;
  }
  return Case::NotContained;
}

Verdict OnlineSubspaceLearner::predict(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1) const {
  check_dims(x0, x1);
  switch (classify(x0, x1)) {
    case Case::Orthogonal:
      return to_verdict(in_span(hstack(x0, basis_), x1));
    case Case::ContainedYes:
      return Verdict::Yes;
    case Case::PreFirstMistake:
    case Case::Contained:
    case Case::NotContained:
      return to_verdict(in_span(x0, x1));
  }
  return Verdict::No;
}

OnlineStepResult OnlineSubspaceLearner::step(const Eigen::MatrixXd& x0, const Eigen::VectorXd& x1,
                                             bool truth) {
  check_dims(x0, x1);
  const Case c = classify(x0, x1);
  const Verdict prediction = predict(x0, x1);
  const bool mistake = (prediction == Verdict::Yes) != truth;
  if (!mistake) return {prediction, false};
  ++mistakes_;
  switch (c) {
    case Case::Orthogonal:
      if (truth) {
        const Eigen::MatrixXd span_basis = orthonormal_basis(hstack(x0, basis_));
        Eigen::VectorXd residual = x1;
        if (span_basis.cols() > 0) residual -= span_basis * (span_basis.transpose() * x1);
        basis_ = orthonormal_basis(hstack(basis_, residual));
      }
      break;
    case Case::PreFirstMistake:
      basis_ = orthonormal_basis(hstack(x0, x1));
      initialized_ = true;
      break;
    case Case::ContainedYes:
      basis_ = subspace_intersection(basis_, x0);
      break;
    case Case::NotContained:
      basis_ = subspace_intersection(basis_, hstack(x0, x1));
      break;
    case Case::Contained:
      break;
  }
  return {prediction, true};
}

}  // namespace cotv
