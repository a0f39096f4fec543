#pragma once

// Distributions, error estimation and the theorem-rate experiments.
//
// Trial i of every experiment draws from Rng::for_stream(master_seed, stream, i),
// so results depend only on the config and seed, never on the thread count.

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cotv/core.hpp"
#include "cotv/gold.hpp"
#include "cotv/learners.hpp"
#include "cotv/rng.hpp"
#include "cotv/stats.hpp"
#include "cotv/verifier_classes.hpp"

namespace cotv {

/// Weights must already sum to 1 within 1e-12.
void check_weights(const std::vector<double>& weights);

class ProblemDistribution {
 public:
  ProblemDistribution() = default;
  /// Empty weights mean uniform.
  ProblemDistribution(std::vector<Problem> support, std::vector<double> weights = {});

  const std::vector<Problem>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const Problem& sample(Rng& rng) const { return support_[sampler_.sample(rng)]; }

 private:
  std::vector<Problem> support_;
  std::vector<double> weights_;
  WeightedSampler sampler_;
};

/// D over (problem, trace, label vector). Explicit distributions have a finite
/// weighted support and admit exhaustive estimates; generated ones only sample.
class TraceDistribution {
 public:
  using TraceSampler = std::function<Trace(const Problem&, Rng&)>;

  /// Labels come from the truth verifier's per-prefix verdicts.
  static TraceDistribution labeled_by(const Verifier& truth, std::vector<ProblemTrace> support,
                                      std::vector<double> weights = {});
  /// Arbitrary label vectors (possibly non-realizable).
  static TraceDistribution with_labels(TraceSpace space, std::vector<ProblemTrace> support,
                                       std::vector<std::vector<Verdict>> labels,
                                       std::vector<double> weights = {});
  /// Problems from `problems`, traces from `sampler`, labels from `truth`.
  static TraceDistribution generated(ProblemDistribution problems, TraceSampler sampler,
                                     VerifierHandle truth);

  const TraceSpace& space() const noexcept { return space_; }
  bool is_explicit() const noexcept { return !sampler_fn_; }
  const std::vector<ProblemTrace>& support() const;
  const std::vector<double>& weights() const;
  const std::vector<std::vector<Verdict>>& label_vectors() const;
  /// verdict_of_labels of each support element.
  const std::vector<TraceVerdict>& verdicts() const;

  /// Index into the explicit support.
  std::size_t sample_index(Rng& rng) const;
  LabeledTrace sample(Rng& rng) const;
  AgnosticExample sample_agnostic(Rng& rng) const;

 private:
  TraceSpace space_;
  std::vector<ProblemTrace> support_;
  std::vector<std::vector<Verdict>> labels_;
  std::vector<TraceVerdict> verdicts_;
  std::vector<double> weights_;
  WeightedSampler sampler_;
  ProblemDistribution problems_;
  TraceSampler sampler_fn_;
  VerifierHandle truth_;
};

enum class EstimateMode { Exhaustive, MonteCarlo };

struct EstimateOptions {
  EstimateMode mode = EstimateMode::Exhaustive;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  double confidence = 0.95;
};

struct ErrorEstimate {
  double value = 0.0;
  Interval ci;
  std::uint64_t samples = 0;
  bool exact = false;
};

/// err_D(h) = Pr[ℓ_h(x,τ) = 1] against the truth verifier.
ErrorEstimate estimate_simple_error(const Verifier& verifier, const Verifier& truth,
                                    const TraceDistribution& dist, const EstimateOptions& options = {});

/// Σ weight · ℓ_h(x,τ;y) over an explicit distribution.
double population_agnostic_loss(const Verifier& verifier, const TraceDistribution& dist);

struct TrustableEstimate {
  /// D-mass of problems where {γ-complete AND sound} fails.
  double err = 0.0;
  double sound_rate = 0.0;
  double mean_completeness = 0.0;
  /// Every support problem is sound (exact, unlike comparing sound_rate to 1).
  bool all_sound = true;
};

/// Exhaustive per-problem checks when |Σ|^T fits the budget, deviation mode otherwise.
TrustableEstimate estimate_trustable_error(const Verifier& verifier, const GoldReasoner& gold,
                                           const ProblemDistribution& dist, double gamma,
                                           std::uint64_t budget = kDefaultEnumerationBudget);

/// Full traces accepted by h under run semantics that lie outside g(x), summed over problems.
std::uint64_t count_false_positives(const Verifier& verifier, const GoldReasoner& gold,
                                    const std::vector<Problem>& problems);

/// Pointwise comparison over every nonempty prefix of length ≤ T for each problem.
bool same_on_all_prefixes(const Verifier& a, const Verifier& b, const std::vector<Problem>& problems);

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  double eta = 0.5;
  /// nullopt: use the theorem's formula.
  std::optional<std::uint64_t> m;
  std::uint64_t trials = 100;
  std::uint64_t master_seed = 0;
  std::uint64_t enumeration_budget = kDefaultEnumerationBudget;
  std::size_t threads = 1;
  double confidence = 0.95;

  void validate() const;
};

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t m = 0;
  std::string learned;
  double error = 0.0;
  bool sound = true;
  double completeness = 1.0;
  bool failed = false;
  /// Agnostic experiments: OPT (the learned member's population loss is `error`).
  double opt = 0.0;
  /// Secondary per-trial identity check (closure agreement), when one is run.
  bool agree = true;
};

/// Pass/fail of a theorem-rate check with its pinned tolerance.
struct TheoremCheck {
  std::string name;
  /// Upper checks pass when observed ≤ threshold; lower checks when observed ≥ threshold.
  bool upper = true;
  double theorem_value = 0.0;
  double slack = 0.0;
  double threshold = 0.0;
  double observed = 0.0;
  bool passed = false;
};

/// threshold = theorem_value ± 3·sqrt(v(1−v)/trials).
TheoremCheck make_rate_check(std::string name, bool upper, double theorem_value, double observed,
                             std::uint64_t trials);

struct ExperimentReport {
  std::string experiment;
  std::uint64_t m = 0;
  std::uint64_t trials = 0;
  std::vector<TrialRecord> records;
  std::uint64_t failures = 0;
  double failure_rate = 0.0;
  Interval ci;
  std::optional<TheoremCheck> check;
  /// Ordered so the JSON output is stable.
  std::map<std::string, double> diagnostics;
  /// Not part of the deterministic report body.
  double wall_seconds = 0.0;
};

/// Fills failures, failure_rate and ci from the trial records.
void summarize(ExperimentReport& report, double confidence);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; results are indexed by i.
template <typename Record, typename Fn>
std::vector<Record> run_trials(std::uint64_t n, std::size_t threads, Fn&& fn) {
  std::vector<Record> out(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::uint64_t>(threads, n));
  if (workers == 1) {
    for (std::uint64_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t i = next++; i < n; i = next++) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// A finite class with a designated truth and an explicit trace distribution.
struct SimpleInstance {
  std::shared_ptr<const FiniteClass> cls;
  VerifierHandle truth;
  TraceDistribution dist;
};

/// A class, a gold reasoner g = C_{h*} and a problem distribution.
struct TrustableInstance {
  ClassHandle cls;
  VerifierHandle truth;
  std::shared_ptr<const GoldReasoner> gold;
  ProblemDistribution dist;
};

/// Draw m labeled traces, ERM, exact error, failure iff err > ε.
ExperimentReport run_svpac_experiment(const SimpleInstance& instance, const ExperimentConfig& config);

/// Draw m problems, reveal g(x), augmented ERM, failure iff the
/// {1-complete AND sound} failure mass exceeds ε.
ExperimentReport run_tvpac_experiment(const TrustableInstance& instance, const ExperimentConfig& config);

struct GammaOptions {
  /// Also run closure_learn and compare it with h′ on every prefix of every support problem.
  bool compare_closure = false;
  /// Check every full trace of every support problem against g (zero false positives).
  bool exhaustive_false_positive_check = false;
};

/// Draw m (problem, positive) pairs, Algorithm 1, failure iff the
/// {(1−η)-complete AND sound} failure mass exceeds ε. Throws AssertionFailure
/// if any trial is unsound.
ExperimentReport run_gamma_tvpac_experiment(const TrustableInstance& instance,
                                            const ExperimentConfig& config,
                                            const GammaOptions& options = {});

struct LowerBoundConfig {
  std::size_t cells = 64;
  std::size_t alphabet = 2;
  std::size_t horizon = 8;
  std::uint64_t m = 32;
  std::uint64_t trials = 2000;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
  double confidence = 0.95;
};

/// Uniform-random consistent proper learner; failure iff it picks h_i ≠ h_{i*}.
ExperimentReport run_lower_bound_proper(const LowerBoundConfig& config);

/// Algorithm 1 forced to ½-completeness by adding unseen cells in random
/// order; failure iff it accepts a trace of S_{i*}.
ExperimentReport run_lower_bound_improper(const LowerBoundConfig& config);

/// Agnostic ERM on m examples; failure iff L(ĥ) − OPT > ε.
ExperimentReport run_agnostic_experiment(const SimpleInstance& instance, const ExperimentConfig& config);

/// Agnostic per-problem ERM; failure iff L(ĥ) − OPT > ε.
ExperimentReport run_agnostic_tvpac_experiment(const TrustableInstance& instance,
                                               const ExperimentConfig& config);

struct CurvePoint {
  std::uint64_t m = 0;
  std::uint64_t trials = 0;
  double failure_rate = 0.0;
  Interval ci;
  double mean_error = 0.0;
};

/// One experiment per grid point; trial seeds are shared across points.
std::vector<CurvePoint> run_curve(const std::vector<std::uint64_t>& grid,
                                  const std::function<ExperimentReport(std::uint64_t)>& experiment);

/// Non-increasing failure rate up to one CI width between consecutive points.
bool curve_is_monotone(const std::vector<CurvePoint>& curve);

}  // namespace cotv
