#include "cotv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "cotv/enumeration.hpp"

namespace cotv {

namespace {

// Stream ids keep the experiments' random streams disjoint under one master seed.
enum Stream : std::uint64_t {
  kSvpacStream = 0x5350,
  kTvpacStream = 0x5456,
  kGammaStream = 0x4754,
  kProperStream = 0x4c50,
  kImproperStream = 0x4c49,
  kAgnosticStream = 0x4147,
  kAgnosticTvpacStream = 0x4154,
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::string member_tag(std::uint64_t id) { return "member:" + std::to_string(id); }

}  // namespace

void check_weights(const std::vector<double>& weights) {
  if (weights.empty()) throw InvalidInput("distribution support is empty");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidInput("distribution weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidInput("distribution weights sum to " + std::to_string(total) + ", not 1");
  }
}

ProblemDistribution::ProblemDistribution(std::vector<Problem> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (weights_.empty()) weights_ = uniform_weights(support_.size());
  if (weights_.size() != support_.size()) throw InvalidInput("problem weights and support differ in length");
  check_weights(weights_);
  sampler_ = WeightedSampler(weights_);
}

TraceDistribution TraceDistribution::labeled_by(const Verifier& truth, std::vector<ProblemTrace> support,
                                                std::vector<double> weights) {
  std::vector<std::vector<Verdict>> labels;
  labels.reserve(support.size());
  for (const auto& pt : support) labels.push_back(verdict_vector(truth, pt.problem, pt.trace));
  return with_labels(truth.space(), std::move(support), std::move(labels), std::move(weights));
}

TraceDistribution TraceDistribution::with_labels(TraceSpace space, std::vector<ProblemTrace> support,
                                                 std::vector<std::vector<Verdict>> labels,
                                                 std::vector<double> weights) {
  TraceDistribution d;
  d.space_ = space;
  if (weights.empty()) weights = uniform_weights(support.size());
  if (weights.size() != support.size() || labels.size() != support.size()) {
    throw InvalidInput("trace distribution: support, labels and weights differ in length");
  }
  check_weights(weights);
  for (std::size_t i = 0; i < support.size(); ++i) {
    space.validate_problem(support[i].problem);
    space.validate_prefix(support[i].trace);
    if (labels[i].size() != support[i].trace.size()) {
      throw InvalidInput("trace distribution: label vector length differs from trace length");
    }
    d.verdicts_.push_back(verdict_of_labels(labels[i]));
  }
  d.support_ = std::move(support);
  d.labels_ = std::move(labels);
  d.weights_ = std::move(weights);
  d.sampler_ = WeightedSampler(d.weights_);
  return d;
}

TraceDistribution TraceDistribution::generated(ProblemDistribution problems, TraceSampler sampler,
                                               VerifierHandle truth) {
  if (!sampler || !truth) throw InvalidInput("generated distribution needs a sampler and a truth verifier");
  TraceDistribution d;
  d.space_ = truth->space();
  d.problems_ = std::move(problems);
  d.sampler_fn_ = std::move(sampler);
  d.truth_ = std::move(truth);
  return d;
}

const std::vector<ProblemTrace>& TraceDistribution::support() const {
  if (!is_explicit()) throw InvalidInput("generated trace distribution has no explicit support");
  return support_;
}
const std::vector<double>& TraceDistribution::weights() const {
  if (!is_explicit()) throw InvalidInput("generated trace distribution has no explicit support");
  return weights_;
}
const std::vector<std::vector<Verdict>>& TraceDistribution::label_vectors() const {
  if (!is_explicit()) throw InvalidInput("generated trace distribution has no explicit support");
  return labels_;
}
const std::vector<TraceVerdict>& TraceDistribution::verdicts() const {
  if (!is_explicit()) throw InvalidInput("generated trace distribution has no explicit support");
  return verdicts_;
}

std::size_t TraceDistribution::sample_index(Rng& rng) const {
  if (!is_explicit()) throw InvalidInput("generated trace distribution has no explicit support");
  return sampler_.sample(rng);
}

LabeledTrace TraceDistribution::sample(Rng& rng) const {
  if (is_explicit()) {
    const std::size_t i = sampler_.sample(rng);
    return {support_[i].problem, support_[i].trace, verdicts_[i]};
  }
  Problem x = problems_.sample(rng);
  Trace t = sampler_fn_(x, rng);
  const TraceVerdict label = truth_->run(x, t);
  return {std::move(x), std::move(t), label};
}

AgnosticExample TraceDistribution::sample_agnostic(Rng& rng) const {
  if (is_explicit()) {
    const std::size_t i = sampler_.sample(rng);
    return {support_[i].problem, support_[i].trace, labels_[i]};
  }
  Problem x = problems_.sample(rng);
  Trace t = sampler_fn_(x, rng);
  auto labels = verdict_vector(*truth_, x, t);
  return {std::move(x), std::move(t), std::move(labels)};
}

ErrorEstimate estimate_simple_error(const Verifier& verifier, const Verifier& truth,
                                    const TraceDistribution& dist, const EstimateOptions& options) {
  if (options.mode == EstimateMode::Exhaustive) {
    const auto& support = dist.support();
    const auto& weights = dist.weights();
    double err = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (simple_loss(verifier, truth, support[i].problem, support[i].trace)) err += weights[i];
    }
    return {err, {err, err}, support.size(), true};
  }
  if (options.samples == 0) throw InvalidInput("Monte Carlo estimate needs at least one sample");
  Rng rng(options.seed);
  std::uint64_t losses = 0;
  for (std::uint64_t s = 0; s < options.samples; ++s) {
    const LabeledTrace ex = dist.sample(rng);
    if (simple_loss(verifier, truth, ex.problem, ex.trace)) ++losses;
  }
  const double value = static_cast<double>(losses) / static_cast<double>(options.samples);
  return {value, clopper_pearson(losses, options.samples, options.confidence), options.samples, false};
}

double population_agnostic_loss(const Verifier& verifier, const TraceDistribution& dist) {
  const auto& support = dist.support();
  const auto& weights = dist.weights();
  const auto& verdicts = dist.verdicts();
  double loss = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (verifier.run(support[i].problem, support[i].trace) != verdicts[i]) loss += weights[i];
  }
  return loss;
}

TrustableEstimate estimate_trustable_error(const Verifier& verifier, const GoldReasoner& gold,
                                           const ProblemDistribution& dist, double gamma,
                                           std::uint64_t budget) {
  const auto count = gold.space().trace_count(gold.space().horizon);
  const StatusMode mode = count && *count <= budget ? StatusMode::Exhaustive : StatusMode::Deviation;
  TrustableEstimate out;
  const auto& support = dist.support();
  const auto& weights = dist.weights();
  for (std::size_t i = 0; i < support.size(); ++i) {
    const ProblemStatus s = per_problem_status(verifier, gold, support[i], mode, budget);
    if (s.sound) {
      out.sound_rate += weights[i];
    } else {
      out.all_sound = false;
    }
    out.mean_completeness += weights[i] * s.complete_fraction;
    if (!s.gamma_complete_and_sound(gamma)) out.err += weights[i];
  }
  return out;
}

void ExperimentConfig::validate() const {
  auto rate = [](double x, const char* name) {
    if (!(x > 0.0 && x < 1.0)) throw ConfigError(name, "must lie in (0, 1)");
  };
  rate(epsilon, "epsilon");
  rate(delta, "delta");
  rate(eta, "eta");
  rate(confidence, "confidence");
  if (trials < 1) throw ConfigError("trials", "must be at least 1");
  if (threads < 1) throw ConfigError("threads", "must be at least 1");
}

TheoremCheck make_rate_check(std::string name, bool upper, double theorem_value, double observed,
                             std::uint64_t trials) {
  TheoremCheck c;
  c.name = std::move(name);
  c.upper = upper;
  c.theorem_value = theorem_value;
  c.slack = 3.0 * binomial_se(theorem_value, trials);
  c.threshold = upper ? theorem_value + c.slack : theorem_value - c.slack;
  c.observed = observed;
  c.passed = upper ? observed <= c.threshold : observed >= c.threshold;
  return c;
}

void summarize(ExperimentReport& report, double confidence) {
  report.trials = report.records.size();
  report.failures = static_cast<std::uint64_t>(
      std::count_if(report.records.begin(), report.records.end(), [](const auto& r) { return r.failed; }));
  report.failure_rate =
      report.trials == 0 ? 0.0 : static_cast<double>(report.failures) / static_cast<double>(report.trials);
  report.ci = clopper_pearson(report.failures, report.trials, confidence);
  double mean_error = 0.0;
  for (const auto& r : report.records) mean_error += r.error;
  report.diagnostics["mean_error"] = report.trials == 0 ? 0.0 : mean_error / static_cast<double>(report.trials);
}

// ---------------------------------------------------------------------------

ExperimentReport run_svpac_experiment(const SimpleInstance& instance, const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const FiniteClass& cls = *instance.cls;
  const std::uint64_t m =
      config.m.value_or(finite_class_sample_size(cls.enumerable_size(), config.epsilon, config.delta));
  const bool exact = instance.dist.is_explicit();

  ExperimentReport report;
  report.experiment = "svpac";
  report.m = m;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    Rng rng = Rng::for_stream(config.master_seed, kSvpacStream, trial);
    std::vector<LabeledTrace> sample;
    sample.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) sample.push_back(instance.dist.sample(rng));
    MemberChoice choice;
    try {
      choice = svpac_learn(cls, sample);
    } catch (const NoConsistentVerifier& e) {
      throw RealizabilityViolation(std::string("svpac trial ") + std::to_string(trial) + ": " + e.what());
    }
    EstimateOptions opts;
    opts.mode = exact ? EstimateMode::Exhaustive : EstimateMode::MonteCarlo;
    opts.samples = 10000;
    opts.seed = derive_seed(config.master_seed, kSvpacStream + 1, trial);
    const ErrorEstimate err = estimate_simple_error(*choice.verifier, *instance.truth, instance.dist, opts);
    TrialRecord r;
    r.trial = trial;
    r.m = m;
    r.learned = member_tag(choice.id);
    r.error = err.value;
    r.failed = err.value > config.epsilon;
    return r;
  });
  summarize(report, config.confidence);
  report.check = make_rate_check("svpac_failure_rate", true, config.delta, report.failure_rate, report.trials);
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_tvpac_experiment(const TrustableInstance& instance, const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const VerifierClass& cls = *instance.cls;
  const std::uint64_t m =
      config.m.value_or(finite_class_sample_size(cls.enumerable_size(), config.epsilon, config.delta));

  ExperimentReport report;
  report.experiment = "tvpac";
  report.m = m;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    Rng rng = Rng::for_stream(config.master_seed, kTvpacStream, trial);
    std::vector<Problem> problems;
    problems.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) problems.push_back(instance.dist.sample(rng));
    MemberChoice choice;
    try {
      choice = tvpac_learn(cls, *instance.gold, problems);
    } catch (const NoConsistentVerifier& e) {
      throw RealizabilityViolation(std::string("tvpac trial ") + std::to_string(trial) + ": " + e.what());
    }
    const TrustableEstimate est = estimate_trustable_error(*choice.verifier, *instance.gold, instance.dist,
                                                           1.0, config.enumeration_budget);
    TrialRecord r;
    r.trial = trial;
    r.m = m;
    r.learned = member_tag(choice.id);
    r.error = est.err;
    r.sound = est.all_sound;
    r.completeness = est.mean_completeness;
    r.failed = est.err > config.epsilon;
    return r;
  });
  summarize(report, config.confidence);
  report.check = make_rate_check("tvpac_failure_rate", true, config.delta, report.failure_rate, report.trials);
  report.wall_seconds = seconds_since(start);
  return report;
}

std::uint64_t count_false_positives(const Verifier& h, const GoldReasoner& gold,
                                    const std::vector<Problem>& problems) {
  const TraceSpace& space = gold.space();
  std::uint64_t fp = 0;
  for (const auto& x : problems) {
    std::set<Trace> g(gold.traces(x).begin(), gold.traces(x).end());
    for_each_trace(space.alphabet_size, space.horizon, [&](const Trace& t) {
      if (h.run(x, t).is_accepted() && g.count(t) == 0) ++fp;
    });
  }
  return fp;
}

bool same_on_all_prefixes(const Verifier& a, const Verifier& b, const std::vector<Problem>& problems) {
  const TraceSpace& space = a.space();
  for (const auto& x : problems) {
    for (std::size_t len = 1; len <= space.horizon; ++len) {
      bool same = true;
      for_each_trace(space.alphabet_size, len, [&](const Trace& p) {
        if (same && a.accepts(x, p) != b.accepts(x, p)) same = false;
      });
      if (!same) return false;
    }
  }
  return true;
}

ExperimentReport run_gamma_tvpac_experiment(const TrustableInstance& instance,
                                            const ExperimentConfig& config, const GammaOptions& options) {
  config.validate();
  const auto start = Clock::now();
  const std::uint64_t class_size = instance.cls->enumerable_size();
  const std::uint64_t m =
      config.m.value_or(gamma_tvpac_sample_size(class_size, config.eta, config.epsilon, config.delta));
  const double gamma = 1.0 - config.eta;
  const std::vector<Problem>& problems = instance.dist.support();

  std::vector<std::uint64_t> false_positives(config.trials, 0);
  ExperimentReport report;
  report.experiment = "gamma_tvpac";
  report.m = m;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    Rng rng = Rng::for_stream(config.master_seed, kGammaStream, trial);
    std::vector<ProblemTrace> positives;
    positives.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
      Problem x = instance.dist.sample(rng);
      Trace t = sample_positive(*instance.gold, x, rng);
      positives.push_back({std::move(x), std::move(t)});
    }
    std::shared_ptr<const IntersectionVerifier> learned;
    try {
      learned = intersect_consistent_learn(instance.cls, positives);
    } catch (const NoConsistentVerifier& e) {
      throw RealizabilityViolation(std::string("gamma trial ") + std::to_string(trial) + ": " + e.what());
    }
    const TrustableEstimate est =
        estimate_trustable_error(*learned, *instance.gold, instance.dist, gamma, config.enumeration_budget);
    TrialRecord r;
    r.trial = trial;
    r.m = m;
    r.learned = "intersection:" + std::to_string(learned->base().member_ids.size());
    r.error = est.err;
    r.sound = est.all_sound;
    r.completeness = est.mean_completeness;
    r.failed = est.err > config.epsilon;
    if (options.exhaustive_false_positive_check) {
      false_positives[trial] = count_false_positives(*learned, *instance.gold, problems);
    }
    if (options.compare_closure) {
      const VerifierHandle closure = closure_learn(*instance.cls, positives);
      r.agree = same_on_all_prefixes(*learned, *closure, problems);
    }
    return r;
  });
  summarize(report, config.confidence);

  std::uint64_t unsound = 0;
  std::uint64_t disagreements = 0;
  for (const auto& r : report.records) {
    if (!r.sound) ++unsound;
    if (!r.agree) ++disagreements;
  }
  const std::uint64_t fp = std::accumulate(false_positives.begin(), false_positives.end(), std::uint64_t{0});
  report.diagnostics["unsound_trials"] = static_cast<double>(unsound);
  if (options.exhaustive_false_positive_check) report.diagnostics["false_positives"] = static_cast<double>(fp);
  if (options.compare_closure) report.diagnostics["closure_disagreements"] = static_cast<double>(disagreements);
  report.check = make_rate_check("gamma_tvpac_failure_rate", true, config.delta, report.failure_rate,
                                 report.trials);
  report.wall_seconds = seconds_since(start);
  if (unsound != 0 || fp != 0) {
    throw AssertionFailure("Algorithm 1 accepted a faulty trace in " + std::to_string(unsound) +
                           " trials (" + std::to_string(fp) + " false positives)");
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

struct PartitionTrial {
  std::size_t hidden = 0;
  std::shared_ptr<const PartitionClass> cls;
  std::vector<std::uint64_t> consistent;
};

PartitionTrial partition_trial(const LowerBoundConfig& config, Rng& rng) {
  const TraceSpace space(config.alphabet, config.horizon, ProblemKind::Enumerated, 1);
  PartitionTrial t;
  t.hidden = static_cast<std::size_t>(rng.uniform_index(config.cells));
  t.cls = std::make_shared<PartitionClass>(space, config.cells, t.hidden);
  const std::uint64_t total = t.cls->total_traces();
  std::vector<ProblemTrace> positives;
  positives.reserve(config.m);
  const Problem x0 = ProblemId{0};
  // Uniform over g(x₀) = Σ^T \ S_{i*} by rejection.
  while (positives.size() < config.m) {
    const std::uint64_t rank = rng.uniform_index(total);
    if (t.cls->cell_of_rank(rank) == t.hidden) continue;
    positives.push_back({x0, trace_from_rank(rank, config.horizon, config.alphabet)});
  }
  const auto learned = intersect_consistent_learn(t.cls, positives);
  t.consistent = learned->base().member_ids;
  return t;
}

void validate_lower_bound(const LowerBoundConfig& config, bool improper) {
  if (config.trials < 1) throw ConfigError("trials", "must be at least 1");
  if (config.alphabet < 2) throw ConfigError("alphabet", "lower bounds need |Σ| >= 2");
  if (improper && config.cells % 4 != 0) throw ConfigError("cells", "must be a multiple of 4");
  const TraceSpace space(config.alphabet, config.horizon, ProblemKind::Enumerated, 1);
  const auto total = space.trace_count(config.horizon);
  if (config.cells < 3 || !total || config.cells > *total) {
    throw ConfigError("cells", "need 3 <= H <= |Σ|^T");
  }
}

}  // namespace

ExperimentReport run_lower_bound_proper(const LowerBoundConfig& config) {
  validate_lower_bound(config, false);
  const auto start = Clock::now();
  ExperimentReport report;
  report.experiment = "lower_bound_proper";
  report.m = config.m;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    Rng rng = Rng::for_stream(config.master_seed, kProperStream, trial);
    const PartitionTrial t = partition_trial(config, rng);
    const std::uint64_t chosen = t.consistent[rng.uniform_index(t.consistent.size())];
    TrialRecord r;
    r.trial = trial;
    r.m = config.m;
    r.learned = member_tag(chosen);
    r.sound = chosen == t.hidden;
    r.failed = !r.sound;
    r.error = r.failed ? 1.0 : 0.0;
    r.completeness = static_cast<double>(t.consistent.size());
    return r;
  });
  summarize(report, config.confidence);
  double consistent = 0.0;
  for (const auto& r : report.records) consistent += r.completeness;
  report.diagnostics["mean_consistent_members"] = consistent / static_cast<double>(report.trials);
  report.check = make_rate_check("proper_unsound_rate", false, 1.0 / 3.0, report.failure_rate, report.trials);
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_lower_bound_improper(const LowerBoundConfig& config) {
  validate_lower_bound(config, true);
  const auto start = Clock::now();
  std::vector<std::uint8_t> pure_half_violation(config.trials, 0);
  ExperimentReport report;
  report.experiment = "lower_bound_improper";
  report.m = config.m;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    Rng rng = Rng::for_stream(config.master_seed, kImproperStream, trial);
    const PartitionTrial t = partition_trial(config, rng);
    const PartitionClass& cls = *t.cls;
    const std::uint64_t total = cls.total_traces();
    const std::uint64_t g_size = total - cls.cell_size(t.hidden);

    // Pure Algorithm 1, checked exhaustively: sound, but far from ½-complete.
    const IntersectionVerifier pure(ConsistentSet{t.cls, t.consistent});
    std::uint64_t pure_accepted = 0;
    bool pure_sound = true;
    for (std::uint64_t rank = 0; rank < total; ++rank) {
      const Trace tr = trace_from_rank(rank, config.horizon, config.alphabet);
      if (!pure.run(ProblemId{0}, tr).is_accepted()) continue;
      if (cls.cell_of_rank(rank) == t.hidden) {
        pure_sound = false;
      } else {
        ++pure_accepted;
      }
    }
    if (!pure_sound) throw AssertionFailure("Algorithm 1 accepted a trace of the hidden cell");
    pure_half_violation[trial] = 2 * pure_accepted < g_size ? 1 : 0;

    // The learner cannot tell S_{i*} apart. It targets half of the largest possible
    // |g(x₀)| and discounts the biggest accepted unseen cell, since that one may be hidden.
    std::uint64_t smallest = total;
    for (std::size_t c = 0; c < cls.cells(); ++c) smallest = std::min(smallest, cls.cell_size(c));
    const std::uint64_t target = (total - smallest + 1) / 2;
    std::vector<bool> accepted(cls.cells(), true);
    std::uint64_t covered = 0;
    std::uint64_t riskiest = 0;
    for (std::uint64_t id : t.consistent) accepted[id] = false;
    for (std::size_t c = 0; c < cls.cells(); ++c) {
      if (accepted[c]) covered += cls.cell_size(c);
    }
    std::vector<std::uint64_t> unseen = t.consistent;
    rng.shuffle(unseen);
    for (std::uint64_t c : unseen) {
      if (covered >= target + riskiest) break;
      accepted[c] = true;
      covered += cls.cell_size(c);
      riskiest = std::max(riskiest, cls.cell_size(c));
    }
    std::uint64_t true_accepted = 0;
    for (std::size_t c = 0; c < cls.cells(); ++c) {
      if (accepted[c] && c != t.hidden) true_accepted += cls.cell_size(c);
    }
    TrialRecord r;
    r.trial = trial;
    r.m = config.m;
    r.learned = "half_complete:" + std::to_string(std::count(accepted.begin(), accepted.end(), true));
    r.sound = !accepted[t.hidden];
    r.failed = !r.sound;
    r.error = r.failed ? 1.0 : 0.0;
    r.completeness = static_cast<double>(true_accepted) / static_cast<double>(g_size);
    return r;
  });
  summarize(report, config.confidence);
  double completeness = 0.0;
  for (const auto& r : report.records) completeness += r.completeness;
  const auto violations = std::accumulate(pure_half_violation.begin(), pure_half_violation.end(), std::uint64_t{0});
  report.diagnostics["mean_completeness"] = completeness / static_cast<double>(report.trials);
  report.diagnostics["pure_algorithm1_unsound_trials"] = 0.0;
  report.diagnostics["pure_algorithm1_half_complete_violation_rate"] =
      static_cast<double>(violations) / static_cast<double>(report.trials);
  report.check = make_rate_check("improper_unsound_rate", false, 1.0 / 3.0, report.failure_rate, report.trials);
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_agnostic_experiment(const SimpleInstance& instance, const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const FiniteClass& cls = *instance.cls;
  const std::uint64_t n = cls.enumerable_size();
  const std::uint64_t m = config.m.value_or(agnostic_sample_size(n, config.epsilon, config.delta));

  std::vector<double> population(n);
  for (std::uint64_t id = 0; id < n; ++id) population[id] = population_agnostic_loss(*cls.member(id), instance.dist);
  const double opt = *std::min_element(population.begin(), population.end());

  ExperimentReport report;
  report.experiment = "agnostic_svpac";
  report.m = m;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    Rng rng = Rng::for_stream(config.master_seed, kAgnosticStream, trial);
    std::vector<AgnosticExample> sample;
    sample.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) sample.push_back(instance.dist.sample_agnostic(rng));
    const MemberChoice choice = agnostic_svpac_learn(cls, sample);
    TrialRecord r;
    r.trial = trial;
    r.m = m;
    r.learned = member_tag(choice.id);
    r.error = population[choice.id];
    r.opt = opt;
    r.failed = population[choice.id] - opt > config.epsilon;
    return r;
  });
  summarize(report, config.confidence);
  report.diagnostics["opt"] = opt;
  report.check = make_rate_check("agnostic_failure_rate", true, config.delta, report.failure_rate, report.trials);
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_agnostic_tvpac_experiment(const TrustableInstance& instance,
                                               const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const VerifierClass& cls = *instance.cls;
  const std::uint64_t n = cls.enumerable_size();
  const std::uint64_t m = config.m.value_or(agnostic_sample_size(n, config.epsilon, config.delta));

  std::vector<double> population(n);
  for (std::uint64_t id = 0; id < n; ++id) {
    const VerifierHandle h = cls.member(id);
    const auto& support = instance.dist.support();
    const auto& weights = instance.dist.weights();
    double loss = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (!per_problem_status(*h, *instance.gold, support[i], StatusMode::Deviation).complete_and_sound()) {
        loss += weights[i];
      }
    }
    population[id] = loss;
  }
  const double opt = *std::min_element(population.begin(), population.end());

  ExperimentReport report;
  report.experiment = "agnostic_tvpac";
  report.m = m;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    Rng rng = Rng::for_stream(config.master_seed, kAgnosticTvpacStream, trial);
    std::vector<Problem> problems;
    problems.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) problems.push_back(instance.dist.sample(rng));
    const MemberChoice choice = agnostic_tvpac_learn(cls, *instance.gold, problems);
    TrialRecord r;
    r.trial = trial;
    r.m = m;
    r.learned = member_tag(choice.id);
    r.error = population[choice.id];
    r.opt = opt;
    r.failed = population[choice.id] - opt > config.epsilon;
    return r;
  });
  summarize(report, config.confidence);
  report.diagnostics["opt"] = opt;
  report.check = make_rate_check("agnostic_tvpac_failure_rate", true, config.delta, report.failure_rate,
                                 report.trials);
  report.wall_seconds = seconds_since(start);
  return report;
}

std::vector<CurvePoint> run_curve(const std::vector<std::uint64_t>& grid,
                                  const std::function<ExperimentReport(std::uint64_t)>& experiment) {
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (std::uint64_t m : grid) {
    const ExperimentReport r = experiment(m);
    out.push_back({m, r.trials, r.failure_rate, r.ci, r.diagnostics.at("mean_error")});
  }
  return out;
}

bool curve_is_monotone(const std::vector<CurvePoint>& curve) {
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double width = curve[i - 1].ci.high - curve[i - 1].ci.low;
    if (curve[i].failure_rate > curve[i - 1].failure_rate + width) return false;
  }
  return true;
}

}  // namespace cotv
