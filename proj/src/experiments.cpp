#include "cotv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace cotv {

namespace {

enum Stream : std::uint64_t {
  kSoundnessStream = 0x414c31,
  kOnlineStream = 0x4f4e4c,
  kGeneratorStream = 0x47454e,
  kOracleStream = 0x4f5243,
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Exact checks: observed violation count must be zero.
TheoremCheck zero_check(std::string name, double violations) {
  TheoremCheck c;
  c.name = std::move(name);
  c.upper = true;
  c.observed = violations;
  c.passed = violations == 0.0;
  return c;
}

}  // namespace

ExperimentReport run_algorithm1_soundness(const GoldClassParams& params, std::uint64_t m_max,
                                          const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const double gamma = 1.0 - config.eta;
  ExperimentReport report;
  report.experiment = "algorithm1_soundness";
  report.m = m_max;
  report.records = run_trials<TrialRecord>(config.trials, config.threads, [&](std::uint64_t trial) {
    const TrustableInstance inst =
        make_gold_perturbation_instance(params, derive_seed(config.master_seed, kSoundnessStream, trial));
    Rng rng = Rng::for_stream(config.master_seed, kSoundnessStream + 1, trial);
    const std::uint64_t m = trial % (m_max + 1);
    std::vector<ProblemTrace> positives;
    for (std::uint64_t i = 0; i < m; ++i) {
      Problem x = inst.dist.sample(rng);
      Trace t = sample_positive(*inst.gold, x, rng);
      positives.push_back({std::move(x), std::move(t)});
    }
    const auto learned = intersect_consistent_learn(inst.cls, positives);
    const std::uint64_t fp = count_false_positives(*learned, *inst.gold, inst.dist.support());
    const TrustableEstimate est =
        estimate_trustable_error(*learned, *inst.gold, inst.dist, gamma, config.enumeration_budget);
    TrialRecord r;
    r.trial = trial;
    r.m = m;
    r.learned = "intersection:" + std::to_string(learned->base().member_ids.size());
    r.error = static_cast<double>(fp);
    r.sound = fp == 0 && est.all_sound;
    r.completeness = est.mean_completeness;
    r.failed = !r.sound;
    return r;
  });
  summarize(report, config.confidence);
  double fp = 0.0;
  for (const auto& r : report.records) fp += r.error;
  report.diagnostics["false_positives"] = fp;
  report.diagnostics["trials_with_m_zero"] =
      static_cast<double>(std::count_if(report.records.begin(), report.records.end(),
                                        [](const TrialRecord& r) { return r.m == 0; }));
  report.check = zero_check("algorithm1_false_positives", static_cast<double>(report.failures));
  report.wall_seconds = seconds_since(start);
  return report;
}

ClosureCurveResult run_closure_curve(const TrustableInstance& instance, const std::vector<std::uint64_t>& grid,
                                     const ExperimentConfig& config, double m_limit) {
  const auto start = Clock::now();
  if (!instance.cls->intersection_closed()) {
    throw ConfigError("class.family", "closure curve needs an intersection-closed class");
  }
  ClosureCurveResult out;
  GammaOptions options;
  options.compare_closure = true;
  std::uint64_t total_disagreements = 0;
  for (std::uint64_t m : grid) {
    ExperimentConfig c = config;
    c.m = m;
    const ExperimentReport r = run_gamma_tvpac_experiment(instance, c, options);
    out.curve.push_back({m, r.trials, r.failure_rate, r.ci, r.diagnostics.at("mean_error")});
    const auto d = static_cast<std::uint64_t>(r.diagnostics.at("closure_disagreements"));
    out.disagreements.push_back(d);
    total_disagreements += d;
    if (!out.m_reached && r.failure_rate <= config.delta) out.m_reached = m;
    for (const auto& rec : r.records) out.summary.records.push_back(rec);
  }
  ExperimentReport& s = out.summary;
  s.experiment = "closure_curve";
  s.m = out.m_reached.value_or(0);
  summarize(s, config.confidence);
  s.diagnostics["closure_disagreements"] = static_cast<double>(total_disagreements);
  s.diagnostics["m_limit"] = m_limit;
  s.diagnostics["m_reached"] =
      out.m_reached ? static_cast<double>(*out.m_reached) : std::numeric_limits<double>::infinity();
  s.diagnostics["curve_monotone"] = curve_is_monotone(out.curve) ? 1.0 : 0.0;
  TheoremCheck c;
  c.name = "closure_samples_to_target";
  c.upper = true;
  c.theorem_value = m_limit;
  c.threshold = m_limit;
  c.observed = s.diagnostics["m_reached"];
  c.passed = out.m_reached && static_cast<double>(*out.m_reached) <= m_limit && total_disagreements == 0;
  s.check = c;
  s.wall_seconds = seconds_since(start);
  return out;
}

ExperimentReport run_online_mistakes(const OnlineConfig& config) {
  const auto start = Clock::now();
  if (config.dim_min < 1 || config.dim_max < config.dim_min) {
    throw ConfigError("online.dims", "need 1 <= dim_min <= dim_max");
  }
  std::vector<OnlineStream> fixed;
  if (config.adversarial) fixed = adversarial_online_streams();
  const std::uint64_t total = config.random_streams + fixed.size();
  const std::size_t dims = config.dim_max - config.dim_min + 1;

  ExperimentReport report;
  report.experiment = "online_mistakes";
  report.records = run_trials<TrialRecord>(total, config.threads, [&](std::uint64_t i) {
    OnlineStream stream;
    if (i < fixed.size()) {
      stream = fixed[i];
    } else {
      const std::uint64_t k = i - fixed.size();
      Rng rng = Rng::for_stream(config.master_seed, kOnlineStream, k);
      const auto variant = k % 2 == 0 ? SubspaceVariant::Orthogonal : SubspaceVariant::General;
      stream = random_online_stream(variant, config.dim_min + (k / 2) % dims, config.length, rng);
    }
    bool assumption_ok = true;
    if (stream.variant == SubspaceVariant::Orthogonal && stream.hstar.cols() > 0) {
      for (const auto& [x0, x1] : stream.steps) {
        if (x0.cols() > 0 && (stream.hstar.transpose() * x0).cwiseAbs().maxCoeff() > 1e-8) assumption_ok = false;
      }
    }
    const OnlineOutcome o = run_online_stream(stream);
    TrialRecord r;
    r.trial = i;
    r.m = stream.steps.size();
    r.learned = stream.name;
    r.error = static_cast<double>(o.mistakes);
    r.completeness = static_cast<double>(o.bound);
    r.sound = stream.variant == SubspaceVariant::General || o.false_positives == 0;
    r.agree = assumption_ok;
    r.failed = !o.within_bound() || !r.sound || !assumption_ok;
    return r;
  });
  summarize(report, 0.95);
  double max_mistakes = 0.0;
  std::uint64_t tight = 0;
  for (const auto& r : report.records) {
    max_mistakes = std::max(max_mistakes, r.error);
    if (r.error == r.completeness) ++tight;
  }
  report.diagnostics["streams"] = static_cast<double>(total);
  report.diagnostics["adversarial_streams"] = static_cast<double>(fixed.size());
  report.diagnostics["max_mistakes"] = max_mistakes;
  report.diagnostics["streams_at_bound"] = static_cast<double>(tight);
  report.check = zero_check("online_bound_violations", static_cast<double>(report.failures));
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_generator_equivalence(const GoldClassParams& params, std::uint64_t reasoners,
                                           const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  if (params.gold.k_max != 1) throw ConfigError("gold.k", "generator equivalence needs k = 1");
  const TraceSpace& space = params.gold.space;
  const std::uint64_t m = config.m.value_or(
      finite_class_sample_size(params.class_size, config.epsilon, config.delta));
  std::vector<std::uint64_t> eligible(reasoners, 0);
  ExperimentReport report;
  report.experiment = "generator_equivalence";
  report.m = m;
  report.records = run_trials<TrialRecord>(reasoners, config.threads, [&](std::uint64_t i) {
    const TrustableInstance inst =
        make_gold_perturbation_instance(params, derive_seed(config.master_seed, kGeneratorStream, i));
    Rng rng = Rng::for_stream(config.master_seed, kGeneratorStream + 1, i);
    std::vector<Problem> problems;
    for (std::uint64_t j = 0; j < m; ++j) problems.push_back(inst.dist.sample(rng));
    const MemberChoice choice = tvpac_learn(*inst.cls, *inst.gold, problems);
    std::uint64_t ok_problems = 0;
    std::uint64_t mismatches = 0;
    for (const auto& x : inst.dist.support()) {
      const ProblemStatus s = per_problem_status(*choice.verifier, *inst.gold, x, StatusMode::Exhaustive,
                                                 config.enumeration_budget);
      if (!s.complete_and_sound()) continue;
      ++ok_problems;
      std::size_t evals = 0;
      try {
        const Trace t = generate_from_verifier(*choice.verifier, x, space.alphabet_size, space.horizon, &evals);
        if (t != inst.gold->traces(x).front() || evals > space.horizon * space.alphabet_size) ++mismatches;
      } catch (const GenerationDeadEnd&) {
        ++mismatches;
      }
    }
    eligible[i] = ok_problems;
    TrialRecord r;
    r.trial = i;
    r.m = m;
    r.learned = "member:" + std::to_string(choice.id);
    r.error = static_cast<double>(mismatches);
    r.completeness = static_cast<double>(ok_problems) / static_cast<double>(inst.dist.support().size());
    r.failed = mismatches > 0;
    return r;
  });
  summarize(report, config.confidence);
  std::uint64_t total_eligible = 0;
  for (auto e : eligible) total_eligible += e;
  report.diagnostics["eligible_problems"] = static_cast<double>(total_eligible);
  report.diagnostics["problems"] = static_cast<double>(reasoners * space.problem_count);
  report.check = zero_check("generator_mismatches", static_cast<double>(report.failures));
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_interval_witness() {
  const auto start = Clock::now();
  // S = {(0,(1)), (1,(3)), (2,(2,3))}, labels (YES, NO, YES).
  const std::array<double, 3> x0{0.0, 1.0, 2.0};
  const std::array<Trace, 3> traces{Trace{1}, Trace{3}, Trace{2, 3}};
  const std::array<bool, 3> labels{true, false, true};
  const TraceSpace space(4, 2, ProblemKind::RealScalar);

  ExperimentReport report;
  report.experiment = "interval_witness";
  std::array<double, 3> witness_distances{};
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (Step s : traces[i]) sum += s;
    witness_distances[i] = std::abs(x0[i] - sum);
  }
  const bool distances_match = witness_distances == std::array<double, 3>{1.0, 2.0, 3.0};

  // Interval endpoints on a grid that hits every gap around {1, 2, 3}.
  std::vector<double> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back(0.5 * i);

  std::array<double, 3> perm{1.0, 2.0, 3.0};
  std::uint64_t row = 0;
  do {
    // Rebase each problem so x₀ − Σ x_j equals the assigned distance.
    std::array<Problem, 3> problems;
    for (std::size_t i = 0; i < 3; ++i) {
      double sum = 0.0;
      for (Step s : traces[i]) sum += s;
      problems[i] = sum + perm[i];
    }
    bool realizable = false;
    for (double r1 : grid) {
      for (double r2 : grid) {
        if (r2 < r1) continue;
        const IntervalVerifier h(space, r1, r2);
        bool all = true;
        for (std::size_t i = 0; i < 3 && all; ++i) all = h.accepts(problems[i], traces[i]) == labels[i];
        realizable = realizable || all;
      }
    }
    const bool middle_is_no = perm[1] > std::min(perm[0], perm[2]) && perm[1] < std::max(perm[0], perm[2]);
    TrialRecord r;
    r.trial = row++;
    r.learned = "distances:" + std::to_string(static_cast<int>(perm[0])) + "," +
                std::to_string(static_cast<int>(perm[1])) + "," + std::to_string(static_cast<int>(perm[2]));
    r.error = realizable ? 1.0 : 0.0;
    r.sound = !realizable;
    r.failed = realizable == middle_is_no;
    report.records.push_back(r);
  } while (std::next_permutation(perm.begin(), perm.end()));

  summarize(report, 0.95);
  const bool witness_order_unrealizable = report.records.front().error == 0.0;
  report.diagnostics["witness_distances_match"] = distances_match ? 1.0 : 0.0;
  report.diagnostics["witness_order_unrealizable"] = witness_order_unrealizable ? 1.0 : 0.0;
  report.diagnostics["orders"] = static_cast<double>(report.records.size());
  const double violations =
      static_cast<double>(report.failures) + (distances_match ? 0.0 : 1.0) + (witness_order_unrealizable ? 0.0 : 1.0);
  report.check = zero_check("interval_witness_violations", violations);
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_oracle_equivalence(std::uint64_t pairs, std::uint64_t max_traces,
                                        const ExperimentConfig& config) {
  const auto start = Clock::now();
  ExperimentReport report;
  report.experiment = "oracle_equivalence";
  report.records = run_trials<TrialRecord>(pairs, config.threads, [&](std::uint64_t i) {
    Rng rng = Rng::for_stream(config.master_seed, kOracleStream, i);
    const StatusPair pair = random_status_pair(rng, max_traces);
    const Problem x = ProblemId{0};
    const ProblemStatus ex = per_problem_status(*pair.verifier, *pair.gold, x, StatusMode::Exhaustive,
                                                config.enumeration_budget);
    const ProblemStatus dev = per_problem_status(*pair.verifier, *pair.gold, x, StatusMode::Deviation);
    TrialRecord r;
    r.trial = i;
    r.m = pair.gold->space().trace_count(pair.gold->space().horizon).value_or(0);
    r.learned = pair.verifier->describe();
    r.error = ex.complete_fraction;
    r.completeness = dev.complete_fraction;
    r.sound = ex.sound;
    r.agree = dev.sound;
    r.failed = !(ex == dev);
    r.opt = ex.complete_and_sound() ? 1.0 : 0.0;
    return r;
  });
  summarize(report, config.confidence);
  double both = 0.0;
  double sound = 0.0;
  for (const auto& r : report.records) {
    both += r.opt;
    sound += r.sound ? 1.0 : 0.0;
  }
  report.diagnostics["complete_and_sound_pairs"] = both;
  report.diagnostics["sound_pairs"] = sound;
  report.check = zero_check("oracle_mismatches", static_cast<double>(report.failures));
  report.wall_seconds = seconds_since(start);
  return report;
}

}  // namespace cotv
