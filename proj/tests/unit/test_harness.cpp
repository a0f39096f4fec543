#include <doctest.h>

#include <cmath>

#include "cotv/config.hpp"
#include "cotv/harness.hpp"
#include "cotv/scenarios.hpp"
#include "cotv/stats.hpp"

using namespace cotv;

namespace {

bool same_records(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.trial != y.trial || x.m != y.m || x.learned != y.learned || x.error != y.error || x.sound != y.sound ||
        x.completeness != y.completeness || x.failed != y.failed || x.opt != y.opt || x.agree != y.agree) {
      return false;
    }
  }
  return a.failure_rate == b.failure_rate && a.ci.low == b.ci.low && a.ci.high == b.ci.high &&
         a.diagnostics == b.diagnostics;
}

// Four equally weighted traces on one problem; `h` differs from accept-all on the last.
struct QuarterInstance {
  TraceSpace space{2, 2, ProblemKind::Enumerated, 1};
  AcceptAllVerifier truth{space};
  FunctionVerifier h{space, [](const Problem&, Prefix p) { return !(p.size() == 2 && p[0] == 1 && p[1] == 1); }, "h"};
  TraceDistribution dist = TraceDistribution::labeled_by(
      truth, {{ProblemId{0}, {0, 0}}, {ProblemId{0}, {0, 1}}, {ProblemId{0}, {1, 0}}, {ProblemId{0}, {1, 1}}});
};

}  // namespace

TEST_CASE("sample-size formulas") {
  CHECK(finite_class_sample_size(256, 0.1, 0.05) == 86);
  CHECK(finite_class_sample_size(64, 0.1, 0.1) == 65);
  CHECK(gamma_tvpac_sample_size(32, 0.5, 0.1, 0.1) == 490);
  CHECK(agnostic_sample_size(64, 0.2, 0.1) == 358);
  // independent evaluation over a grid
  for (std::uint64_t h : {2u, 17u, 1024u}) {
    for (double eps : {0.05, 0.2}) {
      for (double delta : {0.01, 0.1}) {
        CHECK(finite_class_sample_size(h, eps, delta) ==
              static_cast<std::uint64_t>(std::ceil((std::log(h) + std::log(1 / delta)) / eps - 1e-9)));
        CHECK(agnostic_sample_size(h, eps, delta) ==
              static_cast<std::uint64_t>(std::ceil(2 / (eps * eps) * (std::log(h) + std::log(2 / delta)) - 1e-9)));
      }
    }
  }
}

TEST_CASE("Clopper-Pearson interval") {
  const auto z = clopper_pearson(0, 10);
  CHECK(z.low == 0.0);
  CHECK(z.high == doctest::Approx(1 - std::pow(0.025, 0.1)).epsilon(1e-9));
  const auto f = clopper_pearson(10, 10);
  CHECK(f.high == 1.0);
  CHECK(f.low == doctest::Approx(std::pow(0.025, 0.1)).epsilon(1e-9));
  const auto m = clopper_pearson(50, 100);
  CHECK(m.contains(0.5));
  CHECK(m.low == doctest::Approx(0.3983).epsilon(1e-3));
  CHECK(binomial_se(0.25, 100) == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
}

TEST_CASE("rate checks pin theorem value plus 3 SE") {
  const auto up = make_rate_check("x", true, 0.05, 0.06, 500);
  CHECK(up.threshold == doctest::Approx(0.05 + 3 * std::sqrt(0.05 * 0.95 / 500)));
  CHECK(up.passed);
  const auto lo = make_rate_check("y", false, 1.0 / 3, 0.2, 2000);
  CHECK_FALSE(lo.passed);
}

TEST_CASE("simple error: exact and Monte Carlo") {
  QuarterInstance q;
  CHECK(estimate_simple_error(q.truth, q.truth, q.dist).value == 0.0);
  const auto ex = estimate_simple_error(q.h, q.truth, q.dist);
  CHECK(ex.exact);
  CHECK(ex.value == 0.25);
  EstimateOptions mc;
  mc.mode = EstimateMode::MonteCarlo;
  mc.samples = 100000;
  mc.seed = 3;
  CHECK(estimate_simple_error(q.h, q.truth, q.dist, mc).ci.contains(0.25));
}

TEST_CASE("Monte Carlo CI covers the exact value in at least 99 of 100 seeded runs") {
  QuarterInstance q;
  EstimateOptions mc;
  mc.mode = EstimateMode::MonteCarlo;
  mc.samples = 100000;
  mc.confidence = 0.999;
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    mc.seed = seed;
    covered += estimate_simple_error(q.h, q.truth, q.dist, mc).ci.contains(0.25);
  }
  CHECK(covered >= 99);
}

TEST_CASE("trustable error examples") {
  const TraceSpace space(2, 2, ProblemKind::Enumerated, 10);
  auto g = std::make_shared<GoldReasoner>(space);
  for (std::int64_t x = 0; x < 10; ++x) g->add(ProblemId{x}, {{0, 0}, {1, 1}});
  const ProblemDistribution dist(enumerated_problems(10));
  const auto tc = std::make_shared<TreeCharacteristicVerifier>(g);
  const auto e0 = estimate_trustable_error(*tc, *g, dist, 1.0);
  CHECK(e0.err == 0.0);
  CHECK(e0.all_sound);
  // one extra accepted trace on a problem of weight 0.1
  const FunctionVerifier extra(
      space,
      [tc](const Problem& x, Prefix p) {
        if (std::get<ProblemId>(x).value == 4 && p[0] == 0) return true;
        return tc->accepts(x, p);
      },
      "extra");
  const auto e1 = estimate_trustable_error(extra, *g, dist, 1.0);
  CHECK(e1.sound_rate == doctest::Approx(0.9));
  CHECK(e1.err >= 0.1 - 1e-12);
  CHECK_FALSE(e1.all_sound);
  // exactly half of each g(x), boundary meets γ = 0.5
  const FunctionVerifier half(space, [tc](const Problem& x, Prefix p) { return p[0] == 0 && tc->accepts(x, p); }, "half");
  CHECK(estimate_trustable_error(half, *g, dist, 0.5).err == 0.0);
  CHECK(estimate_trustable_error(half, *g, dist, 1.0).err == doctest::Approx(1.0));
}

TEST_CASE("population agnostic loss gives OPT exactly") {
  const TraceSpace space(2, 1, ProblemKind::Enumerated, 1);
  using V = Verdict;
  // labels: YES on 70% of the mass, NO on 30%
  const auto dist = TraceDistribution::with_labels(space, {{ProblemId{0}, {0}}, {ProblemId{0}, {1}}},
                                                   {{V::Yes}, {V::No}}, {0.7, 0.3});
  const AcceptAllVerifier all(space);
  const AxiomSubsetVerifier only0(space, 0b01);
  RejectAllVerifier none(space);
  CHECK(population_agnostic_loss(all, dist) == doctest::Approx(0.3));
  CHECK(population_agnostic_loss(none, dist) == doctest::Approx(0.7));
  CHECK(population_agnostic_loss(only0, dist) == 0.0);
  // a 2-member class with losses (0.3, 0.7): OPT is 0.3
  const auto d2 = TraceDistribution::with_labels(space, {{ProblemId{0}, {0}}, {ProblemId{0}, {1}}},
                                                 {{V::Yes}, {V::Yes}}, {0.9, 0.1});
  const FiniteClass cls(space, {std::make_shared<AxiomSubsetVerifier>(space, 0b01), std::make_shared<AcceptAllVerifier>(space)},
                        std::nullopt);
  CHECK(std::min(population_agnostic_loss(*cls.member(0), d2), population_agnostic_loss(*cls.member(1), d2)) ==
        doctest::Approx(0.0));
  CHECK(population_agnostic_loss(*cls.member(0), d2) == doctest::Approx(0.1));
}

TEST_CASE("distribution weights are validated") {
  CHECK_THROWS(check_weights({0.5, 0.4}));
  CHECK_NOTHROW(check_weights({0.5, 0.5}));
  CHECK_THROWS(ProblemDistribution(enumerated_problems(2), {0.7, 0.7}));
}

TEST_CASE("experiments are bit-identical across thread counts") {
  RandomTableParams p;
  p.class_size = 64;
  p.support_size = 100;
  const auto inst = make_random_table_instance(p, 9);
  ExperimentConfig c;
  c.trials = 60;
  c.m = 20;
  c.master_seed = 77;
  c.threads = 1;
  const auto a = run_svpac_experiment(inst, c);
  c.threads = 4;
  const auto b = run_svpac_experiment(inst, c);
  CHECK(same_records(a, b));

  GoldClassParams gp;
  gp.gold.space = TraceSpace(3, 3, ProblemKind::Enumerated, 10);
  gp.class_size = 16;
  const auto ti = make_gold_perturbation_instance(gp, 4);
  c.m = 30;
  c.threads = 1;
  const auto g1 = run_gamma_tvpac_experiment(ti, c);
  c.threads = 3;
  const auto g3 = run_gamma_tvpac_experiment(ti, c);
  CHECK(same_records(g1, g3));

  LowerBoundConfig lb;
  lb.trials = 50;
  lb.threads = 1;
  const auto l1 = run_lower_bound_improper(lb);
  lb.threads = 4;
  CHECK(same_records(l1, run_lower_bound_improper(lb)));
}

TEST_CASE("lower-bound direction checks") {
  LowerBoundConfig lb;
  lb.trials = 2000;
  lb.m = 0;
  const auto zero = run_lower_bound_proper(lb);
  const double expect = 1.0 - 1.0 / 64;
  CHECK(std::abs(zero.failure_rate - expect) <= 3 * binomial_se(expect, lb.trials) + 1e-12);
  lb.m = 2000;
  lb.trials = 100;
  CHECK(run_lower_bound_proper(lb).failure_rate <= 0.05);
  lb.m = 64 * 40;
  CHECK(run_lower_bound_improper(lb).failure_rate <= 0.05);
  lb.m = 16;
  const auto pure = run_lower_bound_improper(lb);
  CHECK(pure.diagnostics.at("pure_algorithm1_unsound_trials") == 0.0);
  CHECK(pure.diagnostics.at("pure_algorithm1_half_complete_violation_rate") == 1.0);
  for (const auto& r : pure.records) CHECK(r.completeness >= 0.5);
}

TEST_CASE("tvpac: failure rate zero when only the truth survives the negatives") {
  GoldClassParams gp;
  gp.gold.space = TraceSpace(3, 3, ProblemKind::Enumerated, 1);
  gp.class_size = 8;
  gp.q_min = 1.0;
  gp.q_max = 1.0;
  const auto inst = make_gold_perturbation_instance(gp, 2);
  ExperimentConfig c;
  c.m = 1;
  c.trials = 40;
  const auto r = run_tvpac_experiment(inst, c);
  CHECK(r.failure_rate == 0.0);
}

TEST_CASE("curves are monotone on a validated scenario") {
  RandomTableParams p;
  p.class_size = 64;
  p.support_size = 100;
  const auto inst = make_random_table_instance(p, 13);
  ExperimentConfig c;
  c.trials = 100;
  const auto curve = run_curve({1, 5, 10, 20, 40}, [&](std::uint64_t m) {
    ExperimentConfig cm = c;
    cm.m = m;
    return run_svpac_experiment(inst, cm);
  });
  CHECK(curve.size() == 5);
  CHECK(curve_is_monotone(curve));
  CHECK(curve.front().failure_rate > curve.back().failure_rate);
}

TEST_CASE("a non-realizable sample aborts the experiment") {
  RandomTableParams p;
  p.class_size = 16;
  p.support_size = 50;
  const auto inst = corrupt_labels(make_random_table_instance(p, 1), 0.5, 3);
  ExperimentConfig c;
  c.trials = 5;
  c.m = 50;
  CHECK_THROWS_AS(run_svpac_experiment(inst, c), RealizabilityViolation);
}

TEST_CASE("exact experiments") {
  CHECK(run_interval_witness().check->passed);
  ExperimentConfig c;
  c.trials = 200;
  const auto o = run_oracle_equivalence(200, 512, c);
  CHECK(o.failures == 0);
  OnlineConfig oc;
  oc.random_streams = 200;
  CHECK(run_online_mistakes(oc).failures == 0);
}
