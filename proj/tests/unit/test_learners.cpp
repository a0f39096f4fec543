#include <doctest.h>

#include <algorithm>
#include <set>

#include "cotv/enumeration.hpp"
#include "cotv/harness.hpp"
#include "cotv/learners.hpp"
#include "cotv/scenarios.hpp"

using namespace cotv;

namespace {

Eigen::VectorXd e(int d, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(i) = 1.0;
  return v;
}

Eigen::MatrixXd col(const Eigen::VectorXd& v) {
  Eigen::MatrixXd m(v.size(), 1);
  m.col(0) = v;
  return m;
}

}  // namespace

TEST_CASE("svpac_learn") {
  const TraceSpace space(2, 3, ProblemKind::Enumerated, 1);
  const auto faults2 = std::make_shared<FunctionVerifier>(
      space, [](const Problem&, Prefix p) { return p.size() < 2; }, "f2");
  const FiniteClass cls(space, {std::make_shared<AcceptAllVerifier>(space), faults2}, 1);
  CHECK(svpac_learn(cls, std::vector<LabeledTrace>{}).id == 0);
  const std::vector<LabeledTrace> s{{ProblemId{0}, {0, 1, 0}, TraceVerdict::fault_at(2)}};
  CHECK(svpac_learn(cls, s).id == 1);
  const std::vector<LabeledTrace> bad{{ProblemId{0}, {0, 1, 0}, TraceVerdict::fault_at(3)}};
  CHECK_THROWS_AS(svpac_learn(cls, bad), NoConsistentVerifier);
}

TEST_CASE("svpac_learn with a covering sample has zero loss everywhere") {
  RandomTableParams p;
  p.space = TraceSpace(2, 3, ProblemKind::Enumerated, 2);
  p.class_size = 16;
  p.support_size = 16;
  const auto inst = make_random_table_instance(p, 5);
  std::vector<LabeledTrace> sample;
  for (std::int64_t x = 0; x < 2; ++x) {
    for_each_trace(2, 3, [&](const Trace& t) { sample.push_back({ProblemId{x}, t, inst.truth->run(ProblemId{x}, t)}); });
  }
  const auto c = svpac_learn(*inst.cls, sample);
  for (const auto& s : sample) CHECK_FALSE(simple_loss(*c.verifier, *inst.truth, s.problem, s.trace));
}

TEST_CASE("tvpac_learn examples") {
  const TraceSpace space(3, 2, ProblemKind::Enumerated, 1);
  auto g = std::make_shared<GoldReasoner>(space, 1);
  g->add(ProblemId{0}, {{1, 2}});
  const FiniteClass cls(space, {std::make_shared<AcceptAllVerifier>(space), std::make_shared<TreeCharacteristicVerifier>(g)},
                        1);
  const std::vector<Problem> xs{ProblemId{0}};
  CHECK(tvpac_learn(cls, *g, xs).id == 1);

  const TraceSpace unary(1, 3, ProblemKind::Enumerated, 1);
  auto g1 = std::make_shared<GoldReasoner>(unary);
  g1->add(ProblemId{0}, {{0, 0, 0}});
  const FiniteClass c1(unary, {std::make_shared<AcceptAllVerifier>(unary)}, 0);
  CHECK(tvpac_learn(c1, *g1, xs).id == 0);

  // axiom subsets: gold uses steps {0, 2}, deviations cover step 1
  const TraceSpace s4(4, 2, ProblemKind::Enumerated, 1);
  auto ga = std::make_shared<GoldReasoner>(s4);
  std::vector<Trace> traces;
  for_each_trace(4, 2, [&](const Trace& t) {
    if (AxiomSubsetVerifier::accepts_mask(0b0101, t)) traces.push_back(t);
  });
  ga->add(ProblemId{0}, traces);
  const AxiomSubsetClass axioms(s4, 0b0101);
  CHECK(tvpac_learn(axioms, *ga, xs).id == 0b0101);
}

TEST_CASE("intersect_consistent_learn on a partition class") {
  const TraceSpace space(2, 4);
  auto cls = std::make_shared<PartitionClass>(space, 4, 3);
  // positives in cells 0 and 1 (ranks 0 and 1)
  const std::vector<ProblemTrace> pos{{ProblemId{0}, trace_from_rank(0, 4, 2)}, {ProblemId{0}, trace_from_rank(1, 4, 2)}};
  const auto h = intersect_consistent_learn(cls, pos);
  CHECK(h->base().member_ids == std::vector<std::uint64_t>{2, 3});
  for_each_trace(2, 4, [&](const Trace& t) {
    const auto c = cls->cell_of(t);
    CHECK(h->run(ProblemId{0}, t).is_accepted() == (c == 0 || c == 1));
  });
  const auto all = intersect_consistent_learn(cls, std::vector<ProblemTrace>{});
  CHECK(all->base().member_ids.size() == 4);
  // H_S = {h*}: behaves exactly like h*
  std::vector<ProblemTrace> three;
  for (std::uint64_t r = 0; r < 3; ++r) three.push_back({ProblemId{0}, trace_from_rank(r, 4, 2)});
  const auto only = intersect_consistent_learn(cls, three);
  CHECK(only->base().member_ids == std::vector<std::uint64_t>{3});
  CHECK(same_on_all_prefixes(*only, *cls->member(3), std::vector<Problem>{ProblemId{0}}));
}

TEST_CASE("Algorithm 1 grows monotonically and matches the closure on axiom subsets") {
  const auto inst = make_axiom_subset_instance(5, 2, 1, 0b10110);
  Rng rng(12);
  std::vector<ProblemTrace> pos;
  std::vector<Trace> prev;
  for (int i = 0; i < 12; ++i) {
    pos.push_back({ProblemId{0}, sample_positive(*inst.gold, ProblemId{0}, rng)});
    const auto h = intersect_consistent_learn(inst.cls, pos);
    const auto acc = enumerate_accepted(*h, ProblemId{0});
    CHECK(std::includes(acc.begin(), acc.end(), prev.begin(), prev.end()));
    prev = acc;
    const auto c = closure_learn(*inst.cls, pos);
    CHECK(same_on_all_prefixes(*h, *c, inst.dist.support()));
  }
}

TEST_CASE("closure_learn examples") {
  const TraceSpace space(4, 2);
  const AxiomSubsetClass cls(space);
  const std::vector<ProblemTrace> pos{{ProblemId{0}, {1, 3}}};
  CHECK(dynamic_cast<const AxiomSubsetVerifier&>(*closure_learn(cls, pos)).sigma() == 0b1010);
  CHECK(dynamic_cast<const AxiomSubsetVerifier&>(*closure_learn(cls, std::vector<ProblemTrace>{})).sigma() == 0);

  const std::size_t n = 4;
  const std::uint64_t truth = (std::uint64_t{1} << edge_id(n, 1, 2)) | (std::uint64_t{1} << edge_id(n, 2, 3));
  const GraphPathClass graphs(n, 3, truth);
  const GraphProblem x{0, {edge_id(n, 0, 1)}};
  const std::vector<ProblemTrace> gp{{x, {edge_id(n, 0, 1), edge_id(n, 1, 2), edge_id(n, 2, 3)}}};
  const auto h = closure_learn(graphs, gp);
  CHECK(dynamic_cast<const GraphPathVerifier&>(*h).extra_edges() == truth);
  CHECK(same_on_all_prefixes(*h, *graphs.member(truth), std::vector<Problem>{x}));
}

TEST_CASE("generate_from_verifier examples") {
  const TraceSpace space(2, 2, ProblemKind::Enumerated, 1);
  auto g = std::make_shared<GoldReasoner>(space);
  g->add(ProblemId{0}, {{0, 1}});
  const TreeCharacteristicVerifier tc(g);
  std::size_t evals = 0;
  CHECK(generate_from_verifier(tc, ProblemId{0}, 2, 2, &evals) == Trace{0, 1});
  CHECK(evals <= 4);

  const TraceSpace t1(2, 1, ProblemKind::Enumerated, 1);
  auto g1 = std::make_shared<GoldReasoner>(t1);
  g1->add(ProblemId{0}, {{1}});
  CHECK(generate_from_verifier(TreeCharacteristicVerifier(g1), ProblemId{0}, 2, 1, &evals) == Trace{1});
  CHECK(evals == 2);

  try {
    generate_from_verifier(RejectAllVerifier(space), ProblemId{0}, 2, 2);
    FAIL("expected a dead end");
  } catch (const GenerationDeadEnd& e) {
    CHECK(e.depth() == 1);
  }
}

TEST_CASE("online learner: orthogonal hand simulation") {
  const int d = 3;
  OnlineSubspaceLearner l(SubspaceVariant::Orthogonal, d);
  const Eigen::MatrixXd hstar = col(e(d, 2));
  const auto r1 = l.step(col(e(d, 0)), e(d, 2), hstar);
  CHECK(r1.prediction == Verdict::No);
  CHECK(r1.mistake);
  CHECK(in_span(l.basis(), e(d, 2)));
  const auto r2 = l.step(col(e(d, 0)), e(d, 0) + e(d, 2), hstar);
  CHECK(r2.prediction == Verdict::Yes);
  CHECK_FALSE(r2.mistake);
  CHECK(l.mistakes() == 1);
}

TEST_CASE("online learner: x1 in span(x0) is always YES") {
  Rng rng(77);
  for (auto variant : {SubspaceVariant::Orthogonal, SubspaceVariant::General}) {
    OnlineSubspaceLearner l(variant, 4);
    for (int i = 0; i < 20; ++i) {
      Eigen::MatrixXd x0(4, 2);
      for (int r = 0; r < 4; ++r) {
        x0(r, 0) = rng.normal();
        x0(r, 1) = rng.normal();
      }
      const Eigen::VectorXd x1 = 0.3 * x0.col(0) - 1.7 * x0.col(1);
      CHECK(l.predict(x0, x1) == Verdict::Yes);
    }
  }
  OnlineSubspaceLearner l(SubspaceVariant::General, 3);
  CHECK_THROWS_AS(l.predict(Eigen::MatrixXd::Zero(4, 1), Eigen::VectorXd::Zero(3)), InvalidInput);
}

TEST_CASE("online learner: adversarial general stream in d = 4 within d + 1") {
  for (const auto& s : adversarial_online_streams()) {
    const auto o = run_online_stream(s);
    CHECK_MESSAGE(o.within_bound(), s.name);
  }
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = random_online_stream(SubspaceVariant::General, 4, 50, rng);
    OnlineSubspaceLearner l(SubspaceVariant::General, 4);
    for (const auto& [x0, x1] : s.steps) {
      // brute-force truth: least-squares residual against [x0 h*]
      const Eigen::MatrixXd a = hstack(x0, s.hstar);
      const Eigen::VectorXd res = x1 - a * a.completeOrthogonalDecomposition().solve(x1);
      l.step(x0, x1, res.norm() <= 1e-6 * std::max(1.0, x1.norm()));
    }
    CHECK(l.mistakes() <= 5);
  }
}

TEST_CASE("subspace helpers") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 0, 0;
  Eigen::MatrixXd b(3, 2);
  b << 0, 0, 1, 0, 0, 1;
  const auto i = subspace_intersection(a, b);
  CHECK(i.cols() == 1);
  CHECK(in_span(i, e(3, 1)));
  CHECK(orthonormal_basis(hstack(a, a)).cols() == 2);
  CHECK_FALSE(in_span(a, e(3, 2)));
}

TEST_CASE("agnostic learners") {
  const TraceSpace space(2, 2, ProblemKind::Enumerated, 1);
  const auto accept = std::make_shared<AcceptAllVerifier>(space);
  const auto only0 = std::make_shared<AxiomSubsetVerifier>(space, 0b01);
  const FiniteClass cls(space, {only0, accept}, 1);
  CHECK(agnostic_svpac_learn(cls, std::vector<AgnosticExample>{}).id == 0);
  // empirical losses (3, 1) on ten examples
  using V = Verdict;
  std::vector<AgnosticExample> s;
  for (int i = 0; i < 3; ++i) s.push_back({ProblemId{0}, {0, 1}, {V::Yes, V::Yes}});
  s.push_back({ProblemId{0}, {1, 1}, {V::No, V::No}});
  for (int i = 0; i < 6; ++i) s.push_back({ProblemId{0}, {0, 0}, {V::Yes, V::Yes}});
  std::size_t loss0 = 0;
  for (const auto& x : s) loss0 += agnostic_loss(*only0, x.problem, x.trace, x.labels);
  CHECK(loss0 == 3);
  const auto c = agnostic_svpac_learn(cls, s);
  CHECK(c.id == 1);
  CHECK(c.empirical_loss == doctest::Approx(0.1));

  // realizable: agrees with svpac_learn
  std::vector<LabeledTrace> labeled;
  std::vector<AgnosticExample> agn;
  for_each_trace(2, 2, [&](const Trace& t) {
    labeled.push_back({ProblemId{0}, t, TraceVerdict::accepted()});
    agn.push_back({ProblemId{0}, t, {V::Yes, V::Yes}});
  });
  CHECK(agnostic_svpac_learn(cls, agn).id == svpac_learn(cls, labeled).id);
  CHECK(agnostic_svpac_learn(cls, agn).empirical_loss == 0.0);
}

TEST_CASE("agnostic_tvpac_learn") {
  const TraceSpace space(2, 2, ProblemKind::Enumerated, 20);
  auto g = std::make_shared<GoldReasoner>(space);
  for (std::int64_t x = 0; x < 20; ++x) g->add(ProblemId{x}, {{0, 1}});
  const auto tc = std::make_shared<TreeCharacteristicVerifier>(g);
  // fails only on problem 7
  const auto almost = std::make_shared<FunctionVerifier>(
      space, [tc](const Problem& x, Prefix p) { return std::get<ProblemId>(x).value != 7 && tc->accepts(x, p); },
      "almost");
  const auto accept = std::make_shared<AcceptAllVerifier>(space);
  const auto problems = enumerated_problems(20);
  const FiniteClass cls(space, {accept, almost}, std::nullopt);
  const auto c = agnostic_tvpac_learn(cls, *g, problems);
  CHECK(c.id == 1);
  CHECK(c.empirical_loss == doctest::Approx(0.05));
  const FiniteClass bad(space, {accept, std::make_shared<RejectAllVerifier>(space)}, std::nullopt);
  const auto b = agnostic_tvpac_learn(bad, *g, problems);
  CHECK(b.id == 0);
  CHECK(b.empirical_loss == 1.0);
  const FiniteClass good(space, {accept, tc}, 1);
  CHECK(agnostic_tvpac_learn(good, *g, problems).empirical_loss == 0.0);
}
