#include <doctest.h>

#include <algorithm>
#include <set>

#include "cotv/enumeration.hpp"
#include "cotv/rng.hpp"
#include "cotv/verifier_classes.hpp"

using namespace cotv;

namespace {

// Accepted-set oracle written against accepts() only.
std::vector<Trace> brute_accepted(const Verifier& h, const Problem& x, std::size_t alphabet, std::size_t horizon) {
  std::vector<Trace> out;
  for_each_trace(alphabet, horizon, [&](const Trace& t) {
    for (std::size_t j = 1; j <= t.size(); ++j) {
      if (!h.accepts(x, Prefix(t).first(j))) return;
    }
    out.push_back(t);
  });
  return out;
}

bool same_prefix_behavior(const Verifier& a, const Verifier& b, const Problem& x, std::size_t alphabet,
                          std::size_t horizon) {
  for (std::size_t len = 1; len <= horizon; ++len) {
    bool same = true;
    for_each_trace(alphabet, len, [&](const Trace& t) { same = same && a.accepts(x, t) == b.accepts(x, t); });
    if (!same) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("structured member examples") {
  const std::size_t n = 4;
  const TraceSpace gspace(complete_graph_edges(n), 2, ProblemKind::Graph);
  const GraphPathVerifier g(gspace, n, std::uint64_t{1} << edge_id(n, 1, 2));
  const GraphProblem x{0, {edge_id(n, 0, 1)}};
  CHECK(g.accepts(x, Trace{edge_id(n, 0, 1), edge_id(n, 1, 2)}));
  CHECK_FALSE(g.accepts(x, Trace{edge_id(n, 0, 2)}));
  CHECK(edge_endpoints(n, edge_id(n, 2, 3)) == std::pair<std::uint32_t, std::uint32_t>{2, 3});

  const TraceSpace rspace(3, 3, ProblemKind::RealScalar);
  const LinearThresholdVerifier lt(rspace, 0.0, {1.0, 0.0, 0.0});
  for_each_trace(3, 2, [&](const Trace& t) { CHECK_FALSE(lt.accepts(-1.0, t)); });
}

TEST_CASE("partition class: each member rejects exactly its cell") {
  const TraceSpace space(2, 5);
  const PartitionClass cls(space, 6, 2);
  CHECK(cls.size() == 6u);
  std::vector<std::uint64_t> counts(6, 0);
  for_each_trace(2, 5, [&](const Trace& t) {
    const auto c = cls.cell_of(t);
    ++counts[c];
    for (std::size_t i = 0; i < 6; ++i) CHECK(cls.accepts(i, ProblemId{0}, t) == (i != c));
    CHECK(cls.accepts(c, ProblemId{0}, Prefix(t).first(4)));
  });
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(counts[i] == cls.cell_size(i));
    sum += counts[i];
  }
  CHECK(sum == 32);
  // the hidden member is the only sound one for the stipulated truth C_{h_{i*}}
  const std::vector<Trace> truth = enumerate_accepted(cls, 2, ProblemId{0});
  const std::set<Trace> truth_set(truth.begin(), truth.end());
  int sound = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto acc = enumerate_accepted(cls, i, ProblemId{0});
    sound += std::all_of(acc.begin(), acc.end(), [&](const Trace& t) { return truth_set.count(t) != 0; });
  }
  CHECK(sound == 1);
}

TEST_CASE("enumerate_accepted examples") {
  const TraceSpace s23(2, 3);
  CHECK(enumerate_accepted(AcceptAllVerifier(s23), ProblemId{0}).size() == 8);
  const TraceSpace s22(2, 2);
  CHECK(enumerate_accepted(AxiomSubsetVerifier(s22, 0b1), ProblemId{0}) == std::vector<Trace>{{0, 0}});
  const TraceSpace real(2, 2, ProblemKind::RealScalar);
  const IntervalVerifier iv(real, 1.0, 3.0);
  CHECK(enumerate_accepted(iv, 2.0) == std::vector<Trace>{{0, 0}, {0, 1}, {1, 0}});
  CHECK(enumerate_accepted(iv, 2.0) == brute_accepted(iv, 2.0, 2, 2));
  CHECK_THROWS_AS(enumerate_accepted(AcceptAllVerifier(TraceSpace(4, 12)), ProblemId{0}, 1000), BudgetExceeded);
}

TEST_CASE("enumerate_accepted matches the brute-force oracle on random tables") {
  Rng rng(21);
  const TraceSpace space(3, 4, ProblemKind::Enumerated, 2);
  for (int rep = 0; rep < 5; ++rep) {
    auto h = TableVerifier::tabulate(space, [&](std::size_t, Prefix) { return rng.bernoulli(0.75); }, "t");
    for (std::int64_t p = 0; p < 2; ++p) {
      CHECK(enumerate_accepted(*h, ProblemId{p}) == brute_accepted(*h, ProblemId{p}, 3, 4));
    }
  }
}

TEST_CASE("closure examples") {
  const TraceSpace space(4, 2);
  const AxiomSubsetClass axioms(space);
  const std::vector<ProblemTrace> pos{{ProblemId{0}, {1, 3}}, {ProblemId{0}, {3, 3}}};
  const auto c = closure_of_positives(axioms, pos);
  CHECK(dynamic_cast<const AxiomSubsetVerifier&>(*c).sigma() == 0b1010);
  const auto empty = closure_of_positives(axioms, std::vector<ProblemTrace>{});
  CHECK(dynamic_cast<const AxiomSubsetVerifier&>(*empty).sigma() == 0);

  const std::size_t n = 3;
  const GraphPathClass graphs(n, 2);
  const GraphProblem x{0, {edge_id(n, 0, 1)}};
  const std::vector<ProblemTrace> gp{{x, {edge_id(n, 0, 1), edge_id(n, 1, 2)}}};
  const auto gc = closure_of_positives(graphs, gp);
  CHECK(dynamic_cast<const GraphPathVerifier&>(*gc).extra_edges() == (std::uint64_t{1} << edge_id(n, 1, 2)));

  const FiniteClass finite(space, {std::make_shared<AcceptAllVerifier>(space)}, 0);
  CHECK_THROWS_AS(closure_of_positives(finite, pos), ClosureUnsupported);
}

TEST_CASE("axiom subset and graph path classes are intersection-closed") {
  const TraceSpace space(4, 3);
  const AxiomSubsetClass cls(space);
  for (std::uint64_t a = 0; a < 16; ++a) {
    for (std::uint64_t b = 0; b < 16; ++b) {
      const auto ha = cls.member(a);
      const auto hb = cls.member(b);
      const FunctionVerifier both(
          space, [&](const Problem& x, Prefix p) { return ha->accepts(x, p) && hb->accepts(x, p); }, "and");
      REQUIRE(same_prefix_behavior(both, *cls.member(a & b), ProblemId{0}, 4, 3));
    }
  }
  const std::size_t n = 4;
  const GraphPathClass graphs(n, 2);
  const GraphProblem x{0, {edge_id(n, 0, 1)}};
  Rng rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const std::uint64_t a = rng.uniform_index(64);
    const std::uint64_t b = rng.uniform_index(64);
    const auto ha = graphs.member(a);
    const auto hb = graphs.member(b);
    const FunctionVerifier both(
        graphs.space(), [&](const Problem& p, Prefix s) { return ha->accepts(p, s) && hb->accepts(p, s); }, "and");
    REQUIRE(same_prefix_behavior(both, *graphs.member(a & b), x, complete_graph_edges(n), 2));
  }
}

TEST_CASE("closure minimality on axiom subsets") {
  const TraceSpace space(4, 2);
  const AxiomSubsetClass cls(space);
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<ProblemTrace> pos;
    const auto count = rng.uniform_index(4);
    for (std::uint64_t i = 0; i < count; ++i) {
      pos.push_back({ProblemId{0}, {static_cast<Step>(rng.uniform_index(4)), static_cast<Step>(rng.uniform_index(4))}});
    }
    const auto c = closure_of_positives(cls, pos);
    for (const auto& p : pos) REQUIRE(c->run(p.problem, p.trace).is_accepted());
    const auto c_acc = enumerate_accepted(*c, ProblemId{0});
    for (std::uint64_t id = 0; id < 16; ++id) {
      bool accepts_all = true;
      for (const auto& p : pos) accepts_all = accepts_all && cls.run(id, p.problem, p.trace).is_accepted();
      if (!accepts_all) continue;
      const auto acc = enumerate_accepted(cls, id, ProblemId{0});
      REQUIRE(std::includes(acc.begin(), acc.end(), c_acc.begin(), c_acc.end()));
    }
  }
}

TEST_CASE("interval closure over all prefixes") {
  const TraceSpace space(4, 2, ProblemKind::RealScalar);
  const IntervalClass cls(space);
  // distances on prefixes: 5−1 = 4, 5−3 = 2; 4−2 = 2
  const std::vector<ProblemTrace> pos{{5.0, {1, 2}}, {4.0, {2}}};
  const auto c = closure_of_positives(cls, pos);
  const auto& iv = dynamic_cast<const IntervalVerifier&>(*c);
  CHECK(iv.r1() == doctest::Approx(2.0));
  CHECK(iv.r2() == doctest::Approx(4.0));
  CHECK(closure_of_positives(cls, std::vector<ProblemTrace>{})->describe() == "reject_all");
}

TEST_CASE("behavior dedup keeps the truth") {
  const TraceSpace space(2, 2, ProblemKind::Enumerated, 1);
  std::vector<VerifierHandle> members{std::make_shared<AcceptAllVerifier>(space),
                                      std::make_shared<AxiomSubsetVerifier>(space, 0b11),
                                      std::make_shared<RejectAllVerifier>(space)};
  const FiniteClass cls(space, members, 1);
  const auto problems = enumerated_problems(1);
  const auto d = deduplicate_by_behavior(cls, problems);
  CHECK(d->size() == 2u);
  CHECK(d->truth_index() == 0u);
  CHECK_THROWS_AS(class_evaluate(cls, 5, ProblemId{0}, Trace{0}), InvalidInput);
}
