#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "cotv/enumeration.hpp"
#include "cotv/gold.hpp"
#include "cotv/rng.hpp"
#include "cotv/scenarios.hpp"

using namespace cotv;

namespace {

std::shared_ptr<GoldReasoner> single(const TraceSpace& space, std::vector<Trace> traces,
                                     std::vector<double> weights = {}) {
  auto g = std::make_shared<GoldReasoner>(space);
  g->add(ProblemId{0}, std::move(traces), std::move(weights));
  return g;
}

// Exhaustive status oracle written from the definitions: completeness is the g-mass
// accepted under run semantics; soundness means no run-accepted prefix leaves the tree.
ProblemStatus oracle_status(const Verifier& h, const GoldReasoner& g, const Problem& x) {
  const auto& e = g.entry(x);
  ProblemStatus s;
  s.sound = true;
  for (std::size_t i = 0; i < e.traces.size(); ++i) {
    if (h.run(x, e.traces[i]).is_accepted()) s.complete_fraction += e.weights[i];
  }
  std::set<Trace> tree;
  for (const auto& t : e.traces) {
    for (std::size_t j = 1; j <= t.size(); ++j) tree.insert(Trace(t.begin(), t.begin() + j));
  }
  const auto& space = g.space();
  for (std::size_t len = 1; len <= space.horizon; ++len) {
    for_each_trace(space.alphabet_size, len, [&](const Trace& p) {
      if (tree.count(p)) return;
      if (h.run(x, p).is_accepted()) s.sound = false;
    });
  }
  return s;
}

}  // namespace

TEST_CASE("trace tree shapes") {
  const TraceSpace space(3, 2);
  const TraceTree path(ProblemId{0}, std::vector<Trace>{{0, 1}});
  CHECK(path.leaf_count() == 1);
  CHECK(path.nodes().size() == 3);
  const TraceTree fork(ProblemId{0}, std::vector<Trace>{{0, 1}, {0, 2}});
  CHECK(fork.leaf_count() == 2);
  CHECK(fork.nodes().size() == 4);
  CHECK(fork.nodes()[0].children.size() == 1);
  const TraceTree three(ProblemId{0}, std::vector<Trace>{{0, 0}, {1, 1}, {2, 2}});
  CHECK(three.nodes()[0].children.size() == 3);
  CHECK(three.contains_prefix(Trace{1}));
  CHECK_FALSE(three.contains_prefix(Trace{1, 0}));
  CHECK(three.matched_depth(Trace{1, 0}) == 1);
  CHECK_THROWS_AS(TraceTree(ProblemId{0}, std::vector<Trace>{{0, 1}, {0, 1}}), InvalidInput);
}

TEST_CASE("gold reasoner validation") {
  GoldReasoner g(TraceSpace(2, 2), 2);
  CHECK_THROWS_AS(g.add(ProblemId{0}, {}), InvalidInput);
  CHECK_THROWS_AS(g.add(ProblemId{0}, {{0}}), InvalidInput);
  CHECK_THROWS_AS(g.add(ProblemId{0}, {{0, 0}, {0, 1}, {1, 1}}), InvalidInput);
  CHECK_THROWS_AS(g.add(ProblemId{0}, {{0, 0}, {0, 1}}, {1.0, -1.0}), InvalidInput);
  g.add(ProblemId{0}, {{1, 1}, {0, 0}}, {3.0, 1.0});
  CHECK(g.traces(ProblemId{0}).front() == Trace{0, 0});
  CHECK(g.entry(ProblemId{0}).weights.front() == doctest::Approx(0.25));
  CHECK_THROWS_AS(g.entry(ProblemId{1}), ProblemNotInSupport);
}

TEST_CASE("generate_negatives counts") {
  const TraceSpace s33(3, 3);
  const auto path = build_trace_tree(*single(s33, {{0, 1, 2}}), ProblemId{0});
  const auto ex = generate_negatives(path, 3);
  std::size_t no = 0;
  for (const auto& e : ex) no += e.label == Verdict::No;
  CHECK(no == 6);
  CHECK(deviation_count(path, 3) == 6);

  const TraceSpace s1(1, 4);
  const auto one = build_trace_tree(*single(s1, {{0, 0, 0, 0}}), ProblemId{0});
  CHECK(deviation_count(one, 1) == 0);

  const TraceSpace s22(2, 2);
  const auto full = build_trace_tree(*single(s22, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}), ProblemId{0});
  CHECK(deviation_count(full, 2) == 0);
}

TEST_CASE("negatives: exact count, k·T·|Σ| bound and first-deviation property") {
  Rng rng(31);
  GoldTreeParams p;
  p.space = TraceSpace(3, 4, ProblemKind::Enumerated, 10);
  p.k_min = 1;
  p.k_max = 4;
  auto g = make_random_gold(p, rng);
  for (const auto& x : g->problems()) {
    const auto& e = g->entry(x);
    const auto tree = build_trace_tree(*g, x);
    const auto ex = generate_negatives(tree, 3);
    std::size_t expected = 0;
    for (const auto& node : tree.nodes()) {
      if (!node.children.empty()) expected += 3 - node.children.size();
    }
    std::size_t no = 0;
    for (const auto& a : ex) {
      if (a.label == Verdict::Yes) {
        CHECK(tree.contains_prefix(a.prefix));
        continue;
      }
      ++no;
      // no full extension of a NO prefix is in g(x)
      const std::size_t left = 4 - a.prefix.size();
      if (left == 0) {
        CHECK(std::find(e.traces.begin(), e.traces.end(), a.prefix) == e.traces.end());
      } else {
        for_each_trace(3, left, [&](const Trace& tail) {
          Trace full = a.prefix;
          full.insert(full.end(), tail.begin(), tail.end());
          CHECK(std::find(e.traces.begin(), e.traces.end(), full) == e.traces.end());
        });
      }
    }
    CHECK(no == expected);
    CHECK(no <= e.traces.size() * 4 * 3);
  }
}

TEST_CASE("sample_positive frequencies") {
  const TraceSpace space(2, 2);
  Rng rng(17);
  auto g1 = single(space, {{1, 0}});
  for (int i = 0; i < 100; ++i) REQUIRE(sample_positive(*g1, ProblemId{0}, rng) == Trace{1, 0});

  auto g4 = single(space, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  std::map<Trace, int> freq;
  for (int i = 0; i < 10000; ++i) ++freq[sample_positive(*g4, ProblemId{0}, rng)];
  for (const auto& [t, c] : freq) CHECK((c / 1e4 >= 0.22 && c / 1e4 <= 0.28));

  auto gw = single(space, {{0, 0}, {1, 1}}, {0.9, 0.1});
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += sample_positive(*gw, ProblemId{0}, rng) == Trace{0, 0};
  CHECK(std::abs(first / 1e4 - 0.9) <= 0.02);
}

TEST_CASE("per_problem_status examples") {
  const TraceSpace space(3, 3);
  auto g = single(space, {{0, 1, 2}, {0, 2, 1}});
  const TreeCharacteristicVerifier tc(g);
  for (auto mode : {StatusMode::Exhaustive, StatusMode::Deviation}) {
    const auto a = per_problem_status(tc, *g, ProblemId{0}, mode);
    CHECK(a.sound);
    CHECK(a.complete_fraction == 1.0);
    const auto b = per_problem_status(AcceptAllVerifier(space), *g, ProblemId{0}, mode);
    CHECK_FALSE(b.sound);
    CHECK(b.complete_fraction == 1.0);
    // rejects gold trace (0,2,1) at its last step and everything off the tree
    const FunctionVerifier half(
        space, [&](const Problem& x, Prefix p) { return tc.accepts(x, p) && !(p.size() == 3 && p[1] == 2); }, "half");
    const auto c = per_problem_status(half, *g, ProblemId{0}, mode);
    CHECK(c.sound);
    CHECK(c.complete_fraction == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(per_problem_status(tc, *g, ProblemId{0}, StatusMode::Exhaustive, 10), BudgetExceeded);
}

TEST_CASE("both status modes agree with the definitional oracle") {
  Rng rng(4242);
  for (int rep = 0; rep < 300; ++rep) {
    const StatusPair pair = random_status_pair(rng, 256);
    const Problem x = ProblemId{0};
    const auto oracle = oracle_status(*pair.verifier, *pair.gold, x);
    const auto ex = per_problem_status(*pair.verifier, *pair.gold, x, StatusMode::Exhaustive);
    const auto dev = per_problem_status(*pair.verifier, *pair.gold, x, StatusMode::Deviation);
    REQUIRE(ex.sound == oracle.sound);
    REQUIRE(ex.complete_fraction == doctest::Approx(oracle.complete_fraction).epsilon(1e-12));
    REQUIRE(ex == dev);
  }
}
