#include "cotv/gold.hpp"

#include <algorithm>
#include <numeric>

#include "cotv/enumeration.hpp"

namespace cotv {

TraceTree::TraceTree(Problem root, std::span<const Trace> traces) : root_(std::move(root)) {
  for (const Trace& trace : traces) {
    std::size_t node = 0;
    bool fresh = false;
    for (Step s : trace) {
      auto& kids = nodes_[node].children;
      auto it = std::lower_bound(kids.begin(), kids.end(), s,
                                 [](const auto& c, Step v) { return c.first < v; });
      if (it != kids.end() && it->first == s) {
        node = it->second;
        continue;
      }
      const std::size_t fresh_index = nodes_.size();
      const std::size_t depth = nodes_[node].depth + 1;
      kids.insert(it, {s, fresh_index});
      nodes_.push_back(Node{s, depth, node, {}});
      node = fresh_index;
      fresh = true;
    }
    if (!fresh) {
      throw InvalidInput("duplicate or prefix-contained trace in trace tree");
    }
  }
  leaves_ = static_cast<std::size_t>(std::count_if(
      nodes_.begin() + 1, nodes_.end(), [](const Node& n) { return n.children.empty(); }));
}

std::optional<std::size_t> TraceTree::child(std::size_t node, Step step) const {
  for (const auto& [s, idx] : nodes_[node].children) {
    if (s == step) return idx;
    if (s > step) break;
  }
  return std::nullopt;
}

std::size_t TraceTree::matched_depth(Prefix trace) const {
  std::size_t node = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto next = child(node, trace[i]);
    if (!next) return i;
    node = *next;
  }
  return trace.size();
}

Trace TraceTree::path(std::size_t node) const {
  Trace out(nodes_[node].depth);
  for (std::size_t i = out.size(); i > 0; --i) {
    out[i - 1] = nodes_[node].step;
    node = nodes_[node].parent;
  }
  return out;
}

GoldReasoner::GoldReasoner(TraceSpace space, std::optional<std::size_t> k_bound)
    : space_(space), k_bound_(k_bound) {}

void GoldReasoner::add(Problem problem, std::vector<Trace> traces, std::vector<double> weights) {
  space_.validate_problem(problem);
  if (traces.empty()) {
    throw InvalidInput("g(x) must be nonempty for problems in the support");
  }
  if (k_bound_ && traces.size() > *k_bound_) {
    throw InvalidInput("|g(x)| = " + std::to_string(traces.size()) + " exceeds k = " +
                       std::to_string(*k_bound_));
  }
  if (weights.empty()) {
    weights.assign(traces.size(), 1.0);
  }
  if (weights.size() != traces.size()) {
    throw InvalidInput("gold weights and traces differ in length");
  }
  for (const Trace& t : traces) {
    space_.validate_prefix(t);
    if (t.size() != space_.horizon) {
      throw InvalidInput("gold traces must have length exactly T");
    }
  }
  std::vector<std::size_t> order(traces.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return traces[a] < traces[b]; });
  GoldEntry entry;
  double total = 0.0;
  for (std::size_t i : order) {
    if (!entry.traces.empty() && entry.traces.back() == traces[i]) {
      throw InvalidInput("duplicate gold trace " + format_trace(traces[i]));
    }
    if (!(weights[i] > 0.0)) {
      throw InvalidInput("gold weights must be positive");
    }
    entry.traces.push_back(std::move(traces[i]));
    entry.weights.push_back(weights[i]);
    total += weights[i];
  }
  for (double& w : entry.weights) w /= total;
  entry.tree = TraceTree(problem, entry.traces);
  entry.sampler = WeightedSampler(entry.weights);
  entries_.insert_or_assign(std::move(problem), std::move(entry));
}

const GoldEntry& GoldReasoner::entry(const Problem& problem) const {
  const auto it = entries_.find(problem);
  if (it == entries_.end()) {
    throw ProblemNotInSupport("problem " + format_problem(problem) + " is not in the gold support");
  }
  return it->second;
}

std::vector<Problem> GoldReasoner::problems() const {
  std::vector<Problem> out;
  out.reserve(entries_.size());
  for (const auto& [p, e] : entries_) out.push_back(p);
  return out;
}

TraceTree build_trace_tree(const GoldReasoner& gold, const Problem& problem) {
  return gold.entry(problem).tree;
}

std::vector<AugmentedExample> generate_negatives(const TraceTree& tree, std::size_t alphabet_size) {
  std::vector<AugmentedExample> out;
  const auto& nodes = tree.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    out.push_back({tree.root(), tree.path(i), Verdict::Yes});
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].children.empty()) continue;
    Trace prefix = tree.path(i);
    prefix.push_back(0);
    for (Step s = 0; s < alphabet_size; ++s) {
      if (tree.child(i, s)) continue;
      prefix.back() = s;
      out.push_back({tree.root(), prefix, Verdict::No});
    }
  }
  return out;
}

std::size_t deviation_count(const TraceTree& tree, std::size_t alphabet_size) {
  std::size_t count = 0;
  for (const auto& node : tree.nodes()) {
    if (!node.children.empty()) count += alphabet_size - node.children.size();
  }
  return count;
}

Trace sample_positive(const GoldReasoner& gold, const Problem& problem, Rng& rng) {
  const GoldEntry& e = gold.entry(problem);
  return e.traces[e.sampler.sample(rng)];
}

namespace {

ProblemStatus exhaustive_status(const Verifier& h, const GoldEntry& e, const Problem& problem,
                                const TraceSpace& space) {
  ProblemStatus status{0.0, true};
  std::size_t gold_index = 0;
  const std::size_t horizon = space.horizon;
  for_each_trace(space.alphabet_size, horizon, [&](const Trace& trace) {
    const TraceVerdict v = h.run(problem, trace);
    const std::size_t accepted_len = v.is_accepted() ? horizon : v.fault_index() - 1;
    const std::size_t tree_depth = e.tree.matched_depth(trace);
    if (accepted_len > tree_depth) {
      status.sound = false;
    }
    if (tree_depth == horizon) {
      const double w = e.weights[gold_index++];
      if (v.is_accepted()) status.complete_fraction += w;
    }
  });
  return status;
}

ProblemStatus deviation_status(const Verifier& h, const GoldEntry& e, const Problem& problem,
                               const TraceSpace& space) {
  ProblemStatus status{0.0, true};
  const auto& nodes = e.tree.nodes();
  std::size_t leaf_index = 0;
  Trace prefix;
  prefix.reserve(space.horizon);
  // Children are visited in ascending step order, so leaves come out in the
  // same lexicographic order as the exhaustive scan and the sums match bit for bit.
  auto visit = [&](auto&& self, std::size_t node, bool run_ok) -> void {
    if (nodes[node].children.empty()) {
      const double w = e.weights[leaf_index++];
      if (run_ok) status.complete_fraction += w;
      return;
    }
    prefix.push_back(0);
    if (run_ok) {
      for (Step s = 0; s < space.alphabet_size; ++s) {
        if (e.tree.child(node, s)) continue;
        prefix.back() = s;
        if (h.accepts(problem, prefix)) status.sound = false;
      }
    }
    for (const auto& [s, child] : nodes[node].children) {
      prefix.back() = s;
      const bool ok = run_ok && h.accepts(problem, prefix);
      self(self, child, ok);
    }
    prefix.pop_back();
  };
  visit(visit, 0, true);
  return status;
}

}  // namespace

ProblemStatus per_problem_status(const Verifier& verifier, const GoldReasoner& gold,
                                 const Problem& problem, StatusMode mode, std::uint64_t budget) {
  const GoldEntry& e = gold.entry(problem);
  const TraceSpace& space = gold.space();
  if (mode == StatusMode::Exhaustive) {
    space.full_trace_count(budget);
    return exhaustive_status(verifier, e, problem, space);
  }
  return deviation_status(verifier, e, problem, space);
}

TreeCharacteristicVerifier::TreeCharacteristicVerifier(std::shared_ptr<const GoldReasoner> gold)
    : Verifier(gold->space()), gold_(std::move(gold)) {}

bool TreeCharacteristicVerifier::accepts(const Problem& problem, Prefix prefix) const {
  if (!gold_->contains(problem)) return false;
  return gold_->entry(problem).tree.contains_prefix(prefix);
}

}  // namespace cotv
