#include "cotv/verifier_classes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace cotv {

namespace {

std::string format_mask(std::uint64_t mask, std::size_t width) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < width; ++i) {
    if ((mask >> i) & 1u) {
      out += (first ? "" : ",") + std::to_string(i);
      first = false;
    }
  }
  return out + "}";
}

std::uint64_t low_mask(std::size_t width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

std::uint64_t problem_edge_mask(const Problem& problem) {
  std::uint64_t mask = 0;
  for (Step e : std::get<GraphProblem>(problem).edges) {
    mask |= std::uint64_t{1} << e;
  }
  return mask;
}

}  // namespace

// ---------------------------------------------------------------------------
// TableVerifier

TableVerifier::TableVerifier(TraceSpace space, std::vector<std::uint64_t> bits, std::string name)
    : Verifier(space), bits_(std::move(bits)), name_(std::move(name)) {
  if (space.problem_kind != ProblemKind::Enumerated || space.problem_count == 0) {
    throw InvalidInput("table verifiers need a finite enumerated problem space");
  }
  indexer_ = PrefixIndexer(space.alphabet_size, space.horizon, kDefaultEnumerationBudget);
  stride_ = indexer_.size();
  if (bits_.size() != (space.problem_count * stride_ + 63) / 64) {
    throw InvalidInput("table size does not match the trace space");
  }
}

std::size_t TableVerifier::problem_index(const Problem& problem) const {
  const auto* id = std::get_if<ProblemId>(&problem);
  if (id == nullptr || id->value < 0 ||
      static_cast<std::uint64_t>(id->value) >= space().problem_count) {
    throw InvalidInput("table verifier: unknown problem " + format_problem(problem));
  }
  return static_cast<std::size_t>(id->value);
}

bool TableVerifier::accepts(const Problem& problem, Prefix prefix) const {
  return bit(problem_index(problem), indexer_.index(prefix));
}

TraceVerdict TableVerifier::run(const Problem& problem, Prefix trace) const {
  const std::size_t p = problem_index(problem);
  const std::uint64_t alphabet = space().alphabet_size;
  std::uint64_t rank = 0;
  for (std::size_t j = 1; j <= trace.size(); ++j) {
    rank = rank * alphabet + trace[j - 1];
    if (!bit(p, indexer_.index_of_rank(j, rank))) {
      return TraceVerdict::fault_at(j);
    }
  }
  return TraceVerdict::accepted();
}

// ---------------------------------------------------------------------------
// IntervalVerifier

IntervalVerifier::IntervalVerifier(TraceSpace space, double r1, double r2)
    : Verifier(space), r1_(r1), r2_(r2) {
  if (space.problem_kind != ProblemKind::RealScalar) {
    throw InvalidInput("interval verifiers need a real-valued problem space");
  }
  if (!(r1 >= 0.0) || !(r2 >= r1)) {
    throw InvalidInput("interval verifier needs 0 <= r1 <= r2");
  }
}

double IntervalVerifier::distance(const Problem& problem, Prefix prefix) {
  double d = std::get<double>(problem);
  for (Step s : prefix) {
    d -= static_cast<double>(s);
  }
  return d;
}

bool IntervalVerifier::accepts(const Problem& problem, Prefix prefix) const {
  const double d = distance(problem, prefix);
  return d >= r1_ - kThresholdTolerance && d <= r2_ + kThresholdTolerance;
}

std::string IntervalVerifier::describe() const {
  std::ostringstream os;
  os << "interval[" << r1_ << "," << r2_ << "]";
  return os.str();
}

// ---------------------------------------------------------------------------
// LinearThresholdVerifier

LinearThresholdVerifier::LinearThresholdVerifier(TraceSpace space, double w0, std::vector<double> w)
    : Verifier(space), w0_(w0), w_(std::move(w)) {
  if (space.problem_kind != ProblemKind::RealScalar) {
    throw InvalidInput("linear threshold verifiers need a real-valued problem space");
  }
  if (w_.empty()) {
    throw InvalidInput("linear threshold verifier needs d >= 1");
  }
}

bool LinearThresholdVerifier::accepts(const Problem& problem, Prefix prefix) const {
  const std::size_t d = w_.size();
  const std::size_t window = std::min(prefix.size(), d - 1);
  double score = w0_ + w_[0] * std::get<double>(problem);
  // w[−l:] pairs with τ[−l:], aligned at the end.
  for (std::size_t i = 0; i < window; ++i) {
    score += w_[d - window + i] * static_cast<double>(prefix[prefix.size() - window + i]);
  }
  return score >= -kThresholdTolerance;
}

std::string LinearThresholdVerifier::describe() const {
  std::ostringstream os;
  os << "linear_threshold(w0=" << w0_ << ",w=[";
  for (std::size_t i = 0; i < w_.size(); ++i) {
    os << (i ? "," : "") << w_[i];
  }
  os << "])";
  return os.str();
}

// ---------------------------------------------------------------------------
// Graph paths

Step edge_id(std::size_t n, std::uint32_t u, std::uint32_t v) {
  if (u == v || u >= n || v >= n) {
    throw InvalidInput("invalid edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
  }
  if (u > v) std::swap(u, v);
  // Edges before row u: Σ_{i<u} (n−1−i).
  const std::size_t before = u * (2 * n - u - 1) / 2;
  return static_cast<Step>(before + (v - u - 1));
}

std::pair<std::uint32_t, std::uint32_t> edge_endpoints(std::size_t n, Step id) {
  std::size_t remaining = id;
  for (std::uint32_t u = 0; u + 1 < n; ++u) {
    const std::size_t row = n - 1 - u;
    if (remaining < row) {
      return {u, static_cast<std::uint32_t>(u + 1 + remaining)};
    }
    remaining -= row;
  }
  throw InvalidInput("edge id " + std::to_string(id) + " out of range");
}

GraphPathVerifier::GraphPathVerifier(TraceSpace space, std::size_t n, std::uint64_t extra_edges)
    : Verifier(space), n_(n), extra_(extra_edges) {
  if (space.problem_kind != ProblemKind::Graph) {
    throw InvalidInput("graph path verifiers need a graph problem space");
  }
  if (n < 2 || n > 11 || space.alphabet_size != complete_graph_edges(n)) {
    throw InvalidInput("graph path verifier needs 2 <= n <= 11 and |Σ| = n(n-1)/2");
  }
  if ((extra_ & ~low_mask(space.alphabet_size)) != 0) {
    throw InvalidInput("extra edge set has out-of-range edges");
  }
}

bool GraphPathVerifier::accepts_mask(std::uint64_t extra, const Problem& problem, Prefix prefix) {
  const std::uint64_t allowed = extra | problem_edge_mask(problem);
  for (Step s : prefix) {
    if (((allowed >> s) & 1u) == 0) return false;
  }
  return true;
}

bool GraphPathVerifier::accepts(const Problem& problem, Prefix prefix) const {
  return accepts_mask(extra_, problem, prefix);
}

std::string GraphPathVerifier::describe() const {
  std::string out = "graph_path(n=" + std::to_string(n_) + ",E~={";
  bool first = true;
  for (std::size_t e = 0; e < space().alphabet_size; ++e) {
    if ((extra_ >> e) & 1u) {
      const auto [u, v] = edge_endpoints(n_, static_cast<Step>(e));
      out += (first ? "" : ",") + std::string("(") + std::to_string(u) + "," + std::to_string(v) + ")";
      first = false;
    }
  }
  return out + "})";
}

// ---------------------------------------------------------------------------
// AxiomSubsetVerifier

AxiomSubsetVerifier::AxiomSubsetVerifier(TraceSpace space, std::uint64_t sigma)
    : Verifier(space), sigma_(sigma) {
  if (space.alphabet_size > 64) {
    throw InvalidInput("axiom subset verifiers support |Σ| <= 64");
  }
  if ((sigma & ~low_mask(space.alphabet_size)) != 0) {
    throw InvalidInput("σ has bits outside the alphabet");
  }
}

std::string AxiomSubsetVerifier::describe() const {
  return "axiom_subset" + format_mask(sigma_, space().alphabet_size);
}

// ---------------------------------------------------------------------------
// VerifierClass

bool VerifierClass::accepts(std::uint64_t id, const Problem& problem, Prefix prefix) const {
  return member(id)->accepts(problem, prefix);
}

TraceVerdict VerifierClass::run(std::uint64_t id, const Problem& problem, Prefix trace) const {
  for (std::size_t j = 1; j <= trace.size(); ++j) {
    if (!accepts(id, problem, trace.first(j))) {
      return TraceVerdict::fault_at(j);
    }
  }
  return TraceVerdict::accepted();
}

VerifierHandle VerifierClass::closure(std::span<const ProblemTrace>) const {
  throw ClosureUnsupported("class '" + family() + "' is not intersection-closed");
}

std::uint64_t VerifierClass::enumerable_size() const {
  const auto n = size();
  if (!n) {
    throw InvalidInput("class '" + family() + "' is not enumerable");
  }
  return *n;
}

FiniteClass::FiniteClass(TraceSpace space, std::vector<VerifierHandle> members,
                         std::optional<std::uint64_t> truth_index, std::string name)
    : VerifierClass(space), members_(std::move(members)), truth_(truth_index), name_(std::move(name)) {
  if (members_.empty()) {
    throw InvalidInput("finite class must be nonempty");
  }
  if (truth_ && *truth_ >= members_.size()) {
    throw InvalidInput("truth index out of range");
  }
  for (const auto& m : members_) {
    if (!m || !(m->space() == space)) {
      throw InvalidInput("finite class member defined on a different trace space");
    }
  }
}

VerifierHandle FiniteClass::member(std::uint64_t id) const {
  if (id >= members_.size()) {
    throw InvalidInput("unknown verifier id " + std::to_string(id));
  }
  return members_[id];
}

AxiomSubsetClass::AxiomSubsetClass(TraceSpace space, std::optional<std::uint64_t> truth_sigma)
    : VerifierClass(space), truth_(truth_sigma) {
  if (space.alphabet_size > 64) {
    throw InvalidInput("axiom subset class supports |Σ| <= 64");
  }
  if (truth_ && (*truth_ & ~low_mask(space.alphabet_size)) != 0) {
    throw InvalidInput("truth σ has bits outside the alphabet");
  }
}

std::optional<std::uint64_t> AxiomSubsetClass::size() const {
  if (space().alphabet_size >= 63) return std::nullopt;
  return std::uint64_t{1} << space().alphabet_size;
}

VerifierHandle AxiomSubsetClass::member(std::uint64_t id) const {
  return std::make_shared<AxiomSubsetVerifier>(space(), id);
}

VerifierHandle AxiomSubsetClass::closure(std::span<const ProblemTrace> positives) const {
  std::uint64_t sigma = 0;
  for (const auto& pt : positives) {
    space().validate_prefix(pt.trace);
    for (Step s : pt.trace) {
      sigma |= std::uint64_t{1} << s;
    }
  }
  return std::make_shared<AxiomSubsetVerifier>(space(), sigma);
}

GraphPathClass::GraphPathClass(std::size_t n, std::size_t horizon, std::optional<std::uint64_t> truth_edges)
    : VerifierClass(TraceSpace(complete_graph_edges(std::max<std::size_t>(n, 2)), horizon,
                               ProblemKind::Graph)),
      n_(n),
      truth_(truth_edges) {
  if (n < 2 || n > 11) {
    throw InvalidInput("graph path class supports 2 <= n <= 11");
  }
}

std::optional<std::uint64_t> GraphPathClass::size() const {
  if (space().alphabet_size >= 63) return std::nullopt;
  return std::uint64_t{1} << space().alphabet_size;
}

VerifierHandle GraphPathClass::member(std::uint64_t id) const {
  return std::make_shared<GraphPathVerifier>(space(), n_, id);
}

VerifierHandle GraphPathClass::closure(std::span<const ProblemTrace> positives) const {
  std::uint64_t needed = 0;
  for (const auto& pt : positives) {
    space().validate_prefix(pt.trace);
    space().validate_problem(pt.problem);
    const std::uint64_t given = problem_edge_mask(pt.problem);
    for (Step s : pt.trace) {
      if (((given >> s) & 1u) == 0) needed |= std::uint64_t{1} << s;
    }
  }
  return std::make_shared<GraphPathVerifier>(space(), n_, needed);
}

VerifierHandle IntervalClass::member(std::uint64_t) const {
  throw InvalidInput("interval class is not enumerable; construct IntervalVerifier directly");
}

VerifierHandle IntervalClass::closure(std::span<const ProblemTrace> positives) const {
  if (positives.empty()) {
    return std::make_shared<RejectAllVerifier>(space());
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& pt : positives) {
    space().validate_prefix(pt.trace);
    space().validate_problem(pt.problem);
    const Prefix trace(pt.trace);
    for (std::size_t j = 1; j <= trace.size(); ++j) {
      const double d = IntervalVerifier::distance(pt.problem, trace.first(j));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (lo < -kThresholdTolerance) {
    return std::make_shared<AcceptAllVerifier>(space());
  }
  return std::make_shared<IntervalVerifier>(space(), std::max(lo, 0.0), std::max(hi, 0.0));
}

PartitionClass::PartitionClass(TraceSpace space, std::size_t cells, std::size_t hidden_index)
    : VerifierClass(space), cells_(cells), hidden_(hidden_index) {
  const auto total = space.trace_count(space.horizon);
  if (!total) {
    throw InvalidInput("partition class: |Σ|^T overflows");
  }
  total_ = *total;
  if (cells < 3 || cells > total_) {
    throw InvalidInput("partition class needs 3 <= H <= |Σ|^T (H = " + std::to_string(cells) + ")");
  }
  if (hidden_index >= cells) {
    throw InvalidInput("hidden index out of range");
  }
}

VerifierHandle PartitionClass::member(std::uint64_t id) const {
  if (id >= cells_) {
    throw InvalidInput("unknown verifier id " + std::to_string(id));
  }
  auto self = std::make_shared<PartitionClass>(*this);
  return std::make_shared<FunctionVerifier>(
      space(), [self, id](const Problem& p, Prefix prefix) { return self->accepts(id, p, prefix); },
      "partition_member(" + std::to_string(id) + "/" + std::to_string(cells_) + ")");
}

std::uint64_t PartitionClass::cell_size(std::size_t cell) const {
  return total_ / cells_ + (cell < total_ % cells_ ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Operations

Verdict class_evaluate(const VerifierClass& cls, std::uint64_t id, const Problem& problem,
                       Prefix prefix) {
  if (const auto n = cls.size(); n && id >= *n) {
    throw InvalidInput("unknown verifier id " + std::to_string(id));
  }
  cls.space().validate_prefix(prefix);
  cls.space().validate_problem(problem);
  if (!cls.size()) {
    return to_verdict(cls.member(id)->accepts(problem, prefix));
  }
  return to_verdict(cls.accepts(id, problem, prefix));
}

namespace {

template <typename Accepts>
std::vector<Trace> enumerate_accepted_impl(const TraceSpace& space, Accepts&& accepts,
                                           std::uint64_t budget) {
  space.full_trace_count(budget);
  std::vector<Trace> out;
  // Depth-first in lexicographic order; a rejected prefix prunes its subtree.
  Trace prefix;
  prefix.reserve(space.horizon);
  auto visit = [&](auto&& self) -> void {
    for (Step s = 0; s < space.alphabet_size; ++s) {
      prefix.push_back(s);
      if (accepts(Prefix(prefix))) {
        if (prefix.size() == space.horizon) {
          out.push_back(prefix);
        } else {
          self(self);
        }
      }
      prefix.pop_back();
    }
  };
  visit(visit);
  return out;
}

}  // namespace

std::vector<Trace> enumerate_accepted(const Verifier& verifier, const Problem& problem,
                                      std::uint64_t budget) {
  verifier.space().validate_problem(problem);
  return enumerate_accepted_impl(
      verifier.space(), [&](Prefix p) { return verifier.accepts(problem, p); }, budget);
}

std::vector<Trace> enumerate_accepted(const VerifierClass& cls, std::uint64_t id,
                                      const Problem& problem, std::uint64_t budget) {
  if (const auto n = cls.size(); n && id >= *n) {
    throw InvalidInput("unknown verifier id " + std::to_string(id));
  }
  cls.space().validate_problem(problem);
  return enumerate_accepted_impl(
      cls.space(), [&](Prefix p) { return cls.accepts(id, problem, p); }, budget);
}

VerifierHandle closure_of_positives(const VerifierClass& cls, std::span<const ProblemTrace> positives) {
  if (!cls.intersection_closed()) {
    throw ClosureUnsupported("class '" + cls.family() + "' has no closure support");
  }
  return cls.closure(positives);
}

std::vector<std::uint64_t> behavior_signature(const Verifier& verifier,
                                              std::span<const Problem> problems,
                                              std::uint64_t budget) {
  const TraceSpace& space = verifier.space();
  const PrefixIndexer indexer(space.alphabet_size, space.horizon, budget);
  const std::uint64_t stride = indexer.size();
  std::vector<std::uint64_t> bits((problems.size() * stride + 63) / 64, 0);
  auto get = [&](std::uint64_t k) { return (bits[k >> 6] >> (k & 63)) & 1u; };
  for (std::size_t p = 0; p < problems.size(); ++p) {
    const std::uint64_t base = p * stride;
    for (std::size_t len = 1; len <= space.horizon; ++len) {
      std::uint64_t rank = 0;
      for_each_trace(space.alphabet_size, len, [&](const Trace& prefix) {
        const bool parent_ok =
            len == 1 || get(base + indexer.index_of_rank(len - 1, rank / space.alphabet_size));
        if (parent_ok && verifier.accepts(problems[p], Prefix(prefix))) {
          const std::uint64_t k = base + indexer.index_of_rank(len, rank);
          bits[k >> 6] |= std::uint64_t{1} << (k & 63);
        }
        ++rank;
      });
    }
  }
  return bits;
}

std::shared_ptr<FiniteClass> deduplicate_by_behavior(const FiniteClass& cls,
                                                     std::span<const Problem> problems,
                                                     std::uint64_t budget) {
  struct VecHash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const noexcept {
      std::uint64_t h = 1469598103934665603ULL;
      for (std::uint64_t x : v) h = (h ^ x) * 1099511628211ULL;
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::vector<std::uint64_t>, std::uint64_t, VecHash> seen;
  std::vector<VerifierHandle> kept;
  std::optional<std::uint64_t> truth;
  const auto& members = cls.members();
  for (std::uint64_t i = 0; i < members.size(); ++i) {
    auto sig = behavior_signature(*members[i], problems, budget);
    auto [it, inserted] = seen.emplace(std::move(sig), kept.size());
    if (inserted) {
      kept.push_back(members[i]);
    }
    if (cls.truth_index() && *cls.truth_index() == i) {
      truth = it->second;
    }
  }
  return std::make_shared<FiniteClass>(cls.space(), std::move(kept), truth, cls.family());
}

std::vector<Problem> enumerated_problems(std::size_t count) {
  std::vector<Problem> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(ProblemId{static_cast<std::int64_t>(i)});
  }
  return out;
}

}  // namespace cotv
