#include "cotv/core.hpp"

#include <sstream>

#include "cotv/enumeration.hpp"

namespace cotv {

namespace {

std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t result = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && result > UINT64_MAX / base) {
      return std::nullopt;
    }
    result *= base;
  }
  return result;
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Enumerated: return "enumerated";
    case ProblemKind::RealScalar: return "real";
    case ProblemKind::Graph: return "graph";
  }
  return "unknown";
}

TraceSpace::TraceSpace(std::size_t alphabet, std::size_t horizon_len, ProblemKind kind,
                       std::size_t problems)
    : alphabet_size(alphabet), horizon(horizon_len), problem_kind(kind), problem_count(problems) {
  if (alphabet_size < 1) {
    throw InvalidInput("alphabet_size must be >= 1");
  }
  if (horizon < 1) {
    throw InvalidInput("horizon must be >= 1");
  }
  if (alphabet_size > (std::size_t{1} << 31)) {
    throw InvalidInput("alphabet_size exceeds the 32-bit step range");
  }
}

std::optional<std::uint64_t> TraceSpace::trace_count(std::size_t length) const {
  return checked_pow(alphabet_size, length);
}

std::uint64_t TraceSpace::full_trace_count(std::uint64_t budget) const {
  const auto count = trace_count(horizon);
  if (!count || *count > budget) {
    throw BudgetExceeded("|Σ|^T = " + std::to_string(alphabet_size) + "^" +
                         std::to_string(horizon) + " exceeds enumeration budget " +
                         std::to_string(budget));
  }
  return *count;
}

std::uint64_t TraceSpace::prefix_count(std::uint64_t budget) const {
  std::uint64_t total = 0;
  for (std::size_t len = 1; len <= horizon; ++len) {
    const auto count = trace_count(len);
    if (!count || *count > budget || total + *count > budget) {
      throw BudgetExceeded("prefix space of " + std::to_string(alphabet_size) + "^≤" +
                           std::to_string(horizon) + " exceeds enumeration budget " +
                           std::to_string(budget));
    }
    total += *count;
  }
  return total;
}

void TraceSpace::validate_prefix(Prefix prefix) const {
  if (prefix.empty()) {
    throw InvalidInput("empty trace");
  }
  if (prefix.size() > horizon) {
    throw InvalidInput("trace length " + std::to_string(prefix.size()) + " exceeds horizon " +
                       std::to_string(horizon));
  }
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] >= alphabet_size) {
      throw InvalidInput("step " + std::to_string(prefix[i]) + " at position " +
                         std::to_string(i + 1) + " is outside the alphabet of size " +
                         std::to_string(alphabet_size));
    }
  }
}

void TraceSpace::validate_problem(const Problem& problem) const {
  switch (problem_kind) {
    case ProblemKind::Enumerated: {
      const auto* id = std::get_if<ProblemId>(&problem);
      if (id == nullptr) {
        throw InvalidInput("expected an enumerated problem id");
      }
      if (id->value < 0 ||
          (problem_count > 0 && static_cast<std::uint64_t>(id->value) >= problem_count)) {
        throw InvalidInput("problem id " + std::to_string(id->value) + " out of range");
      }
      return;
    }
    case ProblemKind::RealScalar:
      if (!std::holds_alternative<double>(problem)) {
        throw InvalidInput("expected a real-valued problem");
      }
      return;
    case ProblemKind::Graph:
      if (!std::holds_alternative<GraphProblem>(problem)) {
        throw InvalidInput("expected a graph problem");
      }
      for (Step e : std::get<GraphProblem>(problem).edges) {
        if (e >= alphabet_size) {
          throw InvalidInput("problem edge id " + std::to_string(e) + " out of range");
        }
      }
      return;
  }
}

TraceVerdict TraceVerdict::fault_at(std::size_t index) {
  if (index == 0) {
    throw InvalidInput("fault index is 1-based");
  }
  return TraceVerdict{index};
}

std::string to_string(const TraceVerdict& verdict) {
  return verdict.is_accepted() ? "A" : "F:" + std::to_string(verdict.fault_index());
}

TraceVerdict Verifier::run(const Problem& problem, Prefix trace) const {
  for (std::size_t j = 1; j <= trace.size(); ++j) {
    if (!accepts(problem, trace.first(j))) {
      return TraceVerdict::fault_at(j);
    }
  }
  return TraceVerdict::accepted();
}

Verdict evaluate_prefix(const Verifier& verifier, const Problem& problem, Prefix prefix) {
  verifier.space().validate_prefix(prefix);
  verifier.space().validate_problem(problem);
  return to_verdict(verifier.accepts(problem, prefix));
}

TraceVerdict run_on_trace(const Verifier& verifier, const Problem& problem, Prefix trace) {
  verifier.space().validate_prefix(trace);
  verifier.space().validate_problem(problem);
  return verifier.run(problem, trace);
}

bool simple_loss(const Verifier& verifier, const Verifier& truth, const Problem& problem,
                 Prefix trace) {
  truth.space().validate_prefix(trace);
  truth.space().validate_problem(problem);
  const std::size_t stop = truth.run(problem, trace).stopping_index(trace.size());
  for (std::size_t j = 1; j <= stop; ++j) {
    const auto prefix = trace.first(j);
    if (verifier.accepts(problem, prefix) != truth.accepts(problem, prefix)) {
      return true;
    }
  }
  return false;
}

TraceVerdict verdict_of_labels(std::span<const Verdict> labels) {
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] == Verdict::No) {
      return TraceVerdict::fault_at(j + 1);
    }
  }
  return TraceVerdict::accepted();
}

bool agnostic_loss(const Verifier& verifier, const Problem& problem, Prefix trace,
                   std::span<const Verdict> labels) {
  if (labels.size() != trace.size()) {
    throw InvalidInput("label vector length " + std::to_string(labels.size()) +
                       " does not match trace length " + std::to_string(trace.size()));
  }
  verifier.space().validate_prefix(trace);
  verifier.space().validate_problem(problem);
  const std::size_t stop = verdict_of_labels(labels).stopping_index(trace.size());
  for (std::size_t j = 1; j <= stop; ++j) {
    if (to_verdict(verifier.accepts(problem, trace.first(j))) != labels[j - 1]) {
      return true;
    }
  }
  return false;
}

std::vector<Verdict> verdict_vector(const Verifier& truth, const Problem& problem, Prefix trace) {
  std::vector<Verdict> out;
  out.reserve(trace.size());
  for (std::size_t j = 1; j <= trace.size(); ++j) {
    out.push_back(to_verdict(truth.accepts(problem, trace.first(j))));
  }
  return out;
}

FunctionVerifier::FunctionVerifier(TraceSpace space, Predicate predicate, std::string name)
    : Verifier(space), predicate_(std::move(predicate)), name_(std::move(name)) {}

std::string format_problem(const Problem& problem) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* id = std::get_if<ProblemId>(&problem)) {
    os << "id:" << id->value;
  } else if (const auto* x = std::get_if<double>(&problem)) {
    os << "real:" << *x;
  } else {
    const auto& g = std::get<GraphProblem>(problem);
    os << "graph:" << g.start << ":";
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      os << (i ? "," : "") << g.edges[i];
    }
  }
  return os.str();
}

std::string format_trace(Prefix trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(trace[i]);
  }
  return out;
}

// enumeration.hpp

std::uint64_t trace_rank(Prefix trace, std::size_t alphabet_size) {
  std::uint64_t rank = 0;
  for (Step s : trace) {
    rank = rank * alphabet_size + s;
  }
  return rank;
}

Trace trace_from_rank(std::uint64_t rank, std::size_t length, std::size_t alphabet_size) {
  Trace trace(length, 0);
  for (std::size_t i = length; i > 0; --i) {
    trace[i - 1] = static_cast<Step>(rank % alphabet_size);
    rank /= alphabet_size;
  }
  return trace;
}

PrefixIndexer::PrefixIndexer(std::size_t alphabet_size, std::size_t horizon, std::uint64_t budget)
    : alphabet_(alphabet_size), horizon_(horizon) {
  TraceSpace(alphabet_size, horizon).prefix_count(budget);
  offsets_.assign(horizon + 1, 0);
  std::uint64_t level = 1;
  for (std::size_t len = 1; len <= horizon; ++len) {
    level *= alphabet_size;
    offsets_[len] = offsets_[len - 1] + level;
  }
}

}  // namespace cotv
