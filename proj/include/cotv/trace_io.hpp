#pragma once

// Line-oriented trace files:
//
//   <problem> TAB <s1,s2,...> [TAB <label>]
//
// problem: id:<int> | real:<double> | graph:<v0>:<e1>,<e2>,...
// label:   A | F:<j> | V:<YN...> (per-prefix label vector)
// Blank lines and lines starting with '#' are skipped.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotv/core.hpp"

namespace cotv {

struct TraceRecord {
  std::size_t line = 0;
  Problem problem;
  Trace trace;
  std::optional<TraceVerdict> label;
  std::optional<std::vector<Verdict>> label_vector;
};

/// Throws InvalidInput on malformed text.
Problem parse_problem(std::string_view text);
TraceVerdict parse_verdict(std::string_view text);

/// Throws ParseError naming the 1-based line. When `space` is given every record is validated.
std::vector<TraceRecord> read_traces(std::istream& in, const TraceSpace* space = nullptr);
std::vector<TraceRecord> read_trace_file(const std::string& path, const TraceSpace* space = nullptr);

std::string format_record(const Problem& problem, Prefix trace, const std::optional<TraceVerdict>& label);

}  // namespace cotv
