#include "cotv/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>

namespace cotv {

namespace {

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw InvalidInput(std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return value;
}

double parse_double(std::string_view s) {
  // from_chars for double is missing from older libstdc++; strtod on a copy is portable.
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    throw InvalidInput("bad real '" + copy + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

Trace parse_steps(std::string_view s) {
  Trace t;
  if (s.empty()) return t;
  for (auto part : split(s, ',')) t.push_back(parse_number<Step>(part, "step"));
  return t;
}

}  // namespace

Problem parse_problem(std::string_view text) {
  if (text.starts_with("id:")) return ProblemId{parse_number<std::int64_t>(text.substr(3), "problem id")};
  if (text.starts_with("real:")) return parse_double(text.substr(5));
  if (text.starts_with("graph:")) {
    const auto rest = text.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw InvalidInput("graph problem needs graph:<v0>:<edges>");
    GraphProblem g;
    g.start = parse_number<std::uint32_t>(rest.substr(0, colon), "start vertex");
    g.edges = parse_steps(rest.substr(colon + 1));
    return g;
  }
  throw InvalidInput("unknown problem form '" + std::string(text) + "'");
}

TraceVerdict parse_verdict(std::string_view text) {
  if (text == "A") return TraceVerdict::accepted();
  if (text.starts_with("F:")) {
    const auto j = parse_number<std::size_t>(text.substr(2), "fault index");
    if (j == 0) throw InvalidInput("fault indices are 1-based");
    return TraceVerdict::fault_at(j);
  }
  throw InvalidInput("bad label '" + std::string(text) + "' (expected A, F:<j> or V:<YN...>)");
}

std::vector<TraceRecord> read_traces(std::istream& in, const TraceSpace* space) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      const auto fields = split(line, '\t');
      if (fields.size() < 2 || fields.size() > 3) {
        throw InvalidInput("expected 2 or 3 tab-separated fields, found " + std::to_string(fields.size()));
      }
      TraceRecord r;
      r.line = number;
      r.problem = parse_problem(fields[0]);
      r.trace = parse_steps(fields[1]);
      if (r.trace.empty()) throw InvalidInput("trace must have at least one step");
      if (fields.size() == 3) {
        if (fields[2].starts_with("V:")) {
          std::vector<Verdict> v;
          for (char c : fields[2].substr(2)) {
            if (c != 'Y' && c != 'N') throw InvalidInput("label vectors use Y and N");
            v.push_back(to_verdict(c == 'Y'));
          }
          if (v.size() != r.trace.size()) throw InvalidInput("label vector length differs from trace length");
          r.label = verdict_of_labels(v);
          r.label_vector = std::move(v);
        } else {
          r.label = parse_verdict(fields[2]);
          if (!r.label->is_accepted() && r.label->fault_index() > r.trace.size()) {
            throw InvalidInput("fault index beyond the trace");
          }
        }
      }
      if (space) {
        space->validate_problem(r.problem);
        space->validate_prefix(r.trace);
      }
      out.push_back(std::move(r));
    } catch (const InvalidInput& e) {
      throw ParseError(number, e.what());
    }
  }
  return out;
}

std::vector<TraceRecord> read_trace_file(const std::string& path, const TraceSpace* space) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open trace file '" + path + "'");
  return read_traces(in, space);
}

std::string format_record(const Problem& problem, Prefix trace, const std::optional<TraceVerdict>& label) {
  std::string out = format_problem(problem) + '\t' + format_trace(trace);
  if (label) out += '\t' + to_string(*label);
  return out;
}

}  // namespace cotv
