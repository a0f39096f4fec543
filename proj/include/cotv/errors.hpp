#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cotv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trace, prefix or problem does not conform to its TraceSpace.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An exhaustive computation would exceed the configured enumeration budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// No class member is consistent with the sample (realizability violated).
class NoConsistentVerifier : public Error {
 public:
  using Error::Error;
};

/// An operation that needs intersection-closed structure was given a class without it.
class ClosureUnsupported : public Error {
 public:
  using Error::Error;
};

/// The gold reasoner has no entry for the requested problem.
class ProblemNotInSupport : public Error {
 public:
  using Error::Error;
};

/// The greedy generator found no accepted step at some depth.
class GenerationDeadEnd : public Error {
 public:
  explicit GenerationDeadEnd(std::size_t depth)
      : Error("generation dead end at depth " + std::to_string(depth)), depth_(depth) {}
  std::size_t depth() const noexcept { return depth_; }

 private:
  std::size_t depth_;
};

/// A hard invariant of an experiment failed (for example, Algorithm-1 soundness).
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

/// Configuration or schema violation; `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A generated instance violates realizability; always a construction bug, never a trial failure.
class RealizabilityViolation : public ConfigError {
 public:
  explicit RealizabilityViolation(const std::string& message) : ConfigError("realizability", message) {}
};

/// Text-format parse failure with a 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cotv
