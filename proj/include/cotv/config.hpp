#pragma once

// Declarative scenario configs (JSON with // comments) and the instance builders
// behind them. docs/formats.md has the full schema.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotv/experiments.hpp"
#include "cotv/harness.hpp"
#include "cotv/scenarios.hpp"

namespace cotv {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

using Json = nlohmann::json;

/// Parses text with // and /* */ comments; throws ConfigError("<file>", ...) on bad JSON.
Json parse_config_text(const std::string& text, const std::string& origin = "<config>");
Json load_config_file(const std::string& path);

struct CurveSpec {
  std::vector<std::uint64_t> grid;
  /// Trials per grid point; 0 means the scenario's trial count.
  std::uint64_t trials = 0;
};

/// A validated scenario. `instance` holds just the keys that determine the class,
/// gold reasoner and distribution, so learned verifiers can name their class by it.
struct Scenario {
  std::string name;
  std::string experiment;
  ExperimentConfig run;
  Json instance;
  std::optional<CurveSpec> curve;
  /// Experiment-specific sections, already validated.
  Json extra;
};

/// Validates every field; unknown keys are errors. Throws ConfigError with the field path.
Scenario parse_scenario(const Json& config);
Scenario load_scenario(const std::string& path);

/// Built instance for a scenario's `instance` section.
struct BuiltInstance {
  std::optional<SimpleInstance> simple;
  std::optional<TrustableInstance> trustable;
  ClassHandle cls;
  TraceSpace space;
};

BuiltInstance build_instance(const Json& instance);

/// FNV-1a (64-bit) over the compact dump, as 16 hex digits.
std::string spec_hash(const Json& spec);

struct ScenarioOutcome {
  ExperimentReport report;
  std::vector<CurvePoint> curve;
  bool passed = false;
};

enum class RunMode { Report, Curve };

/// Report: the scenario's experiment at its configured m. Curve: one experiment per
/// grid point (from `grid_override` or curve.m_grid); `report` is left empty except
/// for closure_curve, whose summary is its report.
ScenarioOutcome run_scenario(const Scenario& scenario, RunMode mode = RunMode::Report,
                             const std::vector<std::uint64_t>& grid_override = {});

}  // namespace cotv
