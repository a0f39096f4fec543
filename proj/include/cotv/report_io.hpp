#pragma once

// Report writers. Doubles are printed with %.17g so reruns compare byte for byte;
// wall time stays out of every file.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotv/harness.hpp"

namespace cotv {

/// trial,m,learned,error,sound,completeness,failed,opt,agree
void write_trials_csv(std::ostream& out, const ExperimentReport& report);
/// m,trials,failure_rate,ci_low,ci_high,mean_error
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);
nlohmann::json report_to_json(const ExperimentReport& report, const std::string& scenario);

/// One-line human summary including the runtime.
std::string summary_line(const ExperimentReport& report);

/// Shortest decimal that round-trips.
std::string format_double(double v);

}  // namespace cotv
