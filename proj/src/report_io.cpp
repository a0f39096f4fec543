#include "cotv/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "cotv/config.hpp"

namespace cotv {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trials_csv(std::ostream& out, const ExperimentReport& report) {
  out << "trial,m,learned,error,sound,completeness,failed,opt,agree\n";
  for (const auto& r : report.records) {
    out << r.trial << ',' << r.m << ',' << csv_field(r.learned) << ',' << format_double(r.error) << ','
        << (r.sound ? 1 : 0) << ',' << format_double(r.completeness) << ',' << (r.failed ? 1 : 0) << ','
        << format_double(r.opt) << ',' << (r.agree ? 1 : 0) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "m,trials,failure_rate,ci_low,ci_high,mean_error\n";
  for (const auto& p : curve) {
    out << p.m << ',' << p.trials << ',' << format_double(p.failure_rate) << ',' << format_double(p.ci.low) << ','
        << format_double(p.ci.high) << ',' << format_double(p.mean_error) << '\n';
  }
}

Json report_to_json(const ExperimentReport& report, const std::string& scenario) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario"] = scenario;
  j["experiment"] = report.experiment;
  j["m"] = report.m;
  j["trials"] = report.trials;
  j["failures"] = report.failures;
  j["failure_rate"] = report.failure_rate;
  j["ci"] = {{"low", report.ci.low}, {"high", report.ci.high}};
  if (report.check) {
    const TheoremCheck& c = *report.check;
    j["check"] = {{"name", c.name},
                  {"direction", c.upper ? "upper" : "lower"},
                  {"theorem_value", finite_or_string(c.theorem_value)},
                  {"slack", finite_or_string(c.slack)},
                  {"threshold", finite_or_string(c.threshold)},
                  {"observed", finite_or_string(c.observed)},
                  {"passed", c.passed}};
  } else {
    j["check"] = nullptr;
  }
  Json d = Json::object();
  for (const auto& [k, v] : report.diagnostics) d[k] = finite_or_string(v);
  j["diagnostics"] = d;
  return j;
}

std::string summary_line(const ExperimentReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s m=%llu trials=%llu failure_rate=%.4f ci=[%.4f, %.4f]",
                report.experiment.c_str(), static_cast<unsigned long long>(report.m),
                static_cast<unsigned long long>(report.trials), report.failure_rate, report.ci.low, report.ci.high);
  std::string out = buf;
  if (report.check) {
    std::snprintf(buf, sizeof buf, " check=%s observed=%.6g %s %.6g", report.check->passed ? "PASS" : "FAIL",
                  report.check->observed, report.check->upper ? "<=" : ">=", report.check->threshold);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, " runtime=%.2fs", report.wall_seconds);
  return out + buf;
}

}  // namespace cotv
