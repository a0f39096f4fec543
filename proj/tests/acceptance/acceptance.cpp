// One PASS/FAIL line per acceptance criterion. Every threshold is pinned here and
// recomputed from the raw trial records rather than read back from the report's check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cotv/config.hpp"
#include "cotv/errors.hpp"

using namespace cotv;

namespace {

constexpr double kSeMultiplier = 3.0;
constexpr double kRuntimeLimitSeconds = 120.0;

struct Judgement {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + std::string("violated: ") + what;
    }
  }
  void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double diag(const ExperimentReport& r, const char* key) {
  const auto it = r.diagnostics.find(key);
  return it == r.diagnostics.end() ? std::nan("") : it->second;
}

double upper_threshold(double theta, std::uint64_t n) {
  return theta + kSeMultiplier * std::sqrt(theta * (1 - theta) / static_cast<double>(n));
}

double lower_threshold(double theta, std::uint64_t n) {
  return theta - kSeMultiplier * std::sqrt(theta * (1 - theta) / static_cast<double>(n));
}

std::uint64_t count_if(const ExperimentReport& r, const std::function<bool(const TrialRecord&)>& pred) {
  std::uint64_t n = 0;
  for (const auto& rec : r.records) n += pred(rec);
  return n;
}

std::uint64_t class_size(const Scenario& s) { return build_instance(s.instance).cls->enumerable_size(); }

// Rate criterion with an upper bound: recount failures from records, compare to θ + 3 SE.
void upper_rate(Judgement& v, const ExperimentReport& r, double theta, std::uint64_t failures) {
  const double rate = static_cast<double>(failures) / static_cast<double>(r.trials);
  const double thr = upper_threshold(theta, r.trials);
  v.require(failures == r.failures, "recounted failures match the report");
  v.require(rate <= thr, "rate " + fmt(rate) + " <= " + fmt(thr));
  v.note("rate " + fmt(rate) + " <= " + fmt(thr));
}

void lower_rate(Judgement& v, const ExperimentReport& r, double theta, std::uint64_t failures) {
  const double rate = static_cast<double>(failures) / static_cast<double>(r.trials);
  const double thr = lower_threshold(theta, r.trials);
  v.require(failures == r.failures, "recounted failures match the report");
  v.require(rate >= thr, "rate " + fmt(rate) + " >= " + fmt(thr));
  v.note("rate " + fmt(rate) + " >= " + fmt(thr));
}

struct Criterion {
  int id;
  const char* title;
  const char* config;
  std::function<void(Judgement&, const Scenario&, const ScenarioOutcome&)> judge;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "finite-class SVPAC rate", "c01_svpac_rate.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(class_size(s) == 256 && s.run.epsilon == 0.1 && s.run.delta == 0.05, "|H|=256, eps=0.1, delta=0.05");
         v.require(r.m == 86 && r.trials == 500, "m=86, 500 trials");
         upper_rate(v, r, 0.05, count_if(r, [](const TrialRecord& t) { return t.error > 0.1; }));
       }},
      {2, "TVPAC rate", "c02_tvpac_rate.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(class_size(s) == 64 && s.instance.at("gold").at("k")[1] == 3, "|H|=64, k<=3");
         v.require(r.m == 65 && r.trials == 300, "m=65, 300 trials");
         upper_rate(v, r, 0.1, count_if(r, [](const TrialRecord& t) { return t.error > 0.1; }));
       }},
      {3, "Algorithm 1 never accepts a faulty trace", "c03_algorithm1_soundness.json",
       [](Judgement& v, const Scenario&, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(r.trials >= 1000, ">= 1000 trials");
         v.require(diag(r, "trials_with_m_zero") > 0, "m=0 covered");
         v.require(count_if(r, [](const TrialRecord& t) { return !t.sound; }) == 0, "every learned verifier sound");
         v.require(diag(r, "false_positives") == 0, "zero false positives");
         v.note("false positives " + fmt(diag(r, "false_positives")) + " over " + std::to_string(r.trials) + " trials");
       }},
      {4, "gamma-TVPAC rate", "c04_gamma_tvpac_rate.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(class_size(s) == 32 && s.run.eta == 0.5 && s.run.epsilon == 0.1 && s.run.delta == 0.1,
                   "|H|=32, eta=0.5, eps=delta=0.1");
         v.require(r.m == 490 && r.trials == 200, "m=490, 200 trials");
         v.require(diag(r, "false_positives") == 0, "no false positives");
         upper_rate(v, r, 0.1, count_if(r, [](const TrialRecord& t) { return t.error > 0.1; }));
       }},
      {5, "closure speedup on AxiomSubset n=10", "c05_closure_curve.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         const double limit = 30.0 * 10 / 0.1;
         v.require(class_size(s) == 1024, "|H|=1024");
         double reached = std::nan("");
         for (const auto& p : o.curve) {
           if (p.failure_rate <= 0.1) {
             reached = static_cast<double>(p.m);
             break;
           }
         }
         v.require(reached <= limit, "m to target " + fmt(reached) + " <= " + fmt(limit));
         v.require(reached == diag(r, "m_reached"), "curve agrees with report");
         v.require(diag(r, "closure_disagreements") == 0, "closure equals Algorithm 1 on every trial");
         v.note("m to target " + fmt(reached) + " <= " + fmt(limit) + ", disagreements " +
                fmt(diag(r, "closure_disagreements")));
       }},
      {6, "proper lower bound", "c06_lower_bound_proper.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(s.extra.at("cells") == 64 && r.m == 32 && r.trials == 2000, "H=64, m=32, 2000 trials");
         lower_rate(v, r, 1.0 / 3, count_if(r, [](const TrialRecord& t) { return !t.sound; }));
       }},
      {7, "improper lower bound", "c07_lower_bound_improper.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(s.extra.at("cells") == 64 && r.m == 16 && r.trials == 2000, "H=64, m=16, 2000 trials");
         v.require(count_if(r, [](const TrialRecord& t) { return t.completeness < 0.5; }) == 0,
                   "every learned verifier 1/2-complete");
         lower_rate(v, r, 1.0 / 3, count_if(r, [](const TrialRecord& t) { return !t.sound; }));
       }},
      {8, "online mistake bounds", "c08_online_mistakes.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(s.extra.at("dims")[0] == 2 && s.extra.at("dims")[1] == 6, "d in 2..6");
         v.require(diag(r, "adversarial_streams") >= 10 && r.trials >= 10010, "10^4 random + 10 adversarial");
         v.require(r.failures == 0 && count_if(r, [](const TrialRecord& t) { return t.failed; }) == 0,
                   "zero bound violations");
         v.note("violations " + std::to_string(r.failures) + " over " + std::to_string(r.trials) + " streams");
       }},
      {9, "generator equivalence", "c09_generator_equivalence.json",
       [](Judgement& v, const Scenario&, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(r.trials == 100, "100 reasoners");
         v.require(diag(r, "eligible_problems") > 0, "some problems eligible");
         v.require(r.failures == 0, "generated trace equals g(x)");
         v.note("mismatches " + std::to_string(r.failures) + ", eligible problems " + fmt(diag(r, "eligible_problems")));
       }},
      {10, "interval no-shatter witness", "c10_interval_witness.json",
       [](Judgement& v, const Scenario&, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(r.trials == 6, "all 3! orderings scanned");
         v.require(r.failures == 0, "(YES,NO,YES) unrealizable in every ordering");
         v.require(diag(r, "witness_distances_match") == 1 && diag(r, "witness_order_unrealizable") == 1,
                   "the stated sample S reproduced");
         v.note("orderings " + std::to_string(r.trials) + ", violations " + std::to_string(r.failures));
       }},
      {11, "agnostic rate", "c11_agnostic_rate.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(class_size(s) == 64 && s.instance.at("corruption") == 0.1, "|H|=64, 10% corruption");
         v.require(r.m == 358 && r.trials == 300, "m=358, 300 trials");
         v.require(diag(r, "opt") > 0, "OPT > 0");
         upper_rate(v, r, 0.1, count_if(r, [](const TrialRecord& t) { return t.error - t.opt > 0.2; }));
         v.note("OPT " + fmt(diag(r, "opt")));
       }},
      {12, "oracle equivalence", "c12_oracle_equivalence.json",
       [](Judgement& v, const Scenario& s, const ScenarioOutcome& o) {
         const auto& r = o.report;
         v.require(r.trials == 10000 && s.extra.at("max_traces") == 4096, "10^4 pairs, |Sigma|^T <= 4096");
         v.require(r.failures == 0, "deviation mode equals exhaustive mode");
         v.note("mismatches " + std::to_string(r.failures) + " over " + std::to_string(r.trials) + " pairs");
       }},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : COTV_CONFIG_DIR;
  int failed = 0;
  for (const auto& c : criteria()) {
    Judgement v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Scenario s = load_scenario(dir + "/" + c.config);
      ScenarioOutcome o = run_scenario(s);
      if (c.id == 5) o.curve = run_scenario(s, RunMode::Curve).curve;
      c.judge(v, s, o);
    } catch (const std::exception& e) {
      v.passed = false;
      v.note(std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.id == 1) v.require(secs < kRuntimeLimitSeconds, "runtime under 2 min");
    std::printf("%s C%-2d %-42s %s (%.1fs)\n", v.passed ? "PASS" : "FAIL", c.id, c.title, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.passed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria().size()) - failed, criteria().size());
  return failed == 0 ? 0 : 1;
}
