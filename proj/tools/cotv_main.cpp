// cotv: command-line front end for the verifier-learning lab.
//
// Exit codes: 0 success, 1 a check or hard invariant failed, 2 bad config or input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cotv/config.hpp"
#include "cotv/report_io.hpp"
#include "cotv/serialize.hpp"
#include "cotv/trace_io.hpp"

namespace fs = std::filesystem;
using namespace cotv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitConfig = 2;

constexpr std::uint64_t kLearnStream = 0x4c524e;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  int verbosity = 0;

  std::string mode = "svpac";
  std::string traces;
  std::string verifier;
  std::string problem;
  std::string grid;

  std::string variant = "proper";
  LowerBoundConfig lb;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw ConfigError(path.string(), "write failed");
}

fs::path prepare_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--out", "output directory required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(dir, "cannot create directory: " + ec.message());
  return fs::path(dir);
}

Scenario scenario_from(const Options& o) {
  Json config = load_config_file(o.config);
  // A seed override is applied before validation so the instance seed follows it.
  if (o.seed) config["seed"] = *o.seed;
  Scenario s = parse_scenario(config);
  if (o.threads) s.run.threads = *o.threads;
  return s;
}

std::vector<std::uint64_t> parse_grid(const std::string& text) {
  std::vector<std::uint64_t> grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      grid.push_back(std::stoull(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("--grid", "bad grid entry '" + part + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return grid;
}

void write_report(const fs::path& dir, const ExperimentReport& report, const std::string& scenario) {
  std::ostringstream csv;
  write_trials_csv(csv, report);
  write_file(dir / "trials.csv", csv.str());
  write_file(dir / "report.json", report_to_json(report, scenario).dump(2) + "\n");
}

void print_diagnostics(const ExperimentReport& report) {
  for (const auto& [k, v] : report.diagnostics) std::cout << "  " << k << " = " << format_double(v) << "\n";
}

int cmd_experiment(const Options& o) {
  const Scenario s = scenario_from(o);
  const fs::path dir = prepare_dir(o.out);
  const ScenarioOutcome r = run_scenario(s, RunMode::Report);
  write_report(dir, r.report, s.name);
  if (!r.curve.empty()) {
    std::ostringstream csv;
    write_curve_csv(csv, r.curve);
    write_file(dir / "curve.csv", csv.str());
  }
  std::cout << s.name << ": " << summary_line(r.report) << "\n";
  if (o.verbosity > 0) print_diagnostics(r.report);
  return r.passed ? kExitOk : kExitCheck;
}

int cmd_curve(const Options& o) {
  const Scenario s = scenario_from(o);
  const fs::path dir = prepare_dir(o.out);
  const std::vector<std::uint64_t> grid = o.grid.empty() ? std::vector<std::uint64_t>{} : parse_grid(o.grid);
  const ScenarioOutcome r = run_scenario(s, RunMode::Curve, grid);
  std::ostringstream csv;
  write_curve_csv(csv, r.curve);
  write_file(dir / "curve.csv", csv.str());
  for (const auto& p : r.curve) {
    std::cout << "m=" << p.m << " failure_rate=" << format_double(p.failure_rate) << " ci=["
              << format_double(p.ci.low) << ", " << format_double(p.ci.high) << "]\n";
  }
  if (s.experiment == "closure_curve") {
    write_report(dir, r.report, s.name);
    std::cout << s.name << ": " << summary_line(r.report) << "\n";
  }
  return r.passed ? kExitOk : kExitCheck;
}

std::vector<Verdict> labels_from_verdict(const TraceVerdict& v, std::size_t length) {
  std::vector<Verdict> labels(length, Verdict::Yes);
  if (!v.is_accepted()) labels[v.fault_index() - 1] = Verdict::No;
  return labels;
}

int cmd_learn(const Options& o) {
  const Scenario s = scenario_from(o);
  if (s.instance.is_null()) throw ConfigError("experiment", s.experiment + " has no learnable class");
  const BuiltInstance inst = build_instance(s.instance);
  const VerifierClass& cls = *inst.cls;
  const ExperimentConfig& cfg = s.run;
  Rng rng = Rng::for_stream(cfg.master_seed, kLearnStream);

  std::vector<TraceRecord> records;
  const bool from_file = !o.traces.empty();
  if (from_file) records = read_trace_file(o.traces, &inst.space);

  auto need_trustable = [&]() -> const TrustableInstance& {
    if (!inst.trustable) throw ConfigError("class.family", "mode " + o.mode + " needs a gold reasoner");
    return *inst.trustable;
  };
  auto need_simple = [&]() -> const SimpleInstance& {
    if (!inst.simple) throw ConfigError("class.family", "drawing samples for " + o.mode + " needs random_table");
    return *inst.simple;
  };
  auto m_or = [&](std::uint64_t formula) { return cfg.m.value_or(formula); };

  Json result;
  std::string note;
  if (o.mode == "svpac") {
    std::vector<LabeledTrace> sample;
    if (from_file) {
      for (const auto& r : records) {
        if (r.label) sample.push_back({r.problem, r.trace, *r.label});
        else if (r.label_vector) sample.push_back({r.problem, r.trace, verdict_of_labels(*r.label_vector)});
        else throw ParseError(r.line, "svpac needs a label (A, F:j or V:...)");
      }
    } else {
      const auto m = m_or(finite_class_sample_size(cls.enumerable_size(), cfg.epsilon, cfg.delta));
      for (std::uint64_t i = 0; i < m; ++i) sample.push_back(need_simple().dist.sample(rng));
    }
    const MemberChoice c = svpac_learn(cls, sample);
    result = member_to_json(s.instance, c.id);
    note = "svpac: member " + std::to_string(c.id) + " consistent with " + std::to_string(sample.size()) + " traces";
  } else if (o.mode == "tvpac") {
    std::vector<GoldSample> sample;
    if (from_file) {
      std::map<Problem, std::size_t> slot;
      for (const auto& r : records) {
        auto [it, fresh] = slot.try_emplace(r.problem, sample.size());
        if (fresh) sample.push_back({r.problem, {}});
        sample[it->second].traces.push_back(r.trace);
      }
    } else {
      const auto& t = need_trustable();
      const auto m = m_or(finite_class_sample_size(cls.enumerable_size(), cfg.epsilon, cfg.delta));
      for (std::uint64_t i = 0; i < m; ++i) {
        const Problem& x = t.dist.sample(rng);
        sample.push_back({x, t.gold->traces(x)});
      }
    }
    const MemberChoice c = tvpac_learn(cls, sample);
    result = member_to_json(s.instance, c.id);
    note = "tvpac: member " + std::to_string(c.id) + " from " + std::to_string(sample.size()) + " problems";
  } else if (o.mode == "gamma" || o.mode == "closure") {
    std::vector<ProblemTrace> positives;
    if (from_file) {
      for (const auto& r : records) positives.push_back({r.problem, r.trace});
    } else {
      const auto& t = need_trustable();
      const auto m = m_or(gamma_tvpac_sample_size(cls.enumerable_size(), cfg.eta, cfg.epsilon, cfg.delta));
      for (std::uint64_t i = 0; i < m; ++i) {
        Problem x = t.dist.sample(rng);
        Trace tr = sample_positive(*t.gold, x, rng);
        positives.push_back({std::move(x), std::move(tr)});
      }
    }
    if (o.mode == "gamma") {
      const auto h = intersect_consistent_learn(inst.cls, positives);
      result = intersection_to_json(s.instance, h->base().member_ids);
      note = "gamma: intersection of " + std::to_string(h->base().member_ids.size()) + " members";
    } else {
      const VerifierHandle h = closure_learn(cls, positives);
      result = concrete_verifier_to_json(*h);
      note = "closure: " + h->describe();
    }
  } else if (o.mode == "agnostic_svpac") {
    std::vector<AgnosticExample> sample;
    if (from_file) {
      for (const auto& r : records) {
        if (r.label_vector) sample.push_back({r.problem, r.trace, *r.label_vector});
        else if (r.label) sample.push_back({r.problem, r.trace, labels_from_verdict(*r.label, r.trace.size())});
        else throw ParseError(r.line, "agnostic_svpac needs a label vector (V:...) or verdict");
      }
    } else {
      const auto m = m_or(agnostic_sample_size(cls.enumerable_size(), cfg.epsilon, cfg.delta));
      for (std::uint64_t i = 0; i < m; ++i) sample.push_back(need_simple().dist.sample_agnostic(rng));
    }
    const MemberChoice c = agnostic_svpac_learn(cls, sample);
    result = member_to_json(s.instance, c.id);
    note = "agnostic_svpac: member " + std::to_string(c.id) + " empirical loss " + format_double(c.empirical_loss);
  } else if (o.mode == "agnostic_tvpac") {
    const auto& t = need_trustable();
    std::vector<Problem> problems;
    if (from_file) {
      for (const auto& r : records) problems.push_back(r.problem);
    } else {
      const auto m = m_or(agnostic_sample_size(cls.enumerable_size(), cfg.epsilon, cfg.delta));
      for (std::uint64_t i = 0; i < m; ++i) problems.push_back(t.dist.sample(rng));
    }
    const MemberChoice c = agnostic_tvpac_learn(cls, *t.gold, problems);
    result = member_to_json(s.instance, c.id);
    note = "agnostic_tvpac: member " + std::to_string(c.id) + " empirical loss " + format_double(c.empirical_loss);
  } else {
    throw ConfigError("--mode", "unknown mode " + o.mode);
  }

  if (o.out.empty()) {
    std::cout << result.dump(2) << "\n";
  } else {
    write_file(o.out, result.dump(2) + "\n");
    std::cout << note << "\n";
  }
  return kExitOk;
}

int cmd_verify(const Options& o) {
  const VerifierHandle h = load_verifier_file(o.verifier);
  const auto records = read_trace_file(o.traces, &h->space());
  for (const auto& r : records) std::cout << to_string(h->run(r.problem, r.trace)) << "\n";
  return kExitOk;
}

int cmd_generate(const Options& o) {
  const VerifierHandle h = load_verifier_file(o.verifier);
  Problem x;
  try {
    x = parse_problem(o.problem);
    h->space().validate_problem(x);
  } catch (const InvalidInput& e) {
    throw ConfigError("--problem", e.what());
  }
  std::size_t evaluations = 0;
  const Trace t = generate_from_verifier(*h, x, h->space().alphabet_size, h->space().horizon, &evaluations);
  std::cout << format_record(x, t, std::nullopt) << "\n";
  if (o.verbosity > 0) std::cerr << "evaluations: " << evaluations << "\n";
  return kExitOk;
}

int cmd_lower_bound(const Options& o) {
  LowerBoundConfig lb = o.lb;
  if (o.seed) lb.master_seed = *o.seed;
  if (o.threads) lb.threads = *o.threads;
  if (lb.threads == 0) lb.threads = std::max(1u, std::thread::hardware_concurrency());
  if (o.variant == "improper" && lb.cells % 4 != 0) throw ConfigError("--cells", "must be a multiple of 4");
  if (lb.cells == 0 || lb.alphabet == 0 || lb.horizon == 0 || lb.trials == 0) {
    throw ConfigError("lower-bound", "cells, alphabet, horizon and trials must be positive");
  }
  const ExperimentReport r = o.variant == "proper" ? run_lower_bound_proper(lb) : run_lower_bound_improper(lb);
  if (!o.out.empty()) write_report(prepare_dir(o.out), r, "lower_bound_" + o.variant);
  std::cout << summary_line(r) << "\n";
  if (o.verbosity > 0) print_diagnostics(r);
  return r.check && r.check->passed ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation lab for PAC-learning chain-of-thought verifiers"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Master seed override (all randomness derives from it)");
    sub->add_option("--threads", o.threads, "Trial parallelism; 0 = hardware threads. Output is identical for all values");
    sub->add_flag_function("-v,--verbose", [&o](std::int64_t n) { o.verbosity = static_cast<int>(n); }, "Print diagnostics");
  };

  auto* experiment = app.add_subcommand("experiment", "Run a scenario config; writes trials.csv and report.json");
  experiment->add_option("--config", o.config, "Scenario config (JSON with comments)")->required();
  experiment->add_option("--out", o.out, "Output directory")->required();
  common(experiment);

  auto* curve = app.add_subcommand("curve", "Sweep m over a grid; writes curve.csv");
  curve->add_option("--config", o.config, "Scenario config")->required();
  curve->add_option("--out", o.out, "Output directory")->required();
  curve->add_option("--grid", o.grid, "Comma-separated m values (default: curve.m_grid)");
  common(curve);

  auto* learn = app.add_subcommand("learn", "Learn a verifier and serialize it as JSON");
  learn->add_option("--config", o.config, "Scenario config naming the class")->required();
  learn->add_option("--mode", o.mode, "Learner")
      ->check(CLI::IsMember({"svpac", "tvpac", "gamma", "closure", "agnostic_svpac", "agnostic_tvpac"}));
  learn->add_option("--traces", o.traces, "Training trace file (default: draw m samples from the scenario)");
  learn->add_option("--out", o.out, "Verifier file (default: standard output)");
  common(learn);

  auto* verify = app.add_subcommand("verify", "Print A or F:<j> for each trace in a file");
  verify->add_option("--verifier", o.verifier, "Verifier JSON")->required();
  verify->add_option("--traces", o.traces, "Trace file")->required();
  common(verify);

  auto* generate = app.add_subcommand("generate", "Greedy trace generation from a verifier");
  generate->add_option("--verifier", o.verifier, "Verifier JSON")->required();
  generate->add_option("--problem", o.problem, "Problem, e.g. id:0 or real:2.5")->required();
  common(generate);

  auto* lower = app.add_subcommand("lower-bound", "Run the proper or improper lower-bound construction");
  lower->add_option("--variant", o.variant, "proper | improper")->check(CLI::IsMember({"proper", "improper"}));
  lower->add_option("--cells", o.lb.cells, "Number of cells |H|");
  lower->add_option("--m", o.lb.m, "Sample size");
  lower->add_option("--alphabet", o.lb.alphabet, "|Σ|");
  lower->add_option("--horizon", o.lb.horizon, "T");
  lower->add_option("--trials", o.lb.trials, "Trials");
  lower->add_option("--out", o.out, "Output directory (optional)");
  common(lower);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*experiment) return cmd_experiment(o);
    if (*curve) return cmd_curve(o);
    if (*learn) return cmd_learn(o);
    if (*verify) return cmd_verify(o);
    if (*generate) return cmd_generate(o);
    if (*lower) return cmd_lower_bound(o);
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return kExitCheck;
  } catch (const GenerationDeadEnd& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheck;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
