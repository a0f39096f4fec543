#include "cotv/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "cotv/serialize.hpp"

namespace cotv {

namespace {

constexpr std::uint64_t kInstanceStream = 0x494e5354;

/// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(display(), "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return need<T>(key);
  }

  template <typename T>
  T need(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(at(key), "required field is missing");
    const Json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(at(key), "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
      if (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0) throw ConfigError(at(key), "must be nonnegative");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    }
    return v.get<T>();
  }

  /// Raw value; the caller validates it.
  const Json& raw(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(at(key), "required field is missing");
    return j_.at(key);
  }

  Section sub(const std::string& key) {
    used_.insert(key);
    static const Json empty = Json::object();
    return Section(has(key) ? j_.at(key) : empty, at(key));
  }

  std::pair<double, double> range(const std::string& key, std::pair<double, double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(at(key), "expected [low, high]");
    }
    const std::pair<double, double> r{v[0].get<double>(), v[1].get<double>()};
    if (r.first > r.second) throw ConfigError(at(key), "low exceeds high");
    return r;
  }

  std::vector<std::uint64_t> counts(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a nonempty integer array");
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0) {
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a nonnegative integer");
      }
      out.push_back(v[i].get<std::uint64_t>());
    }
    return out;
  }

  /// Rejects keys nobody consumed.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(at(key), "unknown field");
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename T>
T positive(T v, const std::string& path) {
  if (v <= 0) throw ConfigError(path, "must be positive");
  return v;
}

double probability(double v, const std::string& path) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(path, "must lie in [0, 1]");
  return v;
}

bool weights_flag(Section& s, const std::string& key) {
  const std::string w = s.get<std::string>(key, "uniform");
  if (w != "uniform" && w != "random") throw ConfigError(s.at(key), "expected \"uniform\" or \"random\"");
  return w == "random";
}

ProblemKind kind_from_string(const std::string& kind, const std::string& path) {
  if (kind == "enumerated") return ProblemKind::Enumerated;
  if (kind == "real") return ProblemKind::RealScalar;
  if (kind == "graph") return ProblemKind::Graph;
  throw ConfigError(path, "unknown problem kind \"" + kind + "\"");
}

TraceSpace parse_space(Section s, std::size_t default_problems) {
  const auto alphabet = positive(s.need<std::size_t>("alphabet"), s.at("alphabet"));
  const auto horizon = positive(s.need<std::size_t>("horizon"), s.at("horizon"));
  const auto kind = kind_from_string(s.get<std::string>("kind", "enumerated"), s.at("kind"));
  const auto problems = s.get<std::size_t>("problems", default_problems);
  s.finish();
  return TraceSpace(alphabet, horizon, kind, problems);
}

/// Normalized instance section with every default filled in, so its hash is stable.
Json normalize_instance(Section& root, std::uint64_t seed) {
  Section cls = root.sub("class");
  const std::string family = cls.need<std::string>("family");
  Json out;
  out["schema_version"] = kConfigSchemaVersion;
  out["seed"] = root.get<std::uint64_t>("instance_seed", derive_seed(seed, kInstanceStream));
  Json c{{"family", family}};
  if (family == "random_table") {
    const TraceSpace space = parse_space(root.sub("space"), 4);
    if (space.problem_kind != ProblemKind::Enumerated) throw ConfigError("space.kind", "random_table needs enumerated problems");
    c["size"] = positive(cls.get<std::size_t>("size", 256), cls.at("size"));
    c["truth_yes_rate"] = probability(cls.get<double>("truth_yes_rate", 0.85), cls.at("truth_yes_rate"));
    const auto flip = cls.range("flip", {1e-3, 0.5});
    probability(flip.first, cls.at("flip"));
    probability(flip.second, cls.at("flip"));
    c["flip"] = {flip.first, flip.second};
    Section dist = root.sub("distribution");
    out["distribution"] = {{"size", positive(dist.get<std::size_t>("size", 200), dist.at("size"))},
                           {"weights", weights_flag(dist, "weights") ? "random" : "uniform"}};
    dist.finish();
    out["corruption"] = probability(root.get<double>("corruption", 0.0), "corruption");
    out["space"] = space_to_json(space);
  } else if (family == "gold_perturbation") {
    const TraceSpace space = parse_space(root.sub("space"), 50);
    if (space.problem_kind != ProblemKind::Enumerated || space.problem_count == 0) {
      throw ConfigError("space", "gold_perturbation needs a finite enumerated problem set");
    }
    c["size"] = positive(cls.get<std::size_t>("size", 64), cls.at("size"));
    const auto q = cls.range("q", {0.005, 0.5});
    probability(q.first, cls.at("q"));
    probability(q.second, cls.at("q"));
    c["q"] = {q.first, q.second};
    Json kinds = Json::object();
    if (cls.has("perturbations")) {
      const Json& p = cls.raw("perturbations");
      if (!p.is_object() || p.empty()) throw ConfigError(cls.at("perturbations"), "expected {kind: weight}");
      for (const auto& [name, w] : p.items()) {
        const std::string path = cls.at("perturbations") + "." + name;
        try {
          perturbation_from_string(name);
        } catch (const Error&) {
          throw ConfigError(path, "unknown perturbation");
        }
        if (!w.is_number() || w.get<double>() < 0.0) throw ConfigError(path, "weight must be a nonnegative number");
        kinds[name] = w.get<double>();
      }
    } else {
      kinds = {{"drop_leaf", 1.0}, {"extra_path", 1.0}};
    }
    c["perturbations"] = kinds;
    Section gold = root.sub("gold");
    const auto k = gold.range("k", {1, 3});
    if (k.first < 1) throw ConfigError(gold.at("k"), "k must be at least 1");
    out["gold"] = {{"k", {static_cast<std::size_t>(k.first), static_cast<std::size_t>(k.second)}},
                   {"weights", weights_flag(gold, "weights") ? "random" : "uniform"}};
    gold.finish();
    Section dist = root.sub("distribution");
    out["distribution"] = {{"weights", weights_flag(dist, "weights") ? "random" : "uniform"}};
    dist.finish();
    out["space"] = space_to_json(space);
  } else if (family == "axiom_subset") {
    const TraceSpace space = parse_space(root.sub("space"), 1);
    if (space.alphabet_size > 63) throw ConfigError("space.alphabet", "axiom_subset supports at most 63 axioms");
    if (space.problem_count == 0) throw ConfigError("space.problems", "must be positive");
    const auto sigma = cls.need<std::uint64_t>("truth_sigma");
    if (sigma == 0 || sigma >> space.alphabet_size) throw ConfigError(cls.at("truth_sigma"), "must be a nonempty subset of Σ");
    c["truth_sigma"] = sigma;
    out["space"] = space_to_json(space);
  } else if (family == "partition") {
    const TraceSpace space = parse_space(root.sub("space"), 1);
    c["cells"] = positive(cls.need<std::size_t>("cells"), cls.at("cells"));
    c["hidden"] = cls.get<std::size_t>("hidden", 0);
    if (c["hidden"].get<std::size_t>() >= c["cells"].get<std::size_t>()) throw ConfigError(cls.at("hidden"), "must be < cells");
    out["space"] = space_to_json(space);
  } else if (family == "explicit") {
    const TraceSpace space = parse_space(root.sub("space"), 0);
    const Json& members = cls.raw("members");
    if (!members.is_array() || members.empty()) throw ConfigError(cls.at("members"), "expected a nonempty array");
    for (std::size_t i = 0; i < members.size(); ++i) {
      try {
        concrete_verifier_from_json(members[i], space);
      } catch (const ConfigError& e) {
        throw ConfigError(cls.at("members") + "[" + std::to_string(i) + "]." + e.path(), e.what());
      } catch (const Error& e) {
        throw ConfigError(cls.at("members") + "[" + std::to_string(i) + "]", e.what());
      }
    }
    c["members"] = members;
    if (cls.has("truth")) {
      const auto t = cls.need<std::size_t>("truth");
      if (t >= members.size()) throw ConfigError(cls.at("truth"), "index out of range");
      c["truth"] = t;
    }
    out["space"] = space_to_json(space);
  } else {
    throw ConfigError(cls.at("family"), "unknown class family \"" + family + "\"");
  }
  cls.finish();
  out["class"] = c;
  return out;
}

GoldClassParams gold_class_params(const Json& inst) {
  if (inst.at("class").at("family") != "gold_perturbation") {
    throw ConfigError("class.family", "this experiment needs the gold_perturbation family");
  }
  const Json& s = inst.at("space");
  GoldClassParams p;
  p.gold.space = TraceSpace(s.at("alphabet").get<std::size_t>(), s.at("horizon").get<std::size_t>(),
                            ProblemKind::Enumerated, s.at("problems").get<std::size_t>());
  p.gold.k_min = inst.at("gold").at("k")[0].get<std::size_t>();
  p.gold.k_max = inst.at("gold").at("k")[1].get<std::size_t>();
  p.gold.random_weights = inst.at("gold").at("weights") == "random";
  const Json& c = inst.at("class");
  p.class_size = c.at("size").get<std::size_t>();
  p.q_min = c.at("q")[0].get<double>();
  p.q_max = c.at("q")[1].get<double>();
  p.kinds.clear();
  for (const auto& [name, w] : c.at("perturbations").items()) {
    p.kinds.emplace_back(perturbation_from_string(name), w.get<double>());
  }
  p.random_problem_weights = inst.at("distribution").at("weights") == "random";
  return p;
}

const std::set<std::string> kExperiments{
    "svpac",           "tvpac",          "gamma_tvpac",         "agnostic_svpac",       "agnostic_tvpac",
    "closure_curve",   "algorithm1_soundness", "lower_bound_proper", "lower_bound_improper",
    "online_mistakes", "generator_equivalence", "interval_witness",  "oracle_equivalence"};

bool needs_instance(const std::string& e) {
  return e != "lower_bound_proper" && e != "lower_bound_improper" && e != "online_mistakes" &&
         e != "interval_witness" && e != "oracle_equivalence";
}

}  // namespace

Json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin, std::string("malformed JSON: ") + e.what());
  }
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

Scenario parse_scenario(const Json& config) {
  Section root(config, "");
  const auto version = root.need<int>("schema_version");
  if (version != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version));
  }
  Scenario s;
  s.name = root.need<std::string>("scenario");
  s.experiment = root.need<std::string>("experiment");
  if (!kExperiments.count(s.experiment)) throw ConfigError("experiment", "unknown experiment \"" + s.experiment + "\"");

  ExperimentConfig& r = s.run;
  r.epsilon = root.get<double>("epsilon", r.epsilon);
  r.delta = root.get<double>("delta", r.delta);
  r.eta = root.get<double>("eta", r.eta);
  if (root.has("m")) {
    const Json& m = root.raw("m");
    if (m.is_string() && m == "formula") {
      r.m.reset();
    } else if (m.is_number_integer() && m.get<std::int64_t>() >= 0) {
      r.m = m.get<std::uint64_t>();
    } else {
      throw ConfigError("m", "expected \"formula\" or a nonnegative integer");
    }
  }
  r.trials = root.get<std::uint64_t>("trials", r.trials);
  r.master_seed = root.get<std::uint64_t>("seed", r.master_seed);
  r.enumeration_budget = positive(root.get<std::uint64_t>("enumeration_budget", r.enumeration_budget),
                                  "enumeration_budget");
  r.threads = root.get<std::size_t>("threads", 1);
  r.confidence = root.get<double>("confidence", r.confidence);
  if (!(r.epsilon > 0.0 && r.epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0, 1)");
  if (!(r.delta > 0.0 && r.delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  if (!(r.eta > 0.0 && r.eta < 1.0)) throw ConfigError("eta", "must lie in (0, 1)");
  if (!(r.confidence > 0.0 && r.confidence < 1.0)) throw ConfigError("confidence", "must lie in (0, 1)");
  if (r.trials == 0) throw ConfigError("trials", "must be positive");

  if (root.has("curve")) {
    Section c = root.sub("curve");
    CurveSpec spec;
    spec.grid = c.counts("m_grid");
    spec.trials = c.get<std::uint64_t>("trials", 0);
    c.finish();
    s.curve = spec;
  }

  if (needs_instance(s.experiment)) {
    s.instance = normalize_instance(root, r.master_seed);
  }

  Json& x = s.extra;
  x = Json::object();
  if (s.experiment == "gamma_tvpac") {
    Section g = root.sub("gamma");
    x["compare_closure"] = g.get<bool>("compare_closure", false);
    x["exhaustive_false_positive_check"] = g.get<bool>("exhaustive_false_positive_check", false);
    g.finish();
  } else if (s.experiment == "closure_curve") {
    if (!s.curve) throw ConfigError("curve", "closure_curve needs curve.m_grid");
    x["m_limit"] = positive(root.need<double>("m_limit"), "m_limit");
  } else if (s.experiment == "algorithm1_soundness") {
    x["m_max"] = root.need<std::uint64_t>("m_max");
  } else if (s.experiment == "lower_bound_proper" || s.experiment == "lower_bound_improper") {
    Section lb = root.sub("lower_bound");
    x["cells"] = positive(lb.get<std::size_t>("cells", 64), lb.at("cells"));
    x["alphabet"] = positive(lb.get<std::size_t>("alphabet", 2), lb.at("alphabet"));
    x["horizon"] = positive(lb.get<std::size_t>("horizon", 8), lb.at("horizon"));
    x["m"] = lb.get<std::uint64_t>("m", 32);
    lb.finish();
    if (s.experiment == "lower_bound_improper" && x["cells"].get<std::size_t>() % 4 != 0) {
      throw ConfigError("lower_bound.cells", "must be a multiple of 4");
    }
  } else if (s.experiment == "online_mistakes") {
    Section o = root.sub("online");
    const auto dims = o.range("dims", {2, 6});
    if (dims.first < 1) throw ConfigError(o.at("dims"), "dimensions start at 1");
    x["dims"] = {static_cast<std::size_t>(dims.first), static_cast<std::size_t>(dims.second)};
    x["length"] = positive(o.get<std::size_t>("length", 40), o.at("length"));
    x["adversarial"] = o.get<bool>("adversarial", true);
    o.finish();
  } else if (s.experiment == "oracle_equivalence") {
    x["max_traces"] = positive(root.get<std::uint64_t>("max_traces", 4096), "max_traces");
  }
  root.finish();
  return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(load_config_file(path)); }

std::string spec_hash(const Json& spec) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : spec.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 15];
  return out;
}

BuiltInstance build_instance(const Json& inst) {
  BuiltInstance out;
  const Json& c = inst.at("class");
  const std::string family = c.at("family");
  const std::uint64_t seed = inst.at("seed").get<std::uint64_t>();
  out.space = space_from_json(inst.at("space"));
  if (family == "random_table") {
    RandomTableParams p;
    p.space = out.space;
    p.class_size = c.at("size");
    p.truth_yes_rate = c.at("truth_yes_rate");
    p.flip_min = c.at("flip")[0];
    p.flip_max = c.at("flip")[1];
    p.support_size = inst.at("distribution").at("size");
    p.random_weights = inst.at("distribution").at("weights") == "random";
    SimpleInstance si = make_random_table_instance(p, seed);
    const double corruption = inst.at("corruption");
    if (corruption > 0.0) si = corrupt_labels(si, corruption, derive_seed(seed, 1));
    out.cls = si.cls;
    out.simple = std::move(si);
  } else if (family == "gold_perturbation") {
    TrustableInstance ti = make_gold_perturbation_instance(gold_class_params(inst), seed);
    out.cls = ti.cls;
    out.trustable = std::move(ti);
  } else if (family == "axiom_subset") {
    TrustableInstance ti = make_axiom_subset_instance(out.space.alphabet_size, out.space.horizon,
                                                      out.space.problem_count, c.at("truth_sigma"));
    out.cls = ti.cls;
    out.trustable = std::move(ti);
  } else if (family == "partition") {
    out.cls = std::make_shared<PartitionClass>(out.space, c.at("cells"), c.at("hidden"));
  } else if (family == "explicit") {
    std::vector<VerifierHandle> members;
    for (const auto& m : c.at("members")) members.push_back(concrete_verifier_from_json(m, out.space));
    std::optional<std::uint64_t> truth;
    if (c.contains("truth")) truth = c.at("truth").get<std::uint64_t>();
    out.cls = std::make_shared<FiniteClass>(out.space, std::move(members), truth, "explicit");
  } else {
    throw ConfigError("class.family", "unknown class family \"" + family + "\"");
  }
  return out;
}

ScenarioOutcome run_scenario(const Scenario& scenario, RunMode mode,
                             const std::vector<std::uint64_t>& grid_override) {
  ExperimentConfig cfg = scenario.run;
  if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  const std::string& e = scenario.experiment;
  const Json& x = scenario.extra;
  ScenarioOutcome out;

  std::optional<BuiltInstance> built;
  if (needs_instance(e) && e != "algorithm1_soundness" && e != "generator_equivalence") {
    built = build_instance(scenario.instance);
  }
  auto simple = [&]() -> const SimpleInstance& {
    if (!built->simple) throw ConfigError("class.family", e + " needs the random_table family");
    return *built->simple;
  };
  auto trustable = [&]() -> const TrustableInstance& {
    if (!built->trustable) throw ConfigError("class.family", e + " needs a class with a gold reasoner");
    return *built->trustable;
  };

  std::function<ExperimentReport(const ExperimentConfig&)> rate;
  const bool has_curve = e == "svpac" || e == "agnostic_svpac" || e == "tvpac" || e == "agnostic_tvpac" ||
                         e == "gamma_tvpac" || e == "closure_curve";
  if (mode == RunMode::Curve && !has_curve) throw ConfigError("experiment", e + " has no sample-size curve");
  if (e == "svpac") {
    rate = [&](const ExperimentConfig& c) { return run_svpac_experiment(simple(), c); };
  } else if (e == "agnostic_svpac") {
    rate = [&](const ExperimentConfig& c) { return run_agnostic_experiment(simple(), c); };
  } else if (e == "tvpac") {
    rate = [&](const ExperimentConfig& c) { return run_tvpac_experiment(trustable(), c); };
  } else if (e == "agnostic_tvpac") {
    rate = [&](const ExperimentConfig& c) { return run_agnostic_tvpac_experiment(trustable(), c); };
  } else if (e == "gamma_tvpac") {
    GammaOptions opt;
    opt.compare_closure = x.at("compare_closure");
    opt.exhaustive_false_positive_check = x.at("exhaustive_false_positive_check");
    rate = [&, opt](const ExperimentConfig& c) { return run_gamma_tvpac_experiment(trustable(), c, opt); };
  }

  std::vector<std::uint64_t> grid = grid_override;
  if (grid.empty() && scenario.curve) grid = scenario.curve->grid;
  const std::uint64_t curve_trials = scenario.curve && scenario.curve->trials ? scenario.curve->trials : cfg.trials;

  if (rate) {
    if (mode == RunMode::Report) {
      out.report = rate(cfg);
    } else {
      if (grid.empty()) throw ConfigError("curve.m_grid", "no m grid given");
      ExperimentConfig c = cfg;
      c.trials = curve_trials;
      out.curve = run_curve(grid, [&](std::uint64_t m) {
        c.m = m;
        return rate(c);
      });
    }
  } else if (e == "closure_curve") {
    ExperimentConfig c = cfg;
    c.trials = curve_trials;
    ClosureCurveResult r = run_closure_curve(trustable(), grid, c, x.at("m_limit"));
    out.report = std::move(r.summary);
    out.curve = std::move(r.curve);
  } else if (e == "algorithm1_soundness") {
    out.report = run_algorithm1_soundness(gold_class_params(scenario.instance), x.at("m_max"), cfg);
  } else if (e == "generator_equivalence") {
    out.report = run_generator_equivalence(gold_class_params(scenario.instance), cfg.trials, cfg);
  } else if (e == "lower_bound_proper" || e == "lower_bound_improper") {
    LowerBoundConfig lb;
    lb.cells = x.at("cells");
    lb.alphabet = x.at("alphabet");
    lb.horizon = x.at("horizon");
    lb.m = x.at("m");
    lb.trials = cfg.trials;
    lb.master_seed = cfg.master_seed;
    lb.threads = cfg.threads;
    lb.confidence = cfg.confidence;
    out.report = e == "lower_bound_proper" ? run_lower_bound_proper(lb) : run_lower_bound_improper(lb);
  } else if (e == "online_mistakes") {
    OnlineConfig oc;
    oc.random_streams = cfg.trials;
    oc.dim_min = x.at("dims")[0];
    oc.dim_max = x.at("dims")[1];
    oc.length = x.at("length");
    oc.adversarial = x.at("adversarial");
    oc.master_seed = cfg.master_seed;
    oc.threads = cfg.threads;
    out.report = run_online_mistakes(oc);
  } else if (e == "interval_witness") {
    out.report = run_interval_witness();
  } else if (e == "oracle_equivalence") {
    out.report = run_oracle_equivalence(cfg.trials, x.at("max_traces"), cfg);
  }
  out.passed = rate && mode == RunMode::Curve ? true : out.report.check && out.report.check->passed;
  return out;
}

}  // namespace cotv
