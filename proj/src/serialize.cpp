#include "cotv/serialize.hpp"

#include <fstream>
#include <sstream>

#include "cotv/config.hpp"
#include "cotv/gold.hpp"
#include "cotv/trace_io.hpp"
#include "cotv/verifier_classes.hpp"

namespace cotv {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(key, "required field is missing");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

ProblemKind parse_kind(const std::string& k) {
  if (k == "enumerated") return ProblemKind::Enumerated;
  if (k == "real") return ProblemKind::RealScalar;
  if (k == "graph") return ProblemKind::Graph;
  throw ConfigError("space.kind", "unknown problem kind \"" + k + "\"");
}

std::string kind_tag(ProblemKind k) {
  switch (k) {
    case ProblemKind::Enumerated: return "enumerated";
    case ProblemKind::RealScalar: return "real";
    case ProblemKind::Graph: return "graph";
  }
  return "enumerated";
}

}  // namespace

Json space_to_json(const TraceSpace& space) {
  return {{"alphabet", space.alphabet_size},
          {"horizon", space.horizon},
          {"kind", kind_tag(space.problem_kind)},
          {"problems", space.problem_count}};
}

TraceSpace space_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("space", "expected an object");
  try {
    return TraceSpace(field<std::size_t>(j, "alphabet"), field<std::size_t>(j, "horizon"),
                      parse_kind(j.value("kind", std::string("enumerated"))), j.value("problems", std::size_t{0}));
  } catch (const ConfigError& e) {
    if (e.path().starts_with("space")) throw;
    throw ConfigError("space." + e.path(), e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError("space", e.what());
  }
}

std::string bits_to_hex(const std::vector<std::uint64_t>& words) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(words.size() * 16);
  for (std::uint64_t w : words) {
    for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(w >> shift) & 15]);
  }
  return out;
}

std::vector<std::uint64_t> bits_from_hex(const std::string& hex) {
  if (hex.size() % 16 != 0) throw ConfigError("bits", "hex length must be a multiple of 16");
  std::vector<std::uint64_t> out(hex.size() / 16, 0);
  for (std::size_t i = 0; i < hex.size(); ++i) {
    const char c = hex[i];
    std::uint64_t v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw ConfigError("bits", "not a hex digit at offset " + std::to_string(i));
    out[i / 16] = (out[i / 16] << 4) | v;
  }
  return out;
}

Json concrete_verifier_to_json(const Verifier& v) {
  Json j;
  j["space"] = space_to_json(v.space());
  if (dynamic_cast<const AcceptAllVerifier*>(&v)) {
    j["family"] = "accept_all";
  } else if (dynamic_cast<const RejectAllVerifier*>(&v)) {
    j["family"] = "reject_all";
  } else if (auto* a = dynamic_cast<const AxiomSubsetVerifier*>(&v)) {
    j["family"] = "axiom_subset";
    j["sigma"] = a->sigma();
  } else if (auto* i = dynamic_cast<const IntervalVerifier*>(&v)) {
    j["family"] = "interval";
    j["r1"] = i->r1();
    j["r2"] = i->r2();
  } else if (auto* l = dynamic_cast<const LinearThresholdVerifier*>(&v)) {
    j["family"] = "linear_threshold";
    j["w0"] = l->w0();
    j["w"] = l->w();
  } else if (auto* g = dynamic_cast<const GraphPathVerifier*>(&v)) {
    j["family"] = "graph_path";
    j["vertices"] = g->vertices();
    j["extra_edges"] = g->extra_edges();
  } else if (auto* t = dynamic_cast<const TableVerifier*>(&v)) {
    j["family"] = "table";
    j["name"] = t->describe();
    j["bits"] = bits_to_hex(t->bits());
  } else if (auto* tc = dynamic_cast<const TreeCharacteristicVerifier*>(&v)) {
    j["family"] = "tree_characteristic";
    const GoldReasoner& gold = tc->gold();
    if (gold.k_bound()) j["k"] = *gold.k_bound();
    Json entries = Json::array();
    for (const auto& x : gold.problems()) {
      const GoldEntry& e = gold.entry(x);
      entries.push_back({{"problem", format_problem(x)}, {"traces", e.traces}, {"weights", e.weights}});
    }
    j["gold"] = entries;
  } else {
    throw InvalidInput("verifier '" + v.describe() + "' has no concrete serialization");
  }
  return j;
}

VerifierHandle concrete_verifier_from_json(const Json& j, const TraceSpace& space) {
  if (!j.is_object()) throw ConfigError("family", "verifier must be an object");
  if (j.contains("space") && space_from_json(j.at("space")) != space) {
    throw ConfigError("space", "does not match the enclosing trace space");
  }
  const auto family = field<std::string>(j, "family");
  if (family == "accept_all") return std::make_shared<AcceptAllVerifier>(space);
  if (family == "reject_all") return std::make_shared<RejectAllVerifier>(space);
  if (family == "axiom_subset") return std::make_shared<AxiomSubsetVerifier>(space, field<std::uint64_t>(j, "sigma"));
  if (family == "interval") {
    return std::make_shared<IntervalVerifier>(space, field<double>(j, "r1"), field<double>(j, "r2"));
  }
  if (family == "linear_threshold") {
    return std::make_shared<LinearThresholdVerifier>(space, field<double>(j, "w0"), field<std::vector<double>>(j, "w"));
  }
  if (family == "graph_path") {
    return std::make_shared<GraphPathVerifier>(space, field<std::size_t>(j, "vertices"),
                                               field<std::uint64_t>(j, "extra_edges"));
  }
  if (family == "table") {
    return std::make_shared<TableVerifier>(space, bits_from_hex(field<std::string>(j, "bits")),
                                           j.value("name", std::string("table")));
  }
  if (family == "tree_characteristic") {
    std::optional<std::size_t> k;
    if (j.contains("k")) k = field<std::size_t>(j, "k");
    auto gold = std::make_shared<GoldReasoner>(space, k);
    const auto entries = field<Json>(j, "gold");
    if (!entries.is_array()) throw ConfigError("gold", "expected an array of entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      try {
        const Json& e = entries[i];
        gold->add(parse_problem(field<std::string>(e, "problem")), field<std::vector<Trace>>(e, "traces"),
                  e.value("weights", std::vector<double>{}));
      } catch (const Error& err) {
        throw ConfigError("gold[" + std::to_string(i) + "]", err.what());
      }
    }
    return std::make_shared<TreeCharacteristicVerifier>(gold);
  }
  throw ConfigError("family", "unknown verifier family \"" + family + "\"");
}

Json member_to_json(const Json& instance, std::uint64_t index) {
  return {{"family", "member"}, {"class", instance}, {"index", index}, {"class_hash", spec_hash(instance)}};
}

Json intersection_to_json(const Json& instance, const std::vector<std::uint64_t>& members) {
  return {{"family", "intersection"}, {"class", instance}, {"members", members}, {"class_hash", spec_hash(instance)}};
}

VerifierHandle verifier_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("family", "verifier must be an object");
  const auto family = field<std::string>(j, "family");
  if (family != "member" && family != "intersection") {
    return concrete_verifier_from_json(j, space_from_json(field<Json>(j, "space")));
  }
  const Json instance = field<Json>(j, "class");
  if (field<std::string>(j, "class_hash") != spec_hash(instance)) {
    throw ConfigError("class_hash", "does not match the class specification");
  }
  const BuiltInstance built = build_instance(instance);
  if (family == "member") return built.cls->member(field<std::uint64_t>(j, "index"));
  ConsistentSet set{built.cls, field<std::vector<std::uint64_t>>(j, "members")};
  const std::uint64_t size = built.cls->enumerable_size();
  for (auto id : set.member_ids) {
    if (id >= size) throw ConfigError("members", "member id " + std::to_string(id) + " out of range");
  }
  return std::make_shared<IntersectionVerifier>(std::move(set));
}

VerifierHandle load_verifier_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open verifier file");
  std::stringstream ss;
  ss << in.rdbuf();
  return verifier_from_json(parse_config_text(ss.str(), path));
}

}  // namespace cotv
