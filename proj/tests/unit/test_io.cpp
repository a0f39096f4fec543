#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cotv/config.hpp"
#include "cotv/serialize.hpp"
#include "cotv/trace_io.hpp"
#include "cotv/verifier_classes.hpp"

using namespace cotv;

namespace {

std::string config_path(const char* name) { return std::string(COTV_CONFIG_DIR) + "/" + name; }

std::size_t parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_traces(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string config_error_path(const Json& j) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST_CASE("trace file parsing") {
  std::istringstream in(
      "# header\n"
      "id:3\t0,1,2\tA\n"
      "\n"
      "real:0.5\t2\tF:1\n"
      "graph:0:1,2\t1,0\tV:YN\n");
  const auto recs = read_traces(in);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].line == 2);
  CHECK(std::get<ProblemId>(recs[0].problem).value == 3);
  CHECK(recs[0].trace == Trace{0, 1, 2});
  CHECK(recs[0].label->is_accepted());
  CHECK(recs[1].label->fault_index() == 1);
  CHECK(recs[2].label_vector->size() == 2);
  CHECK(format_record(recs[1].problem, recs[1].trace, recs[1].label).find("F:1") != std::string::npos);
}

TEST_CASE("trace parse errors carry the line number") {
  CHECK(parse_error_line("id:1\t0\nid:x\t0\n") == 2);
  CHECK(parse_error_line("id:1\t0\n# c\nid:1\n") == 3);
  CHECK(parse_error_line("id:1\t0,,1\n") == 1);
  CHECK(parse_error_line("id:1\t0\tQ\n") == 1);
  // validation against a space: symbol 7 is out of range for |Σ| = 4
  const TraceSpace space(4, 3, ProblemKind::Enumerated, 5);
  std::istringstream bad("id:0\t1\nid:1\t7\n");
  try {
    read_traces(bad, &space);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"c01_svpac_rate.json", "c05_closure_curve.json", "c12_oracle_equivalence.json"}) {
    const auto s = load_scenario(config_path(name));
    CHECK_FALSE(s.name.empty());
    CHECK(s.run.trials > 0);
  }
  const auto s = load_scenario(config_path("c01_svpac_rate.json"));
  CHECK_FALSE(s.run.m.has_value());  // "formula"
  REQUIRE(s.curve);
  CHECK(s.curve->grid.size() == 5);
}

TEST_CASE("config errors name the field") {
  const Json base = load_config_file(config_path("c01_svpac_rate.json"));
  Json j = base;
  j["class"]["size"] = "big";
  CHECK(config_error_path(j) == "class.size");
  j = base;
  j["class"]["colour"] = 1;
  CHECK(config_error_path(j) == "class.colour");
  j = base;
  j["bogus"] = true;
  CHECK(config_error_path(j) == "bogus");
  j = base;
  j["delta"] = 1.5;
  CHECK(config_error_path(j) == "delta");
  j = base;
  j["schema_version"] = 99;
  CHECK(config_error_path(j) == "schema_version");
  j = base;
  j.erase("experiment");
  CHECK(config_error_path(j) == "experiment");
  CHECK_THROWS_AS(parse_config_text("{\"a\": }"), ConfigError);
  CHECK(parse_config_text("// c\n{\"a\": 1 /* x */}").at("a") == 1);
}

TEST_CASE("concrete verifier JSON round trips") {
  const TraceSpace space(2, 3, ProblemKind::Enumerated, 3);
  Rng rng(5);
  const auto table = TableVerifier::tabulate(space, [&](std::size_t, Prefix) { return rng.bernoulli(0.5); }, "t");
  const Json j = concrete_verifier_to_json(*table);
  CHECK(j.at("family") == "table");
  CHECK(j.at("bits").get<std::string>().size() % 16 == 0);
  const auto back = verifier_from_json(j);
  const auto problems = enumerated_problems(3);
  for (const auto& x : problems) {
    for (const auto& t : enumerate_accepted(AcceptAllVerifier(space), x)) {
      for (std::size_t len = 1; len <= t.size(); ++len) {
        const Prefix p(t.data(), len);
        CHECK(back->accepts(x, p) == table->accepts(x, p));
      }
    }
  }
  CHECK(bits_from_hex(bits_to_hex({0x0123456789abcdefULL, 1})) == std::vector<std::uint64_t>{0x0123456789abcdefULL, 1});
  CHECK_THROWS_AS(bits_from_hex("12g4567812345678"), ConfigError);

  const AxiomSubsetVerifier ax(space, 0b10);
  CHECK(verifier_from_json(concrete_verifier_to_json(ax))->accepts(problems[0], Trace{1, 1}));
  const IntervalVerifier iv(TraceSpace(3, 2, ProblemKind::RealScalar, 0), 1.0, 2.5);
  const auto ivj = concrete_verifier_to_json(iv);
  CHECK(ivj.at("r2") == 2.5);
  CHECK(verifier_from_json(ivj)->accepts(Problem{0.0}, Trace{2}) == iv.accepts(Problem{0.0}, Trace{2}));
  CHECK_THROWS_AS(verifier_from_json(Json{{"family", "nope"}, {"space", space_to_json(space)}}), ConfigError);
}

TEST_CASE("member and intersection verifiers check the class hash") {
  const auto s = load_scenario(config_path("c01_svpac_rate.json"));
  const BuiltInstance built = build_instance(s.instance);
  Json m = member_to_json(s.instance, 3);
  const auto v = verifier_from_json(m);
  const auto direct = built.cls->member(3);
  for (const auto& pt : built.simple->dist.support()) {
    CHECK(v->run(pt.problem, pt.trace) == direct->run(pt.problem, pt.trace));
  }
  m["class_hash"] = "0000000000000000";
  CHECK_THROWS_AS(verifier_from_json(m), ConfigError);

  Json in = intersection_to_json(s.instance, {1, 2});
  CHECK_NOTHROW(verifier_from_json(in));
  in["members"] = std::vector<std::uint64_t>{1, 100000};
  CHECK_THROWS_AS(verifier_from_json(in), ConfigError);
  CHECK(spec_hash(s.instance).size() == 16);
}
