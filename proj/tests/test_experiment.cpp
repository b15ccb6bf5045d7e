#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "declab/constants.hpp"
#include "declab/experiment.hpp"

using namespace declab;

namespace {

ConstantEstimate cell(const std::string& space, double p, double ratio) {
  ConstantEstimate e;
  e.space = space;
  e.p = p;
  e.ratio = ratio;
  e.samples = 0;
  e.seed = 1;
  e.witness_hash = "00000000000000aa";
  return e;
}

Json parse_output(const RunResult& r) { return Json::parse(r.output); }

}  // namespace

TEST_CASE("config round trip and hash") {
  ExperimentConfig c;
  c.command = "atlas";
  c.spaces = {"linf:2", "l2:2"};
  c.p = {1.0, 2.5};
  c.q = 3.0;
  c.b = 0.01;
  c.seed = 123456789012345ULL;
  c.khintchine = "fixed:1.5";
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());
  CHECK(config_hash(back) == config_hash(c));

  auto other = c;
  other.workers = 7;
  other.out = "x.json";
  other.format = "csv";
  CHECK(config_hash(other) == config_hash(c));
  other.seed += 1;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("config errors give exit code 2") {
  CHECK(run_json("verify", R"({"bogus": 1})").exit_code == 2);
  CHECK(run_json("verify", R"({"depth": "four"})").exit_code == 2);
  CHECK(run_json("verify", R"({"depth": 30})").exit_code == 2);
  CHECK(run_json("verify", R"({"format": "xml"})").exit_code == 2);
  CHECK(run_json("verify", R"({"suite": "nope"})").exit_code == 2);
  CHECK(run_json("verify", R"({"space": "l9"})").exit_code == 2);
  CHECK(run_json("launch", "{}").exit_code == 2);
  CHECK(run_json("verify", "{not json").exit_code == 2);
  const auto r = run_json("bounds", R"({"formula": "prop32-c", "p": [2], "q": 2, "b": 0.5})");
  CHECK(r.exit_code == 2);
  CHECK(r.error.find("b-out-of-range") != std::string::npos);
}

TEST_CASE("verify envelope") {
  const auto r = run_json("verify", R"({"suite": "levy", "depth": 3, "trials": 20, "seed": 7})");
  REQUIRE(r.exit_code == 0);
  const auto j = parse_output(r);
  CHECK(j.at("tool") == "decoupling-lab");
  CHECK(j.at("version") == version());
  CHECK(j.at("seed") == 7);
  CHECK(j.at("method") == "exact");
  CHECK(j.at("config_hash").get<std::string>().size() == 16);
  CHECK(j.at("results").at("summary").at("exact_violations") == 0);
  CHECK(j.at("results").at("summary").at("reports") == 40);
  const auto csv = run_json("verify", R"({"suite": "levy", "depth": 3, "trials": 2, "format": "csv"})");
  CHECK(csv.output.rfind("suite,trial,space,id,lhs,rhs,margin,holds,status,method\n", 0) == 0);
}

TEST_CASE("bounds output") {
  const auto r = run_json("bounds", R"({"formula": "thm41-dq", "p": [2], "q": 4, "Dp": 1})");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("e * 2^11.75") != std::string::npos);
  const auto garling = run_json("bounds", R"({"formula": "garling-lower", "p": [2], "d": 16, "khintchine": "unit"})");
  CHECK(garling.exit_code == 0);
  const auto linf = run_json("bounds", R"({"formula": "linf-upper", "p": [2], "d": 16})");
  CHECK(linf.exit_code == 0);
  CHECK(linf.output.find("D_R is a placeholder") != std::string::npos);
}

TEST_CASE("estimate and atlas") {
  const auto est = run_json("estimate", R"({"space": "linf:2", "p": 2, "depth": 3, "restarts": 2, "budget": 20,
                                             "family": "garling-linf", "seed": 1})");
  REQUIRE(est.exit_code == 0);
  const auto j = parse_output(est);
  const auto back = estimate_from_json(j.at("results"));
  CHECK(replay(back) == doctest::Approx(back.ratio).epsilon(1e-9));

  const auto atlas = run_json("atlas", R"({"spaces": ["linf:2", "l2:2"], "p": [1, 2], "depth": 2, "restarts": 1,
                                            "budget": 5, "format": "csv"})");
  REQUIRE(atlas.exit_code == 0);
  CHECK(atlas.output.rfind("space,p,direction,ratio,method,samples,seed,witness_hash\n", 0) == 0);
  CHECK(std::count(atlas.output.begin(), atlas.output.end(), '\n') == 5);
}

TEST_CASE("bdg runs") {
  const auto r = run_json("bdg", R"({"space": "l2:2", "p": [1, 2], "paths": 500, "steps": 16, "intervals": 4})");
  REQUIRE(r.exit_code == 0);
  CHECK(parse_output(r).at("method") == "mc");
  const auto bad = run_json("bdg", R"({"suite": "core", "family": "sign-current", "paths": 10})");
  CHECK(bad.exit_code == 2);
  CHECK(run_json("bdg", R"({"suite": "type2", "space": "linf:2", "paths": 10})").exit_code == 2);
}

TEST_CASE("plot data") {
  std::vector<std::string> warnings;
  CHECK(emit_plot_data({}, warnings) == estimates_csv_header() + "\n");
  CHECK(warnings.empty());

  const auto one = emit_plot_data({cell("linf:2", 2.0, 1.1)}, warnings);
  CHECK(one == estimates_csv_header() + "\nlinf:2,2,decouple-upper,1.1000000000000001,exact,0,1,00000000000000aa\n");
  CHECK(warnings.empty());

  const auto dup = emit_plot_data({cell("linf:2", 2.0, 1.1), cell("l2:2", 2.0, 1.0), cell("linf:2", 2.0, 1.25)},
                                  warnings);
  CHECK(dup == estimates_csv_header() +
                   "\nlinf:2,2,decouple-upper,1.25,exact,0,1,00000000000000aa\n"
                   "l2:2,2,decouple-upper,1,exact,0,1,00000000000000aa\n");
  CHECK(warnings.size() == 1);
}

TEST_CASE("worker count does not change reports") {
  for (const char* cfg : {R"({"suite": "all", "spaces": ["lp:0.5:2", "l2:4", "linf:4"], "p": [0.5, 1, 2, 4],
                              "depth": 3, "trials": 12, "samples": 2000, "seed": 4})",
                          R"({"suite": "tail", "method": "mc", "depth": 3, "trials": 6, "samples": 5000})"}) {
    std::string base = cfg;
    base.pop_back();
    const auto one = run_json("verify", base + R"(, "workers": 1})");
    const auto four = run_json("verify", base + R"(, "workers": 4})");
    CHECK(one.exit_code == 0);
    CHECK(one.output == four.output);
  }
}
