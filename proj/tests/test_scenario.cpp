#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include "fibreqm/catalog.hpp"
#include "fibreqm/errors.hpp"
#include "fibreqm/report.hpp"
#include "fibreqm/runner.hpp"
#include "fibreqm/scenario.hpp"

using namespace fqm;
using nlohmann::json;

namespace {

const char* kMinimal = R"({
  "schema": "fibreqm.scenario/1",
  "name": "minimal",
  "dimension": 2,
  "grid": {"t0": 0, "t1": 1, "steps": 100},
  "hamiltonian": {"kind": "constant", "matrix": [[1, 0], [0, -1]]},
  "trivialization": {"kind": "identity"}
})";

ErrorCode code_of(const std::string& text) {
  try {
    (void)parse_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::string with(const std::string& key, const json& value) {
  json j = json::parse(kMinimal);
  j[key] = value;
  return j.dump();
}

}  // namespace

TEST_SUITE("scenario-cli") {

TEST_CASE("minimal config gets its defaults") {
  const ScenarioConfig cfg = parse_scenario(kMinimal);
  CHECK(cfg.dimension == 2);
  CHECK(cfg.tolerances.eq_tol == 1e-6);
  CHECK(cfg.tolerances.prop_tol == 1e-8);
  CHECK(cfg.hbar == 1.0);
  CHECK(cfg.checks == all_check_ids());
  CHECK(cfg.initial_state(0) == Complex(1, 0));
  CHECK(cfg.seed != 0);
  CHECK(cfg.base.value("kind", "") == "single_point");
  // The resolved echo parses back to the same config.
  const ScenarioConfig again = scenario_from_json(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("validation errors") {
  CHECK(code_of("{\"name\": \"x\",\n  \"dimension\": 2,,}") == ErrorCode::Parse);
  try {
    (void)parse_scenario("{\n\"name\": \"x\",\n  oops}", "bad.json");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.json:3:") != std::string::npos);
  }
  CHECK(code_of(with("observables", json::array({{{"name", "big"}, {"matrix", json::parse("[[1,0,0],[0,1,0],[0,0,1]]")}}}))) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of(with("initial_state", json::array({1, 0, 0}))) == ErrorCode::DimensionMismatch);
  CHECK(code_of(with("colour", "blue")) == ErrorCode::Schema);
  CHECK(code_of(with("checks", json::array({"state_equivalence", "vibes"}))) == ErrorCode::Schema);
  CHECK(code_of(with("grid", {{"t0", 0}, {"t1", 1}, {"steps", 1}})) == ErrorCode::Schema);
  CHECK(code_of(with("grid", {{"t0", 1}, {"t1", 0}, {"steps", 10}})) == ErrorCode::Schema);
  CHECK(code_of(with("hbar", -1.0)) == ErrorCode::Schema);
  CHECK(code_of(with("fault", "something_else")) == ErrorCode::Schema);
  CHECK(code_of(with("hamiltonian", {{"kind", "warp_drive"}})) == ErrorCode::Schema);
  CHECK(code_of(with("schema", "fibreqm.scenario/99")) == ErrorCode::Schema);
  try {
    (void)parse_scenario(with("trivialization", {{"kind", "global_phase"}, {"omgea", 1.0}}));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("omgea") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
}

TEST_CASE("matrix encoding") {
  const OperatorMatrix m = parse_matrix(json::parse("[[1, [0, 1]], [[0, -1], 2.5]]"), "m");
  CHECK(m(0, 1) == Complex(0, 1));
  CHECK(m(1, 1) == Complex(2.5, 0));
  CHECK(parse_matrix(matrix_to_json(m), "m") == m);
  CHECK_THROWS_AS(parse_matrix(json::parse("[[1, 2], [3]]"), "m"), Error);
  CHECK_THROWS_AS(parse_matrix(json::parse("[[1, \"a\"], [3, 4]]"), "m"), Error);
}

TEST_CASE("seeded families are reproducible") {
  json j = json::parse(kMinimal);
  j["dimension"] = 3;
  j["hamiltonian"] = {{"kind", "random"}};
  j["trivialization"] = {{"kind", "random_unitary"}};
  j["seed"] = 5;
  const ScenarioConfig a = scenario_from_json(j);
  const ScenarioConfig b = scenario_from_json(j);
  const Path p = build_path(a);
  CHECK(max_abs_diff(build_hamiltonian(a).at(0.3), build_hamiltonian(b).at(0.3)) == 0.0);
  CHECK(max_abs_diff(build_trivialization(a, p).at(0.3), build_trivialization(b, p).at(0.3)) == 0.0);
  CHECK(derive_seed(5, "hamiltonian") != derive_seed(5, "trivialization"));
  j["seed"] = 6;
  const ScenarioConfig c = scenario_from_json(j);
  CHECK(max_abs_diff(build_hamiltonian(a).at(0.3), build_hamiltonian(c).at(0.3)) > 0.0);
}

TEST_CASE("catalog") {
  const auto& entries = catalog();
  CHECK(entries.size() == 10);
  CHECK(std::is_sorted(entries.begin(), entries.end(),
                       [](const CatalogEntry& a, const CatalogEntry& b) { return a.name < b.name; }));
  for (const auto& cfg : catalog_scenarios()) {
    CHECK(cfg.dimension <= 8);
    CHECK(cfg.t0 == 0.0);
    CHECK(cfg.t1 == 1.0);
    CHECK(cfg.steps == 1000);
  }
  CHECK_THROWS_AS(catalog_scenario("nope"), Error);

  const auto dir = std::filesystem::temp_directory_path() / "fibreqm_catalog_test";
  std::filesystem::remove_all(dir);
  export_catalog(dir.string());
  std::ifstream manifest(dir / "manifest.json");
  const json m = json::parse(manifest);
  CHECK(m["scenarios"].size() == 10);
  CHECK(to_json(load_scenario((dir / "rabi.json").string())) == to_json(catalog_scenario("rabi")));
  std::filesystem::remove_all(dir);
}

TEST_CASE("degenerate scenario has exactly zero equivalence residuals") {
  const EquivalenceReport r = run_scenario(catalog_scenario("single_point"));
  CHECK(r.passed());
  const CheckRecord* state = r.find("state_equivalence");
  REQUIRE(state);
  for (const auto& c : state->components) {
    if (c.name == "gamma_hm_consistency") continue;
    CHECK_MESSAGE(c.residual == 0.0, c.name);
  }
}

TEST_CASE("phase gauge Rabi passes, and fails without the derivative term") {
  ScenarioConfig cfg = catalog_scenario("phase_gauge");
  const EquivalenceReport ok = run_scenario(cfg);
  CHECK(ok.passed());
  cfg.fault = "omit_derivative_term";
  const EquivalenceReport bad = run_scenario(cfg);
  CHECK_FALSE(bad.passed());
  CHECK(bad.find("state_equivalence")->failed());
  CHECK(bad.find("state_equivalence")->residual >= 1e-2);
}

TEST_CASE("every requested check appears once, in order") {
  json j = json::parse(kMinimal);
  j["checks"] = {"unitarity", "state_equivalence"};
  const EquivalenceReport r = run_scenario(scenario_from_json(j));
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].id == "state_equivalence");
  CHECK(r.records[1].id == "unitarity");
}

TEST_CASE("numerical failure is a failed record") {
  json j = json::parse(kMinimal);
  j["trivialization"] = {{"kind", "constant_diagonal"}, {"entries", {1.0, 1e-14}}};
  const EquivalenceReport r = run_scenario(scenario_from_json(j));
  CHECK_FALSE(r.passed());
  for (const auto& rec : r.records) CHECK(rec.status != CheckStatus::Pass);
}

TEST_CASE("non-Hermitian Hamiltonian: controls flip, unitarity is skipped") {
  json j = json::parse(kMinimal);
  j["hamiltonian"] = {{"kind", "constant"}, {"matrix", json::parse("[[0, 1], [0, 0]]")}};
  const EquivalenceReport r = run_scenario(scenario_from_json(j));
  CHECK(r.find("unitarity")->status == CheckStatus::Skipped);
  const CheckRecord* herm = r.find("hermiticity_correspondence");
  const bool found = std::any_of(herm->components.begin(), herm->components.end(), [](const CheckComponent& c) {
    return c.name == "bundle_hamiltonian_not_hermitian" && c.passed;
  });
  CHECK(found);
  CHECK(r.passed());
}

TEST_CASE("reports are deterministic and round-trip") {
  const ScenarioConfig cfg = catalog_scenario("rabi");
  const EquivalenceReport a = run_scenario(cfg);
  const EquivalenceReport b = run_scenario(cfg);
  CHECK(to_json(a, false).dump() == to_json(b, false).dump());
  const json full = to_json(a);
  CHECK(full["schema"] == kReportSchema);
  CHECK(full.contains("timing"));
  const EquivalenceReport back = scenario_report_from_json(full);
  CHECK(to_json(back, false) == to_json(a, false));

  const std::string series = emit(a, EmitFormat::TimeSeries);
  const auto rows = static_cast<std::size_t>(std::count(series.begin(), series.end(), '\n'));
  CHECK(series.rfind("scenario,t,quantity,value\n", 0) == 0);
  CHECK(rows == 1 + a.series.size() * cfg.grid().size());
  CHECK(emit(a, EmitFormat::Table).find("closed_form") != std::string::npos);
  CHECK_THROWS_AS(parse_emit_format("xml"), Error);
}

TEST_CASE("suites") {
  ScenarioConfig good = catalog_scenario("identity_gauge");
  ScenarioConfig bad = catalog_scenario("phase_gauge");
  bad.name = "a_faulty";
  bad.fault = "omit_derivative_term";
  const SuiteReport s = run_configs({good, bad}, "test", {2});
  CHECK_FALSE(s.passed());
  REQUIRE(s.reports.size() == 2);
  CHECK(s.reports[0].scenario == "a_faulty");
  CHECK(emit(s, EmitFormat::Table).find("a_faulty") < emit(s, EmitFormat::Table).find("identity_gauge"));

  const SuiteReport reversed = run_configs({bad, good}, "test", {1});
  CHECK(to_json(reversed, false) == to_json(s, false));

  const SuiteReport empty = run_configs({}, "empty", {});
  CHECK(empty.passed());
  CHECK_FALSE(empty.warnings.empty());

  const SuiteReport back = suite_report_from_json(to_json(s));
  CHECK_FALSE(back.passed());
  CHECK(back.reports.size() == 2);
}

TEST_CASE("suite sources") {
  const auto dir = std::filesystem::temp_directory_path() / "fibreqm_suite_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "manifest.json") << R"({"schema": "fibreqm.manifest/1", "scenarios": ["ok.json", "broken.json"]})";
    std::ofstream(dir / "ok.json") << kMinimal;
    std::ofstream(dir / "broken.json") << "{ not json";
  }
  const SuiteReport s = run_suite((dir / "manifest.json").string());
  CHECK_FALSE(s.passed());
  CHECK(s.reports.size() == 2);
  CHECK(s.reports[0].find("load") != nullptr);

  std::filesystem::remove(dir / "broken.json");
  const SuiteReport from_dir = run_suite(dir.string());
  CHECK(from_dir.reports.size() == 1);
  CHECK(from_dir.passed());

  CHECK_THROWS_AS(run_suite((dir / "missing_manifest.json").string()), Error);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
