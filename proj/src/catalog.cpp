#include "fibreqm/catalog.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fibreqm/errors.hpp"

namespace fqm {

using nlohmann::json;

namespace {

// Unit time, 1000 steps (step 1e-3) throughout.
const char* const kDocuments[] = {
    R"json({
  "name": "circle_path",
  "description": "Euclidean plane, circle traversed one and a quarter times, so the path self-intersects; position-dependent phase trivialization pulled back along the path",
  "dimension": 2,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "base": {"kind": "euclidean", "dim": 2},
  "path": {"kind": "circle", "radius": 0.05, "angular_speed": 7.853981633974483},
  "hamiltonian": {"kind": "pauli", "z": [0.8], "x": [0.5, 0.6]},
  "trivialization": {"kind": "position_phase", "wavevectors": [[1.0, 0.0], [0.0, 2.0]]},
  "observables": [
    {"name": "sigma_z", "matrix": [[1, 0], [0, -1]], "expect_integral": false},
    {"name": "identity", "matrix": [[1, 0], [0, 1]], "expect_integral": true}
  ]
})json",
    R"json({
  "name": "diagonal_gauge",
  "description": "Three-level time-dependent Hamiltonian under a diagonal phase gauge diag(exp(i w_a t))",
  "dimension": 3,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "hamiltonian": {"kind": "polynomial", "coefficients": [
    [[1.0, [0.3, 0.1], 0.0], [[0.3, -0.1], -0.5, 0.2], [0.0, 0.2, 0.4]],
    [[0.0, 0.4, 0.0], [0.4, 0.0, [0.0, 0.3]], [0.0, [0.0, -0.3], 0.0]]
  ]},
  "trivialization": {"kind": "diagonal_gauge", "frequencies": [1.0, -2.0, 0.5]},
  "initial_state": [[0.6, 0.0], [0.0, 0.8], 0.0],
  "observables": [
    {"name": "level_0", "matrix": [[1, 0, 0], [0, 0, 0], [0, 0, 0]], "expect_integral": false},
    {"name": "hermitian_mix", "matrix": [[0, [0, 1], 0], [[0, -1], 0, 1], [0, 1, 2]]}
  ]
})json",
    R"json({
  "name": "driven_three_level",
  "description": "Three-level ladder with a cosine drive, viewed in the rotating frame of the static levels",
  "dimension": 3,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "hamiltonian": {"kind": "driven",
    "static": [[0, 0, 0], [0, 1.0, 0], [0, 0, 2.5]],
    "drive": [[0, 0.6, 0], [0.6, 0, 0.4], [0, 0.4, 0]],
    "frequency": 1.2, "phase": 0.3},
  "trivialization": {"kind": "diagonal_gauge", "frequencies": [0.0, 1.0, 2.5]},
  "initial_density": [[0.7, 0, 0], [0, 0.2, 0], [0, 0, 0.1]],
  "observables": [
    {"name": "population_1", "matrix": [[0, 0, 0], [0, 1, 0], [0, 0, 0]], "expect_integral": false},
    {"name": "population_2", "matrix": [[0, 0, 0], [0, 0, 0], [0, 0, 1]], "expect_integral": false},
    {"name": "identity", "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "expect_integral": true}
  ]
})json",
    R"json({
  "name": "identity_gauge",
  "description": "Sanity check: identity trivialization along a straight line in 3-space",
  "dimension": 2,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "base": {"kind": "euclidean", "dim": 3, "injective": true},
  "path": {"kind": "line", "origin": [0, 0, 0], "velocity": [1, 0.5, 0]},
  "hamiltonian": {"kind": "constant", "matrix": [[1.0, 0.5], [0.5, -1.0]]},
  "trivialization": {"kind": "identity"},
  "observables": [
    {"name": "energy", "matrix": [[1.0, 0.5], [0.5, -1.0]], "expect_integral": true},
    {"name": "sigma_z", "matrix": [[1, 0], [0, -1]], "expect_integral": false}
  ]
})json",
    R"json({
  "name": "interval_base",
  "description": "Degenerate base M = J: the path is the identity of the time interval",
  "dimension": 2,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "base": {"kind": "interval", "a": 0.0, "b": 1.0},
  "path": {"kind": "identity"},
  "hamiltonian": {"kind": "pauli", "x": [1.0], "z": [0.0, 1.0]},
  "trivialization": {"kind": "diagonal_gauge", "frequencies": [0.7, -1.3]},
  "observables": [
    {"name": "sigma_x", "matrix": [[0, 1], [1, 0]], "expect_integral": false}
  ]
})json",
    R"json({
  "name": "nonunitary_gauge",
  "description": "Constant non-unitary trivialization diag(1, 2, 3); the fibre metric is induced through l",
  "dimension": 3,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "hamiltonian": {"kind": "constant", "matrix": [[0.5, 0.2, 0.0], [0.2, -0.3, 0.4], [0.0, 0.4, 0.1]]},
  "trivialization": {"kind": "constant_diagonal", "entries": [1, 2, 3]},
  "initial_state": [0.5, 0.5, [0.0, 0.7071067811865476]],
  "observables": [
    {"name": "energy", "matrix": [[0.5, 0.2, 0.0], [0.2, -0.3, 0.4], [0.0, 0.4, 0.1]], "expect_integral": true},
    {"name": "raising", "matrix": [[0, 1, 0], [0, 0, 1], [0, 0, 0]]}
  ]
})json",
    R"json({
  "name": "phase_gauge",
  "description": "Rabi oscillation under the global phase gauge l = exp(i w t) I",
  "dimension": 2,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "hamiltonian": {"kind": "rabi", "omega": 3.141592653589793},
  "trivialization": {"kind": "global_phase", "omega": 3.0},
  "observables": [
    {"name": "sigma_z", "matrix": [[1, 0], [0, -1]], "expect_integral": false},
    {"name": "sigma_x", "matrix": [[0, 1], [1, 0]], "expect_integral": true},
    {"name": "heisenberg_sigma_z", "kind": "rotating", "matrix": [[1, 0], [0, -1]],
     "generator": [[0, 1.5707963267948966], [1.5707963267948966, 0]], "expect_integral": true}
  ]
})json",
    R"json({
  "name": "rabi",
  "description": "Rabi flip probability against sin^2(w t / 2), under a random smooth unitary gauge",
  "dimension": 2,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "hamiltonian": {"kind": "rabi", "omega": 5.0},
  "trivialization": {"kind": "random_unitary", "degree": 2, "scale": 0.5},
  "observables": [
    {"name": "sigma_z", "matrix": [[1, 0], [0, -1]], "expect_integral": false},
    {"name": "sigma_x", "matrix": [[0, 1], [1, 0]], "expect_integral": true}
  ],
  "seed": 2024
})json",
    R"json({
  "name": "random_unitary_gauge",
  "description": "Four-level seeded random Hamiltonian, linear in t, under a random smooth unitary gauge",
  "dimension": 4,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "hamiltonian": {"kind": "random", "degree": 1, "scale": 0.5},
  "trivialization": {"kind": "random_unitary", "degree": 2, "scale": 0.5},
  "observables": [
    {"name": "number", "matrix": [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 3]]},
    {"name": "identity", "matrix": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], "expect_integral": true}
  ],
  "seed": 17
})json",
    R"json({
  "name": "single_point",
  "description": "Degenerate base M = {x} with l = identity: the bundle picture is the conventional one",
  "dimension": 2,
  "grid": {"t0": 0.0, "t1": 1.0, "steps": 1000},
  "base": {"kind": "single_point"},
  "hamiltonian": {"kind": "pauli", "z": [1.0], "x": [0.3, 0.4]},
  "trivialization": {"kind": "identity"},
  "observables": [
    {"name": "sigma_z", "matrix": [[1, 0], [0, -1]], "expect_integral": false}
  ]
})json",
};

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> out;
  for (const char* text : kDocuments) {
    json doc = json::parse(text);
    doc["schema"] = kScenarioSchema;
    out.push_back({doc["name"].get<std::string>(), doc.value("description", std::string()), doc});
  }
  std::sort(out.begin(), out.end(), [](const CatalogEntry& a, const CatalogEntry& b) { return a.name < b.name; });
  return out;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

std::vector<ScenarioConfig> catalog_scenarios() {
  std::vector<ScenarioConfig> out;
  for (const auto& e : catalog()) out.push_back(scenario_from_json(e.document));
  return out;
}

ScenarioConfig catalog_scenario(const std::string& name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return scenario_from_json(e.document);
  }
  fail(ErrorCode::InvalidArgument, "no built-in scenario named '" + name + "'");
}

void export_catalog(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
  json manifest = {{"schema", kManifestSchema}, {"scenarios", json::array()}};
  auto write = [](const fs::path& p, const json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write '" + p.string() + "'");
    out << j.dump(2) << "\n";
  };
  for (const auto& e : catalog()) {
    const std::string file = e.name + ".json";
    write(fs::path(dir) / file, e.document);
    manifest["scenarios"].push_back(file);
  }
  write(fs::path(dir) / "manifest.json", manifest);
}

}  // namespace fqm
