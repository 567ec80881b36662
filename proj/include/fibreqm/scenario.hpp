#pragma once

// Declarative scenario description and its loader.
//
// A scenario file is a single JSON document. Matrices are nested arrays of
// [re, im] pairs (a bare real number is accepted for a purely real entry).
// Family specifications (Hamiltonian, trivialization, observables) keep
// their JSON parameter blocks; build_* turn them into numerical objects.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibreqm/bundle.hpp"
#include "fibreqm/dynamics.hpp"
#include "fibreqm/paths.hpp"
#include "fibreqm/pictures.hpp"

namespace fqm {

inline constexpr const char* kScenarioSchema = "fibreqm.scenario/1";

struct Tolerances {
  double eq_tol = 1e-6;          // state equivalence, closed forms
  double prop_tol = 1e-8;        // unitarity, pictures, density transport
  double alg_tol = 1e-10;        // mean-value bridge, ‡ correspondence, traces
  double identity_tol = 1e-12;   // U_γ(t,t) = I
  double composition_tol = 1e-10;
  double integral_tol = 1e-6;    // integral-of-motion residual
  double fd_tol = 1e-4;          // analytic vs finite-difference dl/dt
  double fp_tol = 1e-13;         // module axioms "exact to rounding"
};

struct Sampling {
  /// Grid nodes used for exhaustive transport-axiom triples.
  std::size_t transport_points = 101;
  /// Nodes used for ‡/unitarity pair scans.
  std::size_t pair_points = 21;
  /// Grid size of the module-duality probes.
  std::size_t duality_points = 41;
  /// Random scalar-field/section combinations for the module axioms.
  std::size_t module_trials = 100;
};

/// Check identifiers, in report order.
const std::vector<std::string>& all_check_ids();

struct ObservableSpec {
  std::string name;
  nlohmann::json spec;
  std::optional<bool> expect_integral;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  std::size_t dimension = 0;
  double hbar = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t steps = 1000;
  nlohmann::json base;
  nlohmann::json path;
  nlohmann::json hamiltonian;
  nlohmann::json trivialization;
  std::vector<ObservableSpec> observables;
  StateVector initial_state;
  std::optional<OperatorMatrix> initial_density;
  std::vector<std::string> checks;
  Tolerances tolerances;
  Sampling sampling;
  std::uint64_t seed = 0;
  /// Deliberate corruption for negative controls; "" or "omit_derivative_term".
  std::string fault;

  TimeGrid grid() const { return TimeGrid(t0, t1, steps); }
};

/// Parses, validates and fills defaults. Errors: Parse (with line/column),
/// Schema (naming the offending field), DimensionMismatch.
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig scenario_from_json(const nlohmann::json& doc);

/// Canonical, fully resolved form (the config echo in reports).
nlohmann::json to_json(const ScenarioConfig& cfg);

OperatorMatrix parse_matrix(const nlohmann::json& j, const std::string& field);
nlohmann::json matrix_to_json(const OperatorMatrix& m);
StateVector parse_vector(const nlohmann::json& j, const std::string& field);
nlohmann::json vector_to_json(const StateVector& v);

/// Seed for one randomized family of a scenario, keyed by a tag.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag);

BaseSpace build_base(const ScenarioConfig& cfg);
Path build_path(const ScenarioConfig& cfg);
HamiltonianFamily build_hamiltonian(const ScenarioConfig& cfg);
/// Time-indexed families are used directly; point-indexed ones are pulled
/// back along `path`.
TrivializationFamily build_trivialization(const ScenarioConfig& cfg, const Path& path);
ObservableFamily build_observable(const ScenarioConfig& cfg, const ObservableSpec& spec);

/// Closed-form flip probability |⟨e₂|ψ(t)⟩|² for the "rabi" Hamiltonian
/// started from e₁; nullopt for other Hamiltonians.
std::optional<std::function<double(double)>> rabi_flip_probability(const ScenarioConfig& cfg);

}  // namespace fqm
