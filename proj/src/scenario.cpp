#include "fibreqm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include "fibreqm/errors.hpp"
#include "fibreqm/random.hpp"

namespace fqm {

using nlohmann::json;

const std::vector<std::string>& all_check_ids() {
  static const std::vector<std::string> ids = {
      "state_equivalence",   "transport_axioms",    "mean_value_invariance",
      "hermiticity_correspondence", "unitarity",    "picture_invariance",
      "density_consistency", "integrals_of_motion", "module_dualities",
      "trivialization_consistency", "closed_form",
  };
  return ids;
}

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  fail(ErrorCode::Schema, "field '" + field + "': " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json& require(const json& obj, const std::string& key, const std::string& prefix) {
  if (!obj.is_object()) schema_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(join(prefix, key), "is required");
  return *it;
}

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& prefix) {
  if (!obj.is_object()) schema_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      schema_error(join(prefix, key), "unknown field");
    }
  }
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) schema_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(field, "must be finite");
  return v;
}

double number_or(const json& obj, const std::string& key, const std::string& prefix,
                 double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, join(prefix, key));
}

std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) schema_error(field, "expected an integer");
  const auto v = j.get<long long>();
  if (v < 0) schema_error(field, "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::string string_of(const json& j, const std::string& field) {
  if (!j.is_string()) schema_error(field, "expected a string");
  return j.get<std::string>();
}

Complex complex_of(const json& j, const std::string& field) {
  if (j.is_number()) return {number(j, field), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], field), number(j[1], field)};
  schema_error(field, "expected a [re, im] pair or a real number");
}

std::vector<double> reals(const json& j, const std::string& field) {
  if (!j.is_array()) schema_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Eigen::VectorXd real_vector(const json& j, const std::string& field) {
  const auto v = reals(j, field);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_dimension(const OperatorMatrix& m, std::size_t n, const std::string& field) {
  if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != n) {
    fail(ErrorCode::DimensionMismatch, "field '" + field + "': matrix is " +
                                           std::to_string(m.rows()) + "x" +
                                           std::to_string(m.cols()) + " but the scenario dimension is " +
                                           std::to_string(n));
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

OperatorMatrix pauli(char which) {
  OperatorMatrix s = OperatorMatrix::Zero(2, 2);
  switch (which) {
    case 'x': s(0, 1) = 1.0; s(1, 0) = 1.0; break;
    case 'y': s(0, 1) = -kI; s(1, 0) = kI; break;
    case 'z': s(0, 0) = 1.0; s(1, 1) = -1.0; break;
    default: s = OperatorMatrix::Identity(2, 2); break;
  }
  return s;
}

double polynomial(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
  return v;
}

OperatorMatrix matrix_polynomial(const std::vector<OperatorMatrix>& c, double t) {
  OperatorMatrix v = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) v = OperatorMatrix(v * t + c[i]);
  return v;
}

std::vector<OperatorMatrix> matrix_list(const json& j, std::size_t n, const std::string& field) {
  if (!j.is_array() || j.empty()) schema_error(field, "expected a non-empty array of matrices");
  std::vector<OperatorMatrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    out.push_back(parse_matrix(j[i], f));
    require_dimension(out.back(), n, f);
  }
  return out;
}

void validate_base(const json& base) {
  const std::string kind = string_of(require(base, "kind", "base"), "base.kind");
  if (kind == "euclidean") {
    allow_keys(base, {"kind", "dim", "injective"}, "base");
    if (count(require(base, "dim", "base"), "base.dim") < 1) schema_error("base.dim", "must be >= 1");
    if (base.contains("injective") && !base["injective"].is_boolean()) {
      schema_error("base.injective", "expected a boolean");
    }
  } else if (kind == "interval") {
    allow_keys(base, {"kind", "a", "b"}, "base");
    const double a = number(require(base, "a", "base"), "base.a");
    const double b = number(require(base, "b", "base"), "base.b");
    if (!(a < b)) schema_error("base", "interval requires a < b");
  } else if (kind == "single_point") {
    allow_keys(base, {"kind"}, "base");
  } else {
    schema_error("base.kind", "unknown base '" + kind + "'");
  }
}

void validate_path(const json& path, const json& base) {
  const std::string kind = string_of(require(path, "kind", "path"), "path.kind");
  const std::string base_kind = base["kind"].get<std::string>();
  if (kind == "identity") {
    allow_keys(path, {"kind"}, "path");
    if (base_kind == "single_point") schema_error("path.kind", "identity path needs a 1-D base");
  } else if (kind == "constant") {
    allow_keys(path, {"kind", "point"}, "path");
  } else if (kind == "line") {
    allow_keys(path, {"kind", "origin", "velocity"}, "path");
    real_vector(require(path, "origin", "path"), "path.origin");
    real_vector(require(path, "velocity", "path"), "path.velocity");
  } else if (kind == "circle") {
    allow_keys(path, {"kind", "radius", "angular_speed"}, "path");
    if (base_kind != "euclidean") schema_error("path.kind", "circle path needs a Euclidean base");
    number(require(path, "radius", "path"), "path.radius");
    number(require(path, "angular_speed", "path"), "path.angular_speed");
  } else {
    schema_error("path.kind", "unknown path '" + kind + "'");
  }
}

void validate_hamiltonian(const json& h, std::size_t n) {
  const std::string kind = string_of(require(h, "kind", "hamiltonian"), "hamiltonian.kind");
  if (kind == "constant") {
    allow_keys(h, {"kind", "matrix", "hermitian"}, "hamiltonian");
    require_dimension(parse_matrix(require(h, "matrix", "hamiltonian"), "hamiltonian.matrix"), n,
                      "hamiltonian.matrix");
  } else if (kind == "polynomial") {
    allow_keys(h, {"kind", "coefficients", "hermitian"}, "hamiltonian");
    matrix_list(require(h, "coefficients", "hamiltonian"), n, "hamiltonian.coefficients");
  } else if (kind == "pauli") {
    allow_keys(h, {"kind", "x", "y", "z", "identity", "hermitian"}, "hamiltonian");
    if (n != 2) fail(ErrorCode::DimensionMismatch, "field 'hamiltonian': pauli Hamiltonian needs dimension 2");
    for (const char* c : {"x", "y", "z", "identity"}) {
      if (h.contains(c)) reals(h[c], std::string("hamiltonian.") + c);
    }
  } else if (kind == "rabi") {
    allow_keys(h, {"kind", "omega", "modulation_depth", "modulation_frequency", "hermitian"},
               "hamiltonian");
    if (n != 2) fail(ErrorCode::DimensionMismatch, "field 'hamiltonian': rabi Hamiltonian needs dimension 2");
    number(require(h, "omega", "hamiltonian"), "hamiltonian.omega");
    number_or(h, "modulation_depth", "hamiltonian", 0.0);
    number_or(h, "modulation_frequency", "hamiltonian", 0.0);
  } else if (kind == "driven") {
    allow_keys(h, {"kind", "static", "drive", "frequency", "phase", "hermitian"}, "hamiltonian");
    require_dimension(parse_matrix(require(h, "static", "hamiltonian"), "hamiltonian.static"), n,
                      "hamiltonian.static");
    require_dimension(parse_matrix(require(h, "drive", "hamiltonian"), "hamiltonian.drive"), n,
                      "hamiltonian.drive");
    number(require(h, "frequency", "hamiltonian"), "hamiltonian.frequency");
    number_or(h, "phase", "hamiltonian", 0.0);
  } else if (kind == "random") {
    allow_keys(h, {"kind", "degree", "scale", "hermitian"}, "hamiltonian");
    if (h.contains("degree")) count(h["degree"], "hamiltonian.degree");
    if (number_or(h, "scale", "hamiltonian", 1.0) <= 0.0) schema_error("hamiltonian.scale", "must be > 0");
  } else {
    schema_error("hamiltonian.kind", "unknown Hamiltonian '" + kind + "'");
  }
  if (h.contains("hermitian") && !h["hermitian"].is_boolean()) {
    schema_error("hamiltonian.hermitian", "expected a boolean");
  }
}

void validate_trivialization(const json& l, std::size_t n, std::size_t base_dim) {
  const std::string kind = string_of(require(l, "kind", "trivialization"), "trivialization.kind");
  auto common = [&](std::initializer_list<const char*> keys) {
    allow_keys(l, keys, "trivialization");
    if (l.contains("finite_difference") && !l["finite_difference"].is_boolean()) {
      schema_error("trivialization.finite_difference", "expected a boolean");
    }
  };
  if (kind == "identity") {
    common({"kind", "finite_difference"});
  } else if (kind == "global_phase") {
    common({"kind", "omega", "finite_difference"});
    number(require(l, "omega", "trivialization"), "trivialization.omega");
  } else if (kind == "diagonal_gauge") {
    common({"kind", "frequencies", "finite_difference"});
    if (reals(require(l, "frequencies", "trivialization"), "trivialization.frequencies").size() != n) {
      fail(ErrorCode::DimensionMismatch, "field 'trivialization.frequencies': need one frequency per dimension");
    }
  } else if (kind == "constant_diagonal") {
    common({"kind", "entries", "finite_difference"});
    const json& e = require(l, "entries", "trivialization");
    if (!e.is_array() || e.size() != n) {
      fail(ErrorCode::DimensionMismatch, "field 'trivialization.entries': need one entry per dimension");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (complex_of(e[i], "trivialization.entries") == Complex(0.0, 0.0)) {
        schema_error("trivialization.entries", "entries must be non-zero");
      }
    }
  } else if (kind == "random_unitary") {
    common({"kind", "degree", "scale", "finite_difference"});
    if (l.contains("degree")) count(l["degree"], "trivialization.degree");
    if (number_or(l, "scale", "trivialization", 0.5) <= 0.0) {
      schema_error("trivialization.scale", "must be > 0");
    }
  } else if (kind == "position_phase") {
    common({"kind", "wavevectors", "finite_difference"});
    const json& k = require(l, "wavevectors", "trivialization");
    if (!k.is_array() || k.size() != n) {
      fail(ErrorCode::DimensionMismatch, "field 'trivialization.wavevectors': need one wavevector per dimension");
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (real_vector(k[a], "trivialization.wavevectors").size() != static_cast<Eigen::Index>(base_dim)) {
        fail(ErrorCode::DimensionMismatch,
             "field 'trivialization.wavevectors': wavevector length must match the base dimension");
      }
    }
  } else {
    schema_error("trivialization.kind", "unknown trivialization '" + kind + "'");
  }
}

void validate_observable(const json& o, std::size_t n, const std::string& field) {
  const std::string kind = o.contains("kind") ? string_of(o["kind"], field + ".kind") : "constant";
  if (kind == "constant") {
    allow_keys(o, {"name", "kind", "matrix", "expect_integral"}, field);
    require_dimension(parse_matrix(require(o, "matrix", field), field + ".matrix"), n, field + ".matrix");
  } else if (kind == "polynomial") {
    allow_keys(o, {"name", "kind", "coefficients", "expect_integral"}, field);
    matrix_list(require(o, "coefficients", field), n, field + ".coefficients");
  } else if (kind == "rotating") {
    allow_keys(o, {"name", "kind", "matrix", "generator", "expect_integral"}, field);
    require_dimension(parse_matrix(require(o, "matrix", field), field + ".matrix"), n, field + ".matrix");
    require_dimension(parse_matrix(require(o, "generator", field), field + ".generator"), n,
                      field + ".generator");
  } else {
    schema_error(field + ".kind", "unknown observable kind '" + kind + "'");
  }
}

}  // namespace

// Independent seed per randomized family, so adding one family does not
// shift the numbers drawn by another.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) {
  std::uint64_t z = seed ^ fnv1a(tag);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

OperatorMatrix parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) schema_error(field, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array()) schema_error(field, "row " + std::to_string(r) + " is not an array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) schema_error(field, "rows have different lengths");
  }
  OperatorMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_of(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

json matrix_to_json(const OperatorMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

StateVector parse_vector(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) schema_error(field, "expected a non-empty array");
  StateVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = complex_of(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

json vector_to_json(const StateVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

ScenarioConfig scenario_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("<root>", "expected an object");
  allow_keys(doc,
             {"schema", "name", "description", "dimension", "hbar", "grid", "base", "path",
              "hamiltonian", "trivialization", "observables", "initial_state", "initial_density",
              "checks", "tolerances", "sampling", "seed", "fault"},
             "");
  if (doc.contains("schema") && string_of(doc["schema"], "schema") != kScenarioSchema) {
    schema_error("schema", "unsupported schema '" + doc["schema"].get<std::string>() + "'");
  }

  ScenarioConfig cfg;
  cfg.name = string_of(require(doc, "name", ""), "name");
  if (cfg.name.empty()) schema_error("name", "must not be empty");
  if (doc.contains("description")) cfg.description = string_of(doc["description"], "description");
  cfg.dimension = count(require(doc, "dimension", ""), "dimension");
  if (cfg.dimension < 1) schema_error("dimension", "must be >= 1");
  const std::size_t n = cfg.dimension;
  cfg.hbar = number_or(doc, "hbar", "", 1.0);
  if (!(cfg.hbar > 0.0)) schema_error("hbar", "must be > 0");

  const json& grid = require(doc, "grid", "");
  allow_keys(grid, {"t0", "t1", "steps", "step"}, "grid");
  cfg.t0 = number_or(grid, "t0", "grid", 0.0);
  cfg.t1 = number(require(grid, "t1", "grid"), "grid.t1");
  if (!(cfg.t0 < cfg.t1)) schema_error("grid", "requires t0 < t1");
  if (grid.contains("steps") && grid.contains("step")) schema_error("grid", "give either steps or step");
  if (grid.contains("step")) {
    const double step = number(grid["step"], "grid.step");
    if (!(step > 0.0)) schema_error("grid.step", "must be > 0");
    cfg.steps = TimeGrid::from_step(cfg.t0, cfg.t1, step).steps();
  } else {
    cfg.steps = count(require(grid, "steps", "grid"), "grid.steps");
  }
  if (cfg.steps < 2) schema_error("grid.steps", "must be >= 2");

  cfg.base = doc.contains("base") ? doc["base"] : json{{"kind", "single_point"}};
  validate_base(cfg.base);
  const std::string base_kind = cfg.base["kind"].get<std::string>();
  if (doc.contains("path")) {
    cfg.path = doc["path"];
  } else {
    cfg.path = base_kind == "interval" ? json{{"kind", "identity"}} : json{{"kind", "constant"}};
  }
  validate_path(cfg.path, cfg.base);
  if (base_kind == "interval" && cfg.path["kind"] == "identity") {
    if (cfg.t0 < cfg.base["a"].get<double>() || cfg.t1 > cfg.base["b"].get<double>()) {
      schema_error("base", "interval must contain the time domain for an identity path");
    }
  }

  cfg.hamiltonian = require(doc, "hamiltonian", "");
  validate_hamiltonian(cfg.hamiltonian, n);

  cfg.trivialization = doc.contains("trivialization") ? doc["trivialization"] : json{{"kind", "identity"}};
  const std::size_t base_dim = build_base(cfg).point_dimension();
  validate_trivialization(cfg.trivialization, n, base_dim);

  if (doc.contains("observables")) {
    const json& obs = doc["observables"];
    if (!obs.is_array()) schema_error("observables", "expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string field = "observables[" + std::to_string(i) + "]";
      ObservableSpec spec;
      spec.name = string_of(require(obs[i], "name", field), field + ".name");
      if (!names.insert(spec.name).second) schema_error(field + ".name", "duplicate name '" + spec.name + "'");
      validate_observable(obs[i], n, field);
      spec.spec = obs[i];
      if (obs[i].contains("expect_integral")) {
        if (!obs[i]["expect_integral"].is_boolean()) schema_error(field + ".expect_integral", "expected a boolean");
        spec.expect_integral = obs[i]["expect_integral"].get<bool>();
      }
      cfg.observables.push_back(std::move(spec));
    }
  }

  if (doc.contains("initial_state")) {
    cfg.initial_state = parse_vector(doc["initial_state"], "initial_state");
    if (static_cast<std::size_t>(cfg.initial_state.size()) != n) {
      fail(ErrorCode::DimensionMismatch, "field 'initial_state': length " +
                                             std::to_string(cfg.initial_state.size()) +
                                             " does not match dimension " + std::to_string(n));
    }
    if (max_abs(cfg.initial_state) == 0.0) schema_error("initial_state", "must be non-zero");
  } else {
    cfg.initial_state = StateVector::Zero(static_cast<Eigen::Index>(n));
    cfg.initial_state(0) = 1.0;
  }
  if (doc.contains("initial_density")) {
    OperatorMatrix rho = parse_matrix(doc["initial_density"], "initial_density");
    require_dimension(rho, n, "initial_density");
    try {
      validate_density(rho, 1e-10);
    } catch (const Error& e) {
      schema_error("initial_density", e.what());
    }
    cfg.initial_density = std::move(rho);
  }

  if (doc.contains("checks")) {
    const json& checks = doc["checks"];
    if (!checks.is_array()) schema_error("checks", "expected an array of check ids");
    std::set<std::string> requested;
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const std::string id = string_of(checks[i], "checks[" + std::to_string(i) + "]");
      const auto& known = all_check_ids();
      if (std::find(known.begin(), known.end(), id) == known.end()) {
        schema_error("checks[" + std::to_string(i) + "]", "unknown check '" + id + "'");
      }
      requested.insert(id);
    }
    // Report order follows the canonical list.
    for (const auto& id : all_check_ids()) {
      if (requested.count(id)) cfg.checks.push_back(id);
    }
  } else {
    cfg.checks = all_check_ids();
  }

  if (doc.contains("tolerances")) {
    const json& tol = doc["tolerances"];
    allow_keys(tol,
               {"eq_tol", "prop_tol", "alg_tol", "identity_tol", "composition_tol",
                "integral_tol", "fd_tol", "fp_tol"},
               "tolerances");
    auto read = [&](const char* key, double& slot) {
      slot = number_or(tol, key, "tolerances", slot);
      if (!(slot >= 0.0)) schema_error(std::string("tolerances.") + key, "must be >= 0");
    };
    read("eq_tol", cfg.tolerances.eq_tol);
    read("prop_tol", cfg.tolerances.prop_tol);
    read("alg_tol", cfg.tolerances.alg_tol);
    read("identity_tol", cfg.tolerances.identity_tol);
    read("composition_tol", cfg.tolerances.composition_tol);
    read("integral_tol", cfg.tolerances.integral_tol);
    read("fd_tol", cfg.tolerances.fd_tol);
    read("fp_tol", cfg.tolerances.fp_tol);
  }

  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    allow_keys(s, {"transport_points", "pair_points", "duality_points", "module_trials"}, "sampling");
    auto read = [&](const char* key, std::size_t& slot, std::size_t minimum) {
      if (s.contains(key)) slot = count(s[key], std::string("sampling.") + key);
      if (slot < minimum) {
        schema_error(std::string("sampling.") + key, "must be >= " + std::to_string(minimum));
      }
    };
    read("transport_points", cfg.sampling.transport_points, 2);
    read("pair_points", cfg.sampling.pair_points, 2);
    read("duality_points", cfg.sampling.duality_points, 2);
    read("module_trials", cfg.sampling.module_trials, 1);
  }

  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      schema_error("seed", "expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  } else {
    cfg.seed = fnv1a(cfg.name) & 0xffffffffULL;
  }

  if (doc.contains("fault")) {
    cfg.fault = string_of(doc["fault"], "fault");
    if (!cfg.fault.empty() && cfg.fault != "omit_derivative_term") {
      schema_error("fault", "unknown fault '" + cfg.fault + "'");
    }
  }
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    fail(ErrorCode::Parse, origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                               ": " + e.what());
  }
  return scenario_from_json(doc);
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open scenario file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path);
}

json to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["schema"] = kScenarioSchema;
  doc["name"] = cfg.name;
  if (!cfg.description.empty()) doc["description"] = cfg.description;
  doc["dimension"] = cfg.dimension;
  doc["hbar"] = cfg.hbar;
  doc["grid"] = {{"t0", cfg.t0}, {"t1", cfg.t1}, {"steps", cfg.steps}};
  doc["base"] = cfg.base;
  doc["path"] = cfg.path;
  doc["hamiltonian"] = cfg.hamiltonian;
  doc["trivialization"] = cfg.trivialization;
  json obs = json::array();
  for (const auto& o : cfg.observables) obs.push_back(o.spec);
  doc["observables"] = obs;
  doc["initial_state"] = vector_to_json(cfg.initial_state);
  if (cfg.initial_density) doc["initial_density"] = matrix_to_json(*cfg.initial_density);
  doc["checks"] = cfg.checks;
  const Tolerances& t = cfg.tolerances;
  doc["tolerances"] = {{"eq_tol", t.eq_tol},           {"prop_tol", t.prop_tol},
                       {"alg_tol", t.alg_tol},         {"identity_tol", t.identity_tol},
                       {"composition_tol", t.composition_tol}, {"integral_tol", t.integral_tol},
                       {"fd_tol", t.fd_tol},           {"fp_tol", t.fp_tol}};
  const Sampling& s = cfg.sampling;
  doc["sampling"] = {{"transport_points", s.transport_points},
                     {"pair_points", s.pair_points},
                     {"duality_points", s.duality_points},
                     {"module_trials", s.module_trials}};
  doc["seed"] = cfg.seed;
  if (!cfg.fault.empty()) doc["fault"] = cfg.fault;
  return doc;
}

BaseSpace build_base(const ScenarioConfig& cfg) {
  const std::string kind = cfg.base.at("kind").get<std::string>();
  if (kind == "euclidean") {
    return BaseSpace::euclidean(cfg.base.at("dim").get<std::size_t>(),
                                cfg.base.value("injective", false));
  }
  if (kind == "interval") {
    return BaseSpace::interval(cfg.base.at("a").get<double>(), cfg.base.at("b").get<double>());
  }
  return BaseSpace::single_point();
}

Path build_path(const ScenarioConfig& cfg) {
  const BaseSpace base = build_base(cfg);
  const std::size_t d = base.point_dimension();
  const std::string kind = cfg.path.at("kind").get<std::string>();
  const std::size_t samples = cfg.steps + 1;
  if (kind == "identity") {
    return make_path(base, cfg.t0, cfg.t1, paths::identity(), samples,
                     paths::line_velocity(Eigen::VectorXd::Ones(1)));
  }
  if (kind == "constant") {
    BasePoint x = BasePoint::Zero(static_cast<Eigen::Index>(d));
    if (cfg.path.contains("point")) x = real_vector(cfg.path["point"], "path.point");
    if (static_cast<std::size_t>(x.size()) != d) {
      fail(ErrorCode::DimensionMismatch, "field 'path.point': length does not match the base");
    }
    return make_path(base, cfg.t0, cfg.t1, paths::constant(x), samples,
                     paths::line_velocity(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d))));
  }
  if (kind == "line") {
    const Eigen::VectorXd origin = real_vector(cfg.path["origin"], "path.origin");
    const Eigen::VectorXd velocity = real_vector(cfg.path["velocity"], "path.velocity");
    if (static_cast<std::size_t>(origin.size()) != d || static_cast<std::size_t>(velocity.size()) != d) {
      fail(ErrorCode::DimensionMismatch, "field 'path': line vectors must match the base dimension");
    }
    return make_path(base, cfg.t0, cfg.t1, paths::line(origin, velocity), samples,
                     paths::line_velocity(velocity));
  }
  const double radius = cfg.path.at("radius").get<double>();
  const double speed = cfg.path.at("angular_speed").get<double>();
  return make_path(base, cfg.t0, cfg.t1, paths::circle(d, radius, speed), samples,
                   paths::circle_velocity(d, radius, speed));
}

HamiltonianFamily build_hamiltonian(const ScenarioConfig& cfg) {
  const json& h = cfg.hamiltonian;
  const std::size_t n = cfg.dimension;
  const std::string kind = h.at("kind").get<std::string>();
  HamiltonianFamily family;
  family.dimension = n;

  if (kind == "constant") {
    const OperatorMatrix m = parse_matrix(h["matrix"], "hamiltonian.matrix");
    family.eval = [m](double) { return m; };
  } else if (kind == "polynomial") {
    const auto c = matrix_list(h["coefficients"], n, "hamiltonian.coefficients");
    family.eval = [c](double t) { return matrix_polynomial(c, t); };
  } else if (kind == "pauli") {
    std::vector<std::pair<OperatorMatrix, std::vector<double>>> terms;
    for (const char* c : {"x", "y", "z", "identity"}) {
      if (h.contains(c)) terms.emplace_back(pauli(c[0] == 'i' ? 'i' : c[0]), reals(h[c], c));
    }
    family.eval = [terms](double t) {
      OperatorMatrix m = OperatorMatrix::Zero(2, 2);
      for (const auto& [sigma, coeffs] : terms) m += polynomial(coeffs, t) * sigma;
      return m;
    };
  } else if (kind == "rabi") {
    const double omega = h.at("omega").get<double>();
    const double depth = h.value("modulation_depth", 0.0);
    const double nu = h.value("modulation_frequency", 0.0);
    const double hbar = cfg.hbar;
    family.eval = [=](double t) {
      const double w = omega * (1.0 + depth * std::cos(nu * t));
      return OperatorMatrix((0.5 * hbar * w) * pauli('x'));
    };
  } else if (kind == "driven") {
    const OperatorMatrix h0 = parse_matrix(h["static"], "hamiltonian.static");
    const OperatorMatrix h1 = parse_matrix(h["drive"], "hamiltonian.drive");
    const double nu = h.at("frequency").get<double>();
    const double phase = h.value("phase", 0.0);
    family.eval = [=](double t) { return OperatorMatrix(h0 + std::cos(nu * t + phase) * h1); };
  } else {
    const std::size_t degree = h.value("degree", std::size_t{1});
    const double scale = h.value("scale", 1.0);
    const bool hermitian = h.value("hermitian", true);
    Rng rng(derive_seed(cfg.seed, "hamiltonian"));
    std::vector<OperatorMatrix> c;
    for (std::size_t k = 0; k <= degree; ++k) {
      c.push_back(hermitian ? random_hermitian(n, rng, scale) : random_matrix(n, rng, scale));
    }
    family.eval = [c](double t) { return matrix_polynomial(c, t); };
  }

  // Hermiticity: declared, or detected on the grid.
  const TimeGrid grid = cfg.grid();
  bool hermitian_everywhere = true;
  for (std::size_t k : grid.strided_indices(64)) {
    if (!is_hermitian(family.at(grid.time(k)), 1e-12)) {
      hermitian_everywhere = false;
      break;
    }
  }
  if (h.contains("hermitian")) {
    family.hermitian_expected = h["hermitian"].get<bool>();
    if (family.hermitian_expected && !hermitian_everywhere) {
      schema_error("hamiltonian.hermitian", "declared Hermitian but the family is not");
    }
  } else {
    family.hermitian_expected = hermitian_everywhere;
  }
  return family;
}

TrivializationFamily build_trivialization(const ScenarioConfig& cfg, const Path& path) {
  const json& l = cfg.trivialization;
  const std::size_t n = cfg.dimension;
  const std::string kind = l.at("kind").get<std::string>();
  TrivializationFamily family;
  if (kind == "identity") {
    family = trivializations::identity(n);
  } else if (kind == "global_phase") {
    family = trivializations::global_phase(n, l.at("omega").get<double>());
  } else if (kind == "diagonal_gauge") {
    family = trivializations::diagonal_gauge(l.at("frequencies").get<std::vector<double>>());
  } else if (kind == "constant_diagonal") {
    std::vector<Complex> entries;
    for (const auto& e : l.at("entries")) entries.push_back(complex_of(e, "trivialization.entries"));
    family = trivializations::constant_diagonal(std::move(entries));
  } else if (kind == "random_unitary") {
    family = trivializations::random_smooth_unitary(n, derive_seed(cfg.seed, "trivialization"),
                                                    l.value("degree", std::size_t{2}),
                                                    l.value("scale", 0.5));
  } else {
    std::vector<Eigen::VectorXd> k;
    for (const auto& v : l.at("wavevectors")) k.push_back(real_vector(v, "trivialization.wavevectors"));
    family = pull_back(trivializations::position_phase(std::move(k)), path);
  }
  if (l.value("finite_difference", false)) {
    const TrivializationFamily analytic = family;
    family = TrivializationFamily(
        n, [analytic](double t) { return analytic.at(t); }, {}, analytic.name() + "+fd");
    family.with_finite_difference_step(cfg.grid().spacing());
  }
  return family;
}

ObservableFamily build_observable(const ScenarioConfig& cfg, const ObservableSpec& spec) {
  const json& o = spec.spec;
  const std::string kind = o.value("kind", std::string("constant"));
  const std::string field = "observables." + spec.name;
  if (kind == "constant") return ObservableFamily::constant(parse_matrix(o["matrix"], field + ".matrix"));
  if (kind == "polynomial") {
    const auto c = matrix_list(o["coefficients"], cfg.dimension, field + ".coefficients");
    ObservableFamily f;
    f.eval = [c](double t) { return matrix_polynomial(c, t); };
    std::vector<OperatorMatrix> dc;
    for (std::size_t i = 1; i < c.size(); ++i) dc.push_back(static_cast<double>(i) * c[i]);
    if (dc.empty()) dc.push_back(OperatorMatrix::Zero(c[0].rows(), c[0].cols()));
    f.time_derivative = [dc](double t) { return matrix_polynomial(dc, t); };
    f.time_independent = c.size() == 1;
    return f;
  }
  // 𝒜(t) = e^{−iG(t−t0)} A e^{iG(t−t0)}, ∂𝒜/∂t = −i[G, 𝒜(t)].
  const OperatorMatrix a = parse_matrix(o["matrix"], field + ".matrix");
  const OperatorMatrix g = parse_matrix(o["generator"], field + ".generator");
  const double t0 = cfg.t0;
  ObservableFamily f;
  f.eval = [a, g, t0](double t) {
    const OperatorMatrix u = matrix_exponential(OperatorMatrix((-kI * (t - t0)) * g));
    return OperatorMatrix(u * a * u.adjoint());
  };
  f.time_derivative = [a, g, t0](double t) {
    const OperatorMatrix u = matrix_exponential(OperatorMatrix((-kI * (t - t0)) * g));
    const OperatorMatrix at = u * a * u.adjoint();
    return OperatorMatrix(-kI * commutator(g, at));
  };
  return f;
}

std::optional<std::function<double(double)>> rabi_flip_probability(const ScenarioConfig& cfg) {
  if (cfg.hamiltonian.value("kind", std::string()) != "rabi") return std::nullopt;
  const double omega = cfg.hamiltonian.at("omega").get<double>();
  const double depth = cfg.hamiltonian.value("modulation_depth", 0.0);
  const double nu = cfg.hamiltonian.value("modulation_frequency", 0.0);
  // ℋ(t) = (ℏω(t)/2)σx commutes with itself at all times, so ψ(t) =
  // exp(−iθ(t)σx/2)e₁ with θ(t) = ∫ω.
  return std::function<double(double)>([=](double t) {
    double theta = omega * t;
    if (depth != 0.0 && nu != 0.0) theta += omega * depth * std::sin(nu * t) / nu;
    else if (depth != 0.0) theta += omega * depth * t;
    const double s = std::sin(0.5 * theta);
    return s * s;
  });
}

}  // namespace fqm
