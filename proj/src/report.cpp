#include "fibreqm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fibreqm/errors.hpp"

namespace fqm {

using nlohmann::json;

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "fail";
}

namespace {

CheckStatus status_from(const std::string& s) {
  if (s == "pass") return CheckStatus::Pass;
  if (s == "skipped") return CheckStatus::Skipped;
  if (s == "fail") return CheckStatus::Fail;
  fail(ErrorCode::Schema, "field 'status': unknown status '" + s + "'");
}

// JSON has no NaN or infinity.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

double read_number(const json& j, const char* field) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) fail(ErrorCode::Schema, std::string("field '") + field + "': expected a number");
  return j.get<double>();
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::Schema, std::string("field '") + key + "' is required");
  return *it;
}

// Distance past the bound, in units of tol; larger is worse.
double severity(const CheckComponent& c) {
  if (std::isnan(c.residual)) return std::numeric_limits<double>::infinity();
  if (c.bound == Bound::AtMost) {
    return c.tol > 0.0 ? c.residual / c.tol : (c.residual > 0.0 ? 1e300 : 0.0);
  }
  return c.residual > 0.0 ? c.tol / c.residual : std::numeric_limits<double>::infinity();
}

std::string fmt(double v, const char* spec = "%.3e") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

json component_json(const CheckComponent& c) {
  json j = {{"name", c.name},
            {"residual", number(c.residual)},
            {"tol", number(c.tol)},
            {"bound", c.bound == Bound::AtMost ? "at_most" : "at_least"},
            {"passed", c.passed}};
  if (c.worst_time) j["worst_time"] = number(*c.worst_time);
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

json record_json(const CheckRecord& r) {
  json j = {{"id", r.id},
            {"status", to_string(r.status)},
            {"residual", number(r.residual)},
            {"tol", number(r.tol)}};
  if (r.worst_time) j["worst_time"] = number(*r.worst_time);
  if (!r.detail.empty()) j["detail"] = r.detail;
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back(component_json(c));
  j["components"] = std::move(comps);
  return j;
}

CheckRecord record_from(const json& j) {
  CheckRecord r;
  r.id = field(j, "id").get<std::string>();
  r.status = status_from(field(j, "status").get<std::string>());
  r.residual = read_number(field(j, "residual"), "residual");
  r.tol = read_number(field(j, "tol"), "tol");
  if (j.contains("worst_time")) r.worst_time = read_number(j["worst_time"], "worst_time");
  r.detail = j.value("detail", std::string());
  for (const auto& c : j.value("components", json::array())) {
    CheckComponent comp;
    comp.name = field(c, "name").get<std::string>();
    comp.residual = read_number(field(c, "residual"), "residual");
    comp.tol = read_number(field(c, "tol"), "tol");
    comp.bound = c.value("bound", std::string("at_most")) == "at_least" ? Bound::AtLeast : Bound::AtMost;
    comp.passed = field(c, "passed").get<bool>();
    if (c.contains("worst_time")) comp.worst_time = read_number(c["worst_time"], "worst_time");
    comp.detail = c.value("detail", std::string());
    r.components.push_back(std::move(comp));
  }
  return r;
}

void require_schema(const json& j, const char* kind) {
  if (!j.is_object()) fail(ErrorCode::Schema, "report must be a JSON object");
  const std::string schema = j.value("schema", std::string());
  if (schema != kReportSchema) {
    fail(ErrorCode::Schema, "field 'schema': expected '" + std::string(kReportSchema) + "', got '" +
                                schema + "'");
  }
  if (j.value("kind", std::string()) != kind) {
    fail(ErrorCode::Schema, std::string("field 'kind': expected '") + kind + "'");
  }
}

json scenario_body(const EquivalenceReport& r) {
  json j;
  j["scenario"] = r.scenario;
  if (!r.description.empty()) j["description"] = r.description;
  j["passed"] = r.passed();
  j["seed"] = r.seed;
  j["config"] = r.config;
  json records = json::array();
  for (const auto& rec : r.records) records.push_back(record_json(rec));
  j["records"] = std::move(records);
  json series = json::object();
  for (const auto& s : r.series) {
    json values = json::array();
    for (double v : s.values) values.push_back(number(v));
    series[s.quantity] = std::move(values);
  }
  j["timeseries"] = {{"t", r.times}, {"quantities", std::move(series)}};
  j["warnings"] = r.warnings;
  return j;
}

json scenario_timing(const EquivalenceReport& r) {
  json checks = json::object();
  for (const auto& rec : r.records) checks[rec.id] = rec.elapsed_ms;
  return {{"elapsed_ms", r.elapsed_ms}, {"checks_ms", std::move(checks)}};
}

EquivalenceReport scenario_from_body(const json& j) {
  EquivalenceReport r;
  r.scenario = field(j, "scenario").get<std::string>();
  r.description = j.value("description", std::string());
  r.seed = j.value("seed", std::uint64_t{0});
  r.config = j.value("config", json::object());
  for (const auto& rec : field(j, "records")) r.records.push_back(record_from(rec));
  if (j.contains("timeseries")) {
    const json& ts = j["timeseries"];
    r.times = ts.value("t", std::vector<double>{});
    const json quantities = ts.value("quantities", json::object());
    for (const auto& [name, values] : quantities.items()) {
      TimeSeries s{name, {}};
      for (const auto& v : values) s.values.push_back(read_number(v, "timeseries"));
      r.series.push_back(std::move(s));
    }
  }
  r.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.contains("timing")) r.elapsed_ms = j["timing"].value("elapsed_ms", 0.0);
  return r;
}

void table_rows(std::ostringstream& out, const EquivalenceReport& r) {
  out << "scenario " << r.scenario << "  " << (r.passed() ? "PASS" : "FAIL") << "  seed "
      << r.seed << "  " << fmt(r.elapsed_ms, "%.1f") << " ms\n";
  for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
  out << "  " << pad("check", 28) << pad("status", 9) << pad("residual", 12) << pad("tol", 12)
      << "worst t\n";
  for (const auto& rec : r.records) {
    out << "  " << pad(rec.id, 28) << pad(to_string(rec.status), 9);
    if (rec.status == CheckStatus::Skipped) {
      out << pad("-", 12) << pad("-", 12) << "-";
    } else {
      // Lower-bound components are marked so "2.2  1e-6  pass" reads right.
      bool lower = false;
      for (const auto& c : rec.components) {
        if (c.residual == rec.residual && c.tol == rec.tol) lower = c.bound == Bound::AtLeast;
      }
      out << pad(fmt(rec.residual), 12) << pad((lower ? ">" : "") + fmt(rec.tol), 12)
          << (rec.worst_time ? fmt(*rec.worst_time, "%.4f") : std::string("-"));
    }
    out << "\n";
    if (rec.status == CheckStatus::Fail) {
      if (!rec.detail.empty()) out << "      " << rec.detail << "\n";
      for (const auto& c : rec.components) {
        if (c.passed) continue;
        out << "      " << c.name << ": " << fmt(c.residual)
            << (c.bound == Bound::AtMost ? " > " : " < ") << fmt(c.tol);
        if (!c.detail.empty()) out << " (" << c.detail << ")";
        out << "\n";
      }
    } else if (rec.status == CheckStatus::Skipped && !rec.detail.empty()) {
      out << "      " << rec.detail << "\n";
    }
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_rows(std::ostringstream& out, const EquivalenceReport& r) {
  for (const auto& s : r.series) {
    for (std::size_t k = 0; k < s.values.size() && k < r.times.size(); ++k) {
      out << csv_field(r.scenario) << ',' << fmt(r.times[k], "%.17g") << ','
          << csv_field(s.quantity) << ',' << fmt(s.values[k], "%.17g") << '\n';
    }
  }
}

}  // namespace

CheckComponent at_most(std::string name, double residual, double tol,
                       std::optional<double> worst_time, std::string detail) {
  return {std::move(name), residual, tol, Bound::AtMost, residual <= tol, worst_time,
          std::move(detail)};
}

CheckComponent at_least(std::string name, double residual, double tol,
                        std::optional<double> worst_time, std::string detail) {
  return {std::move(name), residual, tol, Bound::AtLeast, residual >= tol, worst_time,
          std::move(detail)};
}

CheckRecord make_record(std::string id, std::vector<CheckComponent> components,
                        std::string detail) {
  CheckRecord r;
  r.id = std::move(id);
  r.detail = std::move(detail);
  r.components = std::move(components);
  if (r.components.empty()) {
    r.status = CheckStatus::Skipped;
    return r;
  }
  const CheckComponent* worst = nullptr;
  bool any_failed = false;
  for (const auto& c : r.components) {
    any_failed = any_failed || !c.passed;
    if (!worst || severity(c) > severity(*worst)) worst = &c;
  }
  r.status = any_failed ? CheckStatus::Fail : CheckStatus::Pass;
  r.residual = worst->residual;
  r.tol = worst->tol;
  r.worst_time = worst->worst_time;
  return r;
}

CheckRecord skipped_record(std::string id, std::string reason) {
  CheckRecord r;
  r.id = std::move(id);
  r.status = CheckStatus::Skipped;
  r.detail = std::move(reason);
  return r;
}

CheckRecord failed_record(std::string id, std::string reason) {
  CheckRecord r;
  r.id = std::move(id);
  r.status = CheckStatus::Fail;
  r.residual = std::numeric_limits<double>::quiet_NaN();
  r.tol = 0.0;
  r.detail = std::move(reason);
  return r;
}

bool EquivalenceReport::passed() const {
  return std::none_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.failed(); });
}

const CheckRecord* EquivalenceReport::find(const std::string& id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

bool SuiteReport::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const EquivalenceReport& r) { return r.passed(); });
}

json to_json(const EquivalenceReport& r, bool include_timing) {
  json j = {{"schema", kReportSchema}, {"kind", "scenario"}};
  j.update(scenario_body(r));
  if (include_timing) j["timing"] = scenario_timing(r);
  return j;
}

json to_json(const SuiteReport& r, bool include_timing) {
  json j = {{"schema", kReportSchema}, {"kind", "suite"}};
  j["source"] = r.source;
  j["passed"] = r.passed();
  j["warnings"] = r.warnings;
  std::size_t failed = 0;
  json scenarios = json::array();
  for (const auto& s : r.reports) {
    failed += s.passed() ? 0 : 1;
    json body = scenario_body(s);
    if (include_timing) body["timing"] = scenario_timing(s);
    scenarios.push_back(std::move(body));
  }
  j["summary"] = {{"scenarios", r.reports.size()}, {"failed", failed}};
  j["scenarios"] = std::move(scenarios);
  if (include_timing) j["timing"] = {{"elapsed_ms", r.elapsed_ms}};
  return j;
}

EquivalenceReport scenario_report_from_json(const json& j) {
  require_schema(j, "scenario");
  return scenario_from_body(j);
}

SuiteReport suite_report_from_json(const json& j) {
  require_schema(j, "suite");
  SuiteReport r;
  r.source = j.value("source", std::string());
  r.warnings = j.value("warnings", std::vector<std::string>{});
  for (const auto& s : field(j, "scenarios")) r.reports.push_back(scenario_from_body(s));
  if (j.contains("timing")) r.elapsed_ms = j["timing"].value("elapsed_ms", 0.0);
  return r;
}

EmitFormat parse_emit_format(const std::string& id) {
  if (id == "table") return EmitFormat::Table;
  if (id == "records") return EmitFormat::Records;
  if (id == "timeseries") return EmitFormat::TimeSeries;
  fail(ErrorCode::UnknownFormat, "unknown format '" + id + "' (expected table, records or timeseries)");
}

std::string emit(const EquivalenceReport& r, EmitFormat format) {
  std::ostringstream out;
  switch (format) {
    case EmitFormat::Records: return to_json(r).dump(2) + "\n";
    case EmitFormat::Table: table_rows(out, r); break;
    case EmitFormat::TimeSeries:
      out << "scenario,t,quantity,value\n";
      csv_rows(out, r);
      break;
  }
  return out.str();
}

std::string emit(const SuiteReport& r, EmitFormat format) {
  std::ostringstream out;
  switch (format) {
    case EmitFormat::Records: return to_json(r).dump(2) + "\n";
    case EmitFormat::Table: {
      std::size_t failed = 0;
      for (const auto& s : r.reports) failed += s.passed() ? 0 : 1;
      out << "suite " << r.source << "  " << (r.passed() ? "PASS" : "FAIL") << "  "
          << r.reports.size() << " scenario(s), " << failed << " failed  "
          << fmt(r.elapsed_ms, "%.1f") << " ms\n";
      for (const auto& w : r.warnings) out << "warning: " << w << "\n";
      for (const auto& s : r.reports) {
        out << "\n";
        table_rows(out, s);
      }
      break;
    }
    case EmitFormat::TimeSeries:
      out << "scenario,t,quantity,value\n";
      for (const auto& s : r.reports) csv_rows(out, s);
      break;
  }
  return out.str();
}

}  // namespace fqm
