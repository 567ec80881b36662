#include "fibreqm/fibreqm.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <variant>

#include "fibreqm/catalog.hpp"
#include "fibreqm/errors.hpp"
#include "fibreqm/report.hpp"
#include "fibreqm/runner.hpp"
#include "fibreqm/scenario.hpp"

struct fqm_scenario {
  fqm::ScenarioConfig config;
};

struct fqm_report {
  std::variant<fqm::EquivalenceReport, fqm::SuiteReport> value;
};

namespace {

thread_local std::string last_error;

fqm_status status_of(fqm::ErrorCode code) {
  using fqm::ErrorCode;
  switch (code) {
    case ErrorCode::Io: return FQM_IO;
    case ErrorCode::Parse: return FQM_PARSE;
    case ErrorCode::Schema: return FQM_SCHEMA;
    case ErrorCode::DimensionMismatch: return FQM_DIMENSION;
    case ErrorCode::UnknownFormat: return FQM_UNKNOWN_FORMAT;
    case ErrorCode::SingularMatrix:
    case ErrorCode::ZeroState:
    case ErrorCode::NonConvergence:
    case ErrorCode::EvaluationFailure: return FQM_NUMERICAL;
    case ErrorCode::InvalidArgument:
    case ErrorCode::OffGrid:
    case ErrorCode::GridMismatch:
    case ErrorCode::NotPointwise:
    case ErrorCode::MissingDerivative: return FQM_INVALID_ARGUMENT;
  }
  return FQM_INTERNAL;
}

fqm_status set_error(fqm_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
fqm_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return FQM_OK;
  } catch (const fqm::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(FQM_SCHEMA, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FQM_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FQM_INTERNAL, e.what());
  } catch (...) {
    return set_error(FQM_INTERNAL, "unknown exception");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

#define FQM_REQUIRE(cond, what) \
  do { \
    if (!(cond)) return set_error(FQM_INVALID_ARGUMENT, what); \
  } while (0)

fqm_report* report_from_json(const nlohmann::json& j) {
  const std::string kind = j.is_object() ? j.value("kind", std::string()) : std::string();
  if (kind == "suite") return new fqm_report{fqm::suite_report_from_json(j)};
  return new fqm_report{fqm::scenario_report_from_json(j)};
}

}  // namespace

extern "C" {

const char* fqm_version(void) { return "1.0.0"; }

const char* fqm_status_string(fqm_status status) {
  switch (status) {
    case FQM_OK: return "ok";
    case FQM_INVALID_ARGUMENT: return "invalid argument";
    case FQM_IO: return "i/o error";
    case FQM_PARSE: return "parse error";
    case FQM_SCHEMA: return "schema violation";
    case FQM_DIMENSION: return "dimension mismatch";
    case FQM_NUMERICAL: return "numerical failure";
    case FQM_UNKNOWN_FORMAT: return "unknown format";
    case FQM_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* fqm_last_error(void) { return last_error.c_str(); }

fqm_status fqm_scenario_load_file(const char* path, fqm_scenario** out) {
  FQM_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new fqm_scenario{fqm::load_scenario(path)}; });
}

fqm_status fqm_scenario_load_string(const char* json_text, fqm_scenario** out) {
  FQM_REQUIRE(json_text && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new fqm_scenario{fqm::parse_scenario(json_text)}; });
}

fqm_status fqm_scenario_load_builtin(const char* name, fqm_scenario** out) {
  FQM_REQUIRE(name && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new fqm_scenario{fqm::catalog_scenario(name)}; });
}

fqm_status fqm_scenario_to_json(const fqm_scenario* scenario, char** out) {
  FQM_REQUIRE(scenario && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = copy_string(fqm::to_json(scenario->config).dump(2)); });
}

const char* fqm_scenario_name(const fqm_scenario* scenario) {
  return scenario ? scenario->config.name.c_str() : nullptr;
}

void fqm_scenario_free(fqm_scenario* scenario) { delete scenario; }

fqm_status fqm_run_scenario(const fqm_scenario* scenario, fqm_report** out) {
  FQM_REQUIRE(scenario && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new fqm_report{fqm::run_scenario(scenario->config)}; });
}

fqm_status fqm_run_suite(const char* source, size_t threads, fqm_report** out) {
  FQM_REQUIRE(source && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    fqm::SuiteOptions options;
    options.threads = threads;
    *out = new fqm_report{fqm::run_suite(source, options)};
  });
}

fqm_status fqm_report_load_file(const char* path, fqm_report** out) {
  FQM_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::FILE* f = std::fopen(path, "rb");
    if (!f) fqm::fail(fqm::ErrorCode::Io, std::string("cannot open report '") + path + "'");
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    std::fclose(f);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      fqm::fail(fqm::ErrorCode::Parse, std::string(path) + ": " + e.what());
    }
    *out = report_from_json(j);
  });
}

fqm_status fqm_report_load_string(const char* json_text, fqm_report** out) {
  FQM_REQUIRE(json_text && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      fqm::fail(fqm::ErrorCode::Parse, e.what());
    }
    *out = report_from_json(j);
  });
}

int fqm_report_passed(const fqm_report* report) {
  if (!report) return -1;
  return std::visit([](const auto& r) { return r.passed() ? 1 : 0; }, report->value);
}

size_t fqm_report_scenario_count(const fqm_report* report) {
  if (!report) return 0;
  if (const auto* suite = std::get_if<fqm::SuiteReport>(&report->value)) return suite->reports.size();
  return 1;
}

size_t fqm_report_warning_count(const fqm_report* report) {
  if (!report) return 0;
  return std::visit([](const auto& r) { return r.warnings.size(); }, report->value);
}

const char* fqm_report_warning(const fqm_report* report, size_t index) {
  if (!report) return nullptr;
  return std::visit(
      [index](const auto& r) -> const char* {
        return index < r.warnings.size() ? r.warnings[index].c_str() : nullptr;
      },
      report->value);
}

fqm_status fqm_report_emit(const fqm_report* report, const char* format, char** out, size_t* length) {
  FQM_REQUIRE(report && format && out, "null argument");
  *out = nullptr;
  if (length) *length = 0;
  return guarded([&] {
    const fqm::EmitFormat f = fqm::parse_emit_format(format);
    const std::string text = std::visit([f](const auto& r) { return fqm::emit(r, f); }, report->value);
    *out = copy_string(text);
    if (length) *length = text.size();
  });
}

void fqm_report_free(fqm_report* report) { delete report; }

size_t fqm_catalog_count(void) { return fqm::catalog().size(); }

const char* fqm_catalog_name(size_t index) {
  const auto& c = fqm::catalog();
  return index < c.size() ? c[index].name.c_str() : nullptr;
}

const char* fqm_catalog_description(size_t index) {
  const auto& c = fqm::catalog();
  return index < c.size() ? c[index].description.c_str() : nullptr;
}

fqm_status fqm_catalog_export(const char* directory) {
  FQM_REQUIRE(directory, "null argument");
  return guarded([&] { fqm::export_catalog(directory); });
}

void fqm_free_string(char* s) { std::free(s); }

}  // extern "C"
