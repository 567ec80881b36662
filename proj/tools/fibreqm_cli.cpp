// Command-line front end. Talks to the library only through the C API.
//
//   fibreqm run <config.json> [--builtin] [--format F] [--out FILE]
//   fibreqm suite <manifest|dir|builtin> [--format F] [--out FILE] [--threads N]
//   fibreqm catalog [--export DIR]
//   fibreqm emit --format F <report.json>
//
// Exit status: 0 aggregate pass, 1 some check failed, 2 usage or input error.
// FIBREQM_OUTPUT_DIR, when set, receives <name>.report.json and
// <name>.timeseries.csv for every run/suite.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fibreqm/fibreqm.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

int report_error(fqm_status status) {
  std::cerr << "fibreqm: " << fqm_status_string(status);
  const std::string detail = fqm_last_error();
  if (!detail.empty()) std::cerr << ": " << detail;
  std::cerr << "\n";
  return kExitError;
}

bool emit_to(const fqm_report* report, const std::string& format, std::string& text, fqm_status& status) {
  char* buf = nullptr;
  size_t len = 0;
  status = fqm_report_emit(report, format.c_str(), &buf, &len);
  if (status != FQM_OK) return false;
  text.assign(buf, len);
  fqm_free_string(buf);
  return true;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "fibreqm: cannot write '" << path << "'\n";
    return false;
  }
  out << text;
  return static_cast<bool>(out);
}

std::string file_stem(std::string name) {
  for (char& c : name) {
    if (c == '/' || c == '\\' || c == ' ' || c == ':') c = '_';
  }
  return name;
}

/// Prints or writes the report, mirrors it into FIBREQM_OUTPUT_DIR, and maps
/// the verdict to an exit status.
int finish(fqm_report* report, const std::string& format, const std::string& out_path,
           const std::string& stem) {
  std::string text;
  fqm_status status;
  if (!emit_to(report, format, text, status)) {
    fqm_report_free(report);
    return report_error(status);
  }
  if (out_path.empty()) {
    std::cout << text;
  } else if (!write_file(out_path, text)) {
    fqm_report_free(report);
    return kExitError;
  }
  for (size_t i = 0; i < fqm_report_warning_count(report); ++i) {
    std::cerr << "warning: " << fqm_report_warning(report, i) << "\n";
  }
  if (const char* dir = std::getenv("FIBREQM_OUTPUT_DIR"); dir && *dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const std::filesystem::path base = std::filesystem::path(dir) / file_stem(stem);
    std::string records;
    std::string series;
    if (!emit_to(report, "records", records, status) || !emit_to(report, "timeseries", series, status)) {
      fqm_report_free(report);
      return report_error(status);
    }
    if (!write_file(base.string() + ".report.json", records) ||
        !write_file(base.string() + ".timeseries.csv", series)) {
      fqm_report_free(report);
      return kExitError;
    }
  }
  const int passed = fqm_report_passed(report);
  fqm_report_free(report);
  return passed == 1 ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bundle-versus-conventional quantum mechanics equivalence checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fqm_version()));

  std::string config;
  std::string run_format = "table";
  std::string run_out;
  bool builtin = false;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config, "Scenario file (or built-in name with --builtin)")->required();
  run->add_flag("--builtin", builtin, "Treat <config> as a built-in catalog name");
  run->add_option("--format", run_format, "table | records | timeseries");
  run->add_option("--out", run_out, "Write the output here instead of stdout");

  std::string source;
  std::string suite_format = "table";
  std::string suite_out;
  std::size_t threads = 0;
  auto* suite = app.add_subcommand("suite", "Run a manifest, a directory of scenarios, or 'builtin'");
  suite->add_option("source", source, "Manifest file, directory, or 'builtin'")->required();
  suite->add_option("--format", suite_format, "table | records | timeseries");
  suite->add_option("--out", suite_out, "Write the output here instead of stdout");
  suite->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  std::string export_dir;
  auto* catalog = app.add_subcommand("catalog", "List built-in scenarios");
  catalog->add_option("--export", export_dir, "Write the built-ins and a manifest into this directory");

  std::string emit_format;
  std::string report_path;
  std::string emit_out;
  auto* emit = app.add_subcommand("emit", "Re-emit a stored records file in another format");
  emit->add_option("--format", emit_format, "table | records | timeseries")->required();
  emit->add_option("report", report_path, "Records file written by run/suite")->required();
  emit->add_option("--out", emit_out, "Write the output here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  if (*run) {
    fqm_scenario* scenario = nullptr;
    fqm_status status = builtin ? fqm_scenario_load_builtin(config.c_str(), &scenario)
                                : fqm_scenario_load_file(config.c_str(), &scenario);
    if (status != FQM_OK) return report_error(status);
    const std::string name = fqm_scenario_name(scenario);
    fqm_report* report = nullptr;
    status = fqm_run_scenario(scenario, &report);
    fqm_scenario_free(scenario);
    if (status != FQM_OK) return report_error(status);
    return finish(report, run_format, run_out, name);
  }

  if (*suite) {
    fqm_report* report = nullptr;
    const fqm_status status = fqm_run_suite(source.c_str(), threads, &report);
    if (status != FQM_OK) return report_error(status);
    return finish(report, suite_format, suite_out, "suite");
  }

  if (*catalog) {
    if (!export_dir.empty()) {
      const fqm_status status = fqm_catalog_export(export_dir.c_str());
      if (status != FQM_OK) return report_error(status);
      std::cout << "exported " << fqm_catalog_count() << " scenarios to " << export_dir << "\n";
      return kExitPass;
    }
    for (size_t i = 0; i < fqm_catalog_count(); ++i) {
      std::printf("%-22s %s\n", fqm_catalog_name(i), fqm_catalog_description(i));
    }
    return kExitPass;
  }

  fqm_report* report = nullptr;
  const fqm_status status = fqm_report_load_file(report_path.c_str(), &report);
  if (status != FQM_OK) return report_error(status);
  std::string text;
  fqm_status emit_status;
  if (!emit_to(report, emit_format, text, emit_status)) {
    fqm_report_free(report);
    return report_error(emit_status);
  }
  const int passed = fqm_report_passed(report);
  fqm_report_free(report);
  if (emit_out.empty()) {
    std::cout << text;
  } else if (!write_file(emit_out, text)) {
    return kExitError;
  }
  return passed == 1 ? kExitPass : kExitFail;
}
