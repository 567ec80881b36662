#pragma once

// Equivalence reports: per-check records, suite aggregation, emission in
// table / records / timeseries form, and reading records back.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fqm {

inline constexpr const char* kReportSchema = "fibreqm.report/1";

/// How a component compares its residual with its tolerance.
enum class Bound {
  AtMost,   // residual ≤ tol
  AtLeast,  // residual ≥ tol (negative controls, conditioning floors)
};

struct CheckComponent {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  Bound bound = Bound::AtMost;
  bool passed = false;
  std::optional<double> worst_time;
  std::string detail;
};

enum class CheckStatus { Pass, Fail, Skipped };

const char* to_string(CheckStatus s);

struct CheckRecord {
  std::string id;
  CheckStatus status = CheckStatus::Skipped;
  /// Taken from the component closest to (or furthest past) its bound.
  double residual = 0.0;
  double tol = 0.0;
  std::optional<double> worst_time;
  std::string detail;
  std::vector<CheckComponent> components;
  double elapsed_ms = 0.0;

  bool failed() const noexcept { return status == CheckStatus::Fail; }
};

/// Builds a record from its components: Fail if any component fails,
/// Skipped if there are none.
CheckRecord make_record(std::string id, std::vector<CheckComponent> components,
                        std::string detail = {});
CheckRecord skipped_record(std::string id, std::string reason);
CheckRecord failed_record(std::string id, std::string reason);

CheckComponent at_most(std::string name, double residual, double tol,
                       std::optional<double> worst_time = std::nullopt, std::string detail = {});
CheckComponent at_least(std::string name, double residual, double tol,
                        std::optional<double> worst_time = std::nullopt, std::string detail = {});

/// One tracked quantity sampled at every grid node.
struct TimeSeries {
  std::string quantity;
  std::vector<double> values;
};

struct EquivalenceReport {
  std::string scenario;
  std::string description;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<CheckRecord> records;
  std::vector<double> times;
  std::vector<TimeSeries> series;
  std::vector<std::string> warnings;
  double elapsed_ms = 0.0;

  bool passed() const;
  const CheckRecord* find(const std::string& id) const;
};

struct SuiteReport {
  std::string source;
  /// Failing scenarios first, then by name.
  std::vector<EquivalenceReport> reports;
  std::vector<std::string> warnings;
  double elapsed_ms = 0.0;

  bool passed() const;
};

/// Records JSON. Timing lives under "timing" only, so two runs of the same
/// config differ in that object and nowhere else.
nlohmann::json to_json(const EquivalenceReport& r, bool include_timing = true);
nlohmann::json to_json(const SuiteReport& r, bool include_timing = true);
EquivalenceReport scenario_report_from_json(const nlohmann::json& j);
SuiteReport suite_report_from_json(const nlohmann::json& j);

enum class EmitFormat { Table, Records, TimeSeries };

/// "table", "records" or "timeseries"; throws UnknownFormat otherwise.
EmitFormat parse_emit_format(const std::string& id);

std::string emit(const EquivalenceReport& r, EmitFormat format);
std::string emit(const SuiteReport& r, EmitFormat format);

}  // namespace fqm
