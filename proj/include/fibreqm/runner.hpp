#pragma once

// Runs scenarios: the conventional oracle, the bundle pipeline and every
// requested check, assembled into an EquivalenceReport.

#include <cstddef>
#include <string>
#include <vector>

#include "fibreqm/report.hpp"
#include "fibreqm/scenario.hpp"

namespace fqm {

/// Deterministic for a given config. Failures inside a check, numerical or
/// otherwise, become failed records; nothing is silently skipped.
EquivalenceReport run_scenario(const ScenarioConfig& cfg);

struct SuiteOptions {
  /// 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

/// `source` is a manifest file, a directory of scenario files, or "builtin"
/// for the shipped catalog. A manifest is
///   {"schema": "fibreqm.manifest/1", "scenarios": ["a.json", ...]}
/// with paths relative to the manifest. Scenario files that fail to load are
/// reported as failing scenarios; an unreadable manifest throws Io/Parse.
SuiteReport run_suite(const std::string& source, const SuiteOptions& options = {});

/// Runs already-loaded configs; the report is sorted, never ordered by
/// completion.
SuiteReport run_configs(const std::vector<ScenarioConfig>& configs, const std::string& source,
                        const SuiteOptions& options = {});

}  // namespace fqm
