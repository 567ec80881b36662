#pragma once

// Built-in scenario catalog. The same documents are exported to
// scenarios/*.json so the shipped files and the built-ins cannot drift.

#include <string>
#include <vector>

#include <json.hpp>

#include "fibreqm/scenario.hpp"

namespace fqm {

inline constexpr const char* kManifestSchema = "fibreqm.manifest/1";

struct CatalogEntry {
  std::string name;
  std::string description;
  nlohmann::json document;
};

/// In name order.
const std::vector<CatalogEntry>& catalog();
std::vector<ScenarioConfig> catalog_scenarios();
/// Throws InvalidArgument for an unknown name.
ScenarioConfig catalog_scenario(const std::string& name);

/// Writes <name>.json for every entry plus manifest.json into `dir`.
void export_catalog(const std::string& dir);

}  // namespace fqm
