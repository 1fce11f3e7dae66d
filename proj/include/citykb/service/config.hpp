#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "citykb/ingestion/ingest.hpp"

namespace citykb::service {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DatasetConfig {
  ingest::DatasetDescriptor descriptor;
  std::filesystem::path mappingPath;  // resolved from descriptor.mappingRef
};

// Deployment settings. Relative paths in the file are resolved against the
// directory holding it.
struct ServiceConfig {
  std::filesystem::path recordStore = "var/records";
  std::filesystem::path stateDir = "var/state";
  std::optional<std::filesystem::path> istatCodes;
  std::optional<std::filesystem::path> municipalityAliases;
  std::optional<std::filesystem::path> qualifiers;
  std::optional<std::filesystem::path> checks;  // builtin suite when absent
  // N-Quads files imported at startup, such as the street guide.
  std::vector<std::filesystem::path> staticGraphs;
  std::vector<DatasetConfig> datasets;
  // Datasets whose new versions trigger a reconciliation pass.
  std::set<std::string> reconcileAfter;
  unsigned reconcileThreads = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
  // Run the periodic ingestion scheduler while serving.
  bool schedule = false;

  const DatasetConfig* dataset(const std::string& id) const;

  static ServiceConfig fromJson(const nlohmann::json& j, const std::filesystem::path& baseDir);
  static ServiceConfig load(const std::filesystem::path& path);
};

// {"id", "source", "format", "category", "periodSeconds", "mapping",
//  "csv": {"delimiter", "quote", "header"}}
ingest::DatasetDescriptor descriptorFromJson(const nlohmann::json& j);
nlohmann::json descriptorToJson(const ingest::DatasetDescriptor& d);

}  // namespace citykb::service
