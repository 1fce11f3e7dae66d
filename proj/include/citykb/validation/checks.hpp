#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "citykb/query/bgp.hpp"
#include "citykb/schema/catalog.hpp"

namespace citykb::validation {

enum class Severity { Error, Warning };
enum class Expectation { EmptyResult, NonemptyResult };

std::string_view severityName(Severity s);
std::string_view expectationName(Expectation e);

// A regression check. The result rows of all `queries` are united and the
// distinct values of `subject` are the offending resources. With
// NonemptyResult the check instead fails once when nothing matches.
struct CheckDefinition {
  std::string checkId;
  std::string description;
  std::vector<query::GraphPatternQuery> queries;
  std::string subject;
  Severity severity = Severity::Error;
  Expectation expectation = Expectation::EmptyResult;
  // Set on checks derived from a catalog cardinality rule.
  std::optional<schema::CardinalityRule> rule;
};

class CheckError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Stable ids of the non-cardinality builtin checks.
inline constexpr std::string_view kUnreconciledService = "unreconciled-service";
inline constexpr std::string_view kDanglingLink = "dangling-link";
inline constexpr std::string_view kWeatherWithoutMunicipality = "weather-without-municipality";
inline constexpr std::string_view kEntryMultipleCoordinates = "entry-multiple-coordinates";
inline constexpr std::string_view kRouteWithoutStart = "route-without-start";

// "cardinality/<class>/<property>" using compacted IRIs.
std::string cardinalityCheckId(const schema::CardinalityRule& rule);

// Builtin suite: the fixed checks above plus one check per cardinality rule
// of `catalog`. Throws CheckError for a bound other than 0 or 1, which a
// basic graph pattern cannot count.
std::vector<CheckDefinition> builtinChecks(const schema::SchemaCatalog& catalog);
CheckDefinition cardinalityCheck(const schema::CardinalityRule& rule);

// Check-suite file: {"checks": [{"id", "description", "severity",
// "expectation", "subject", "queries": [<query wire format>, ...]}]}.
// Every query must bind `subject`; errors name the offending check.
std::vector<CheckDefinition> parseChecks(const nlohmann::json& suite);
std::vector<CheckDefinition> loadChecks(const std::filesystem::path& path);
nlohmann::json checksToJson(const std::vector<CheckDefinition>& checks);
// Suite text as shipped: fixed key order, scalar-only arrays and objects on
// one line.
std::string formatSuite(const nlohmann::json& suite);

inline constexpr std::size_t kSampleLimit = 20;

struct CheckResult {
  std::string checkId;
  Severity severity = Severity::Error;
  std::size_t violationCount = 0;
  std::vector<std::string> sample;  // sorted, at most kSampleLimit

  bool operator==(const CheckResult&) const = default;
};

struct CheckRun {
  std::uint64_t runId = 0;
  std::string timestamp;
  std::vector<CheckResult> results;  // one per check, in suite order

  const CheckResult* find(std::string_view checkId) const;
  nlohmann::json toJson() const;
  static CheckRun fromJson(const nlohmann::json& j);
  std::string table() const;
};

struct CountChange {
  std::string checkId;
  std::size_t baseline = 0;
  std::size_t current = 0;
};

struct RegressionReport {
  std::uint64_t baselineRunId = 0;
  std::uint64_t currentRunId = 0;
  std::vector<CountChange> regressions;
  std::vector<CountChange> improvements;
  // Present in only one of the two runs.
  std::vector<std::string> added;
  std::vector<std::string> removed;

  nlohmann::json toJson() const;
  std::string table() const;
};

// Pure over the snapshot apart from the id and timestamp it is handed.
CheckRun runChecks(const rdf::StoreView& view, const std::vector<CheckDefinition>& checks,
                   std::uint64_t runId = 0, std::string timestamp = {});

RegressionReport diffRuns(const CheckRun& baseline, const CheckRun& current);

// Runs with sequential ids. Thread-safe; persisted as one JSON file.
class RunHistory {
 public:
  // Assigns the next id to `run` and stores it.
  CheckRun record(CheckRun run);
  std::optional<CheckRun> get(std::uint64_t id) const;
  std::optional<CheckRun> latest() const;
  std::size_t size() const;

  nlohmann::json toJson() const;
  void loadJson(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::map<std::uint64_t, CheckRun> runs_;
  std::uint64_t next_ = 1;
};

}  // namespace citykb::validation
