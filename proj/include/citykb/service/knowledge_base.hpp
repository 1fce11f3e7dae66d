#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "citykb/ingestion/clock.hpp"
#include "citykb/ingestion/ingest.hpp"
#include "citykb/ingestion/record_store.hpp"
#include "citykb/mapping/model.hpp"
#include "citykb/mapping/names.hpp"
#include "citykb/mapping/publish.hpp"
#include "citykb/quadstore/store.hpp"
#include "citykb/query/geo.hpp"
#include "citykb/reconciliation/pipeline.hpp"
#include "citykb/reconciliation/review.hpp"
#include "citykb/service/config.hpp"
#include "citykb/validation/checks.hpp"

namespace citykb::service {

class UnknownDataset : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct DatasetStatus {
  ingest::DatasetDescriptor descriptor;
  std::optional<ingest::VersionInfo> latestRecorded;
  // Active graph version; for realtime feeds the number of snapshot graphs.
  std::optional<std::uint64_t> activeVersion;
  std::optional<nlohmann::json> lastIngest;  // IngestOutcome::toJson of the last attempt
  nlohmann::json toJson() const;
};

struct IngestOutcome {
  ingest::IngestReport report;
  std::optional<mapping::PublishReport> published;
  std::optional<std::map<std::string, std::size_t>> reconciliation;
  nlohmann::json toJson() const;
};

struct ReconcileSummary {
  std::size_t services = 0;
  std::size_t linked = 0;
  std::size_t newlyQueued = 0;
  std::size_t pendingReviews = 0;
  std::map<std::string, std::size_t> byLevelAndStep;
  nlohmann::json toJson() const;
};

// The running system: quad store, raw-record log, review queue and
// validation history behind one lock for compound writes. Reads go to
// store snapshots and never take that lock.
class KnowledgeBase {
 public:
  KnowledgeBase(ServiceConfig config, ingest::Clock& clock,
                ingest::Fetcher fetcher = ingest::fetchSource);

  // Imports static graphs, republishes the newest recorded version of every
  // dataset, reconciles, replays review decisions and materializes
  // inferences. Loads persisted reviews and validation runs.
  void bootstrap();

  const ServiceConfig& config() const { return config_; }
  rdf::QuadStore& store() { return store_; }
  rdf::StoreView snapshot() const { return store_.snapshot(); }
  std::shared_ptr<const query::GeoIndex> geo();

  std::vector<DatasetStatus> datasets() const;
  // Throws UnknownDataset, ingest::SourceUnavailable or ingest::DatasetError.
  // Failures are remembered as the dataset's last ingest report.
  IngestOutcome ingest(const std::string& datasetId);
  ReconcileSummary reconcile();
  // Settings the reconciliation passes use.
  recon::ReconcileConfig reconcileConfig() const;

  recon::ReviewQueue& reviews() { return reviews_; }
  // Throws recon::ReviewError. Persists the queue on a fresh decision.
  recon::ResolveResult resolveReview(std::uint64_t id, const std::string& choice,
                                     const std::string& idempotencyKey,
                                     const std::string& reviewer);

  const std::vector<validation::CheckDefinition>& checks() const { return checks_; }
  validation::RunHistory& history() { return history_; }
  validation::CheckRun runValidation();

  std::string now() const;

 private:
  const mapping::CompiledMapping& mappingFor(const DatasetConfig& d);
  IngestOutcome ingestDataset(const DatasetConfig& d);
  ReconcileSummary reconcileLocked();
  void replayDecisions();
  void saveReviews() const;
  void saveHistory() const;

  ServiceConfig config_;
  ingest::Clock& clock_;
  ingest::Fetcher fetcher_;
  rdf::QuadStore store_;
  ingest::RecordStore records_;
  mapping::IstatTable istat_;
  recon::QualifierTable qualifiers_;
  recon::ReviewQueue reviews_;
  validation::RunHistory history_;
  std::vector<validation::CheckDefinition> checks_;
  query::GeoCache geo_;

  std::mutex writeMu_;  // publish + reconcile + infer run as one unit
  std::mutex mappingMu_;
  std::map<std::string, std::unique_ptr<mapping::CompiledMapping>> mappings_;
  mutable std::mutex reportMu_;
  std::map<std::string, nlohmann::json> lastIngest_;
};

}  // namespace citykb::service
