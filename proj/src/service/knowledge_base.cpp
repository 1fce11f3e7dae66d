#include "citykb/service/knowledge_base.hpp"

#include <set>

#include "citykb/mapping/publish.hpp"
#include "citykb/quadstore/nquads.hpp"
#include "citykb/schema/catalog.hpp"
#include "citykb/schema/reasoner.hpp"

namespace citykb::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json versionJson(const std::optional<ingest::VersionInfo>& v) {
  if (!v) return nullptr;
  return {{"version", v->version},
          {"sourceHash", v->sourceHash},
          {"retrievedAt", v->retrievedAt},
          {"records", v->recordCount}};
}

json cellErrorsJson(const std::vector<mapping::CellError>& errors, std::size_t limit = 20) {
  json out = json::array();
  for (std::size_t i = 0; i < errors.size() && i < limit; ++i)
    out.push_back({{"row", errors[i].rowIndex}, {"column", errors[i].column}, {"message", errors[i].message}});
  return out;
}

}  // namespace

json DatasetStatus::toJson() const {
  auto j = descriptorToJson(descriptor);
  j["latest"] = versionJson(latestRecorded);
  j["activeGraphVersion"] = activeVersion ? json(*activeVersion) : json(nullptr);
  j["lastIngest"] = lastIngest ? *lastIngest : json(nullptr);
  return j;
}

json IngestOutcome::toJson() const {
  json j{{"dataset", report.datasetId},
         {"skipped", report.skipped},
         {"records", report.recordCount},
         {"retrievedAt", report.retrievedAt},
         {"newVersion", report.newVersion ? json(*report.newVersion) : json(nullptr)}};
  json rowErrors = json::array();
  for (const auto& e : report.errors) rowErrors.push_back({{"index", e.index}, {"message", e.message}});
  j["recordErrors"] = rowErrors;
  if (published) {
    j["published"] = {{"graph", published->graph.toIri()},
                      {"quads", published->quadCount},
                      {"mappingErrorCount", published->errors.size()},
                      {"mappingErrors", cellErrorsJson(published->errors)}};
  }
  if (reconciliation) j["reconciliation"] = *reconciliation;
  return j;
}

json ReconcileSummary::toJson() const {
  return {{"services", services},
          {"linkQuads", linked},
          {"newlyQueued", newlyQueued},
          {"pendingReviews", pendingReviews},
          {"byLevelAndStep", byLevelAndStep}};
}

KnowledgeBase::KnowledgeBase(ServiceConfig config, ingest::Clock& clock, ingest::Fetcher fetcher)
    : config_(std::move(config)),
      clock_(clock),
      fetcher_(std::move(fetcher)),
      records_(config_.recordStore),
      qualifiers_(recon::QualifierTable::defaults()) {
  if (config_.istatCodes) istat_ = mapping::IstatTable::load(*config_.istatCodes, config_.municipalityAliases);
  if (config_.qualifiers) qualifiers_ = recon::QualifierTable::load(*config_.qualifiers);
  checks_ = config_.checks ? validation::loadChecks(*config_.checks)
                           : validation::builtinChecks(schema::builtinCatalog());
}

std::string KnowledgeBase::now() const { return ingest::formatIsoUtc(clock_.now()); }

std::shared_ptr<const query::GeoIndex> KnowledgeBase::geo() { return geo_.get(store_.snapshot()); }

const mapping::CompiledMapping& KnowledgeBase::mappingFor(const DatasetConfig& d) {
  std::lock_guard lock(mappingMu_);
  auto& slot = mappings_[d.descriptor.id];
  if (!slot) {
    auto compiled = mapping::compileMapping(mapping::loadMappingModel(d.mappingPath), schema::builtinCatalog());
    if (auto* errs = std::get_if<std::vector<mapping::CompileError>>(&compiled))
      throw ConfigError("mapping " + d.mappingPath.string() + ": " +
                        (errs->empty() ? std::string("invalid") : errs->front().message));
    slot = std::make_unique<mapping::CompiledMapping>(std::get<mapping::CompiledMapping>(std::move(compiled)));
  }
  return *slot;
}

void KnowledgeBase::bootstrap() {
  std::lock_guard lock(writeMu_);
  fs::create_directories(config_.stateDir);
  if (fs::exists(config_.stateDir / "reviews.json")) reviews_.load(config_.stateDir / "reviews.json");
  if (fs::exists(config_.stateDir / "validation_runs.json"))
    history_.load(config_.stateDir / "validation_runs.json");
  for (const auto& path : config_.staticGraphs) {
    auto issues = rdf::importQuads(store_, path);
    if (!issues.empty())
      throw ConfigError(path.string() + ":" + std::to_string(issues.front().line) + ": " +
                        issues.front().message);
  }
  for (const auto& d : config_.datasets) {
    auto versions = records_.versions(d.descriptor.id);
    if (versions.empty()) continue;
    const auto& m = mappingFor(d);
    // Realtime feeds keep history; replay every snapshot in order.
    std::size_t from = d.descriptor.category == ingest::DatasetCategory::Realtime ? 0 : versions.size() - 1;
    for (std::size_t i = from; i < versions.size(); ++i) {
      auto recs = records_.read(d.descriptor.id, versions[i].version);
      mapping::publishVersion(store_, d.descriptor, versions[i].version, recs, m, &istat_);
    }
  }
  reconcileLocked();
  replayDecisions();
  schema::materializeInferences(store_, schema::builtinCatalog());
}

std::vector<DatasetStatus> KnowledgeBase::datasets() const {
  std::vector<DatasetStatus> out;
  for (const auto& d : config_.datasets) {
    DatasetStatus s{d.descriptor, records_.latest(d.descriptor.id), std::nullopt, std::nullopt};
    if (d.descriptor.category == ingest::DatasetCategory::Realtime) {
      std::uint64_t n = 0;
      for (const auto& g : store_.snapshot().graphs())
        n += g.dataset.rfind(d.descriptor.id + "/", 0) == 0;
      if (n) s.activeVersion = n;
    } else {
      s.activeVersion = store_.activeVersion(d.descriptor.id);
    }
    {
      std::lock_guard lock(reportMu_);
      if (auto it = lastIngest_.find(d.descriptor.id); it != lastIngest_.end()) s.lastIngest = it->second;
    }
    out.push_back(std::move(s));
  }
  return out;
}

IngestOutcome KnowledgeBase::ingest(const std::string& datasetId) {
  const auto* d = config_.dataset(datasetId);
  if (!d) throw UnknownDataset("no dataset named " + datasetId);
  try {
    auto out = ingestDataset(*d);
    std::lock_guard lock(reportMu_);
    lastIngest_[datasetId] = out.toJson();
    return out;
  } catch (const std::exception& e) {
    std::lock_guard lock(reportMu_);
    lastIngest_[datasetId] = {{"dataset", datasetId}, {"retrievedAt", now()}, {"failure", e.what()}};
    throw;
  }
}

IngestOutcome KnowledgeBase::ingestDataset(const DatasetConfig& dc) {
  const auto* d = &dc;
  const auto& datasetId = dc.descriptor.id;
  const auto& m = mappingFor(*d);
  IngestOutcome out;
  // Fetching may be slow and stays outside the write lock; the record store
  // serializes writers of one dataset.
  out.report = ingest::ingestOnce(d->descriptor, records_, clock_, fetcher_);
  if (!out.report.newVersion) return out;
  auto recs = records_.read(datasetId, *out.report.newVersion);
  std::lock_guard lock(writeMu_);
  out.published = mapping::publishVersion(store_, d->descriptor, *out.report.newVersion, recs, m, &istat_);
  if (config_.reconcileAfter.count(datasetId)) out.reconciliation = reconcileLocked().byLevelAndStep;
  schema::materializeInferences(store_, schema::builtinCatalog());
  return out;
}

ReconcileSummary KnowledgeBase::reconcile() {
  std::lock_guard lock(writeMu_);
  auto s = reconcileLocked();
  schema::materializeInferences(store_, schema::builtinCatalog());
  return s;
}

recon::ReconcileConfig KnowledgeBase::reconcileConfig() const {
  recon::ReconcileConfig rc;
  rc.qualifiers = qualifiers_;
  rc.municipalities = &istat_;
  return rc;
}

ReconcileSummary KnowledgeBase::reconcileLocked() {
  auto view = store_.snapshot();
  auto rc = reconcileConfig();
  auto run = recon::reconcileAll(view, rc, config_.reconcileThreads);
  recon::publishLinks(store_, run);

  ReconcileSummary s;
  s.services = run.outcomes.size();
  s.linked = run.quads.size();
  s.byLevelAndStep = run.summary();
  // A decided service is not queued again.
  std::set<std::string> decided;
  for (auto st : {recon::ReviewStatus::Resolved, recon::ReviewStatus::Rejected})
    for (const auto& item : reviews_.list(st, 0, reviews_.count(st)))
      decided.insert(item.address.serviceIri);
  std::map<std::string, recon::ServiceAddress> addresses;
  for (auto& a : recon::collectServices(view)) addresses.emplace(a.serviceIri, a);
  std::optional<recon::Gazetteer> gaz;
  auto before = reviews_.count(recon::ReviewStatus::Pending);
  auto stamp = now();
  for (const auto& o : run.outcomes) {
    if (o.level != recon::Level::PendingReview || decided.count(o.serviceIri)) continue;
    if (!gaz) gaz = recon::Gazetteer::build(view);
    reviews_.enqueue(o, addresses.at(o.serviceIri), *gaz, stamp);
  }
  s.pendingReviews = reviews_.count(recon::ReviewStatus::Pending);
  s.newlyQueued = s.pendingReviews - before;
  if (s.newlyQueued) saveReviews();
  return s;
}

void KnowledgeBase::replayDecisions() {
  std::vector<rdf::Quad> quads;
  auto n = reviews_.count(recon::ReviewStatus::Resolved);
  for (const auto& item : reviews_.list(recon::ReviewStatus::Resolved, 0, n))
    if (item.decision) quads.insert(quads.end(), item.decision->quads.begin(), item.decision->quads.end());
  if (quads.empty()) return;
  std::string ds(recon::kReviewDataset);
  store_.replaceGraph(ds, store_.activeVersion(ds).value_or(0) + 1, quads);
}

recon::ResolveResult KnowledgeBase::resolveReview(std::uint64_t id, const std::string& choice,
                                                  const std::string& idempotencyKey,
                                                  const std::string& reviewer) {
  std::lock_guard lock(writeMu_);
  auto r = reviews_.resolve(id, choice, idempotencyKey, reviewer, now(), store_);
  if (!r.replayed) {
    saveReviews();
    schema::materializeInferences(store_, schema::builtinCatalog());
  }
  return r;
}

validation::CheckRun KnowledgeBase::runValidation() {
  auto run = validation::runChecks(store_.snapshot(), checks_, 0, now());
  run = history_.record(std::move(run));
  saveHistory();
  return run;
}

void KnowledgeBase::saveReviews() const {
  fs::create_directories(config_.stateDir);
  reviews_.save(config_.stateDir / "reviews.json");
}

void KnowledgeBase::saveHistory() const {
  fs::create_directories(config_.stateDir);
  history_.save(config_.stateDir / "validation_runs.json");
}

}  // namespace citykb::service
