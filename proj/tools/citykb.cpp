// citykb command-line interface.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "citykb/ingestion/scheduler.hpp"
#include "citykb/mapping/publish.hpp"
#include "citykb/quadstore/nquads.hpp"
#include "citykb/reconciliation/pipeline.hpp"
#include "citykb/schema/catalog.hpp"
#include "citykb/schema/reasoner.hpp"
#include "citykb/service/http.hpp"
#include "citykb/testkit/corpus.hpp"
#include "citykb/validation/checks.hpp"

using namespace citykb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kRegressions = 2;

void log(const std::string& line) { std::cerr << "[citykb] " << line << "\n"; }

// Blocks SIGINT/SIGTERM in every thread started afterwards and hands back a
// thread that runs `onSignal` once one arrives.
std::thread signalWaiter(std::function<void()> onSignal) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return std::thread([set, onSignal = std::move(onSignal)] {
    int sig = 0;
    sigwait(&set, &sig);
    log(std::string("received ") + (sig == SIGINT ? "SIGINT" : "SIGTERM") + ", shutting down");
    onSignal();
  });
}

// Wakes a signalWaiter that is still blocked once work ended on its own.
void releaseWaiter(std::thread& waiter) {
  if (!waiter.joinable()) return;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
}

void writeJson(const json& j, const std::string& target) {
  if (target == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(target);
  if (!out) throw std::runtime_error("cannot write " + target);
  out << j.dump(2) << "\n";
}

const service::DatasetConfig& requireDataset(const service::ServiceConfig& c, const std::string& id) {
  const auto* d = c.dataset(id);
  if (!d) throw std::runtime_error("configuration has no dataset '" + id + "'");
  return *d;
}

std::string reportLine(const ingest::IngestReport& r) {
  std::ostringstream o;
  o << r.datasetId << ": ";
  if (r.failure) o << "failed (" << *r.failure << ")";
  else if (r.skipped) o << "unchanged, no new version";
  else if (r.newVersion) o << "version " << *r.newVersion << ", " << r.recordCount << " records";
  if (!r.errors.empty()) o << ", " << r.errors.size() << " rejected rows";
  return o.str();
}

std::string summaryTable(const std::map<std::string, std::size_t>& summary, std::size_t total) {
  std::ostringstream o;
  o << std::left << std::setw(28) << "level/step" << std::right << std::setw(10) << "services"
    << std::setw(10) << "share" << "\n";
  for (const auto& [key, n] : summary)
    o << std::left << std::setw(28) << key << std::right << std::setw(10) << n << std::setw(9)
      << std::fixed << std::setprecision(1) << (total ? 100.0 * n / total : 0.0) << "%\n";
  o << std::left << std::setw(28) << "total" << std::right << std::setw(10) << total << "\n";
  return o.str();
}

// --- ingest -----------------------------------------------------------------

int cmdIngest(const std::string& configPath, const std::vector<std::string>& ids, bool all, bool once) {
  auto config = service::ServiceConfig::load(configPath);
  std::vector<ingest::DatasetDescriptor> selected;
  if (all)
    for (const auto& d : config.datasets) selected.push_back(d.descriptor);
  for (const auto& id : ids) selected.push_back(requireDataset(config, id).descriptor);
  if (selected.empty()) throw std::runtime_error("name a dataset with --dataset or use --all");
  ingest::RecordStore records(config.recordStore);
  ingest::SystemClock clock;

  if (once) {
    int rc = kOk;
    for (const auto& d : selected) {
      try {
        auto r = ingest::ingestOnce(d, records, clock);
        std::cout << reportLine(r) << "\n";
      } catch (const std::exception& e) {
        std::cout << d.id << ": failed (" << e.what() << ")\n";
        rc = kFailure;
      }
    }
    return rc;
  }

  // Periodic mode: one slot per dataset until interrupted.
  for (auto& d : selected)
    if (d.periodSeconds <= 0) throw std::runtime_error(d.id + " has no period; use --once");
  ingest::Scheduler scheduler(
      selected, [&](const ingest::DatasetDescriptor& d) { return ingest::ingestOnce(d, records, clock); },
      clock, [](const ingest::IngestReport& r) { log(reportLine(r)); });
  std::atomic<bool> stop{false};
  auto waiter = signalWaiter([&] { stop = true; });
  scheduler.run(stop);
  scheduler.waitIdle();
  releaseWaiter(waiter);
  return kOk;
}

// --- map --------------------------------------------------------------------

int cmdMap(const std::string& configPath, const std::string& id, std::optional<std::uint64_t> version,
           const std::string& out) {
  auto config = service::ServiceConfig::load(configPath);
  const auto& d = requireDataset(config, id);
  ingest::RecordStore records(config.recordStore);
  if (!version) {
    auto latest = records.latest(id);
    if (!latest) throw std::runtime_error("no recorded versions of " + id);
    version = latest->version;
  }
  auto recs = records.read(id, *version);
  auto compiled = mapping::compileMapping(mapping::loadMappingModel(d.mappingPath), schema::builtinCatalog());
  if (auto* errs = std::get_if<std::vector<mapping::CompileError>>(&compiled)) {
    for (const auto& e : *errs) std::cerr << d.mappingPath.string() << ": " << e.message << "\n";
    return kFailure;
  }
  mapping::IstatTable istat;
  if (config.istatCodes) istat = mapping::IstatTable::load(*config.istatCodes, config.municipalityAliases);
  auto result = std::get<mapping::CompiledMapping>(compiled).apply(
      recs, mapping::publicationGraph(d.descriptor, *version), &istat);
  if (out == "-") {
    rdf::writeNQuads(std::cout, result.quads);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    rdf::writeNQuads(f, result.quads);
  }
  log(id + " v" + std::to_string(*version) + ": " + std::to_string(recs.size()) + " records, " +
      std::to_string(result.quads.size()) + " quads, " + std::to_string(result.errors.size()) +
      " cell errors");
  for (std::size_t i = 0; i < result.errors.size() && i < 20; ++i)
    log("  row " + std::to_string(result.errors[i].rowIndex) + " " + result.errors[i].column + ": " +
        result.errors[i].message);
  return kOk;
}

// --- reconcile --------------------------------------------------------------

int cmdReconcile(const std::string& configPath, const std::optional<std::string>& serviceIri,
                 const std::optional<std::string>& truthPath, const std::optional<std::string>& jsonOut) {
  ingest::SystemClock clock;
  service::KnowledgeBase kb(service::ServiceConfig::load(configPath), clock);
  kb.bootstrap();  // publishes links and queues ambiguous services
  auto view = kb.snapshot();
  auto rc = kb.reconcileConfig();

  if (serviceIri) {
    auto services = recon::collectServices(view);
    auto it = std::find_if(services.begin(), services.end(),
                           [&](const recon::ServiceAddress& s) { return s.serviceIri == *serviceIri; });
    if (it == services.end()) throw std::runtime_error("no service " + *serviceIri + " with an address");
    auto o = recon::runPipeline(*it, recon::Gazetteer::build(view), rc);
    std::cout << "service       " << o.serviceIri << "\n"
              << "address       " << it->street << (it->number.empty() ? "" : " " + it->number) << ", "
              << it->municipality << "\n"
              << "outcome       " << recon::levelName(o.level) << " (step " << o.step << ")\n";
    for (const auto& t : o.trace)
      std::cout << "  step " << t.step << (t.numberLevel ? " number " : " street ") << std::setw(4)
                << t.candidates << " candidates" << (t.note.empty() ? "" : "  " + t.note) << "\n";
    for (const auto& c : o.candidates)
      std::cout << "  candidate   " << c.roadIri << (c.entryIri ? " via " + *c.entryIri : "") << "\n";
    for (const auto& q : o.emittedQuads) std::cout << "  emits       " << rdf::formatNQuad(q) << "\n";
    return kOk;
  }

  auto run = recon::reconcileAll(view, rc, kb.config().reconcileThreads);
  std::cout << summaryTable(run.summary(), run.outcomes.size());
  std::cout << "pending reviews: " << kb.reviews().count(recon::ReviewStatus::Pending) << "\n";
  json report{{"summary", run.summary()}, {"services", run.outcomes.size()}};
  if (truthPath) {
    auto score = testkit::scorePipeline(run.outcomes, testkit::readTruth(*truthPath));
    std::cout << "\n" << score.table();
    report["score"] = score.toJson();
    if (score.wrongLink) log("WRONG LINKS: " + std::to_string(score.wrongLink));
  }
  if (jsonOut) writeJson(report, *jsonOut);
  return kOk;
}

// --- validate ---------------------------------------------------------------

int cmdValidate(const std::optional<std::string>& configPath, const std::vector<std::string>& inputs,
                const std::optional<std::string>& checksPath, std::optional<std::uint64_t> baselineId,
                const std::optional<std::string>& jsonOut, bool dumpBuiltin) {
  if (dumpBuiltin) {
    std::cout << validation::formatSuite(validation::checksToJson(validation::builtinChecks(schema::builtinCatalog())));
    return kOk;
  }
  validation::CheckRun run;
  std::optional<validation::CheckRun> baseline;
  ingest::SystemClock clock;
  if (configPath) {
    auto config = service::ServiceConfig::load(*configPath);
    if (checksPath) config.checks = *checksPath;
    service::KnowledgeBase kb(config, clock);
    kb.bootstrap();
    for (const auto& path : inputs) rdf::importQuads(kb.store(), path);
    if (!inputs.empty()) schema::materializeInferences(kb.store(), schema::builtinCatalog());
    if (baselineId) {
      baseline = kb.history().get(*baselineId);
      if (!baseline) throw std::runtime_error("no validation run " + std::to_string(*baselineId));
    }
    run = kb.runValidation();
  } else {
    if (inputs.empty()) throw std::runtime_error("give --config or at least one --input file");
    if (baselineId) throw std::runtime_error("--baseline needs --config for the run history");
    rdf::QuadStore store;
    for (const auto& path : inputs) {
      auto issues = rdf::importQuads(store, path);
      for (const auto& i : issues) log(path + ":" + std::to_string(i.line) + ": " + i.message);
    }
    schema::materializeInferences(store, schema::builtinCatalog());
    auto checks = checksPath ? validation::loadChecks(*checksPath)
                             : validation::builtinChecks(schema::builtinCatalog());
    run = validation::runChecks(store.snapshot(), checks, 0, ingest::formatIsoUtc(clock.now()));
  }

  json report{{"run", run.toJson()}};
  std::optional<validation::RegressionReport> diff;
  if (baseline) {
    diff = validation::diffRuns(*baseline, run);
    report["diff"] = diff->toJson();
  }
  if (jsonOut && *jsonOut == "-") {
    writeJson(report, "-");
  } else {
    std::cout << run.table();
    if (diff) std::cout << "\n" << diff->table();
    if (jsonOut) writeJson(report, *jsonOut);
  }
  return diff && !diff->regressions.empty() ? kRegressions : kOk;
}

// --- serve ------------------------------------------------------------------

int cmdServe(const std::string& configPath, std::optional<int> port, std::optional<std::string> host) {
  auto config = service::ServiceConfig::load(configPath);
  if (port) config.port = *port;
  if (host) config.host = *host;
  ingest::SystemClock clock;
  service::KnowledgeBase kb(config, clock);
  kb.bootstrap();
  log("loaded " + std::to_string(kb.snapshot().size()) + " quads; " +
      std::to_string(kb.reviews().count(recon::ReviewStatus::Pending)) + " reviews pending");

  service::ApiServer api(kb);
  int bound = api.bind(config.host, config.port);
  if (bound < 0) throw std::runtime_error("cannot bind " + config.host + ":" + std::to_string(config.port));

  std::atomic<bool> stop{false};
  std::optional<ingest::Scheduler> scheduler;
  std::thread schedulerThread;
  std::vector<ingest::DatasetDescriptor> periodic;
  for (const auto& d : config.datasets)
    if (d.descriptor.periodSeconds > 0) periodic.push_back(d.descriptor);

  auto waiter = signalWaiter([&] {
    stop = true;
    api.stop();
  });
  if (config.schedule && !periodic.empty()) {
    scheduler.emplace(
        periodic,
        [&](const ingest::DatasetDescriptor& d) { return kb.ingest(d.id).report; },
        clock, [](const ingest::IngestReport& r) { log(reportLine(r)); });
    schedulerThread = std::thread([&] { scheduler->run(stop); });
    log("scheduling " + std::to_string(periodic.size()) + " periodic datasets");
  }
  log("listening on http://" + config.host + ":" + std::to_string(bound));
  bool ok = api.listen();
  stop = true;
  if (schedulerThread.joinable()) schedulerThread.join();
  if (scheduler) scheduler->waitIdle();
  releaseWaiter(waiter);
  return ok ? kOk : kFailure;
}

// --- gen-corpus -------------------------------------------------------------

int cmdGenCorpus(const std::optional<std::string>& specPath, std::optional<std::uint32_t> seed,
                 const std::string& outDir, bool score) {
  testkit::CorpusSpec spec;
  if (specPath) {
    std::ifstream in(*specPath);
    if (!in) throw std::runtime_error("cannot read " + *specPath);
    spec = testkit::CorpusSpec::fromJson(json::parse(in));
  }
  if (seed) spec.seed = *seed;
  spec.validate();
  auto corpus = testkit::generateCorpus(spec);
  fs::path out(outDir);
  testkit::writeCorpus(corpus, out);
  writeJson(spec.toJson(), (out / "spec.json").string());

  // A ready-to-use configuration pointing at the generated files.
  fs::create_directories(out / "mappings");
  fs::copy_file(fs::path(CITYKB_DATA_DIR) / "mappings" / "services.json", out / "mappings" / "services.json",
                fs::copy_options::overwrite_existing);
  json config{{"recordStore", "var/records"},
              {"stateDir", "var/state"},
              {"istatCodes", "municipalities.csv"},
              {"municipalityAliases", "aliases.csv"},
              {"staticGraphs", {"streetguide.nq"}},
              {"datasets",
               {{{"id", "services"},
                 {"source", "services.csv"},
                 {"format", "csv"},
                 {"category", "static"},
                 {"mapping", "mappings/services.json"}}}},
              {"reconcile", {{"after", {"services"}}}},
              {"server", {{"host", "127.0.0.1"}, {"port", 8080}}}};
  writeJson(config, (out / "citykb.json").string());
  std::cout << "wrote " << corpus.streetGuide.size() << " street-guide quads and " << corpus.services.size()
            << " services to " << out.string() << "\n";

  if (score) {
    rdf::QuadStore store;
    auto compiled = mapping::compileMapping(
        mapping::loadMappingModel(out / "mappings" / "services.json"), schema::builtinCatalog());
    testkit::loadCorpus(corpus, std::get<mapping::CompiledMapping>(compiled), store);
    auto istat = corpus.istatTable();
    recon::ReconcileConfig rc;
    rc.municipalities = &istat;
    auto run = recon::reconcileAll(store.snapshot(), rc);
    auto report = testkit::scorePipeline(run.outcomes, corpus.truth);
    std::cout << "\n" << report.table();
    writeJson(report.toJson(), (out / "score.json").string());
  }
  return kOk;
}

// --- export -----------------------------------------------------------------

int cmdExport(const std::string& configPath, const std::string& out, const std::optional<std::string>& dataset) {
  ingest::SystemClock clock;
  service::KnowledgeBase kb(service::ServiceConfig::load(configPath), clock);
  kb.bootstrap();
  rdf::exportQuads(kb.snapshot(), out, dataset);
  log("exported to " + out);
  return kOk;
}

// --- schema -----------------------------------------------------------------

int cmdSchema(const std::string& out) {
  auto quads = schema::builtinCatalog().toQuads(rdf::GraphId{"schema", 1});
  if (out == "-") {
    rdf::writeNQuads(std::cout, quads);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    rdf::writeNQuads(f, quads);
  }
  log("wrote " + std::to_string(quads.size()) + " schema statements");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"citykb: smart-city knowledge base"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> datasets;
  bool all = false, once = false;
  auto* ingestCmd = app.add_subcommand("ingest", "Fetch dataset sources into the raw-record store");
  ingestCmd->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  ingestCmd->add_option("--dataset", datasets, "Dataset id (repeatable)");
  ingestCmd->add_flag("--all", all, "Every configured dataset");
  ingestCmd->add_flag("--once", once, "Fetch once instead of following each dataset's period");

  std::string mapDataset, mapOut = "-";
  std::optional<std::uint64_t> mapVersion;
  auto* mapCmd = app.add_subcommand("map", "Map one recorded version to N-Quads");
  mapCmd->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  mapCmd->add_option("--dataset", mapDataset, "Dataset id")->required();
  mapCmd->add_option("--version", mapVersion, "Recorded version (default: latest)");
  mapCmd->add_option("--out", mapOut, "Output file, - for stdout");

  std::optional<std::string> serviceIri, truth, jsonOut;
  bool reconcileAllFlag = false;
  auto* reconcileCmd = app.add_subcommand("reconcile", "Link services to the street guide");
  reconcileCmd->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  auto* allOpt = reconcileCmd->add_flag("--all", reconcileAllFlag, "Every service, with a summary table");
  auto* svcOpt = reconcileCmd->add_option("--service", serviceIri, "One service IRI, with its step trace");
  allOpt->excludes(svcOpt);
  reconcileCmd->add_option("--truth", truth, "truth.json of a generated corpus to score against")
      ->check(CLI::ExistingFile);
  reconcileCmd->add_option("--json", jsonOut, "Write the JSON report here (- for stdout)");

  std::optional<std::string> validateConfig, checks;
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> baseline;
  bool dumpBuiltin = false;
  auto* validateCmd = app.add_subcommand("validate", "Run the regression check suite");
  validateCmd->add_option("--config", validateConfig, "Configuration file (runs are recorded)")
      ->check(CLI::ExistingFile);
  validateCmd->add_option("--input", inputs, "Extra N-Quads file (repeatable)")->check(CLI::ExistingFile);
  validateCmd->add_option("--checks", checks, "Check-suite file (default: builtin suite)")
      ->check(CLI::ExistingFile);
  validateCmd->add_option("--baseline", baseline, "Run id to diff against; exit 2 on regressions");
  validateCmd->add_option("--json", jsonOut, "Write the JSON report here (- prints JSON only)");
  validateCmd->add_flag("--dump-builtin", dumpBuiltin, "Print the builtin suite as a check-suite file");

  std::optional<int> port;
  std::optional<std::string> host;
  auto* serveCmd = app.add_subcommand("serve", "Serve the HTTP API");
  serveCmd->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  serveCmd->add_option("--port", port, "Port (overrides the configuration)")->check(CLI::Range(0, 65535));
  serveCmd->add_option("--host", host, "Bind address (overrides the configuration)");

  std::optional<std::string> spec;
  std::optional<std::uint32_t> seed;
  std::string outDir;
  bool noScore = false;
  auto* genCmd = app.add_subcommand("gen-corpus", "Generate a synthetic street guide and services");
  genCmd->add_option("--spec", spec, "Corpus spec file (default spec when absent)")->check(CLI::ExistingFile);
  genCmd->add_option("--seed", seed, "Override the spec's seed");
  genCmd->add_option("--out", outDir, "Output directory")->required();
  genCmd->add_flag("--no-score", noScore, "Skip scoring the pipeline on the corpus");

  std::string exportOut;
  std::optional<std::string> exportDataset;
  auto* exportCmd = app.add_subcommand("export", "Write the loaded knowledge base as N-Quads");
  exportCmd->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  exportCmd->add_option("--out", exportOut, "Output file")->required();
  exportCmd->add_option("--dataset", exportDataset, "Only this dataset");

  std::string schemaOut = "-";
  auto* schemaCmd = app.add_subcommand("schema", "Write the ontology catalog as N-Quads");
  schemaCmd->add_option("--out", schemaOut, "Output file, - for stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingestCmd) return cmdIngest(config, datasets, all, once);
    if (*mapCmd) return cmdMap(config, mapDataset, mapVersion, mapOut);
    if (*reconcileCmd) {
      if (!reconcileAllFlag && !serviceIri) throw std::runtime_error("give --all or --service <iri>");
      return cmdReconcile(config, serviceIri, truth, jsonOut);
    }
    if (*validateCmd) return cmdValidate(validateConfig, inputs, checks, baseline, jsonOut, dumpBuiltin);
    if (*serveCmd) return cmdServe(config, port, host);
    if (*genCmd) return cmdGenCorpus(spec, seed, outDir, !noScore);
    if (*exportCmd) return cmdExport(config, exportOut, exportDataset);
    if (*schemaCmd) return cmdSchema(schemaOut);
  } catch (const std::exception& e) {
    std::cerr << "citykb: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
