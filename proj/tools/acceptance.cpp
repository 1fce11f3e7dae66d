// Acceptance run: one PASS/FAIL line per primary criterion.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "citykb/mapping/model.hpp"
#include "citykb/query/bgp.hpp"
#include "citykb/query/geo.hpp"
#include "citykb/reconciliation/pipeline.hpp"
#include "citykb/schema/reasoner.hpp"
#include "citykb/schema/vocab.hpp"
#include "citykb/testkit/corpus.hpp"
#include "citykb/testkit/oracles.hpp"
#include "citykb/testkit/validation_oracle.hpp"
#include "citykb/testkit/weather.hpp"
#include "citykb/validation/checks.hpp"

using namespace citykb;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and sizes.
constexpr std::size_t kWeatherRecords = 286 * 2 * 16 * 30;  // 274,560
constexpr double kWeatherQuadTarget = 2'500'000;
constexpr double kWeatherQuadTolerance = 0.10;
constexpr double kWeatherMinQuadsPerRecord = 9;
constexpr double kWeatherSeconds = 300;

constexpr std::size_t kReconPerClass = 200;
constexpr std::size_t kReconAmbiguous = 50;
constexpr std::size_t kReconOrphans = 100;
constexpr double kReconMinRecall = 0.95;
constexpr double kReconSeconds = 120;

constexpr std::uint32_t kOracleSeeds = 100;
constexpr std::size_t kOracleMaxQuads = 10'000;

constexpr std::size_t kQueryStoreQuads = 50'000;
constexpr std::size_t kQueryCount = 200;

constexpr std::size_t kGeoPoints = 1'000;
constexpr std::size_t kGeoQueries = 100;
constexpr double kHaversineRelTolerance = 1e-6;

constexpr std::size_t kReloadReaders = 100;
constexpr std::size_t kReloadSwaps = 100;
constexpr std::size_t kReloadGraphSize = 200;

constexpr std::size_t kScaleQuads = 1'000'000;
constexpr double kScaleSeconds = 60;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double secondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 1) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

std::string sci(double v) {
  std::ostringstream o;
  o.setf(std::ios::scientific);
  o.precision(2);
  o << v;
  return o.str();
}

mapping::CompiledMapping compiledMapping(const std::string& name) {
  auto model = mapping::loadMappingModel(std::string(CITYKB_DATA_DIR) + "/mappings/" + name + ".json");
  return std::get<mapping::CompiledMapping>(mapping::compileMapping(model, schema::builtinCatalog()));
}

// Corpus loaded, reconciled, published and inferred.
struct CorpusStore {
  testkit::Corpus corpus;
  mapping::IstatTable istat;
  recon::ReconcileRun run;
};

void buildCorpusStore(rdf::QuadStore& store, const testkit::CorpusSpec& spec, CorpusStore& out,
                      unsigned threads = 1) {
  out.corpus = testkit::generateCorpus(spec);
  auto errors = testkit::loadCorpus(out.corpus, compiledMapping("services"), store);
  if (!errors.empty()) throw std::runtime_error("corpus mapping error: " + errors.front().message);
  out.istat = out.corpus.istatTable();
  recon::ReconcileConfig config;
  config.municipalities = &out.istat;
  out.run = recon::reconcileAll(store.snapshot(), config, threads);
  recon::publishLinks(store, out.run);
  schema::materializeInferences(store, schema::builtinCatalog());
}

Verdict weatherVolume() {
  auto t0 = Clock::now();
  testkit::WeatherFeedSpec spec;
  auto dir = std::filesystem::temp_directory_path() / "citykb_acceptance_weather";
  std::filesystem::remove_all(dir);
  ingest::RecordStore records(dir);
  rdf::QuadStore store;
  auto rep = testkit::runWeatherFeed(spec, records, compiledMapping("weather"), store);
  std::filesystem::remove_all(dir);
  double secs = secondsSince(t0);
  double perRecord = static_cast<double>(rep.quads) / static_cast<double>(rep.records);
  double rel = std::abs(static_cast<double>(rep.quads) - kWeatherQuadTarget) / kWeatherQuadTarget;
  bool pass = rep.records == kWeatherRecords && spec.totalRecords() == kWeatherRecords &&
              perRecord >= kWeatherMinQuadsPerRecord && rel <= kWeatherQuadTolerance &&
              store.size() == rep.quads && rep.mappingErrors == 0 && secs < kWeatherSeconds;
  return {pass, "records=" + std::to_string(rep.records) + " (want " +
                    std::to_string(kWeatherRecords) + ") quads=" + std::to_string(rep.quads) +
                    " per-record=" + fmt(perRecord, 3) + " off-target=" + fmt(rel * 100, 2) +
                    "% fetches=" + std::to_string(rep.fetches) + " time=" + fmt(secs) + "s"};
}

Verdict reconciliationCoverage() {
  auto t0 = Clock::now();
  auto spec = testkit::CorpusSpec::uniform(2014, kReconPerClass);
  spec.municipalities = 8;
  spec.roadsPerMunicipality = 40;
  spec.ambiguousServices = kReconAmbiguous;
  spec.orphanServices = kReconOrphans;
  rdf::QuadStore store;
  CorpusStore cs;
  cs.corpus = testkit::generateCorpus(spec);
  auto errors = testkit::loadCorpus(cs.corpus, compiledMapping("services"), store);
  cs.istat = cs.corpus.istatTable();
  recon::ReconcileConfig config;
  config.municipalities = &cs.istat;
  auto run = recon::reconcileAll(store.snapshot(), config, 2);
  auto score = testkit::scorePipeline(run.outcomes, cs.corpus.truth);
  double secs = secondsSince(t0);
  using C = testkit::Corruption;
  using recon::Level;
  const auto& typo = score.perClass.at(C::Typo);
  const auto& amb = score.perClass.at(C::Ambiguous);
  double clean = score.recall(C::Clean, Level::StreetNumber, 1);
  double qual = score.recall(C::QualifierVariant, Level::StreetNumber, 2);
  double alias = score.recall(C::MunicipalityAlias, Level::StreetNumber, 6);
  std::size_t typoAutomated = typo.reconciledAtNumber + typo.reconciledAtStreet;
  bool pass = errors.empty() && score.wrongLink == 0 && score.missingOutcomes == 0 && clean == 1.0 &&
              qual >= kReconMinRecall && alias >= kReconMinRecall && typoAutomated == 0 &&
              amb.pendingReview == amb.attempted && amb.attempted == kReconAmbiguous &&
              secs < kReconSeconds;
  return {pass, "services=" + std::to_string(run.outcomes.size()) +
                    " wrongLink=" + std::to_string(score.wrongLink) + " clean@1=" + fmt(clean * 100) +
                    "% qualifier@2=" + fmt(qual * 100) + "% alias@6=" + fmt(alias * 100) +
                    "% typo-automated=" + std::to_string(typoAutomated) + " ambiguous-pending=" +
                    std::to_string(amb.pendingReview) + "/" + std::to_string(amb.attempted) +
                    " time=" + fmt(secs) + "s"};
}

Verdict inferenceFixpoint() {
  const auto& cat = schema::builtinCatalog();
  const std::string type(vocab::rdf::type);
  const std::string km4c(vocab::kKm4c);
  std::size_t secondPass = 0, regionsMissing = 0, categoryMissing = 0, corpora = 0;
  std::size_t regionsSeen = 0, categorySeen = 0;
  // category value -> classes it implies
  std::map<std::string, std::vector<std::string>> implied;
  for (const auto& [cls, values] : schema::serviceCategoryValues())
    for (const auto& v : values) implied[v].push_back(km4c + cls);
  std::vector<testkit::CorpusSpec> specs;
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    specs.push_back(testkit::CorpusSpec::uniform(seed, 40));
    specs.back().municipalities = 12;  // more than one province
  }
  specs.emplace_back();  // default mix
  specs.back().seed = 4;
  specs.back().ambiguousServices = 30;
  specs.back().orphanServices = 30;
  for (const auto& spec : specs) {
    rdf::QuadStore store;
    CorpusStore cs;
    buildCorpusStore(store, spec, cs);
    ++corpora;
    auto view = store.snapshot();
    secondPass += schema::infer(view, cat).size();
    std::set<std::pair<std::string, std::string>> typed;
    std::set<std::string> pas;
    for (const auto& q : view.allQuads()) {
      if (q.predicate.value() != type) continue;
      typed.emplace(q.subject.value(), q.object.value());
      if (q.object.value() == vocab::km4c::PA) pas.insert(q.subject.value());
    }
    // Exhaustive scan of the rule antecedents.
    for (const auto& q : view.allQuads()) {
      if (q.predicate.value() == vocab::km4c::hasProvince && pas.count(q.subject.value())) {
        ++regionsSeen;
        regionsMissing += !typed.count({q.subject.value(), std::string(vocab::km4c::Region)});
      }
      if (q.predicate.value() == vocab::km4c::serviceCategory) {
        auto it = implied.find(q.object.value());
        if (it == implied.end()) continue;
        for (const auto& cls : it->second) {
          ++categorySeen;
          categoryMissing += !typed.count({q.subject.value(), cls});
        }
      }
    }
  }
  bool pass = secondPass == 0 && regionsMissing == 0 && categoryMissing == 0 && regionsSeen > 0 &&
              categorySeen > 0;
  return {pass, "corpora=" + std::to_string(corpora) + " second-pass-additions=" +
                    std::to_string(secondPass) + " PA-with-province=" + std::to_string(regionsSeen) +
                    " untyped-regions=" + std::to_string(regionsMissing) +
                    " category-statements=" + std::to_string(categorySeen) +
                    " untyped-category-members=" + std::to_string(categoryMissing)};
}

Verdict checkOracle() {
  const auto& cat = schema::builtinCatalog();
  auto checks = validation::builtinChecks(cat);
  std::size_t mismatches = 0, largest = 0, totalViolations = 0;
  for (std::uint32_t seed = 1; seed <= kOracleSeeds; ++seed) {
    rdf::QuadStore store;
    store.insert(testkit::randomValidationStore(seed, 200 + seed * 8, cat));
    schema::materializeInferences(store, cat);
    auto view = store.snapshot();
    auto all = view.allQuads();
    largest = std::max(largest, all.size());
    auto run = validation::runChecks(view, checks);
    auto expected = testkit::naiveCheckViolations(all, cat);
    for (const auto& r : run.results) {
      const auto& want = expected.at(r.checkId);
      totalViolations += r.violationCount;
      bool ok = r.violationCount == want.size();
      for (const auto& s : r.sample) ok = ok && want.count(s);
      mismatches += !ok;
    }
    auto got = schema::checkConstraints(view, cat);
    for (auto& v : got) v.detail.clear();
    std::sort(got.begin(), got.end());
    mismatches += got != testkit::naiveConstraintViolations(all, cat);
  }
  bool pass = mismatches == 0 && largest <= kOracleMaxQuads && totalViolations > 0;
  return {pass, "seeds=" + std::to_string(kOracleSeeds) + " checks=" + std::to_string(checks.size()) +
                    " largest-store=" + std::to_string(largest) + " violations-compared=" +
                    std::to_string(totalViolations) + " mismatches=" + std::to_string(mismatches)};
}

Verdict queryOracle() {
  // The generator may repeat a quad; trim a slightly larger draw to size.
  auto quads = testkit::randomJoinStore(77, kQueryStoreQuads + kQueryStoreQuads / 100);
  std::sort(quads.begin(), quads.end());
  quads.erase(std::unique(quads.begin(), quads.end()), quads.end());
  if (quads.size() > kQueryStoreQuads) quads.resize(kQueryStoreQuads);
  rdf::QuadStore store;
  store.insert(quads);
  auto view = store.snapshot();
  std::mt19937 rng(2014);
  std::size_t mismatches = 0, nonEmpty = 0;
  for (std::size_t i = 0; i < kQueryCount; ++i) {
    auto q = testkit::randomQuery(rng, quads);
    auto got = query::evaluate(q, view);
    auto want = testkit::nestedLoopEvaluate(q, quads);
    mismatches += got.rows != want.rows || got.variables != want.variables;
    nonEmpty += !got.rows.empty();
  }
  return {mismatches == 0 && store.size() == kQueryStoreQuads,
          "store=" + std::to_string(store.size()) + " queries=" + std::to_string(kQueryCount) +
              " non-empty=" + std::to_string(nonEmpty) + " mismatches=" + std::to_string(mismatches)};
}

Verdict geoCorrectness() {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> lat(43.70, 43.85), lon(11.15, 11.35);
  const std::string base(vocab::kResourceBase);
  std::vector<rdf::Quad> quads;
  std::vector<testkit::PlantedPoint> services, entries;
  rdf::GraphId g{"geo", 1};
  auto iri = [](std::string_view s) { return rdf::Term::iri(std::string(s)); };
  auto dec = [](double v) {
    std::ostringstream o;
    o.precision(10);
    o << v;
    return rdf::Term::literal(o.str(), std::string(vocab::xsd::decimal));
  };
  for (std::size_t i = 0; i < kGeoPoints; ++i) {
    auto id = std::to_string(i);
    query::GeoPoint p{lat(rng), lon(rng)};
    auto svc = base + "/Service/G" + id;
    quads.push_back({iri(svc), iri(vocab::rdf::type), iri(vocab::km4c::Service), g});
    quads.push_back({iri(svc), iri(vocab::geo::lat), dec(p.lat), g});
    quads.push_back({iri(svc), iri(vocab::geo::lon), dec(p.lon), g});
    services.push_back({svc, {*dec(p.lat).numeric(), *dec(p.lon).numeric()}});
    query::GeoPoint e{lat(rng), lon(rng)};
    auto entry = base + "/Entry/G" + id;
    quads.push_back({iri(entry), iri(vocab::rdf::type), iri(vocab::km4c::Entry), g});
    quads.push_back({iri(entry), iri(vocab::geo::lat), dec(e.lat), g});
    quads.push_back({iri(entry), iri(vocab::geo::lon), dec(e.lon), g});
    entries.push_back({entry, {*dec(e.lat).numeric(), *dec(e.lon).numeric()}});
  }
  rdf::QuadStore store;
  store.insert(quads);
  auto index = query::GeoIndex::build(store.snapshot());
  std::size_t mismatches = 0, hits = 0;
  std::uniform_real_distribution<double> radius(100, 3000);
  for (std::size_t i = 0; i < kGeoQueries; ++i) {
    query::GeoPoint c{lat(rng), lon(rng)};
    double r = radius(rng);
    auto got = index.nearServices(c, r);
    auto want = testkit::scanNear(services, c, r);
    hits += got.size();
    bool same = got.size() == want.size();
    for (std::size_t k = 0; same && k < got.size(); ++k)
      same = got[k].serviceIri == want[k].serviceIri && got[k].distance == want[k].distance;
    mismatches += !same;
    auto closest = index.closestStreetNumber(c);
    auto scan = testkit::scanClosest(entries, c);
    mismatches += !closest || !scan || closest->entryIri != scan->iri;
  }
  double worst = 0;
  std::uniform_real_distribution<double> anyLat(-89.9, 89.9), anyLon(-180, 180);
  for (int i = 0; i < 2000; ++i) {
    query::GeoPoint a{anyLat(rng), anyLon(rng)}, b{anyLat(rng), anyLon(rng)};
    double h = query::haversineMeters(a, b), c = testkit::chordDistanceMeters(a, b);
    if (c > 1) worst = std::max(worst, std::abs(h - c) / c);
  }
  bool pass = mismatches == 0 && worst <= kHaversineRelTolerance && hits > 0;
  return {pass, "points=" + std::to_string(kGeoPoints) + " queries=" + std::to_string(kGeoQueries) +
                    " near-hits=" + std::to_string(hits) + " mismatches=" + std::to_string(mismatches) +
                    " haversine-max-rel-error=" + sci(worst)};
}

Verdict reloadAtomicity() {
  rdf::QuadStore store;
  auto content = [](std::uint64_t v) {
    std::vector<rdf::Quad> out;
    for (std::size_t i = 0; i < kReloadGraphSize; ++i)
      out.push_back({rdf::Term::iri("http://example.org/s" + std::to_string(i)),
                     rdf::Term::iri("http://example.org/sentinel"),
                     rdf::Term::literal(std::to_string(v)), rdf::GraphId{"reload", v}});
    return out;
  };
  store.replaceGraph("reload", 1, content(1));
  std::atomic<bool> done{false};
  std::atomic<std::size_t> violations{0}, observations{0};
  std::vector<std::thread> readers;
  for (std::size_t r = 0; r < kReloadReaders; ++r) {
    readers.emplace_back([&] {
      std::size_t local = 0;
      do {
        auto view = store.snapshot();
        auto quads = view.match(std::nullopt, rdf::Term::iri("http://example.org/sentinel"), std::nullopt);
        std::set<std::string> versions;
        for (const auto& q : quads) versions.insert(q.object.value());
        bool graphAgrees = !quads.empty() && std::all_of(quads.begin(), quads.end(), [&](const rdf::Quad& q) {
          return std::to_string(q.graph.version) == q.object.value();
        });
        if (quads.size() != kReloadGraphSize || versions.size() != 1 || !graphAgrees) ++violations;
        ++local;
      } while (!done || local < 3);
      observations += local;
    });
  }
  for (std::uint64_t v = 2; v <= kReloadSwaps + 1; ++v) {
    store.replaceGraph("reload", v, content(v));
    std::this_thread::yield();
  }
  done = true;
  for (auto& t : readers) t.join();
  return {violations == 0,
          "readers=" + std::to_string(kReloadReaders) + " swaps=" + std::to_string(kReloadSwaps) +
              " snapshots-checked=" + std::to_string(observations.load()) +
              " mixed=" + std::to_string(violations.load())};
}

Verdict scaleSmoke() {
  // Street guide, services and links from the corpus generator, topped up
  // with weather snapshots.
  auto t0 = Clock::now();
  testkit::CorpusSpec spec = testkit::CorpusSpec::uniform(5, 0);
  spec.municipalities = 30;
  spec.roadsPerMunicipality = 55;
  spec.entriesMin = 10;
  spec.entriesMax = 30;
  spec.services = 20'000;
  rdf::QuadStore store;
  CorpusStore cs;
  buildCorpusStore(store, spec, cs, 2);
  auto weather = compiledMapping("weather");
  testkit::WeatherFeedSpec wspec;
  auto istat = testkit::weatherIstatTable(wspec);
  auto descriptor = testkit::weatherDescriptor();
  for (std::size_t f = 0; store.size() < kScaleQuads; ++f) {
    auto parsed = ingest::parseJsonRecords(testkit::weatherFeedJson(wspec, f));
    auto mapped = weather.apply(parsed.records, rdf::GraphId{"weather/" + std::to_string(f + 1), 1}, &istat);
    store.replaceGraph("weather/" + std::to_string(f + 1), 1, mapped.quads);
  }
  double buildSecs = secondsSince(t0);
  auto view = store.snapshot();
  auto t1 = Clock::now();
  auto run = validation::runChecks(view, validation::builtinChecks(schema::builtinCatalog()));
  double secs = secondsSince(t1);
  std::size_t flagged = 0;
  std::string flaggedChecks;
  for (const auto& r : run.results) {
    flagged += r.violationCount;
    if (r.violationCount) flaggedChecks += " " + r.checkId + ":" + std::to_string(r.violationCount);
  }
  std::vector<std::string> weatherSets;
  for (const auto& g : view.graphs())
    if (g.dataset.rfind("weather/", 0) == 0) weatherSets.push_back(g.dataset);
  std::size_t weatherQuads = view.size() - view.without(weatherSets).size();
  bool pass = view.size() >= kScaleQuads && secs < kScaleSeconds;
  return {pass, "quads=" + std::to_string(view.size()) + " checks=" + std::to_string(run.results.size()) +
                    " weather-quads=" + std::to_string(weatherQuads) + " violations=" + std::to_string(flagged) + flaggedChecks + " build=" + fmt(buildSecs) +
                    "s validation=" + fmt(secs) + "s (limit " + fmt(kScaleSeconds, 0) + "s)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"citykb acceptance criteria"};
  std::vector<std::string> only;
  bool list = false;
  app.add_option("--only", only, "Run only the named criteria");
  app.add_flag("--list", list, "List criterion names");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"weather-volume", weatherVolume},
      {"reconciliation-coverage", reconciliationCoverage},
      {"inference-fixpoint", inferenceFixpoint},
      {"check-oracle-equivalence", checkOracle},
      {"query-oracle-equivalence", queryOracle},
      {"geo-correctness", geoCorrectness},
      {"reload-atomicity", reloadAtomicity},
      {"scale-smoke", scaleSmoke},
  };
  if (list) {
    for (const auto& [name, fn] : criteria) std::cout << name << "\n";
    return 0;
  }
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Verdict v;
    auto t0 = Clock::now();
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %-26s %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(),
                secondsSince(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
