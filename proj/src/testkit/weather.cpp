#include "citykb/testkit/weather.hpp"

#include <random>

#include <json.hpp>

#include "citykb/ingestion/clock.hpp"
#include "citykb/ingestion/record.hpp"
#include "citykb/mapping/publish.hpp"

namespace citykb::testkit {
namespace {

const std::vector<std::string> kNamed = {
    "FIRENZE",  "PRATO",    "PISTOIA",      "LUCCA",   "PISA",      "LIVORNO",  "SIENA",
    "AREZZO",   "GROSSETO", "MASSA",        "CARRARA", "EMPOLI",    "VICCHIO",  "FIESOLE",
    "SCANDICCI", "SESTO FIORENTINO", "BAGNO A RIPOLI", "CAMPI BISENZIO", "BORGO SAN LORENZO"};

const std::vector<std::string> kDescriptions = {"sereno", "poco nuvoloso", "nuvoloso", "pioggia",
                                                "temporale", "nebbia"};
const std::vector<std::string> kWinds = {"N 10 km/h", "NE 5 km/h", "SW 20 km/h", "calmo"};

std::string mixedCase(const std::string& s, std::size_t k) {
  if (k % 3 != 1) return s;
  std::string out = s;
  bool start = true;
  for (auto& c : out) {
    if (!start && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    start = c == ' ';
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> weatherMunicipalities(const WeatherFeedSpec& spec) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < spec.municipalities; ++i) {
    std::string name = i < kNamed.size() ? kNamed[i] : "COMUNE " + std::to_string(i + 1);
    std::string code = std::to_string(100000 + 17 * i + 3);
    out.emplace_back(std::move(name), std::move(code));
  }
  return out;
}

mapping::IstatTable weatherIstatTable(const WeatherFeedSpec& spec) {
  mapping::IstatTable t;
  for (const auto& [name, code] : weatherMunicipalities(spec)) t.add(name, code);
  return t;
}

std::int64_t weatherFetchTime(const WeatherFeedSpec& spec, std::size_t fetch) {
  return spec.startEpoch + static_cast<std::int64_t>(fetch * 86400 / spec.updatesPerDay) + 6 * 3600;
}

std::string weatherFeedJson(const WeatherFeedSpec& spec, std::size_t fetch) {
  std::mt19937 rng(spec.seed * 7919u + static_cast<std::uint32_t>(fetch));
  std::uniform_int_distribution<int> temp(5, 30), hum(30, 95), pick(0, 1000);
  auto munis = weatherMunicipalities(spec);
  auto updated = ingest::formatIsoUtc(weatherFetchTime(spec, fetch));
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t m = 0; m < munis.size(); ++m) {
    std::string name = m < spec.unknownPerFetch ? "NOWHERE " + std::to_string(m + 1)
                                                : mixedCase(munis[m].first, m + fetch);
    std::string report = munis[m].second + "-" + std::to_string(fetch + 1);
    for (std::size_t r = 0; r < spec.rowsPerReport; ++r) {
      int lo = temp(rng);
      rows.push_back({{"report_id", report},
                      {"municipality", name},
                      {"updated", updated},
                      {"row", std::to_string(r)},
                      {"day", "day+" + std::to_string(r / 4)},
                      {"hour", std::to_string((r % 4) * 6) + ":00"},
                      {"min_temp", std::to_string(lo)},
                      {"max_temp", std::to_string(lo + 2 + pick(rng) % 8)},
                      {"description", kDescriptions[pick(rng) % kDescriptions.size()]},
                      {"wind", kWinds[pick(rng) % kWinds.size()]},
                      {"humidity", std::to_string(hum(rng))}});
    }
  }
  return rows.dump();
}

ingest::DatasetDescriptor weatherDescriptor(std::string sourceUri) {
  ingest::DatasetDescriptor d;
  d.id = "weather";
  d.sourceUri = std::move(sourceUri);
  d.format = ingest::SourceFormat::Json;
  d.periodSeconds = 43200;
  d.category = ingest::DatasetCategory::Realtime;
  d.mappingRef = "mappings/weather.json";
  return d;
}

WeatherRunReport runWeatherFeed(const WeatherFeedSpec& spec, ingest::RecordStore& records,
                                const mapping::CompiledMapping& mapping, rdf::QuadStore& store) {
  WeatherRunReport rep;
  auto descriptor = weatherDescriptor();
  auto istat = weatherIstatTable(spec);
  ingest::ManualClock clock(weatherFetchTime(spec, 0));
  for (std::size_t f = 0; f < spec.fetches(); ++f) {
    clock.advance(weatherFetchTime(spec, f) - clock.now());
    auto body = weatherFeedJson(spec, f);
    auto ingested = ingest::ingestOnce(descriptor, records, clock,
                                       [&](const std::string&) { return body; });
    ++rep.fetches;
    if (!ingested.newVersion) continue;
    ++rep.versionsWritten;
    auto raw = records.read(descriptor.id, *ingested.newVersion);
    rep.records += raw.size();
    auto published = mapping::publishVersion(store, descriptor, *ingested.newVersion, raw, mapping, &istat);
    rep.quads += published.quadCount;
    rep.mappingErrors += published.errors.size();
  }
  return rep;
}

}  // namespace citykb::testkit
