#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "citykb/ingestion/ingest.hpp"
#include "citykb/ingestion/record_store.hpp"
#include "citykb/mapping/model.hpp"
#include "citykb/quadstore/store.hpp"

namespace citykb::testkit {

// Simulated regional forecast feed: every fetch carries one report per
// municipality, each with a fixed number of prediction rows.
struct WeatherFeedSpec {
  std::uint32_t seed = 1;
  std::size_t municipalities = 286;
  std::size_t updatesPerDay = 2;
  std::size_t rowsPerReport = 16;
  std::size_t days = 30;
  // Reports per fetch whose municipality name is missing from the ISTAT table.
  std::size_t unknownPerFetch = 0;
  std::int64_t startEpoch = 1401580800;  // 2014-06-01T00:00:00Z

  std::size_t fetches() const { return updatesPerDay * days; }
  std::size_t recordsPerFetch() const { return municipalities * rowsPerReport; }
  std::size_t totalRecords() const { return fetches() * recordsPerFetch(); }
};

// (name, code) pairs; names are unique and codes are synthetic.
std::vector<std::pair<std::string, std::string>> weatherMunicipalities(const WeatherFeedSpec& spec);
mapping::IstatTable weatherIstatTable(const WeatherFeedSpec& spec);

// Columns as in data/mappings/weather.json. Names appear in mixed case.
std::string weatherFeedJson(const WeatherFeedSpec& spec, std::size_t fetch);
std::int64_t weatherFetchTime(const WeatherFeedSpec& spec, std::size_t fetch);

// Realtime JSON descriptor for the feed.
ingest::DatasetDescriptor weatherDescriptor(std::string sourceUri = "sim://weather");

struct WeatherRunReport {
  std::size_t fetches = 0;
  std::size_t versionsWritten = 0;
  std::size_t records = 0;      // raw records written to the record store
  std::size_t quads = 0;        // quads published across all snapshot graphs
  std::size_t mappingErrors = 0;
};

// Drives the whole feed through ingestOnce (on a manual clock, one fetch per
// update), the record store and publishVersion into `store`.
WeatherRunReport runWeatherFeed(const WeatherFeedSpec& spec, ingest::RecordStore& records,
                                const mapping::CompiledMapping& mapping, rdf::QuadStore& store);

}  // namespace citykb::testkit
