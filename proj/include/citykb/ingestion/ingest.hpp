#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citykb/ingestion/clock.hpp"
#include "citykb/ingestion/parsers.hpp"
#include "citykb/ingestion/record_store.hpp"

namespace citykb::ingest {

enum class SourceFormat { Csv, Kml, Json };
enum class DatasetCategory { Static, SemiStatic, Realtime };

struct DatasetDescriptor {
  std::string id;
  std::string sourceUri;
  SourceFormat format = SourceFormat::Csv;
  std::int64_t periodSeconds = 0;
  DatasetCategory category = DatasetCategory::Static;
  std::string mappingRef;
  CsvDialect dialect;
};

std::string_view toString(SourceFormat f);
std::string_view toString(DatasetCategory c);
SourceFormat parseFormat(std::string_view s);
DatasetCategory parseCategory(std::string_view s);

// Reasons the descriptor is unusable; empty when valid.
std::vector<std::string> validateDescriptor(const DatasetDescriptor& d);

// Source could not be retrieved; the dataset keeps its current version.
class SourceUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Returns the raw bytes behind a URI: a local path, file://, http:// or
// https://. Throws SourceUnavailable.
using Fetcher = std::function<std::string(const std::string& uri)>;
std::string fetchSource(const std::string& uri);

struct IngestReport {
  std::string datasetId;
  std::optional<std::uint64_t> newVersion;
  std::size_t recordCount = 0;
  bool skipped = false;
  std::vector<RecordError> errors;
  std::string retrievedAt;
  std::optional<std::string> failure;
};

// Parses bytes in the descriptor's format. KML input that is a zip archive
// is treated as KMZ.
ParsedRecords parseSource(const DatasetDescriptor& d, std::string_view bytes);

// Fetches the source, skips it when its hash equals the latest version's,
// otherwise writes version latest+1. Throws SourceUnavailable or
// DatasetError; no version is created in that case.
IngestReport ingestOnce(const DatasetDescriptor& d, RecordStore& store, const Clock& clock,
                        const Fetcher& fetch = fetchSource);

}  // namespace citykb::ingest
