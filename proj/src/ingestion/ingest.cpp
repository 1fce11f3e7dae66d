#include "citykb/ingestion/ingest.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"

namespace citykb::ingest {

std::string_view toString(SourceFormat f) {
  switch (f) {
    case SourceFormat::Csv: return "csv";
    case SourceFormat::Kml: return "kml";
    case SourceFormat::Json: return "json";
  }
  return "csv";
}

std::string_view toString(DatasetCategory c) {
  switch (c) {
    case DatasetCategory::Static: return "static";
    case DatasetCategory::SemiStatic: return "semi-static";
    case DatasetCategory::Realtime: return "realtime";
  }
  return "static";
}

SourceFormat parseFormat(std::string_view s) {
  if (s == "csv") return SourceFormat::Csv;
  if (s == "kml" || s == "kmz") return SourceFormat::Kml;
  if (s == "json") return SourceFormat::Json;
  throw std::invalid_argument("unknown source format '" + std::string(s) + "'");
}

DatasetCategory parseCategory(std::string_view s) {
  if (s == "static") return DatasetCategory::Static;
  if (s == "semi-static") return DatasetCategory::SemiStatic;
  if (s == "realtime") return DatasetCategory::Realtime;
  throw std::invalid_argument("unknown dataset category '" + std::string(s) + "'");
}

std::vector<std::string> validateDescriptor(const DatasetDescriptor& d) {
  std::vector<std::string> errors;
  if (d.id.empty()) errors.push_back("dataset id is empty");
  if (d.sourceUri.empty()) errors.push_back(d.id + ": source is empty");
  if (d.periodSeconds < 0) errors.push_back(d.id + ": negative period");
  if (d.category != DatasetCategory::Static && d.periodSeconds <= 0) {
    errors.push_back(d.id + ": " + std::string(toString(d.category)) +
                     " datasets need a positive period");
  }
  return errors;
}

std::string fetchSource(const std::string& uri) {
  if (uri.starts_with("http://") || uri.starts_with("https://")) {
    auto schemeEnd = uri.find("://") + 3;
    auto pathStart = uri.find('/', schemeEnd);
    std::string host = uri.substr(0, pathStart);
    std::string path = pathStart == std::string::npos ? "/" : uri.substr(pathStart);
    httplib::Client client(host);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    client.set_follow_location(true);
    auto res = client.Get(path);
    if (!res) {
      throw SourceUnavailable(uri + ": " + httplib::to_string(res.error()) +
                              "; will retry at the next scheduled run");
    }
    if (res->status != 200) {
      throw SourceUnavailable(uri + ": HTTP " + std::to_string(res->status) +
                              "; will retry at the next scheduled run");
    }
    return res->body;
  }
  std::string path = uri.starts_with("file://") ? uri.substr(7) : uri;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw SourceUnavailable(path + ": cannot open; will retry at the next scheduled run");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ParsedRecords parseSource(const DatasetDescriptor& d, std::string_view bytes) {
  switch (d.format) {
    case SourceFormat::Csv: return parseCsv(bytes, d.dialect);
    case SourceFormat::Json: return parseJsonRecords(bytes);
    case SourceFormat::Kml: {
      std::string kml;
      if (bytes.starts_with("PK\x03\x04")) {
        kml = extractKmz(bytes);
        bytes = kml;
      }
      auto geoms = parseKmlLineStrings(bytes);
      ParsedRecords out;
      out.errors = std::move(geoms.errors);
      for (std::size_t i = 0; i < geoms.geometries.size(); ++i) {
        auto rec = geometryToRecord(geoms.geometries[i]);
        rec.rowIndex = i;
        out.records.push_back(std::move(rec));
      }
      return out;
    }
  }
  return {};
}

IngestReport ingestOnce(const DatasetDescriptor& d, RecordStore& store, const Clock& clock,
                        const Fetcher& fetch) {
  IngestReport report;
  report.datasetId = d.id;
  report.retrievedAt = formatIsoUtc(clock.now());
  std::string bytes = fetch(d.sourceUri);
  std::string hash = contentHash(bytes);
  auto last = store.latest(d.id);
  if (last && last->sourceHash == hash) {
    report.skipped = true;
    report.recordCount = last->recordCount;
    return report;
  }
  auto parsed = parseSource(d, bytes);
  report.errors = std::move(parsed.errors);
  report.recordCount = parsed.records.size();
  report.newVersion = store.append(d.id, std::move(parsed.records), hash, report.retrievedAt);
  return report;
}

}  // namespace citykb::ingest
