#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "citykb/ingestion/record.hpp"

namespace citykb::ingest {

struct CsvDialect {
  char delimiter = ',';
  char quote = '"';
  bool header = true;
};

// Records carry fields and rowIndex only; dataset, version and provenance are
// stamped by the caller.
struct ParsedRecords {
  std::vector<RawRecord> records;
  std::vector<RecordError> errors;
};

// RFC 4180 parsing. Values are kept verbatim apart from a leading BOM.
// Rows whose width differs from the header are reported and skipped; input
// that is not valid UTF-8 throws DatasetError.
ParsedRecords parseCsv(std::string_view bytes, const CsvDialect& dialect = {});

struct ParsedGeometries {
  std::vector<GeometryRecord> geometries;
  std::vector<RecordError> errors;
};

// One geometry per LineString found under a Placemark. KML order is
// lon,lat[,alt]; points come out as (lat, lon).
ParsedGeometries parseKmlLineStrings(std::string_view bytes);

// Returns the KML document stored in a KMZ archive (doc.kml, else the first
// .kml entry). Throws DatasetError on a damaged archive.
std::string extractKmz(std::string_view bytes);

// Flattened geometry: fields featureId and points ("lat lon;lat lon;...").
RawRecord geometryToRecord(const GeometryRecord& g);
std::vector<GeoPointDeg> parsePointList(std::string_view text);

// A JSON array of flat objects, or an object whose "records" member is such
// an array. Scalars become their text; nested values their JSON text.
ParsedRecords parseJsonRecords(std::string_view bytes);

bool isValidUtf8(std::string_view bytes);

}  // namespace citykb::ingest
