#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace citykb::ingest {

using Fields = std::vector<std::pair<std::string, std::string>>;

// One source row as retrieved. Immutable once written to the record store.
struct RawRecord {
  std::string datasetId;
  std::uint64_t version = 0;
  std::size_t rowIndex = 0;
  Fields fields;
  std::string retrievedAt;
  std::string sourceHash;

  // Value of the named field, if present.
  std::optional<std::string_view> get(std::string_view name) const;

  bool operator==(const RawRecord&) const = default;
};

struct GeoPointDeg {
  double lat = 0;
  double lon = 0;
  bool operator==(const GeoPointDeg&) const = default;
};

struct GeometryRecord {
  std::string datasetId;
  std::uint64_t version = 0;
  std::string featureId;
  std::vector<GeoPointDeg> points;
};

// Error tied to one row or feature; parsing continues past it.
struct RecordError {
  std::size_t index = 0;
  std::string message;
};

// Error that invalidates a whole dataset retrieval.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ISO-8601 UTC timestamps ("2014-06-01T06:00:00Z") to and from epoch seconds.
std::string formatIsoUtc(std::int64_t epochSeconds);
std::optional<std::int64_t> parseIsoUtc(std::string_view text);

// Lowercase hex SHA-256 of `bytes`.
std::string contentHash(std::string_view bytes);

}  // namespace citykb::ingest
