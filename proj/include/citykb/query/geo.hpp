#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "citykb/quadstore/store.hpp"

namespace citykb::query {

inline constexpr double kEarthRadiusMeters = 6371000.0;

struct GeoPoint {
  double lat = 0;
  double lon = 0;
};

// Throws std::invalid_argument outside lat [-90,90] or lon [-180,180].
void validatePoint(const GeoPoint& p);
double haversineMeters(const GeoPoint& a, const GeoPoint& b);

struct NearHit {
  std::string serviceIri;
  double distance = 0;
};

struct ClosestNumber {
  std::string entryIri;
  std::string streetNumberIri;  // empty when no StreetNumber owns the entry
  std::string roadIri;          // empty when the StreetNumber has no road
  double distance = 0;
};

// Coordinates extracted from one store snapshot. Services are located by
// their own geo:lat/geo:long, falling back to their hasAccess Entry.
class GeoIndex {
 public:
  struct ServicePoint {
    std::string iri;
    GeoPoint point;
    std::vector<std::string> categories;  // serviceCategory values and type local names
  };
  struct EntryPoint {
    std::string iri;
    GeoPoint point;
    std::string streetNumber;
    std::string road;
  };

  static GeoIndex build(const rdf::StoreView& view);

  // Sorted by distance, then IRI. Throws std::invalid_argument when
  // radius <= 0. Category matching is case-insensitive.
  std::vector<NearHit> nearServices(const GeoPoint& center, double radiusMeters,
                                    const std::optional<std::string>& category = {}) const;
  std::optional<ClosestNumber> closestStreetNumber(const GeoPoint& p) const;

  const std::vector<ServicePoint>& services() const { return services_; }
  const std::vector<EntryPoint>& entries() const { return entries_; }

 private:
  std::vector<ServicePoint> services_;
  std::vector<EntryPoint> entries_;
};

// Caches one GeoIndex per store generation.
class GeoCache {
 public:
  std::shared_ptr<const GeoIndex> get(const rdf::StoreView& view);

 private:
  std::mutex mu_;
  std::uint64_t generation_ = ~std::uint64_t{0};
  std::shared_ptr<const GeoIndex> index_;
};

}  // namespace citykb::query
