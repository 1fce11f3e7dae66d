#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citykb/quadstore/store.hpp"
#include "citykb/query/geo.hpp"
#include "citykb/reconciliation/address.hpp"

namespace citykb::recon {

enum class MatchedField { Official, Alternative };

// entryIri is set iff the match is at street-number level.
struct CandidateMatch {
  std::string roadIri;
  std::optional<std::string> entryIri;
  MatchedField field = MatchedField::Official;

  auto operator<=>(const CandidateMatch&) const = default;
  bool operator==(const CandidateMatch&) const = default;
};

// Street guide lookup tables extracted from one snapshot: municipalities by
// name, roads by municipality and name, street numbers by road.
class Gazetteer {
 public:
  struct Number {
    int number = 0;
    std::string exponent;
    bool red = false;
    std::string iri;
    std::string entry;  // external access preferred, smallest IRI first
  };
  struct Road {
    std::string iri;
    std::vector<std::string> official;
    std::vector<std::string> alternative;
    std::vector<Number> numbers;
  };

  static Gazetteer build(const rdf::StoreView& view);

  // IRI of the municipality whose name normalizes equal to `name`.
  std::optional<std::string> municipality(std::string_view name) const;

  // Roads of the municipality carrying `street` as official or alternative
  // name. Official wins when both match.
  std::vector<std::pair<std::size_t, MatchedField>> byName(const std::string& muni,
                                                           const std::string& street) const;
  const std::vector<std::size_t>& roadsOf(const std::string& muni) const;
  const Road& road(std::size_t i) const { return roads_[i]; }
  std::size_t roadCount() const { return roads_.size(); }

  // Entry of the first token (in address order) that names a street number
  // of the road.
  std::optional<std::string> entryFor(std::size_t road,
                                      const std::vector<StreetNumberToken>& tokens) const;
  std::optional<query::GeoPoint> entryPoint(const std::string& entry) const;
  std::optional<std::size_t> roadIndex(const std::string& iri) const;

 private:
  std::vector<Road> roads_;
  std::map<std::string, std::string> municipalities_;  // normalized name -> IRI
  std::map<std::string, std::vector<std::size_t>> roadsByMuni_;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::size_t, MatchedField>>>
      byName_;
  std::map<std::string, query::GeoPoint> entryPoints_;
  std::map<std::string, std::size_t> roadIndex_;
};

}  // namespace citykb::recon
