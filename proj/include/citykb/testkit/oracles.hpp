#pragma once

// Deliberately naive reference implementations. They share no code with the
// production paths they check.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "citykb/quadstore/quad.hpp"
#include "citykb/query/bgp.hpp"
#include "citykb/query/geo.hpp"

namespace citykb::testkit {

// Nested-loop join over a flat triple list, patterns taken in written order.
query::ResultTable nestedLoopEvaluate(const query::GraphPatternQuery& q,
                                      const std::vector<rdf::Quad>& quads);

// Random store for join testing: IRIs, integer literals, several graphs with
// overlapping content.
std::vector<rdf::Quad> randomJoinStore(std::uint32_t seed, std::size_t quadCount);

// Random BGP whose patterns are sampled from connected paths of `quads`, so
// that most queries have non-empty answers.
query::GraphPatternQuery randomQuery(std::mt19937& rng, const std::vector<rdf::Quad>& quads);

// Great-circle distance from the chord between unit vectors.
double chordDistanceMeters(const query::GeoPoint& a, const query::GeoPoint& b);

struct PlantedPoint {
  std::string iri;
  query::GeoPoint point;
};

std::vector<query::NearHit> scanNear(const std::vector<PlantedPoint>& points,
                                     const query::GeoPoint& center, double radius);
std::optional<PlantedPoint> scanClosest(const std::vector<PlantedPoint>& points,
                                        const query::GeoPoint& p);

}  // namespace citykb::testkit
