#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "citykb/quadstore/term.hpp"

namespace citykb::rdf {

// Named graph key: one dataset snapshot. Only one version of a dataset is
// active in a store at any time.
struct GraphId {
  std::string dataset;
  std::uint64_t version = 1;

  auto operator<=>(const GraphId&) const = default;
  bool operator==(const GraphId&) const = default;

  std::string toIri() const;
  // Inverse of toIri(). Foreign graph IRIs map to {iri, 1}.
  static GraphId fromIri(const std::string& iri);
};

inline constexpr std::string_view kGraphBase =
    "http://www.disit.org/km4city/graph/";

struct Quad {
  Term subject;
  Term predicate;
  Term object;
  GraphId graph;

  auto operator<=>(const Quad&) const = default;
  bool operator==(const Quad&) const = default;
};

std::optional<std::string> validateQuad(const Quad& quad);

}  // namespace citykb::rdf
