#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "citykb/quadstore/quad.hpp"
#include "citykb/quadstore/store.hpp"
#include "citykb/schema/catalog.hpp"

namespace citykb::schema {

// Dataset holding materialized inferences.
inline constexpr std::string_view kInferredDataset = "inferred";

// Least fixpoint of subclass closure, inverse materialization and
// restriction-based classification over `view`. Returns only quads absent
// from the view, tagged with the inferred graph (version 0), sorted.
std::vector<rdf::Quad> infer(const rdf::StoreView& view, const SchemaCatalog& catalog);

// Recomputes inferences over every graph except the inferred one and swaps
// the result in as the next inferred version. Returns the number of quads.
std::size_t materializeInferences(rdf::QuadStore& store, const SchemaCatalog& catalog);

enum class ViolationKind { Missing, Excess };

struct Violation {
  rdf::Term subject;
  std::string property;
  ViolationKind kind = ViolationKind::Missing;
  std::string detail;

  auto operator<=>(const Violation&) const = default;
  bool operator==(const Violation&) const = default;
};

// Closed-world cardinality check over asserted and inferred statements.
std::vector<Violation> checkConstraints(const rdf::StoreView& view,
                                        const SchemaCatalog& catalog);

// Instances of `classIri` in the view paired with their value count for the
// rule's property.
struct CardinalityCount {
  rdf::TermId subject;
  std::size_t count;
};
std::vector<CardinalityCount> countCardinality(const rdf::StoreView& view,
                                               const CardinalityRule& rule);

}  // namespace citykb::schema
