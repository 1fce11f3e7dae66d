#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "citykb/quadstore/quad.hpp"
#include "citykb/schema/catalog.hpp"
#include "citykb/schema/reasoner.hpp"

namespace citykb::testkit {

// Per-subject counting over a flat quad list. Violations carry no detail
// text and come back sorted.
std::vector<schema::Violation> naiveConstraintViolations(const std::vector<rdf::Quad>& quads,
                                                         const schema::SchemaCatalog& catalog);

// Offending resources of every builtin check, keyed by check id, each
// rendered the way CheckRun samples render them.
std::map<std::string, std::set<std::string>> naiveCheckViolations(
    const std::vector<rdf::Quad>& quads, const schema::SchemaCatalog& catalog);

// Random instance data around the catalog's cardinality rules and the
// builtin checks: every rule gets subjects with zero, one and two values,
// some links point at undescribed IRIs, weather reports sometimes refer to
// untyped municipalities.
std::vector<rdf::Quad> randomValidationStore(std::uint32_t seed, std::size_t subjects,
                                             const schema::SchemaCatalog& catalog);

}  // namespace citykb::testkit
