#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "citykb/quadstore/store.hpp"

namespace citykb::query {

struct Var {
  std::string name;
  bool operator==(const Var&) const = default;
};

using PatternTerm = std::variant<rdf::Term, Var>;

struct TriplePattern {
  PatternTerm s;
  PatternTerm p;
  PatternTerm o;
};

enum class FilterOp { Lt, Le, Eq, Gt, Ge, StrEq, Contains, SameTerm, NotSameTerm, IsIri, IsLiteral };

// Numeric operators compare Term::numeric() of the bound value with the
// operand and reject non-numeric bindings. String operators work on the
// bound term's value() (IRI text or lexical form). SameTerm/NotSameTerm
// compare whole terms against `rhs`, a constant or another variable.
// IsIri/IsLiteral test the kind of the bound term and ignore the operands.
struct Filter {
  std::string var;
  FilterOp op = FilterOp::Eq;
  std::string operand;
  std::optional<PatternTerm> rhs;
};

struct GraphPatternQuery {
  std::vector<TriplePattern> patterns;
  // Each group must have no solution compatible with a result row.
  // Variables occurring only inside a group are local to it.
  std::vector<std::vector<TriplePattern>> notExists;
  std::vector<Filter> filters;
  // Empty means every pattern variable in order of first occurrence.
  std::vector<std::string> projection;
  bool distinct = false;
  std::size_t offset = 0;
  std::optional<std::size_t> limit;
};

struct ResultTable {
  std::vector<std::string> variables;
  std::vector<std::vector<rdf::Term>> rows;
};

class QueryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Natural join of the patterns over the union of all graphs, filtered,
// projected, sorted by row, then paginated. Throws QueryError for a
// projected or filtered variable that no pattern binds.
ResultTable evaluate(const GraphPatternQuery& query, const rdf::StoreView& view);

// Wire format:
//   {"patterns": [["?s", "<iri>", "\"lit\""], ...],
//    "notExists": [[[...], ...]], "filters": [{"var","op","value"}],
//    "select": ["s"], "distinct": bool, "limit": n, "offset": n}
// Terms: "?name" variable, "<iri>" or bare "prefix:local" IRI, N-Triples
// literal syntax, or a JSON number for an xsd:decimal literal.
GraphPatternQuery parseQuery(const nlohmann::json& body);
nlohmann::json toJson(const ResultTable& table);
// Inverse of parseQuery; IRIs under a known prefix are written compacted.
nlohmann::json queryToJson(const GraphPatternQuery& query);

PatternTerm parsePatternTerm(const nlohmann::json& value);
FilterOp parseFilterOp(std::string_view op);
std::string_view filterOpName(FilterOp op);

}  // namespace citykb::query
