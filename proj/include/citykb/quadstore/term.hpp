#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace citykb::rdf {

inline constexpr std::string_view kXsdString =
    "http://www.w3.org/2001/XMLSchema#string";

enum class TermKind : std::uint8_t { Iri, Blank, Literal };

// An RDF term. Literals carry a datatype IRI and, for plain strings only, a
// language tag. Equality is byte equality of all fields.
class Term {
 public:
  Term() = default;

  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term literal(std::string lexical,
                      std::string datatype = std::string(kXsdString),
                      std::string lang = {});

  TermKind kind() const { return kind_; }
  bool isIri() const { return kind_ == TermKind::Iri; }
  bool isBlank() const { return kind_ == TermKind::Blank; }
  bool isLiteral() const { return kind_ == TermKind::Literal; }

  // IRI string, blank label, or literal lexical form.
  const std::string& value() const { return value_; }
  const std::string& datatype() const { return datatype_; }
  const std::string& lang() const { return lang_; }

  // Numeric value of a literal with a numeric datatype.
  std::optional<double> numeric() const;

  // N-Quads surface form: <iri>, _:label, "lex"^^<dt>, "lex"@lang.
  std::string toString() const;

  auto operator<=>(const Term&) const = default;
  bool operator==(const Term&) const = default;

 private:
  TermKind kind_ = TermKind::Iri;
  std::string value_;
  std::string datatype_;
  std::string lang_;
};

bool isValidIri(std::string_view iri);
bool isNumericDatatype(std::string_view datatype);

// Returns an error message when the term violates its kind's invariants.
std::optional<std::string> validateTerm(const Term& term);

}  // namespace citykb::rdf
