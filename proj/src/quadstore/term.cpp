#include "citykb/quadstore/term.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <regex>

#include "citykb/quadstore/quad.hpp"

namespace citykb::rdf {

namespace {

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

bool isIntegerType(std::string_view dt) {
  if (!dt.starts_with(kXsd)) return false;
  auto local = dt.substr(kXsd.size());
  return local == "integer" || local == "int" || local == "long" ||
         local == "short" || local == "nonNegativeInteger" ||
         local == "positiveInteger";
}

bool isDecimalType(std::string_view dt) {
  if (!dt.starts_with(kXsd)) return false;
  auto local = dt.substr(kXsd.size());
  return local == "decimal" || local == "double" || local == "float";
}

std::string escapeLexical(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          static const char* hex = "0123456789ABCDEF";
          out += "\\u00";
          out += hex[(c >> 4) & 15];
          out += hex[c & 15];
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace

Term Term::iri(std::string value) {
  Term t;
  t.kind_ = TermKind::Iri;
  t.value_ = std::move(value);
  return t;
}

Term Term::blank(std::string label) {
  Term t;
  t.kind_ = TermKind::Blank;
  t.value_ = std::move(label);
  return t;
}

Term Term::literal(std::string lexical, std::string datatype, std::string lang) {
  Term t;
  t.kind_ = TermKind::Literal;
  t.value_ = std::move(lexical);
  t.datatype_ = std::move(datatype);
  t.lang_ = std::move(lang);
  return t;
}

std::optional<double> Term::numeric() const {
  if (kind_ != TermKind::Literal || !isNumericDatatype(datatype_)) {
    return std::nullopt;
  }
  const char* begin = value_.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') return std::nullopt;
  return v;
}

std::string Term::toString() const {
  switch (kind_) {
    case TermKind::Iri:
      return "<" + value_ + ">";
    case TermKind::Blank:
      return "_:" + value_;
    case TermKind::Literal: {
      std::string out = "\"" + escapeLexical(value_) + "\"";
      if (!lang_.empty()) return out + "@" + lang_;
      if (datatype_ == kXsdString) return out;
      return out + "^^<" + datatype_ + ">";
    }
  }
  return {};
}

bool isValidIri(std::string_view iri) {
  if (iri.empty()) return false;
  auto sep = iri.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  for (char c : iri) {
    auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' ||
        c == '}' || c == '|' || c == '^' || c == '`' || c == '\\') {
      return false;
    }
  }
  return true;
}

bool isNumericDatatype(std::string_view datatype) {
  return isIntegerType(datatype) || isDecimalType(datatype);
}

std::optional<std::string> validateTerm(const Term& term) {
  switch (term.kind()) {
    case TermKind::Iri:
      if (!isValidIri(term.value())) return "invalid IRI '" + term.value() + "'";
      return std::nullopt;
    case TermKind::Blank: {
      static const std::regex label(R"([A-Za-z0-9_][A-Za-z0-9_.\-]*)");
      if (!std::regex_match(term.value(), label)) {
        return "invalid blank node label '" + term.value() + "'";
      }
      return std::nullopt;
    }
    case TermKind::Literal: {
      if (!isValidIri(term.datatype())) {
        return "invalid literal datatype '" + term.datatype() + "'";
      }
      if (!term.lang().empty() && term.datatype() != kXsdString) {
        return "language tag on non-string literal";
      }
      if (!term.lang().empty()) {
        static const std::regex tag(R"([a-zA-Z]+(-[a-zA-Z0-9]+)*)");
        if (!std::regex_match(term.lang(), tag)) {
          return "invalid language tag '" + term.lang() + "'";
        }
      }
      if (isIntegerType(term.datatype())) {
        static const std::regex integer(R"([+-]?[0-9]+)");
        if (!std::regex_match(term.value(), integer)) {
          return "unparseable integer '" + term.value() + "'";
        }
      } else if (isDecimalType(term.datatype())) {
        static const std::regex decimal(
            R"([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?|NaN|INF|-INF)");
        if (!std::regex_match(term.value(), decimal)) {
          return "unparseable number '" + term.value() + "'";
        }
      }
      return std::nullopt;
    }
  }
  return "unknown term kind";
}

std::string GraphId::toIri() const {
  std::string out(kGraphBase);
  for (unsigned char c : dataset) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      static const char* hex = "0123456789ABCDEF";
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  out += "/v" + std::to_string(version);
  return out;
}

GraphId GraphId::fromIri(const std::string& iri) {
  std::string_view rest(iri);
  if (!rest.starts_with(kGraphBase)) return GraphId{iri, 1};
  rest.remove_prefix(kGraphBase.size());
  auto slash = rest.rfind("/v");
  if (slash == std::string_view::npos) return GraphId{iri, 1};
  std::uint64_t version = 0;
  auto digits = rest.substr(slash + 2);
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), version);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
    return GraphId{iri, 1};
  }
  std::string dataset;
  auto enc = rest.substr(0, slash);
  for (std::size_t i = 0; i < enc.size(); ++i) {
    if (enc[i] == '%' && i + 2 < enc.size()) {
      int v = 0;
      std::from_chars(enc.data() + i + 1, enc.data() + i + 3, v, 16);
      dataset += static_cast<char>(v);
      i += 2;
    } else {
      dataset += enc[i];
    }
  }
  return GraphId{dataset, version};
}

std::optional<std::string> validateQuad(const Quad& quad) {
  if (quad.subject.isLiteral()) return "literal in subject position";
  if (!quad.predicate.isIri()) return "predicate must be an IRI";
  if (quad.object.isBlank()) return "blank node in object position";
  if (quad.graph.dataset.empty()) return "empty graph dataset";
  for (const Term* t : {&quad.subject, &quad.predicate, &quad.object}) {
    if (auto err = validateTerm(*t)) return err;
  }
  return std::nullopt;
}

}  // namespace citykb::rdf
