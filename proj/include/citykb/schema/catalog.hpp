#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "citykb/quadstore/quad.hpp"

namespace citykb::schema {

enum class PropertyKind { Object, Data };
enum class RestrictionMode { HasSomeValue, HasValueInSet };

// Membership condition of a class defined by restriction on one of its
// superclass's properties, e.g. a PA with some hasProvince is a Region.
struct RestrictionRule {
  std::string onProperty;
  RestrictionMode mode = RestrictionMode::HasSomeValue;
  std::set<std::string> valueSet;
};

struct ClassDef {
  std::string iri;
  std::vector<std::string> superclasses;
  std::optional<RestrictionRule> definedBy;
  // Term borrowed from an external vocabulary (foaf, geo, OTN, OWL-Time).
  bool external = false;
};

struct PropertyDef {
  std::string iri;
  PropertyKind kind = PropertyKind::Object;
  std::vector<std::string> domain;
  std::string range;
  std::optional<std::string> inverseOf;
  // Apply to every class in `domain`.
  std::optional<int> minCard;
  std::optional<int> maxCard;
};

// Per-class cardinality bound. `incoming` counts statements that have the
// instance as object instead of subject.
struct CardinalityRule {
  std::string classIri;
  std::string propertyIri;
  std::optional<int> min;
  std::optional<int> max;
  bool incoming = false;

  auto operator<=>(const CardinalityRule&) const = default;
};

class SchemaCatalog {
 public:
  void addClass(ClassDef def);
  // Registers the property and, when inverseOf is set, makes the inverse
  // relation symmetric.
  void addProperty(PropertyDef def);
  void addCardinality(CardinalityRule rule);
  void addPrefix(std::string prefix, std::string ns);

  const ClassDef* findClass(std::string_view iri) const;
  const PropertyDef* findProperty(std::string_view iri) const;
  const std::map<std::string, ClassDef, std::less<>>& classes() const { return classes_; }
  const std::map<std::string, PropertyDef, std::less<>>& properties() const {
    return properties_;
  }
  const std::map<std::string, std::string>& prefixes() const { return prefixes_; }

  // All strict superclasses, transitively.
  std::vector<std::string> superclassClosure(std::string_view iri) const;
  bool isSubclassOf(std::string_view sub, std::string_view super) const;

  // Property-level bounds expanded over their domains plus class-level rules.
  std::vector<CardinalityRule> cardinalityRules() const;

  // Expands "prefix:local" using the registered prefixes; absolute IRIs pass
  // through unchanged. Throws std::invalid_argument for unknown prefixes.
  std::string expand(std::string_view curie) const;
  std::string compact(std::string_view iri) const;

  // Invariant violations of the catalog itself; empty when well formed.
  std::vector<std::string> validate() const;

  // RDF rendering of the catalog (classes, properties, restrictions).
  std::vector<rdf::Quad> toQuads(const rdf::GraphId& graph) const;

 private:
  std::map<std::string, ClassDef, std::less<>> classes_;
  std::map<std::string, PropertyDef, std::less<>> properties_;
  std::vector<CardinalityRule> classRules_;
  std::map<std::string, std::string> prefixes_;
};

// The Smart City ontology: six macroclasses, their properties, inverses,
// restriction-defined classes and cardinality bounds.
const SchemaCatalog& builtinCatalog();

// serviceCategory values that classify a Service into each category class.
const std::map<std::string, std::set<std::string>>& serviceCategoryValues();

}  // namespace citykb::schema
