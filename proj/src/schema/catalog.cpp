#include "citykb/schema/catalog.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "citykb/schema/vocab.hpp"

namespace citykb::schema {

using rdf::Quad;
using rdf::Term;

void SchemaCatalog::addClass(ClassDef def) {
  auto iri = def.iri;
  classes_[iri] = std::move(def);
}

void SchemaCatalog::addProperty(PropertyDef def) {
  if (def.inverseOf) {
    auto it = properties_.find(*def.inverseOf);
    if (it != properties_.end()) it->second.inverseOf = def.iri;
  }
  for (const auto& [iri, other] : properties_) {
    if (other.inverseOf && *other.inverseOf == def.iri && !def.inverseOf) {
      def.inverseOf = iri;
    }
  }
  auto iri = def.iri;
  properties_[iri] = std::move(def);
}

void SchemaCatalog::addCardinality(CardinalityRule rule) {
  classRules_.push_back(std::move(rule));
}

void SchemaCatalog::addPrefix(std::string prefix, std::string ns) {
  prefixes_[std::move(prefix)] = std::move(ns);
}

const ClassDef* SchemaCatalog::findClass(std::string_view iri) const {
  auto it = classes_.find(iri);
  return it == classes_.end() ? nullptr : &it->second;
}

const PropertyDef* SchemaCatalog::findProperty(std::string_view iri) const {
  auto it = properties_.find(iri);
  return it == properties_.end() ? nullptr : &it->second;
}

std::vector<std::string> SchemaCatalog::superclassClosure(std::string_view iri) const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::vector<std::string> stack;
  if (const auto* c = findClass(iri)) stack = c->superclasses;
  while (!stack.empty()) {
    auto next = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(next).second) continue;
    out.push_back(next);
    if (const auto* c = findClass(next)) {
      stack.insert(stack.end(), c->superclasses.begin(), c->superclasses.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SchemaCatalog::isSubclassOf(std::string_view sub, std::string_view super) const {
  if (sub == super) return true;
  auto closure = superclassClosure(sub);
  return std::binary_search(closure.begin(), closure.end(), super);
}

std::vector<CardinalityRule> SchemaCatalog::cardinalityRules() const {
  std::vector<CardinalityRule> out = classRules_;
  for (const auto& [iri, p] : properties_) {
    if (!p.minCard && !p.maxCard) continue;
    for (const auto& d : p.domain) {
      out.push_back(CardinalityRule{d, iri, p.minCard, p.maxCard, false});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string SchemaCatalog::expand(std::string_view curie) const {
  if (curie.find("://") != std::string_view::npos) return std::string(curie);
  auto colon = curie.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("not a prefixed name: '" + std::string(curie) + "'");
  }
  auto it = prefixes_.find(std::string(curie.substr(0, colon)));
  if (it == prefixes_.end()) {
    throw std::invalid_argument("unknown prefix in '" + std::string(curie) + "'");
  }
  return it->second + std::string(curie.substr(colon + 1));
}

std::string SchemaCatalog::compact(std::string_view iri) const {
  std::string best;
  std::size_t bestLen = 0;
  for (const auto& [prefix, ns] : prefixes_) {
    if (iri.starts_with(ns) && ns.size() > bestLen) {
      best = prefix + ":" + std::string(iri.substr(ns.size()));
      bestLen = ns.size();
    }
  }
  return bestLen ? best : std::string(iri);
}

std::vector<std::string> SchemaCatalog::validate() const {
  std::vector<std::string> errors;
  auto declared = [&](const std::string& iri) {
    return findClass(iri) != nullptr || iri == vocab::owl::Thing;
  };
  for (const auto& [iri, c] : classes_) {
    for (const auto& s : c.superclasses) {
      if (!declared(s)) errors.push_back(iri + ": undeclared superclass " + s);
    }
    if (c.definedBy) {
      if (!findProperty(c.definedBy->onProperty)) {
        errors.push_back(iri + ": restriction on undeclared property " +
                         c.definedBy->onProperty);
      }
      if (c.definedBy->mode == RestrictionMode::HasValueInSet &&
          c.definedBy->valueSet.empty()) {
        errors.push_back(iri + ": empty restriction value set");
      }
      if (c.superclasses.empty()) {
        errors.push_back(iri + ": restriction-defined class without base class");
      }
    }
  }
  // Cycle detection over the superclass graph.
  std::map<std::string, int> state;
  std::function<bool(const std::string&)> cyclic = [&](const std::string& n) {
    if (state[n] == 1) return true;
    if (state[n] == 2) return false;
    state[n] = 1;
    if (const auto* c = findClass(n)) {
      for (const auto& s : c->superclasses) {
        if (cyclic(s)) return true;
      }
    }
    state[n] = 2;
    return false;
  };
  for (const auto& [iri, _] : classes_) {
    if (cyclic(iri)) {
      errors.push_back(iri + ": superclass cycle");
      break;
    }
  }
  for (const auto& [iri, p] : properties_) {
    for (const auto& d : p.domain) {
      if (!declared(d)) errors.push_back(iri + ": undeclared domain " + d);
    }
    if (p.kind == PropertyKind::Object && !declared(p.range)) {
      errors.push_back(iri + ": undeclared range " + p.range);
    }
    if (p.inverseOf) {
      if (p.kind != PropertyKind::Object) errors.push_back(iri + ": inverse on data property");
      const auto* inv = findProperty(*p.inverseOf);
      if (!inv || !inv->inverseOf || *inv->inverseOf != iri) {
        errors.push_back(iri + ": inverse relation not symmetric");
      }
    }
    if (p.minCard && p.maxCard && *p.minCard > *p.maxCard) {
      errors.push_back(iri + ": minCard > maxCard");
    }
  }
  for (const auto& r : classRules_) {
    if (!declared(r.classIri)) errors.push_back("cardinality on undeclared class " + r.classIri);
    if (!findProperty(r.propertyIri)) {
      errors.push_back("cardinality on undeclared property " + r.propertyIri);
    }
    if (r.min && r.max && *r.min > *r.max) {
      errors.push_back("cardinality min > max for " + r.classIri);
    }
  }
  return errors;
}

std::vector<Quad> SchemaCatalog::toQuads(const rdf::GraphId& graph) const {
  std::vector<Quad> out;
  auto iri = [](std::string_view s) { return Term::iri(std::string(s)); };
  auto add = [&](std::string_view s, std::string_view p, Term o) {
    out.push_back(Quad{iri(s), iri(p), std::move(o), graph});
  };
  auto integer = [](int v) {
    return Term::literal(std::to_string(v), std::string(vocab::xsd::integer));
  };
  const std::string restrictionBase =
      std::string(vocab::kKm4c.substr(0, vocab::kKm4c.size() - 1)) + "/restriction/";
  for (const auto& [ciri, c] : classes_) {
    add(ciri, vocab::rdf::type, iri(vocab::owl::Class));
    for (const auto& s : c.superclasses) add(ciri, vocab::rdfs::subClassOf, iri(s));
    if (c.definedBy) {
      std::string node = restrictionBase + compact(ciri).substr(compact(ciri).find(':') + 1);
      add(ciri, vocab::rdfs::subClassOf, iri(node));
      add(node, vocab::rdf::type, iri(vocab::owl::Restriction));
      add(node, vocab::owl::onProperty, iri(c.definedBy->onProperty));
      if (c.definedBy->mode == RestrictionMode::HasSomeValue) {
        add(node, vocab::owl::someValuesFrom, iri(vocab::owl::Thing));
      } else {
        for (const auto& v : c.definedBy->valueSet) {
          add(node, vocab::owl::hasValue, Term::literal(v));
        }
      }
    }
  }
  for (const auto& [piri, p] : properties_) {
    add(piri, vocab::rdf::type,
        iri(p.kind == PropertyKind::Object ? vocab::owl::ObjectProperty
                                           : vocab::owl::DatatypeProperty));
    for (const auto& d : p.domain) add(piri, vocab::rdfs::domain, iri(d));
    add(piri, vocab::rdfs::range, iri(p.range));
    if (p.inverseOf) add(piri, vocab::owl::inverseOf, iri(*p.inverseOf));
  }
  int n = 0;
  for (const auto& r : cardinalityRules()) {
    std::string node = restrictionBase + "cardinality-" + std::to_string(n++);
    add(r.classIri, vocab::rdfs::subClassOf, iri(node));
    add(node, vocab::rdf::type, iri(vocab::owl::Restriction));
    add(node, vocab::owl::onProperty, iri(r.propertyIri));
    if (r.min) add(node, vocab::owl::minCardinality, integer(*r.min));
    if (r.max) add(node, vocab::owl::maxCardinality, integer(*r.max));
  }
  return out;
}

// --- builtin catalog -------------------------------------------------------

namespace {

std::string k(std::string_view local) { return vocab::km4cTerm(local); }

const std::map<std::string, std::set<std::string>> kCategoryValues = {
    {"Accommodation",
     {"villaggio_vacanze", "albergo_hotel", "casa_per_vacanze", "casa_di_riposo",
      "casa_per_ferie", "bed_and_breakfast", "hostel",
      "residenza_turistica_alberghiera", "residence_di_villeggiatura", "farmhouse",
      "centri_accoglienza_e_case_alloggio", "camping", "residenze_epoca",
      "rifugio_alpino"}},
    {"GovernmentOffice",
     {"municipal_office", "public_office", "registry_office", "prefecture"}},
    {"TourismService",
     {"tourist_information", "tour_operator", "travel_agency", "tourist_guide"}},
    {"TransferService",
     {"car_park", "bus_station", "taxi_rank", "train_station", "bike_sharing"}},
    {"CulturalActivity",
     {"museum", "library", "theatre", "monument", "historical_building"}},
    {"FinancialService", {"bank", "atm", "insurance", "money_transfer"}},
    {"Shopping", {"supermarket", "clothing", "bookshop", "market", "boutique"}},
    {"Healthcare", {"pharmacy", "hospital", "clinic", "doctor"}},
    {"Education", {"school", "university", "kindergarten", "training_centre"}},
    {"Entertainment", {"cinema", "sports_facility", "gym", "disco", "park"}},
    {"Emergency", {"police", "firefighters", "emergency_room", "civil_protection"}},
    {"WineAndFood",
     {"restaurant", "pizzeria", "bar", "pub", "wine_bar", "ice_cream_parlour"}},
};

SchemaCatalog makeBuiltin() {
  SchemaCatalog c;
  c.addPrefix("km4c", CITYKB_KM4C);
  c.addPrefix("rdf", CITYKB_RDF);
  c.addPrefix("rdfs", CITYKB_RDFS);
  c.addPrefix("owl", CITYKB_OWL);
  c.addPrefix("xsd", CITYKB_XSD);
  c.addPrefix("foaf", CITYKB_FOAF);
  c.addPrefix("geo", CITYKB_GEO);
  c.addPrefix("otn", CITYKB_OTN);
  c.addPrefix("time", CITYKB_TIME);
  c.addPrefix("dcterms", CITYKB_DCT);
  c.addPrefix("vcard", CITYKB_VCARD);

  auto external = [&](std::string_view iri) {
    c.addClass(ClassDef{std::string(iri), {}, std::nullopt, true});
  };
  auto cls = [&](std::string_view local, std::vector<std::string> supers = {}) {
    c.addClass(ClassDef{k(local), std::move(supers), std::nullopt, false});
  };
  auto obj = [&](std::string_view local, std::vector<std::string> domain,
                 std::string range, std::optional<std::string> inverse = {},
                 std::optional<int> min = {}, std::optional<int> max = {}) {
    c.addProperty(PropertyDef{k(local), PropertyKind::Object, std::move(domain),
                              std::move(range), std::move(inverse), min, max});
  };
  auto data = [&](std::string iri, std::vector<std::string> domain,
                  std::string_view range) {
    c.addProperty(PropertyDef{std::move(iri), PropertyKind::Data, std::move(domain),
                              std::string(range), std::nullopt, std::nullopt,
                              std::nullopt});
  };
  const std::string thing(vocab::owl::Thing);
  const std::string spatial(vocab::geo::SpatialThing);

  external(vocab::foaf::Organization);
  external(vocab::geo::SpatialThing);
  external(CITYKB_OTN "Road");
  external(CITYKB_OTN "Road_Element");
  external(CITYKB_OTN "Node");
  external(CITYKB_OTN "Line");
  external(CITYKB_OTN "StopPoint");
  external(vocab::time::Instant);

  // Administration
  cls("PA", {std::string(vocab::foaf::Organization)});
  c.addClass(ClassDef{k("Region"), {k("PA")},
                      RestrictionRule{k("hasProvince"), RestrictionMode::HasSomeValue, {}},
                      false});
  cls("Province", {k("PA")});
  cls("Municipality", {k("PA")});
  cls("Resolution");
  cls("StatisticalData");

  // Street guide
  cls("Road", {CITYKB_OTN "Road"});
  cls("AdministrativeRoad");
  cls("RoadElement", {CITYKB_OTN "Road_Element"});
  cls("Node", {CITYKB_OTN "Node", spatial});
  cls("Junction", {spatial});
  cls("RoadLink");
  cls("Milestone", {spatial});
  cls("StreetNumber");
  cls("Entry", {spatial});
  cls("EntryRule");
  cls("Manoeuvre");

  // Points of interest
  cls("Service");
  for (const auto& [category, values] : kCategoryValues) {
    c.addClass(ClassDef{k(category), {k("Service")},
                        RestrictionRule{k("serviceCategory"),
                                        RestrictionMode::HasValueInSet, values},
                        false});
  }

  // Public transport
  cls("TPLLine", {CITYKB_OTN "Line"});
  cls("Lot");
  cls("Ride");
  cls("Route");
  cls("RouteSection");
  cls("BusStop", {CITYKB_OTN "StopPoint", spatial});
  cls("RouteLink");
  cls("TPLJunction", {spatial});
  cls("RailwayElement");
  cls("RailwayDirection");
  cls("RailwaySection");
  cls("RailwayLine");
  cls("RailwayJunction", {CITYKB_OTN "Node"});
  cls("TrainStation");
  cls("GoodsYard");

  // Sensors
  cls("CarParkSensor");
  cls("SituationRecord");
  cls("WeatherReport");
  cls("WeatherPrediction");
  cls("SensorSiteTable");
  cls("SensorSite");
  cls("Observation");
  for (auto sub : {"TrafficConcentration", "TrafficHeadway", "TrafficSpeed", "TrafficFlow"}) {
    cls(sub, {k("Observation")});
  }
  cls("AVMRecord");
  cls("BusStopForecast");

  // Administration properties
  obj("hasProvince", {k("PA")}, k("Province"));
  obj("hasApproved", {k("PA")}, k("Resolution"));
  obj("approvedBy", {k("Resolution")}, k("PA"), k("hasApproved"));
  obj("hasStatistic", {k("PA"), k("Road")}, k("StatisticalData"));
  obj("ownerAuthority", {k("AdministrativeRoad")}, k("PA"));
  obj("managingAuthority", {k("RoadElement")}, k("PA"));
  obj("inMunicipalityOf", {k("Road")}, k("Municipality"));

  // Street guide properties
  obj("starts", {k("RoadElement")}, k("Node"), {}, 1, 1);
  obj("ends", {k("RoadElement")}, k("Node"), {}, 1, 1);
  obj("contains", {k("Road")}, k("RoadElement"), {}, 1, std::nullopt);
  obj("isComposed", {k("AdministrativeRoad")}, k("RoadElement"));
  obj("forming", {k("RoadElement")}, k("AdministrativeRoad"), k("isComposed"));
  obj("coincideWith", {k("AdministrativeRoad")}, k("Road"));
  obj("hasRule", {k("RoadElement")}, k("EntryRule"));
  obj("accessTo", {k("EntryRule")}, k("RoadElement"), k("hasRule"));
  obj("isDescribed", {k("EntryRule")}, k("Manoeuvre"));
  obj("hasFirstElem", {k("Manoeuvre")}, k("RoadElement"));
  obj("hasSecondElem", {k("Manoeuvre")}, k("RoadElement"));
  obj("hasThirdElem", {k("Manoeuvre")}, k("RoadElement"));
  obj("concerning", {k("Manoeuvre")}, k("Node"));
  obj("placedIn", {k("Milestone")}, k("AdministrativeRoad"), {}, 1, 1);
  obj("standsIn", {k("StreetNumber")}, k("RoadElement"));
  obj("belongsTo", {k("StreetNumber")}, k("Road"));
  obj("hasInternalAccess", {k("StreetNumber")}, k("Entry"));
  obj("hasExternalAccess", {k("StreetNumber")}, k("Entry"), {}, 1, std::nullopt);
  obj("starting", {k("RoadLink")}, k("Junction"));
  obj("ending", {k("RoadLink")}, k("Junction"));

  // Points of interest properties
  obj("hasAccess", {k("Service")}, k("Entry"), {}, std::nullopt, 1);
  obj("isIn", {k("Service")}, k("Road"));

  // Public transport properties
  obj("isPartOfLot", {k("TPLLine"), k("BusStop")}, k("Lot"));
  obj("scheduledOn", {k("TPLLine")}, k("Ride"));
  obj("hasFirstSection", {k("Route")}, k("RouteSection"), {}, 1, 1);
  obj("hasSection", {k("Route")}, k("RouteSection"));
  obj("hasFirstStop", {k("Route")}, k("BusStop"), {}, 1, 1);
  obj("startsAt", {k("RouteSection")}, k("BusStop"));
  obj("endsAt", {k("RouteSection")}, k("BusStop"));
  obj("beginsAt", {k("RouteLink")}, k("TPLJunction"));
  obj("finishesAt", {k("RouteLink")}, k("TPLJunction"));
  obj("isMadeUp", {k("Route")}, k("RouteLink"));
  obj("isComposedBy", {k("RailwayDirection"), k("RailwaySection")}, k("RailwayElement"));
  obj("composing", {k("RailwayElement")}, thing, k("isComposedBy"));
  obj("isPartOfLine", {k("RailwayElement")}, k("RailwayLine"));
  obj("hasElement", {k("RailwayLine")}, k("RailwayElement"), k("isPartOfLine"));
  obj("startAt", {k("RailwayElement")}, k("RailwayJunction"), {}, 1, 1);
  obj("endAt", {k("RailwayElement")}, k("RailwayJunction"), {}, 1, 1);
  obj("correspondTo", {k("TrainStation"), k("GoodsYard")}, k("RailwayJunction"), {}, 1, 1);

  // Sensors properties
  obj("relatedTo", {k("SituationRecord")}, k("CarParkSensor"));
  obj("hasRecord", {k("CarParkSensor")}, k("SituationRecord"), k("relatedTo"));
  obj("observe", {k("CarParkSensor")}, k("TransferService"));
  obj("isObservedBy", {k("TransferService")}, k("CarParkSensor"), k("observe"));
  obj("isComposedOf", {k("WeatherReport")}, k("WeatherPrediction"));
  obj("refersTo", {k("WeatherReport")}, k("Municipality"));
  obj("has", {k("Municipality")}, k("WeatherReport"), k("refersTo"));
  obj("forms", {k("SensorSite")}, k("SensorSiteTable"));
  obj("installedOn", {k("SensorSite")}, k("Road"));
  obj("hasProduced", {k("SensorSite")}, k("Observation"));
  obj("measuredBy", {k("Observation")}, k("SensorSite"), k("hasProduced"));
  obj("lastStop", {k("AVMRecord")}, k("BusStop"));
  obj("atThe", {k("BusStopForecast")}, k("BusStop"));
  obj("concern", {k("AVMRecord")}, k("TPLLine"));

  // Temporal pairs: resource -> instant, instant -> resource.
  const std::string instant(vocab::time::Instant);
  obj("observationTime", {k("SituationRecord")}, instant);
  obj("instantParking", {instant}, k("SituationRecord"), k("observationTime"));
  obj("updateTime", {k("WeatherReport")}, instant);
  obj("instantWReport", {instant}, k("WeatherReport"), k("updateTime"));
  obj("measuredTime", {k("Observation")}, instant);
  obj("instantObserv", {instant}, k("Observation"), k("measuredTime"));
  obj("hasExpectedTime", {k("BusStopForecast")}, instant);
  obj("instantForecast", {instant}, k("BusStopForecast"), k("hasExpectedTime"));
  obj("hasLastStopTime", {k("AVMRecord")}, instant);
  obj("instantAVM", {instant}, k("AVMRecord"), k("hasLastStopTime"));

  // Data properties
  data(std::string(vocab::geo::lat), {spatial, k("Service")}, vocab::xsd::decimal);
  data(std::string(vocab::geo::lon), {spatial, k("Service")}, vocab::xsd::decimal);
  data(std::string(vocab::foaf::name), {thing}, vocab::xsd::string);
  data(std::string(vocab::dct::identifier), {thing}, vocab::xsd::string);
  data(std::string(vocab::dct::description), {thing}, vocab::xsd::string);
  data(std::string(vocab::rdfs::label), {thing}, vocab::xsd::string);
  data(std::string(vocab::vcard::streetAddress), {k("Service")}, vocab::xsd::string);
  data(std::string(vocab::vcard::locality), {k("Service")}, vocab::xsd::string);
  data(std::string(vocab::time::inXSDDateTime), {instant}, vocab::xsd::dateTime);
  data(k("extendName"), {k("Road"), k("AdministrativeRoad")}, vocab::xsd::string);
  data(k("alternativeName"), {k("Road")}, vocab::xsd::string);
  data(k("roadType"), {k("Road")}, vocab::xsd::string);
  data(k("number"), {k("StreetNumber")}, vocab::xsd::string);
  data(k("classCode"), {k("StreetNumber")}, vocab::xsd::string);
  data(k("exponent"), {k("StreetNumber")}, vocab::xsd::string);
  data(k("kilometer"), {k("Milestone")}, vocab::xsd::decimal);
  data(k("serviceCategory"), {k("Service")}, vocab::xsd::string);
  data(k("houseNumber"), {k("Service")}, vocab::xsd::string);
  data(k("ATECOcode"), {k("Service")}, vocab::xsd::string);
  data(k("day"), {k("WeatherPrediction")}, vocab::xsd::string);
  data(k("hour"), {k("WeatherPrediction")}, vocab::xsd::string);
  data(k("minTemp"), {k("WeatherPrediction")}, vocab::xsd::decimal);
  data(k("maxTemp"), {k("WeatherPrediction")}, vocab::xsd::decimal);
  data(k("wind"), {k("WeatherPrediction")}, vocab::xsd::string);
  data(k("humidity"), {k("WeatherPrediction")}, vocab::xsd::decimal);
  data(k("freeParkingLots"), {k("SituationRecord")}, vocab::xsd::integer);
  data(k("occupiedParkingLots"), {k("SituationRecord")}, vocab::xsd::integer);
  data(k("capacity"), {k("CarParkSensor")}, vocab::xsd::integer);
  data(k("value"), {k("Observation")}, vocab::xsd::decimal);
  data(k("vehicle"), {k("AVMRecord")}, vocab::xsd::string);
  data(k("lineCode"), {k("TPLLine")}, vocab::xsd::string);

  // Coordinates: mandatory single pair for nodes, junctions and stops,
  // at most one pair for milestones and entries.
  for (auto local : {"Node", "Junction", "BusStop"}) {
    c.addCardinality({k(local), std::string(vocab::geo::lat), 1, 1, false});
    c.addCardinality({k(local), std::string(vocab::geo::lon), 1, 1, false});
  }
  for (auto local : {"Milestone", "Entry"}) {
    c.addCardinality({k(local), std::string(vocab::geo::lat), std::nullopt, 1, false});
    c.addCardinality({k(local), std::string(vocab::geo::lon), std::nullopt, 1, false});
  }
  // Each ride belongs to exactly one line.
  c.addCardinality({k("Ride"), k("scheduledOn"), 1, 1, true});
  return c;
}

}  // namespace

const SchemaCatalog& builtinCatalog() {
  static const SchemaCatalog catalog = makeBuiltin();
  return catalog;
}

const std::map<std::string, std::set<std::string>>& serviceCategoryValues() {
  return kCategoryValues;
}

}  // namespace citykb::schema
