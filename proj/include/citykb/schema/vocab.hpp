#pragma once

#include <string>
#include <string_view>

// IRIs of every ontology term the system reads or writes.
#define CITYKB_KM4C "http://www.disit.org/km4city/schema#"
#define CITYKB_RDF "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
#define CITYKB_RDFS "http://www.w3.org/2000/01/rdf-schema#"
#define CITYKB_OWL "http://www.w3.org/2002/07/owl#"
#define CITYKB_XSD "http://www.w3.org/2001/XMLSchema#"
#define CITYKB_FOAF "http://xmlns.com/foaf/0.1/"
#define CITYKB_GEO "http://www.w3.org/2003/01/geo/wgs84_pos#"
#define CITYKB_OTN "http://www.pms.ifi.uni-muenchen.de/OTN#"
#define CITYKB_TIME "http://www.w3.org/2006/time#"
#define CITYKB_DCT "http://purl.org/dc/terms/"
#define CITYKB_VCARD "http://www.w3.org/2006/vcard/ns#"

namespace citykb::vocab {

inline constexpr std::string_view kKm4c = CITYKB_KM4C;
inline constexpr std::string_view kResourceBase =
    "http://www.disit.org/km4city/resource";

namespace rdf {
inline constexpr std::string_view type = CITYKB_RDF "type";
}
namespace rdfs {
inline constexpr std::string_view subClassOf = CITYKB_RDFS "subClassOf";
inline constexpr std::string_view domain = CITYKB_RDFS "domain";
inline constexpr std::string_view range = CITYKB_RDFS "range";
inline constexpr std::string_view label = CITYKB_RDFS "label";
}  // namespace rdfs
namespace owl {
inline constexpr std::string_view Class = CITYKB_OWL "Class";
inline constexpr std::string_view ObjectProperty = CITYKB_OWL "ObjectProperty";
inline constexpr std::string_view DatatypeProperty = CITYKB_OWL "DatatypeProperty";
inline constexpr std::string_view Restriction = CITYKB_OWL "Restriction";
inline constexpr std::string_view inverseOf = CITYKB_OWL "inverseOf";
inline constexpr std::string_view onProperty = CITYKB_OWL "onProperty";
inline constexpr std::string_view someValuesFrom = CITYKB_OWL "someValuesFrom";
inline constexpr std::string_view hasValue = CITYKB_OWL "hasValue";
inline constexpr std::string_view minCardinality = CITYKB_OWL "minCardinality";
inline constexpr std::string_view maxCardinality = CITYKB_OWL "maxCardinality";
inline constexpr std::string_view sameAs = CITYKB_OWL "sameAs";
inline constexpr std::string_view Thing = CITYKB_OWL "Thing";
}  // namespace owl
namespace xsd {
inline constexpr std::string_view string = CITYKB_XSD "string";
inline constexpr std::string_view integer = CITYKB_XSD "integer";
inline constexpr std::string_view decimal = CITYKB_XSD "decimal";
inline constexpr std::string_view dbl = CITYKB_XSD "double";
inline constexpr std::string_view dateTime = CITYKB_XSD "dateTime";
inline constexpr std::string_view date = CITYKB_XSD "date";
}  // namespace xsd
namespace geo {
inline constexpr std::string_view lat = CITYKB_GEO "lat";
inline constexpr std::string_view lon = CITYKB_GEO "long";
inline constexpr std::string_view SpatialThing = CITYKB_GEO "SpatialThing";
}  // namespace geo
namespace foaf {
inline constexpr std::string_view name = CITYKB_FOAF "name";
inline constexpr std::string_view Organization = CITYKB_FOAF "Organization";
}  // namespace foaf
namespace dct {
inline constexpr std::string_view identifier = CITYKB_DCT "identifier";
inline constexpr std::string_view description = CITYKB_DCT "description";
}  // namespace dct
namespace vcard {
inline constexpr std::string_view streetAddress = CITYKB_VCARD "street-address";
inline constexpr std::string_view locality = CITYKB_VCARD "locality";
}  // namespace vcard
namespace time {
inline constexpr std::string_view Instant = CITYKB_TIME "Instant";
inline constexpr std::string_view inXSDDateTime = CITYKB_TIME "inXSDDateTime";
}  // namespace time

namespace km4c {
// Administration
inline constexpr std::string_view PA = CITYKB_KM4C "PA";
inline constexpr std::string_view Region = CITYKB_KM4C "Region";
inline constexpr std::string_view Province = CITYKB_KM4C "Province";
inline constexpr std::string_view Municipality = CITYKB_KM4C "Municipality";
inline constexpr std::string_view Resolution = CITYKB_KM4C "Resolution";
inline constexpr std::string_view StatisticalData = CITYKB_KM4C "StatisticalData";
inline constexpr std::string_view hasProvince = CITYKB_KM4C "hasProvince";
inline constexpr std::string_view hasApproved = CITYKB_KM4C "hasApproved";
inline constexpr std::string_view approvedBy = CITYKB_KM4C "approvedBy";
inline constexpr std::string_view hasStatistic = CITYKB_KM4C "hasStatistic";
// Street guide
inline constexpr std::string_view Road = CITYKB_KM4C "Road";
inline constexpr std::string_view AdministrativeRoad = CITYKB_KM4C "AdministrativeRoad";
inline constexpr std::string_view RoadElement = CITYKB_KM4C "RoadElement";
inline constexpr std::string_view Node = CITYKB_KM4C "Node";
inline constexpr std::string_view Junction = CITYKB_KM4C "Junction";
inline constexpr std::string_view RoadLink = CITYKB_KM4C "RoadLink";
inline constexpr std::string_view Milestone = CITYKB_KM4C "Milestone";
inline constexpr std::string_view StreetNumber = CITYKB_KM4C "StreetNumber";
inline constexpr std::string_view Entry = CITYKB_KM4C "Entry";
inline constexpr std::string_view EntryRule = CITYKB_KM4C "EntryRule";
inline constexpr std::string_view Manoeuvre = CITYKB_KM4C "Manoeuvre";
inline constexpr std::string_view starts = CITYKB_KM4C "starts";
inline constexpr std::string_view ends = CITYKB_KM4C "ends";
inline constexpr std::string_view contains = CITYKB_KM4C "contains";
inline constexpr std::string_view inMunicipalityOf = CITYKB_KM4C "inMunicipalityOf";
inline constexpr std::string_view placedIn = CITYKB_KM4C "placedIn";
inline constexpr std::string_view standsIn = CITYKB_KM4C "standsIn";
inline constexpr std::string_view belongsTo = CITYKB_KM4C "belongsTo";
inline constexpr std::string_view hasInternalAccess = CITYKB_KM4C "hasInternalAccess";
inline constexpr std::string_view hasExternalAccess = CITYKB_KM4C "hasExternalAccess";
inline constexpr std::string_view extendName = CITYKB_KM4C "extendName";
inline constexpr std::string_view alternativeName = CITYKB_KM4C "alternativeName";
inline constexpr std::string_view number = CITYKB_KM4C "number";
inline constexpr std::string_view classCode = CITYKB_KM4C "classCode";
inline constexpr std::string_view exponent = CITYKB_KM4C "exponent";
inline constexpr std::string_view managingAuthority = CITYKB_KM4C "managingAuthority";
// Points of interest
inline constexpr std::string_view Service = CITYKB_KM4C "Service";
inline constexpr std::string_view Accommodation = CITYKB_KM4C "Accommodation";
inline constexpr std::string_view serviceCategory = CITYKB_KM4C "serviceCategory";
inline constexpr std::string_view hasAccess = CITYKB_KM4C "hasAccess";
inline constexpr std::string_view isIn = CITYKB_KM4C "isIn";
inline constexpr std::string_view houseNumber = CITYKB_KM4C "houseNumber";
// Public transport
inline constexpr std::string_view Route = CITYKB_KM4C "Route";
inline constexpr std::string_view RouteSection = CITYKB_KM4C "RouteSection";
inline constexpr std::string_view BusStop = CITYKB_KM4C "BusStop";
inline constexpr std::string_view hasFirstSection = CITYKB_KM4C "hasFirstSection";
inline constexpr std::string_view hasFirstStop = CITYKB_KM4C "hasFirstStop";
// Sensors
inline constexpr std::string_view WeatherReport = CITYKB_KM4C "WeatherReport";
inline constexpr std::string_view WeatherPrediction = CITYKB_KM4C "WeatherPrediction";
inline constexpr std::string_view SituationRecord = CITYKB_KM4C "SituationRecord";
inline constexpr std::string_view CarParkSensor = CITYKB_KM4C "CarParkSensor";
inline constexpr std::string_view refersTo = CITYKB_KM4C "refersTo";
inline constexpr std::string_view has = CITYKB_KM4C "has";
inline constexpr std::string_view isComposedOf = CITYKB_KM4C "isComposedOf";
// Temporal
inline constexpr std::string_view instantParking = CITYKB_KM4C "instantParking";
inline constexpr std::string_view observationTime = CITYKB_KM4C "observationTime";
inline constexpr std::string_view instantWReport = CITYKB_KM4C "instantWReport";
inline constexpr std::string_view updateTime = CITYKB_KM4C "updateTime";
inline constexpr std::string_view instantObserv = CITYKB_KM4C "instantObserv";
inline constexpr std::string_view measuredTime = CITYKB_KM4C "measuredTime";
inline constexpr std::string_view instantForecast = CITYKB_KM4C "instantForecast";
inline constexpr std::string_view hasExpectedTime = CITYKB_KM4C "hasExpectedTime";
inline constexpr std::string_view instantAVM = CITYKB_KM4C "instantAVM";
inline constexpr std::string_view hasLastStopTime = CITYKB_KM4C "hasLastStopTime";
}  // namespace km4c

inline std::string km4cTerm(std::string_view local) {
  return std::string(kKm4c) + std::string(local);
}

}  // namespace citykb::vocab
