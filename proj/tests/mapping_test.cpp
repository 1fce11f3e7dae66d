#include <gtest/gtest.h>

#include <random>
#include <set>

#include "citykb/mapping/model.hpp"
#include "citykb/mapping/names.hpp"
#include "citykb/quadstore/store.hpp"
#include "citykb/schema/vocab.hpp"

using namespace citykb;
using namespace citykb::mapping;
using ingest::RawRecord;
using rdf::GraphId;
using rdf::Quad;
using rdf::Term;

namespace {

const schema::SchemaCatalog& catalog() { return schema::builtinCatalog(); }

CompiledMapping compileOk(const MappingModel& m) {
  auto r = compileMapping(m, catalog());
  if (auto* errs = std::get_if<std::vector<CompileError>>(&r)) {
    std::string all;
    for (const auto& e : *errs) all += e.location + ": " + e.message + "\n";
    ADD_FAILURE() << all;
    throw std::runtime_error("compile failed");
  }
  return std::get<CompiledMapping>(std::move(r));
}

std::vector<CompileError> compileErrors(const MappingModel& m) {
  auto r = compileMapping(m, catalog());
  if (auto* errs = std::get_if<std::vector<CompileError>>(&r)) return *errs;
  return {};
}

RawRecord record(ingest::Fields f, std::size_t row = 0) {
  RawRecord r;
  r.datasetId = "d";
  r.version = 1;
  r.rowIndex = row;
  r.fields = std::move(f);
  return r;
}

MappingModel roadModel() {
  MappingModel m;
  m.datasetId = "roads";
  m.base = std::string(vocab::kResourceBase);
  m.columns = {"road_id", "name"};
  m.entities = {{"road", "km4c:Road", "{base}/Road/{road_id}"}};
  m.dataProperties = {{"road", "name", "km4c:extendName", "xsd:string", Transform::None, false}};
  return m;
}

std::string dataPath(const std::string& rel) { return std::string(CITYKB_DATA_DIR) + "/" + rel; }

}  // namespace

TEST(Mapping, DirectTemplateApplication) {
  auto compiled = compileOk(roadModel());
  std::vector<RawRecord> recs{record({{"road_id", "R1"}, {"name", "VIA ROSSI"}})};
  auto r = compiled.apply(recs);
  ASSERT_EQ(r.quads.size(), 2u);
  auto road = Term::iri(std::string(vocab::kResourceBase) + "/Road/R1");
  std::set<Quad> got(r.quads.begin(), r.quads.end());
  GraphId g{"d", 1};
  EXPECT_TRUE(got.count(Quad{road, Term::iri(std::string(vocab::rdf::type)),
                             Term::iri(std::string(vocab::km4c::Road)), g}));
  EXPECT_TRUE(got.count(Quad{road, Term::iri(std::string(vocab::km4c::extendName)),
                             Term::literal("VIA ROSSI"), g}));
}

TEST(Mapping, TemplateValuesArePercentEncoded) {
  auto compiled = compileOk(roadModel());
  std::vector<RawRecord> recs{record({{"road_id", "R 1/è"}, {"name", "X"}})};
  auto r = compiled.apply(recs);
  EXPECT_EQ(r.quads[0].subject.value(),
            std::string(vocab::kResourceBase) + "/Road/R%201%2F%C3%A8");
  EXPECT_EQ(percentEncode("a-b_c.d~e"), "a-b_c.d~e");
}

TEST(Mapping, LinkWithDataPropertyIsACompileError) {
  auto m = roadModel();
  m.entities.push_back({"road2", "km4c:Road", "{base}/Road2/{road_id}"});
  m.links.push_back({"road", "km4c:extendName", "road2"});
  auto errs = compileErrors(m);
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].location, "links[0].property");
}

TEST(Mapping, SameClassDifferentAliasesCompiles) {
  MappingModel m;
  m.datasetId = "roads";
  m.base = std::string(vocab::kResourceBase);
  m.columns = {"from_node", "to_node", "element"};
  m.entities = {{"start", "km4c:Node", "{base}/Node/{from_node}"},
                {"end", "km4c:Node", "{base}/Node/{to_node}"},
                {"el", "km4c:RoadElement", "{base}/RoadElement/{element}"}};
  m.links = {{"el", "km4c:starts", "start"}, {"el", "km4c:ends", "end"}};
  auto compiled = compileOk(m);
  std::vector<RawRecord> recs{record({{"from_node", "N1"}, {"to_node", "N2"}, {"element", "E"}})};
  auto r = compiled.apply(recs);
  EXPECT_EQ(r.quads.size(), 5u);
}

TEST(Mapping, CompileErrorsCarryLocations) {
  auto m = roadModel();
  m.entities.push_back({"x", "km4c:NoSuchClass", "{base}/X/{missing}"});
  m.entities.push_back({"road", "km4c:Road", "relative/{road_id}"});
  m.dataProperties.push_back({"ghost", "name", "foaf:name", "xsd:string", Transform::None, false});
  m.dataProperties.push_back({"road", "name", "km4c:classCode", "xsd:string", Transform::None, false});
  m.links.push_back({"road", "km4c:placedIn", "road"});
  auto errs = compileErrors(m);
  std::set<std::string> where;
  for (const auto& e : errs) where.insert(e.location);
  EXPECT_TRUE(where.count("entities[1].class"));
  EXPECT_TRUE(where.count("entities[1].uriTemplate"));
  EXPECT_TRUE(where.count("entities[2].alias"));
  EXPECT_TRUE(where.count("entities[2].uriTemplate"));
  EXPECT_TRUE(where.count("dataProperties[1].alias"));
  EXPECT_TRUE(where.count("dataProperties[2].property"));
  EXPECT_TRUE(where.count("links[0].property"));
}

TEST(Mapping, EmptyCellPolicy) {
  auto m = loadMappingModel(dataPath("mappings/services.json"));
  auto compiled = compileOk(m);
  auto make = [](std::string number, std::string street) {
    return record({{"id", "S1"}, {"name", "Bar"}, {"category", "bar"}, {"street", street},
                   {"number", number}, {"municipality", "FIRENZE"}, {"lat", "43,77"}, {"lon", ""}});
  };
  auto count = [&](const RawRecord& r, std::string_view prop) {
    auto out = compiled.apply(std::vector<RawRecord>{r});
    return std::count_if(out.quads.begin(), out.quads.end(),
                         [&](const Quad& q) { return q.predicate.value() == prop; });
  };
  EXPECT_EQ(count(make("12", "VIA ROSSI"), vocab::km4c::houseNumber), 1);
  EXPECT_EQ(count(make("", "VIA ROSSI"), vocab::km4c::houseNumber), 0);
  EXPECT_EQ(count(make("SNC", "VIA ROSSI"), vocab::km4c::houseNumber), 0);
  EXPECT_EQ(count(make("0", "VIA ROSSI"), vocab::km4c::houseNumber), 0);
  EXPECT_EQ(count(make("", "VIA ROSSI"), vocab::vcard::streetAddress), 1);
  EXPECT_EQ(count(make("", ""), vocab::vcard::streetAddress), 0);
  EXPECT_EQ(count(make("", ""), vocab::rdf::type), 1);
  auto r = compiled.apply(std::vector<RawRecord>{make("1", "X")});
  auto lat = std::find_if(r.quads.begin(), r.quads.end(),
                          [](const Quad& q) { return q.predicate.value() == vocab::geo::lat; });
  ASSERT_NE(lat, r.quads.end());
  EXPECT_EQ(lat->object.value(), "43.77");
}

TEST(Mapping, EntitySkippedWhenTemplateColumnEmpty) {
  auto compiled = compileOk(roadModel());
  std::vector<RawRecord> recs{record({{"road_id", "  "}, {"name", "VIA ROSSI"}})};
  EXPECT_TRUE(compiled.apply(recs).quads.empty());
}

TEST(Mapping, CellErrorsKeepRemainingQuads) {
  auto m = loadMappingModel(dataPath("mappings/services.json"));
  auto compiled = compileOk(m);
  std::vector<RawRecord> recs{record({{"id", "S1"}, {"name", "Bar"}, {"category", "bar"},
                                      {"street", "VIA X"}, {"number", "3"},
                                      {"municipality", "FIRENZE"}, {"lat", "north"}, {"lon", "11.2"}},
                                     7)};
  auto r = compiled.apply(recs);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].rowIndex, 7u);
  EXPECT_EQ(r.errors[0].column, "lat");
  EXPECT_EQ(r.quads.size(), 7u);
}

TEST(Mapping, OutputIsDeterministicAndReplayable) {
  auto compiled = compileOk(loadMappingModel(dataPath("mappings/services.json")));
  std::vector<RawRecord> recs;
  for (int i = 0; i < 200; ++i) {
    recs.push_back(record({{"id", "S" + std::to_string(i % 150)}, {"name", "N" + std::to_string(i)},
                           {"category", "bar"}, {"street", "VIA A"}, {"number", std::to_string(i)},
                           {"municipality", "FIRENZE"}, {"lat", "43.1"}, {"lon", "11.1"}},
                          static_cast<std::size_t>(i)));
  }
  auto a = compiled.apply(recs);
  std::reverse(recs.begin(), recs.end());
  auto b = compiled.apply(recs);
  EXPECT_EQ(a.quads, b.quads);
  // Mapping, replacing, and re-mapping the same version is a fixpoint.
  rdf::QuadStore store;
  store.replaceGraph("d", 1, a.quads);
  auto before = store.snapshot().allQuads();
  EXPECT_THROW(store.replaceGraph("d", 1, b.quads), rdf::StaleVersionError);
  store.insert(b.quads);
  EXPECT_EQ(store.snapshot().allQuads(), before);
}

TEST(Mapping, BuiltinModelsCompile) {
  for (auto name : {"services", "weather", "parking"}) {
    auto m = loadMappingModel(dataPath(std::string("mappings/") + name + ".json"));
    EXPECT_TRUE(compileErrors(m).empty()) << name;
  }
}

TEST(Mapping, MalformedModelFilesNameTheProblem) {
  EXPECT_THROW(parseMappingModel("[]"), std::invalid_argument);
  try {
    parseMappingModel(R"({"dataset":"x","entities":[{"alias":"a","class":"km4c:Road"}]})");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("entities[0].uriTemplate"), std::string::npos);
  }
  try {
    parseMappingModel(R"({"dataset":"x","temporal":[{"alias":"a","kind":"daily","column":"c"}]})");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("temporal[0]"), std::string::npos);
  }
}

TEST(Temporal, InstantsAreDeterministicAndPerResource) {
  GraphId g{"d", 1};
  auto a = temporalLink("http://x.org/r1", TemporalKind::Parking, "2014-06-01T10:00:00Z", g);
  auto b = temporalLink("http://x.org/r1", TemporalKind::Parking, "2014-06-01T10:00:00Z", g);
  auto c = temporalLink("http://x.org/r2", TemporalKind::Parking, "2014-06-01T10:00:00Z", g);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a[0].object, c[0].object);
  EXPECT_EQ(a[0].predicate.value(), vocab::km4c::observationTime);
  EXPECT_EQ(a[1].predicate.value(), vocab::km4c::instantParking);
  EXPECT_EQ(a[1].subject, a[0].object);
  EXPECT_EQ(a[2].predicate.value(), vocab::time::inXSDDateTime);
  EXPECT_EQ(a[2].object.datatype(), vocab::xsd::dateTime);
  EXPECT_NE(a[0].object.value().find("#instantParking"), std::string::npos);
  EXPECT_THROW(temporalLink("http://x.org/r1", TemporalKind::Avm, "June", g), std::invalid_argument);
  auto avm = temporalLink("http://x.org/r1", TemporalKind::Avm, "2014-06-01T10:00:00Z", g);
  EXPECT_NE(avm[0].object, a[0].object);
}

TEST(Mapping, WeatherRowsMatchCountingOracle) {
  IstatTable istat;
  istat.add("FIRENZE", "048017");
  istat.add("PRATO", "100005");
  auto compiled = compileOk(loadMappingModel(dataPath("mappings/weather.json")));
  std::mt19937 rng(9);
  std::bernoulli_distribution fill(0.8);
  std::vector<RawRecord> recs;
  std::size_t expectedPredictionQuads = 0;
  std::set<std::string> reports;
  std::set<std::string> reportsWithMunicipality;
  std::set<std::string> municipalities;
  std::size_t unknownRows = 0;
  const int rows = 1000;
  for (int i = 0; i < rows; ++i) {
    int report = i / 16;
    std::string muni = report % 5 == 4 ? "ATLANTIDE" : (report % 2 ? "Prato" : "FIRENZE");
    std::string rid = "R" + std::to_string(report);
    ingest::Fields f{{"report_id", rid}, {"municipality", muni},
                     {"updated", "2014-06-01T06:00:00Z"}, {"row", std::to_string(i % 16)}};
    std::size_t populated = 0;
    for (auto col : {"day", "hour", "min_temp", "max_temp", "description", "wind", "humidity"}) {
      bool present = fill(rng);
      populated += present;
      f.emplace_back(col, present ? "12" : "");
    }
    recs.push_back(record(std::move(f), static_cast<std::size_t>(i)));
    expectedPredictionQuads += populated + 2;  // cells + type + isComposedOf
    reports.insert(rid);
    unknownRows += muni == "ATLANTIDE";
    if (muni != "ATLANTIDE") {
      reportsWithMunicipality.insert(rid);
      municipalities.insert(muni == "Prato" ? "PRATO" : muni);
    }
  }
  auto r = compiled.apply(recs, GraphId{"weather", 1}, &istat);
  // type + 3 temporal per report, refersTo when resolvable, one type per municipality.
  std::size_t expected = expectedPredictionQuads + reports.size() * 4 +
                         reportsWithMunicipality.size() + municipalities.size();
  EXPECT_EQ(r.quads.size(), expected);
  std::size_t unknown = std::count_if(r.errors.begin(), r.errors.end(), [](const CellError& e) {
    return e.message.find("unknown municipality") != std::string::npos;
  });
  EXPECT_EQ(unknown, unknownRows);
  for (const auto& q : r.quads) {
    if (q.predicate.value() == vocab::rdf::type) continue;
    EXPECT_NE(catalog().findProperty(q.predicate.value()), nullptr) << q.predicate.value();
  }
}

TEST(Names, NormalizationAndIstatLookup) {
  EXPECT_EQ(normalizeName("  Vicchio-del   mugello. "), "VICCHIO DEL MUGELLO");
  IstatTable t;
  t.add("VICCHIO", "048049");
  t.add("FIRENZE", "048017");
  t.addAlias("VICCHIO DEL MUGELLO", "VICCHIO");
  EXPECT_EQ(t.lookup("firenze"), "048017");
  EXPECT_EQ(t.lookup("Vicchio del Mugello"), "048049");
  EXPECT_EQ(t.canonical("vicchio del mugello"), "VICCHIO");
  EXPECT_FALSE(t.lookup("Atlantide"));
}
