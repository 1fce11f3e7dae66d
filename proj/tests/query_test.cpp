#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "citykb/query/bgp.hpp"
#include "citykb/query/geo.hpp"
#include "citykb/schema/vocab.hpp"
#include "citykb/testkit/oracles.hpp"

using namespace citykb;
using namespace citykb::query;
using rdf::GraphId;
using rdf::Quad;
using rdf::Term;

namespace {

const std::string kBase = "http://example.org/";

Term iri(std::string_view s) { return Term::iri(std::string(s)); }
Term res(const std::string& local) { return Term::iri(kBase + local); }
Term dec(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return Term::literal(os.str(), std::string(vocab::xsd::decimal));
}

Quad q(Term s, Term p, Term o, std::string ds = "d") {
  return Quad{std::move(s), std::move(p), std::move(o), GraphId{std::move(ds), 1}};
}

void fillRoadStore(rdf::QuadStore& store) {
  std::vector<Quad> quads;
  for (int i = 0; i < 7; ++i)
    quads.push_back(q(res("stop" + std::to_string(i)), iri(vocab::rdf::type), iri(vocab::km4c::BusStop)));
  auto firenze = res("Municipality/048017");
  auto prato = res("Municipality/100005");
  struct R {
    const char* id;
    const char* name;
    Term muni;
  };
  for (const auto& r : {R{"r1", "VIA ROMA", firenze}, R{"r2", "VIA ROMA", prato},
                        R{"r3", "PIAZZA DELLA SIGNORIA", firenze}, R{"r4", "VIA ROMANA", firenze}}) {
    quads.push_back(q(res(r.id), iri(vocab::rdf::type), iri(vocab::km4c::Road), "roads"));
    quads.push_back(q(res(r.id), iri(vocab::km4c::extendName), Term::literal(r.name), "roads"));
    quads.push_back(q(res(r.id), iri(vocab::km4c::inMunicipalityOf), r.muni, "roads"));
  }
  quads.push_back(q(firenze, iri(vocab::foaf::name), Term::literal("FIRENZE"), "roads"));
  quads.push_back(q(prato, iri(vocab::foaf::name), Term::literal("PRATO"), "roads"));
  store.insert(quads);
}

}  // namespace

TEST(Bgp, SinglePatternCountsPlantedStops) {
  rdf::QuadStore store;
  fillRoadStore(store);
  GraphPatternQuery query;
  query.patterns = {{Var{"s"}, iri(vocab::rdf::type), iri(vocab::km4c::BusStop)}};
  auto t = evaluate(query, store.snapshot());
  EXPECT_EQ(t.variables, std::vector<std::string>{"s"});
  EXPECT_EQ(t.rows.size(), 7u);
  EXPECT_TRUE(std::is_sorted(t.rows.begin(), t.rows.end()));
}

TEST(Bgp, RoadsOfMunicipalityByName) {
  rdf::QuadStore store;
  fillRoadStore(store);
  auto body = nlohmann::json::parse(R"({
    "patterns": [["?road", "rdf:type", "km4c:Road"],
                 ["?road", "km4c:inMunicipalityOf", "?m"],
                 ["?m", "foaf:name", "\"FIRENZE\""],
                 ["?road", "km4c:extendName", "?name"]],
    "filters": [{"var": "name", "op": "str_eq", "value": "VIA ROMA"}],
    "select": ["road"]})");
  auto t = evaluate(parseQuery(body), store.snapshot());
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], res("r1"));
  body["filters"][0] = {{"var", "name"}, {"op", "contains"}, {"value", "ROMA"}};
  EXPECT_EQ(evaluate(parseQuery(body), store.snapshot()).rows.size(), 2u);
}

TEST(Bgp, UnsatisfiableJoinIsEmpty) {
  rdf::QuadStore store;
  fillRoadStore(store);
  GraphPatternQuery query;
  query.patterns = {{Var{"s"}, iri(vocab::rdf::type), iri(vocab::km4c::BusStop)},
                    {Var{"s"}, iri(vocab::km4c::extendName), Var{"n"}}};
  EXPECT_TRUE(evaluate(query, store.snapshot()).rows.empty());
  query.patterns = {{Var{"s"}, iri(kBase + "nowhere"), Var{"n"}}};
  EXPECT_TRUE(evaluate(query, store.snapshot()).rows.empty());
}

TEST(Bgp, UnboundVariablesAreCompileErrors) {
  rdf::QuadStore store;
  fillRoadStore(store);
  GraphPatternQuery query;
  query.patterns = {{Var{"s"}, iri(vocab::rdf::type), Var{"t"}}};
  query.projection = {"x"};
  EXPECT_THROW(evaluate(query, store.snapshot()), QueryError);
  query.projection = {};
  query.filters = {{"y", FilterOp::Lt, "3"}};
  EXPECT_THROW(evaluate(query, store.snapshot()), QueryError);
  query.filters = {{"s", FilterOp::Lt, "three"}};
  EXPECT_THROW(evaluate(query, store.snapshot()), QueryError);
  // A variable bound only inside notExists cannot be projected.
  query.filters = {};
  query.notExists = {{{Var{"s"}, iri(vocab::km4c::isIn), Var{"road"}}}};
  query.projection = {"road"};
  EXPECT_THROW(evaluate(query, store.snapshot()), QueryError);
}

TEST(Bgp, NotExistsFiltersRows) {
  rdf::QuadStore store;
  store.insert(std::vector<Quad>{
      q(res("s1"), iri(vocab::rdf::type), iri(vocab::km4c::Service)),
      q(res("s2"), iri(vocab::rdf::type), iri(vocab::km4c::Service)),
      q(res("s3"), iri(vocab::rdf::type), iri(vocab::km4c::Service)),
      q(res("s1"), iri(vocab::km4c::hasAccess), res("e1")),
      q(res("s2"), iri(vocab::km4c::isIn), res("r1")),
  });
  GraphPatternQuery query;
  query.patterns = {{Var{"s"}, iri(vocab::rdf::type), iri(vocab::km4c::Service)}};
  query.notExists = {{{Var{"s"}, iri(vocab::km4c::hasAccess), Var{"e"}}},
                     {{Var{"s"}, iri(vocab::km4c::isIn), Var{"r"}}}};
  auto t = evaluate(query, store.snapshot());
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], res("s3"));
  // A group mentioning an absent IRI never excludes anything.
  query.notExists = {{{Var{"s"}, iri(kBase + "nothing"), Var{"e"}}}};
  EXPECT_EQ(evaluate(query, store.snapshot()).rows.size(), 3u);
}

TEST(Bgp, NumericFiltersPaginationAndDistinct) {
  rdf::QuadStore store;
  std::vector<Quad> quads;
  for (int i = 0; i < 20; ++i) {
    quads.push_back(q(res("x" + std::to_string(i)), res("value"),
                      Term::literal(std::to_string(i), std::string(vocab::xsd::integer))));
    quads.push_back(q(res("x" + std::to_string(i)), res("group"), res("g" + std::to_string(i % 3))));
  }
  quads.push_back(q(res("y"), res("value"), Term::literal("ten")));
  store.insert(quads);
  auto view = store.snapshot();
  GraphPatternQuery query;
  query.patterns = {{Var{"x"}, res("value"), Var{"v"}}};
  query.filters = {{"v", FilterOp::Ge, "5"}, {"v", FilterOp::Lt, "15.5"}};
  EXPECT_EQ(evaluate(query, view).rows.size(), 11u);
  query.filters = {{"v", FilterOp::Eq, "7"}};
  EXPECT_EQ(evaluate(query, view).rows.size(), 1u);
  query.filters = {};
  query.offset = 18;
  query.limit = 2;
  auto page = evaluate(query, view);
  ASSERT_EQ(page.rows.size(), 2u);
  query.offset = 0;
  query.limit.reset();
  auto all = evaluate(query, view);
  EXPECT_EQ(page.rows[0], all.rows[18]);

  GraphPatternQuery groups;
  groups.patterns = {{Var{"x"}, res("group"), Var{"g"}}};
  groups.projection = {"g"};
  EXPECT_EQ(evaluate(groups, view).rows.size(), 20u);
  groups.distinct = true;
  EXPECT_EQ(evaluate(groups, view).rows.size(), 3u);
}

TEST(Bgp, RepeatedVariableInOnePattern) {
  rdf::QuadStore store;
  store.insert(std::vector<Quad>{q(res("a"), res("knows"), res("a")), q(res("a"), res("knows"), res("b"))});
  GraphPatternQuery query;
  query.patterns = {{Var{"x"}, res("knows"), Var{"x"}}};
  auto t = evaluate(query, store.snapshot());
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], res("a"));
}

TEST(Bgp, JsonWireFormat) {
  auto qy = parseQuery(nlohmann::json::parse(R"({
      "patterns": [["?s", "<http://x.org/p>", 12], ["?s", "km4c:extendName", "\"a\"@it"]],
      "select": ["?s"], "limit": 3})"));
  ASSERT_EQ(qy.patterns.size(), 2u);
  EXPECT_EQ(std::get<Term>(qy.patterns[0].o), Term::literal("12", std::string(vocab::xsd::integer)));
  EXPECT_EQ(std::get<Term>(qy.patterns[1].p), iri(vocab::km4c::extendName));
  EXPECT_EQ(std::get<Term>(qy.patterns[1].o).lang(), "it");
  EXPECT_EQ(qy.projection, std::vector<std::string>{"s"});
  EXPECT_EQ(qy.limit, 3u);
  EXPECT_THROW(parseQuery(nlohmann::json::parse(R"({"patterns": [["?s", "?p"]]})")), QueryError);
  EXPECT_THROW(parseQuery(nlohmann::json::parse(R"({"patterns": [["?s", "nope:x", "?o"]]})")),
               QueryError);
  EXPECT_THROW(parseQuery(nlohmann::json::parse(R"({"patterns": [], "limit": -1})")), QueryError);
  ResultTable t{{"s", "n"}, {{res("a"), Term::literal("x", std::string(rdf::kXsdString), "it")}}};
  auto j = toJson(t);
  EXPECT_EQ(j["head"]["vars"][1], "n");
  EXPECT_EQ(j["results"]["bindings"][0]["s"]["type"], "uri");
  EXPECT_EQ(j["results"]["bindings"][0]["n"]["xml:lang"], "it");
}

TEST(Bgp, MatchesNestedLoopOracle) {
  auto quads = testkit::randomJoinStore(3, 5000);
  rdf::QuadStore store;
  store.insert(quads);
  auto view = store.snapshot();
  std::mt19937 rng(11);
  std::size_t nonEmpty = 0;
  for (int i = 0; i < 150; ++i) {
    auto query = testkit::randomQuery(rng, quads);
    auto got = evaluate(query, view);
    auto want = testkit::nestedLoopEvaluate(query, quads);
    ASSERT_EQ(got.variables, want.variables) << i;
    ASSERT_EQ(got.rows, want.rows) << "query " << i;
    nonEmpty += !got.rows.empty();
  }
  EXPECT_GT(nonEmpty, 75u);
}

TEST(Haversine, Basics) {
  GeoPoint a{43.7731, 11.2560}, b{43.7693, 11.2558};
  EXPECT_EQ(haversineMeters(a, a), 0.0);
  EXPECT_NEAR(haversineMeters({0, 0}, {0, 180}), std::numbers::pi * kEarthRadiusMeters, 1e-6);
  EXPECT_NEAR(haversineMeters({45, 10}, {-45, -170}), 20015086.796, 1e-3);
  double d = haversineMeters(a, b);
  EXPECT_NEAR(d / testkit::chordDistanceMeters(a, b), 1.0, 1e-6);
  EXPECT_NEAR(d, 423.0, 1.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 2000; ++i) {
    GeoPoint p{lat(rng), lon(rng)}, r{lat(rng), lon(rng)};
    double x = haversineMeters(p, r);
    EXPECT_GE(x, 0);
    EXPECT_EQ(x, haversineMeters(r, p));
    EXPECT_NEAR(x / testkit::chordDistanceMeters(p, r), 1.0, 1e-6);
  }
  EXPECT_THROW(validatePoint({91, 0}), std::invalid_argument);
  EXPECT_THROW(validatePoint({0, -180.5}), std::invalid_argument);
  EXPECT_THROW(validatePoint({std::nan(""), 0}), std::invalid_argument);
}

TEST(Bgp, TermComparisonAndKindFilters) {
  rdf::QuadStore store;
  GraphId g{"g", 1};
  std::vector<Quad> quads{{res("a"), iri(vocab::geo::lat), dec(1), g},
                          {res("a"), iri(vocab::geo::lat), dec(2), g},
                          {res("b"), iri(vocab::geo::lat), dec(3), g},
                          {res("b"), iri(vocab::km4c::isIn), res("a"), g}};
  store.insert(quads);
  auto view = store.snapshot();
  auto q = parseQuery(nlohmann::json::parse(R"({
      "patterns": [["?s", "geo:lat", "?x"], ["?s", "geo:lat", "?y"]],
      "filters": [{"var": "?x", "op": "not_same_term", "value": "?y"}],
      "select": ["?s"], "distinct": true})"));
  auto t = evaluate(q, view);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], res("a"));
  EXPECT_EQ(queryToJson(parseQuery(queryToJson(q))), queryToJson(q));

  auto kinds = parseQuery(nlohmann::json::parse(R"({
      "patterns": [["?s", "?p", "?o"]], "filters": [{"var": "?o", "op": "is_iri"}]})"));
  EXPECT_EQ(evaluate(kinds, view).rows.size(), 1u);
  kinds.filters[0].op = FilterOp::IsLiteral;
  EXPECT_EQ(evaluate(kinds, view).rows.size(), 3u);
  kinds.filters[0] = {"s", FilterOp::SameTerm, "", PatternTerm(res("b"))};
  EXPECT_EQ(evaluate(kinds, view).rows.size(), 2u);
  kinds.filters[0] = {"s", FilterOp::NotSameTerm, "", PatternTerm(res("absent"))};
  EXPECT_EQ(evaluate(kinds, view).rows.size(), 4u);
  kinds.filters[0] = {"s", FilterOp::SameTerm, "", PatternTerm(Var{"unbound"})};
  EXPECT_THROW(evaluate(kinds, view), QueryError);
  EXPECT_THROW(parseQuery(nlohmann::json::parse(
                   R"({"patterns": [["?s", "?p", "?o"]], "filters": [{"var": "?o", "op": "same_term"}]})")),
               QueryError);
}

namespace {

// Services around a centre; the first four sit within 250 m.
void fillRingStore(rdf::QuadStore& store, GeoPoint center) {
  std::vector<Quad> quads;
  for (int i = 0; i < 10; ++i) {
    double meters = 100.0 * (i + 1);
    double dlat = meters / kEarthRadiusMeters * 180 / std::numbers::pi;
    double angle = i * 0.6;
    GeoPoint p{center.lat + dlat * std::cos(angle),
               center.lon + dlat * std::sin(angle) / std::cos(center.lat * std::numbers::pi / 180)};
    auto s = res("svc" + std::to_string(i));
    quads.push_back(q(s, iri(vocab::rdf::type), iri(vocab::km4c::Service)));
    quads.push_back(q(s, iri(vocab::km4c::serviceCategory), Term::literal(i % 2 ? "Hotel" : "bar")));
    if (i == 3) {
      // Located through its entry only.
      quads.push_back(q(s, iri(vocab::km4c::hasAccess), res("entry3")));
      quads.push_back(q(res("entry3"), iri(vocab::rdf::type), iri(vocab::km4c::Entry)));
      quads.push_back(q(res("entry3"), iri(vocab::geo::lat), dec(p.lat)));
      quads.push_back(q(res("entry3"), iri(vocab::geo::lon), dec(p.lon)));
    } else {
      quads.push_back(q(s, iri(vocab::geo::lat), dec(p.lat)));
      quads.push_back(q(s, iri(vocab::geo::lon), dec(p.lon)));
    }
  }
  auto hub = res("svcCenter");
  quads.push_back(q(hub, iri(vocab::rdf::type), iri(vocab::km4c::Accommodation)));
  quads.push_back(q(hub, iri(vocab::geo::lat), dec(center.lat)));
  quads.push_back(q(hub, iri(vocab::geo::lon), dec(center.lon)));
  // Not a service: ignored even with coordinates.
  quads.push_back(q(res("thing"), iri(vocab::geo::lat), dec(center.lat)));
  quads.push_back(q(res("thing"), iri(vocab::geo::lon), dec(center.lon)));
  store.insert(quads);
}

}  // namespace

TEST(Geo, NearServices) {
  GeoPoint c{43.7731, 11.2560};
  rdf::QuadStore store;
  fillRingStore(store, c);
  auto idx = GeoIndex::build(store.snapshot());
  auto hits = idx.nearServices(c, 450);
  ASSERT_EQ(hits.size(), 5u);
  EXPECT_EQ(hits[0].serviceIri, res("svcCenter").value());
  EXPECT_EQ(hits[0].distance, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(hits[i + 1].serviceIri, res("svc" + std::to_string(i)).value());
  EXPECT_NEAR(hits[4].distance, 400, 0.5);
  EXPECT_TRUE(idx.nearServices({c.lat + 0.5, c.lon}, 50).empty());
  auto hotels = idx.nearServices(c, 2000, "hotel");
  EXPECT_EQ(hotels.size(), 5u);
  EXPECT_EQ(idx.nearServices(c, 2000, "Accommodation").size(), 1u);
  EXPECT_THROW(idx.nearServices(c, 0), std::invalid_argument);
  EXPECT_THROW(idx.nearServices({100, 0}, 10), std::invalid_argument);
  for (double r1 : {50.0, 150.0, 333.0, 999.0}) {
    auto small = idx.nearServices(c, r1), big = idx.nearServices(c, r1 * 1.7);
    for (const auto& h : small)
      EXPECT_TRUE(std::any_of(big.begin(), big.end(), [&](auto& x) { return x.serviceIri == h.serviceIri; }));
  }
}

TEST(Geo, ClosestStreetNumber) {
  rdf::QuadStore store;
  std::vector<Quad> quads;
  std::vector<testkit::PlantedPoint> planted;
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> lat(43.70, 43.85), lon(11.15, 11.35);
  for (int i = 0; i < 1000; ++i) {
    auto e = res("Entry/" + std::to_string(i));
    GeoPoint p{lat(rng), lon(rng)};
    auto sn = res("SN/" + std::to_string(i));
    quads.push_back(q(e, iri(vocab::rdf::type), iri(vocab::km4c::Entry)));
    quads.push_back(q(e, iri(vocab::geo::lat), dec(p.lat)));
    quads.push_back(q(e, iri(vocab::geo::lon), dec(p.lon)));
    quads.push_back(q(sn, iri(vocab::rdf::type), iri(vocab::km4c::StreetNumber)));
    quads.push_back(q(sn, iri(vocab::km4c::hasExternalAccess), e));
    quads.push_back(q(sn, iri(vocab::km4c::belongsTo), res("Road/" + std::to_string(i % 40))));
    planted.push_back({e.value(), p});
  }
  // Two entries at one spot: the smaller IRI wins.
  for (auto name : {"Entry/tie-b", "Entry/tie-a"}) {
    quads.push_back(q(res(name), iri(vocab::rdf::type), iri(vocab::km4c::Entry)));
    quads.push_back(q(res(name), iri(vocab::geo::lat), dec(43.0)));
    quads.push_back(q(res(name), iri(vocab::geo::lon), dec(11.0)));
  }
  store.insert(quads);
  GeoCache cache;
  auto idx = cache.get(store.snapshot());
  auto exact = idx->closestStreetNumber(planted[17].point);
  ASSERT_TRUE(exact);
  EXPECT_EQ(exact->entryIri, planted[17].iri);
  EXPECT_EQ(exact->distance, 0.0);
  EXPECT_EQ(exact->streetNumberIri, res("SN/17").value());
  EXPECT_EQ(exact->roadIri, res("Road/17").value());
  auto tie = idx->closestStreetNumber({43.0, 11.0});
  EXPECT_EQ(tie->entryIri, res("Entry/tie-a").value());
  EXPECT_TRUE(tie->streetNumberIri.empty());
  for (int i = 0; i < 100; ++i) {
    GeoPoint p{lat(rng), lon(rng)};
    auto want = testkit::scanClosest(planted, p);
    EXPECT_EQ(idx->closestStreetNumber(p)->entryIri, want->iri);
  }
  EXPECT_EQ(cache.get(store.snapshot()), idx);
  store.insert(std::vector<Quad>{q(res("Entry/new"), iri(vocab::rdf::type), iri(vocab::km4c::Entry))});
  EXPECT_NE(cache.get(store.snapshot()), idx);
}
