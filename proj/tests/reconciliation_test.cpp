#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "citykb/mapping/model.hpp"
#include "citykb/reconciliation/address.hpp"
#include "citykb/reconciliation/pipeline.hpp"
#include "citykb/reconciliation/review.hpp"
#include "citykb/schema/catalog.hpp"
#include "citykb/schema/reasoner.hpp"
#include "citykb/schema/vocab.hpp"
#include "citykb/testkit/corpus.hpp"

using namespace citykb;
using namespace citykb::recon;
using rdf::GraphId;
using rdf::Quad;
using rdf::Term;

namespace {

const std::string kBase(vocab::kResourceBase);

Term iri(std::string_view s) { return Term::iri(std::string(s)); }
Term res(const std::string& local) { return Term::iri(kBase + "/" + local); }

// A hand-built street guide around the address examples.
class MiniGuide {
 public:
  MiniGuide() {
    muni("048017", "FIRENZE");
    muni("048049", "VICCHIO");
    road("vigna", "048017", "VIA DELLA VIGNA NUOVA", "", {{"40", "", true}, {"42", "", true}, {"40", "", false}});
    road("croce", "048017", "PIAZZA SANTA CROCE", "", {{"1", "", false}});
    road("petrarca", "048017", "VIA FRANCESCO PETRARCA", "", {{"7", "", false}});
    road("rossi1", "048017", "VIA MARIO ROSSI", "", {{"1", "", false}});
    road("rossi2", "048017", "VIALE ROSSI", "", {{"1", "", false}});
    road("rossi3", "048017", "LARGO GINO ROSSI", "", {{"1", "", false}});
    road("servi", "048017", "VIA DEI SERVI", "VIA DE SERVI", {{"34", "AB", false}, {"403", "D", false}});
    road("papa", "048017", "VIA PAPA GIOVANNI XXIII", "", {{"3", "", false}});
    road("roma", "048049", "VIA ROMA", "", {{"5", "", false}});
    // Two roads reachable through different qualifier expansions.
    road("sm1", "048017", "VIA SANTA MARIA", "", {{"2", "", false}});
    road("sm2", "048017", "V. SANTA MARIA", "", {{"2", "", false}});
    store.insert(quads);
    gaz = Gazetteer::build(store.snapshot());
    aliases.add("FIRENZE", "048017");
    aliases.add("VICCHIO", "048049");
    aliases.addAlias("VICCHIO DEL MUGELLO", "VICCHIO");
    config.municipalities = &aliases;
  }

  struct Num {
    std::string n, exp;
    bool red;
  };

  void muni(const std::string& code, const std::string& name) {
    auto m = res("Municipality/" + code);
    add(m, vocab::rdf::type, iri(vocab::km4c::Municipality));
    add(m, vocab::foaf::name, Term::literal(name));
  }

  void road(const std::string& id, const std::string& code, const std::string& name,
            const std::string& alt, const std::vector<Num>& nums) {
    auto r = res("Road/" + id);
    add(r, vocab::rdf::type, iri(vocab::km4c::Road));
    add(r, vocab::km4c::extendName, Term::literal(name));
    if (!alt.empty()) add(r, vocab::km4c::alternativeName, Term::literal(alt));
    add(r, vocab::km4c::inMunicipalityOf, res("Municipality/" + code));
    for (const auto& n : nums) {
      std::string nid = id + "_" + n.n + n.exp + (n.red ? "R" : "");
      auto sn = res("StreetNumber/" + nid);
      add(sn, vocab::rdf::type, iri(vocab::km4c::StreetNumber));
      add(sn, vocab::km4c::number, Term::literal(n.n));
      if (!n.exp.empty()) add(sn, vocab::km4c::exponent, Term::literal(n.exp));
      add(sn, vocab::km4c::classCode, Term::literal(n.red ? "Red" : "Black"));
      add(sn, vocab::km4c::belongsTo, r);
      add(sn, vocab::km4c::hasExternalAccess, entry(nid));
      add(entry(nid), vocab::rdf::type, iri(vocab::km4c::Entry));
      add(entry(nid), vocab::geo::lat, Term::literal("43.77", std::string(vocab::xsd::decimal)));
      add(entry(nid), vocab::geo::lon, Term::literal("11.25", std::string(vocab::xsd::decimal)));
    }
  }

  static Term entry(const std::string& nid) { return res("Entry/" + nid); }
  std::string florence() const { return *gaz.municipality("Firenze"); }

  ReconciliationOutcome run(const std::string& street, const std::string& number,
                            const std::string& muni = "FIRENZE") const {
    return runPipeline({kBase + "/Service/x", street, number, muni}, gaz, config);
  }

  rdf::QuadStore store;
  Gazetteer gaz;
  mapping::IstatTable aliases;
  ReconcileConfig config;

 private:
  void add(const Term& s, std::string_view p, Term o) {
    quads.push_back({s, iri(p), std::move(o), GraphId{"guide", 1}});
  }
  std::vector<Quad> quads;
};

}  // namespace

TEST(Address, ParsesTypicalAddresses) {
  auto a = parseAddress("VIA DELLA VIGNA NUOVA", "40/R-42/R", "FIRENZE");
  EXPECT_EQ(a.streetTokens, (std::vector<std::string>{"VIA", "DELLA", "VIGNA", "NUOVA"}));
  EXPECT_EQ(a.qualifier, "VIA");
  ASSERT_EQ(a.numberTokens.size(), 2u);
  EXPECT_EQ(a.numberTokens[0].number, 40);
  EXPECT_TRUE(a.numberTokens[0].red);
  EXPECT_EQ(a.numberTokens[1].number, 42);
  EXPECT_TRUE(a.numberTokens[1].red);

  auto snc = parseAddress("", "SNC", "X");
  ASSERT_EQ(snc.numberTokens.size(), 1u);
  EXPECT_EQ(snc.numberTokens[0].anomaly, Anomaly::Snc);
  EXPECT_FALSE(snc.numberTokens[0].number);
  EXPECT_TRUE(snc.streetTokens.empty());

  auto roman = parseAddress("Via Papa Giovanni XXIII", "", "Y");
  EXPECT_EQ(roman.streetTokens.back(), "XXIII");
  EXPECT_TRUE(roman.numberTokens.empty());
}

TEST(Address, NumberGrammar) {
  auto t = [](const char* s) { return parseNumberToken(s); };
  EXPECT_EQ(t("0").anomaly, Anomaly::Zero);
  EXPECT_EQ(t("snc").anomaly, Anomaly::Snc);
  EXPECT_EQ(t("12").number, 12);
  EXPECT_TRUE(t("12/R").red);
  EXPECT_EQ(t("12/R").exponent, "");
  EXPECT_EQ(t("34/AB").exponent, "AB");
  EXPECT_EQ(t("34/b/r").exponent, "B");
  EXPECT_TRUE(t("34/b/r").red);
  for (auto bad : {"403D", "36INT.1", "(12)", "12\xC2\xB0", "abc", "1234567"})
    EXPECT_EQ(t(bad).anomaly, Anomaly::Unparsed) << bad;
  // Exactly one of number and anomaly.
  for (auto s : {"0", "SNC", "7", "7/R", "x", "7/A/R"}) {
    auto tok = t(s);
    EXPECT_NE(tok.number.has_value(), tok.anomaly != Anomaly::None) << s;
  }
}

TEST(Address, StrangeCharactersNeverSurviveInTokens) {
  std::mt19937 rng(4);
  const std::string alphabet = "ABC -/?,()\xC2\xB0.xyz";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int k = 0; k < 20; ++k) s += alphabet[rng() % alphabet.size()];
    auto a = parseAddress(s, "", "");
    for (const auto& tok : a.streetTokens) {
      EXPECT_FALSE(tok.empty());
      for (const auto& c : StrangeChars::base().chars) EXPECT_EQ(tok.find(c), std::string::npos) << s;
    }
    auto clean = aggressiveClean(a);
    for (const auto& tok : clean.streetTokens)
      for (const auto& c : StrangeChars::aggressive().chars) EXPECT_EQ(tok.find(c), std::string::npos);
  }
  auto ang = aggressiveClean(parseAddress("VIA ROMA ANG. VIA VERDI", "(12)", ""));
  EXPECT_EQ(ang.street(), "VIA ROMA");
  EXPECT_EQ(ang.numberTokens[0].number, 12);
}

TEST(Qualifiers, TableInvariants) {
  auto t = QualifierTable::defaults();
  std::set<std::string> seen;
  for (const auto& [c, vs] : t.entries())
    for (const auto& v : vs) {
      EXPECT_TRUE(seen.insert(v).second) << v;
      EXPECT_FALSE(t.entries().count(v)) << v;
    }
  EXPECT_THROW(t.add("SAN", "S."), std::invalid_argument);
  EXPECT_THROW(t.add("VIALE", "VIA"), std::invalid_argument);
  EXPECT_THROW(t.add("V.", "VV"), std::invalid_argument);
  auto loaded = QualifierTable::load(std::string(CITYKB_DATA_DIR) + "/qualifiers.csv");
  EXPECT_EQ(loaded.entries(), t.entries());
}

TEST(Steps, ExactMatch) {
  MiniGuide g;
  auto a = parseAddress("VIA DELLA VIGNA NUOVA", "40/R-42/R", "FIRENZE");
  auto c = step1ExactMatch(a, g.florence(), g.gaz, true);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(*c[0].entryIri, MiniGuide::entry("vigna_40R").value());
  // Black 40 is a different entry.
  auto black = step1ExactMatch(parseAddress("VIA DELLA VIGNA NUOVA", "40", ""), g.florence(), g.gaz, true);
  EXPECT_EQ(*black[0].entryIri, MiniGuide::entry("vigna_40").value());
  auto alt = step1ExactMatch(parseAddress("via de servi", "34/AB", ""), g.florence(), g.gaz, true);
  ASSERT_EQ(alt.size(), 1u);
  EXPECT_EQ(alt[0].field, MatchedField::Alternative);
  EXPECT_TRUE(step1ExactMatch(parseAddress("VIA INESISTENTE", "1", ""), g.florence(), g.gaz, true).empty());
}

TEST(Steps, QualifierMatch) {
  MiniGuide g;
  auto a = parseAddress("P.ZZA S. CROCE", "1", "");
  EXPECT_TRUE(step1ExactMatch(a, g.florence(), g.gaz, true).empty());
  auto c = step2QualifierMatch(a, g.florence(), QualifierTable::defaults(), g.gaz, true);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].roadIri, res("Road/croce").value());
  auto plain = parseAddress("VIA DELLA VIGNA NUOVA", "42/R", "");
  EXPECT_EQ(step2QualifierMatch(plain, g.florence(), QualifierTable::defaults(), g.gaz, true),
            step1ExactMatch(plain, g.florence(), g.gaz, true));
  auto twin = step2QualifierMatch(parseAddress("V. S. MARIA", "2", ""), g.florence(),
                                  QualifierTable::defaults(), g.gaz, true);
  EXPECT_EQ(twin.size(), 2u);
}

TEST(Steps, LastWordMatch) {
  MiniGuide g;
  auto swap = step3LastWordMatch(parseAddress("VIA PETRARCA FRANCESCO", "7", ""), g.florence(), g.gaz, true);
  ASSERT_EQ(swap.size(), 1u);
  EXPECT_EQ(swap[0].roadIri, res("Road/petrarca").value());
  EXPECT_EQ(step3LastWordMatch(parseAddress("VIA ROSSI", "1", ""), g.florence(), g.gaz, true).size(), 3u);
  EXPECT_EQ(step3LastWordMatch(parseAddress("PETRARCA", "", ""), g.florence(), g.gaz, false).size(), 1u);
  // Words after a corner marker are ignored.
  EXPECT_EQ(step3LastWordMatch(parseAddress("VIA FRANCESCO PETRARCA ANG. VIA ROSSI", "", ""),
                               g.florence(), g.gaz, false)
                .size(),
            1u);
}

TEST(Steps, Geocoder) {
  MiniGuide g;
  ScriptedGeocoder geo;
  geo.answer("VIGNA NOVA", "FIRENZE", {"VIA DELLA VIGNA NUOVA", {43.7718, 11.2495}});
  geo.fail("VIA GUASTA", "FIRENZE", "quota exceeded");
  g.config.geocoder = &geo;
  auto ok = g.run("VIGNA NOVA", "42/R");
  EXPECT_EQ(ok.level, Level::StreetNumber);
  EXPECT_EQ(ok.step, 4);
  ASSERT_TRUE(ok.geocoded);
  EXPECT_EQ(ok.geocoded->point.lat, 43.7718);
  auto none = g.run("VIA SCONOSCIUTA", "1");
  EXPECT_EQ(none.level, Level::Unresolved);
  auto failed = g.run("VIA GUASTA", "1");
  EXPECT_EQ(failed.level, Level::Unresolved);
  EXPECT_TRUE(std::any_of(failed.trace.begin(), failed.trace.end(), [](const StepTrace& t) {
    return t.step == 4 && t.note.find("skipped") != std::string::npos;
  }));
  EXPECT_EQ(geo.calls(), 3u);
}

TEST(Steps, StripAndRetry) {
  MiniGuide g;
  auto ab = g.run("VIA DEI SERVI", "34/AB");
  EXPECT_EQ(ab.level, Level::StreetNumber);
  EXPECT_EQ(ab.step, 1);
  auto d = g.run("VIA DEI SERVI", "403D");
  EXPECT_EQ(d.level, Level::StreetNumber);
  EXPECT_EQ(d.step, 5);
  EXPECT_EQ(*d.candidates[0].entryIri, MiniGuide::entry("servi_403D").value());
  auto deg = g.run("VIA DEI SERVI", "(34/AB)");
  EXPECT_EQ(deg.step, 5);
  // Nothing for cleaning to change: step 5 is not even attempted.
  auto same = g.run("VIA DEI SERVI", "99");
  EXPECT_TRUE(std::none_of(same.trace.begin(), same.trace.end(),
                           [](const StepTrace& t) { return t.step == 5 && t.numberLevel; }));
}

TEST(Steps, MunicipalityNormalize) {
  MiniGuide g;
  auto a = g.run("VIA ROMA", "5", "Vicchio del Mugello");
  EXPECT_EQ(a.level, Level::StreetNumber);
  EXPECT_EQ(a.step, 6);
  EXPECT_EQ(g.run("VIA ROMA", "5", "ATLANTIDE").level, Level::Unresolved);
  auto canon = g.run("VIA ROMA", "5", "VICCHIO");
  EXPECT_EQ(canon.step, 1);
  EXPECT_TRUE(std::none_of(canon.trace.begin(), canon.trace.end(), [](auto& t) { return t.step == 6; }));
}

TEST(Pipeline, Outcomes) {
  MiniGuide g;
  auto clean = g.run("VIA DELLA VIGNA NUOVA", "40/R-42/R");
  EXPECT_EQ(clean.level, Level::StreetNumber);
  EXPECT_EQ(clean.step, 1);
  ASSERT_EQ(clean.emittedQuads.size(), 2u);
  EXPECT_EQ(clean.emittedQuads[0].predicate.value(), vocab::km4c::hasAccess);
  EXPECT_EQ(clean.emittedQuads[0].graph.dataset, kReconciliationDataset);

  auto street = g.run("VIA DELLA VIGNA NUOVA", "");
  EXPECT_EQ(street.level, Level::Street);
  ASSERT_EQ(street.emittedQuads.size(), 1u);
  EXPECT_EQ(street.emittedQuads[0].predicate.value(), vocab::km4c::isIn);
  EXPECT_EQ(g.run("VIA DELLA VIGNA NUOVA", "SNC").level, Level::Street);

  auto amb = g.run("VIA ROSSI", "1");
  EXPECT_EQ(amb.level, Level::PendingReview);
  EXPECT_EQ(amb.candidates.size(), 3u);
  EXPECT_TRUE(amb.emittedQuads.empty());
  EXPECT_EQ(g.run("", "").level, Level::Unresolved);
  EXPECT_EQ(g.run("Via Papa Giovanni XXIII", "3").step, 1);
}

TEST(Review, ResolveRejectAndIdempotency) {
  MiniGuide g;
  ReviewQueue queue;
  std::vector<std::uint64_t> ids;
  for (auto street : {"VIA ROSSI", "V. S. MARIA", "CORSO ROSSI"}) {
    ServiceAddress a{kBase + "/Service/r" + std::to_string(ids.size()), street, "1", "FIRENZE"};
    if (std::string(street) == "V. S. MARIA") a.number = "2";
    auto o = runPipeline(a, g.gaz, g.config);
    ASSERT_EQ(o.level, Level::PendingReview) << street;
    ids.push_back(queue.enqueue(o, a, g.gaz, "2014-06-01T00:00:00Z"));
    EXPECT_EQ(queue.enqueue(o, a, g.gaz, "later"), ids.back());
  }
  EXPECT_EQ(queue.count(ReviewStatus::Pending), 3u);
  auto first = queue.list(ReviewStatus::Pending, 0, 10);
  EXPECT_EQ(first[0].id, ids[0]);
  EXPECT_EQ(first[0].candidates[0].roadName, "VIA MARIO ROSSI");
  ASSERT_TRUE(first[0].candidates[0].point);

  auto before = g.store.size();
  auto chosen = *first[0].candidates[1].match.entryIri;
  auto r = queue.resolve(ids[0], chosen, "k1", "alice", "2014-06-02T00:00:00Z", g.store);
  EXPECT_FALSE(r.replayed);
  EXPECT_EQ(r.item.status, ReviewStatus::Resolved);
  ASSERT_EQ(r.item.decision->quads.size(), 3u);
  EXPECT_EQ(g.store.size(), before + 3);
  auto sameAs = g.store.snapshot().match(std::nullopt, iri(vocab::owl::sameAs), std::nullopt);
  ASSERT_EQ(sameAs.size(), 1u);
  EXPECT_EQ(sameAs[0].object.value(), first[0].candidates[1].match.roadIri);
  EXPECT_EQ(sameAs[0].graph.dataset, kReviewDataset);

  // Same key replays; another key conflicts; the store never changes.
  EXPECT_TRUE(queue.resolve(ids[0], chosen, "k1", "alice", "x", g.store).replayed);
  try {
    queue.resolve(ids[0], chosen, "k2", "bob", "x", g.store);
    FAIL();
  } catch (const ReviewError& e) {
    EXPECT_EQ(e.code(), ReviewError::Code::Conflict);
  }
  EXPECT_EQ(g.store.size(), before + 3);

  try {
    queue.resolve(ids[1], res("Road/petrarca").value(), "k3", "alice", "x", g.store);
    FAIL();
  } catch (const ReviewError& e) {
    EXPECT_EQ(e.code(), ReviewError::Code::InvalidChoice);
  }
  EXPECT_EQ(queue.get(ids[1])->status, ReviewStatus::Pending);
  auto rej = queue.resolve(ids[1], "reject", "k4", "alice", "x", g.store);
  EXPECT_EQ(rej.item.status, ReviewStatus::Rejected);
  EXPECT_TRUE(rej.item.decision->quads.empty());
  EXPECT_EQ(g.store.size(), before + 3);
  EXPECT_THROW(queue.resolve(999, "reject", "k", "a", "x", g.store), ReviewError);
  EXPECT_EQ(queue.count(ReviewStatus::Pending), 1u);

  auto path = std::filesystem::temp_directory_path() / "citykb_review_test.json";
  queue.save(path);
  ReviewQueue restored;
  restored.load(path);
  EXPECT_EQ(restored.toJson(), queue.toJson());
  std::filesystem::remove(path);
}

namespace {

struct CorpusRun {
  testkit::Corpus corpus;
  rdf::QuadStore store;
  mapping::IstatTable istat;
  ReconcileConfig config;
};

void prepare(CorpusRun& r, const testkit::CorpusSpec& spec) {
  r.corpus = testkit::generateCorpus(spec);
  auto model = mapping::loadMappingModel(std::string(CITYKB_DATA_DIR) + "/mappings/services.json");
  auto compiled = std::get<mapping::CompiledMapping>(mapping::compileMapping(model, schema::builtinCatalog()));
  auto errors = testkit::loadCorpus(r.corpus, compiled, r.store);
  ASSERT_TRUE(errors.empty()) << errors.front().message;
  r.istat = r.corpus.istatTable();
  r.config.municipalities = &r.istat;
}

}  // namespace

TEST(Corpus, DeterministicAndCounted) {
  auto spec = testkit::CorpusSpec::uniform(7, 100);
  auto a = testkit::generateCorpus(spec), b = testkit::generateCorpus(spec);
  EXPECT_EQ(a.streetGuide, b.streetGuide);
  EXPECT_EQ(a.services, b.services);
  EXPECT_EQ(a.truth.size(), 1000u);
  spec.seed = 8;
  EXPECT_NE(testkit::generateCorpus(spec).services, a.services);
  auto bad = spec;
  bad.corruptionMix[testkit::Corruption::Clean] += 0.1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  auto round = testkit::CorpusSpec::fromJson(spec.toJson());
  EXPECT_EQ(round.toJson(), spec.toJson());
}

TEST(Corpus, StreetGuideSatisfiesConstraints) {
  auto corpus = testkit::generateCorpus(testkit::CorpusSpec::uniform(3, 10));
  rdf::QuadStore store;
  store.replaceGraph("streetguide", 1, corpus.streetGuide);
  schema::materializeInferences(store, schema::builtinCatalog());
  auto violations = schema::checkConstraints(store.snapshot(), schema::builtinCatalog());
  EXPECT_TRUE(violations.empty()) << violations.size();
}

TEST(Corpus, AllCleanReconcilesAtStepOne) {
  auto spec = testkit::CorpusSpec::uniform(5, 0);
  spec.services = 300;
  spec.corruptionMix = {{testkit::Corruption::Clean, 1.0}};
  CorpusRun r;
  prepare(r, spec);
  auto run = reconcileAll(r.store.snapshot(), r.config);
  auto score = testkit::scorePipeline(run.outcomes, r.corpus.truth);
  EXPECT_EQ(score.wrongLink, 0u);
  EXPECT_EQ(score.recall(testkit::Corruption::Clean, Level::StreetNumber, 1), 1.0);
}

TEST(Corpus, ClassRecallAndPrecision) {
  auto spec = testkit::CorpusSpec::uniform(11, 60);
  spec.ambiguousServices = 20;
  spec.orphanServices = 149;
  CorpusRun r;
  prepare(r, spec);
  auto run = reconcileAll(r.store.snapshot(), r.config, 2);
  auto score = testkit::scorePipeline(run.outcomes, r.corpus.truth);
  std::cout << score.table();
  using C = testkit::Corruption;
  EXPECT_EQ(score.wrongLink, 0u);
  EXPECT_EQ(score.missingOutcomes, 0u);
  EXPECT_EQ(score.recall(C::Clean, Level::StreetNumber, 1), 1.0);
  EXPECT_GE(score.recall(C::QualifierVariant, Level::StreetNumber, 2), 0.95);
  EXPECT_GE(score.recall(C::WordSwap, Level::StreetNumber, 3), 0.95);
  EXPECT_GE(score.recall(C::StrangeChars, Level::StreetNumber, 5), 0.95);
  EXPECT_GE(score.recall(C::MunicipalityAlias, Level::StreetNumber, 6), 0.95);
  EXPECT_EQ(score.recall(C::RedNumber, Level::StreetNumber, 1), 1.0);
  EXPECT_EQ(score.recall(C::RomanNumeral, Level::StreetNumber, 1), 1.0);
  EXPECT_EQ(score.recall(C::MissingNumber, Level::Street, 1), 1.0);
  EXPECT_EQ(score.recall(C::Snc, Level::Street, 1), 1.0);
  const auto& typo = score.perClass.at(C::Typo);
  EXPECT_EQ(typo.reconciledAtNumber + typo.reconciledAtStreet, 0u);
  EXPECT_EQ(score.perClass.at(C::Ambiguous).pendingReview, 20u);
  EXPECT_EQ(score.perClass.at(C::Orphan).unresolved, 149u);
  for (const auto& [c, s] : score.perClass)
    EXPECT_EQ(s.reconciledAtNumber + s.reconciledAtStreet + s.pendingReview + s.unresolved, s.attempted);
  // Every number-level link also carries the street-level link.
  std::size_t hasAccess = 0, isIn = 0;
  for (const auto& q : run.quads) {
    hasAccess += q.predicate.value() == vocab::km4c::hasAccess;
    isIn += q.predicate.value() == vocab::km4c::isIn;
  }
  EXPECT_GE(isIn, hasAccess);
}

TEST(Corpus, DeterminismMonotoneFallbackAndDominance) {
  auto spec = testkit::CorpusSpec::uniform(13, 30);
  spec.ambiguousServices = 10;
  CorpusRun r;
  prepare(r, spec);
  auto view = r.store.snapshot();
  auto base = reconcileAll(view, r.config, 1);
  auto parallel = reconcileAll(view, r.config, 4);
  ASSERT_EQ(base.outcomes.size(), parallel.outcomes.size());
  EXPECT_EQ(base.quads, parallel.quads);

  auto services = collectServices(view);
  auto gaz = Gazetteer::build(view);
  std::reverse(services.begin(), services.end());
  std::map<std::string, ReconciliationOutcome> reversed;
  for (const auto& s : services) reversed[s.serviceIri] = runPipeline(s, gaz, r.config);
  for (const auto& o : base.outcomes) {
    EXPECT_EQ(reversed[o.serviceIri].emittedQuads, o.emittedQuads);
    EXPECT_EQ(reversed[o.serviceIri].level, o.level);
  }

  std::map<std::string, ServiceAddress> byIri;
  for (const auto& s : services) byIri[s.serviceIri] = s;
  for (int k = 1; k <= 5; ++k) {
    auto cfg = r.config;
    cfg.lastStep = k;
    for (const auto& o : base.outcomes) {
      if (o.level != Level::StreetNumber || o.step > k) continue;
      auto limited = runPipeline(byIri[o.serviceIri], gaz, cfg);
      EXPECT_EQ(limited.emittedQuads, o.emittedQuads);
    }
  }
  for (const auto& o : base.outcomes) {
    if (o.level != Level::StreetNumber) continue;
    auto a = byIri[o.serviceIri];
    a.number.clear();
    auto streetOnly = runPipeline(a, gaz, r.config);
    EXPECT_EQ(streetOnly.level, Level::Street) << a.street;
    if (streetOnly.level == Level::Street)
      EXPECT_EQ(streetOnly.candidates[0].roadIri, o.candidates[0].roadIri) << a.street;
  }
}

TEST(Corpus, DefaultMixKeepsStreetLevelAboveNumberLevel) {
  testkit::CorpusSpec spec;
  spec.seed = 21;
  ASSERT_NO_THROW(spec.validate());
  CorpusRun r;
  prepare(r, spec);
  auto run = reconcileAll(r.store.snapshot(), r.config, 1);
  std::size_t number = 0, street = 0;
  for (const auto& o : run.outcomes) {
    number += o.level == Level::StreetNumber;
    street += o.level == Level::StreetNumber || o.level == Level::Street;
  }
  EXPECT_GE(street, number);
  // Shares track the mix within sampling slack.
  EXPECT_NEAR(static_cast<double>(number) / spec.services, 0.44, 0.03);
  EXPECT_NEAR(static_cast<double>(street) / spec.services, 0.71, 0.03);
  EXPECT_EQ(testkit::scorePipeline(run.outcomes, r.corpus.truth).wrongLink, 0u);
}
