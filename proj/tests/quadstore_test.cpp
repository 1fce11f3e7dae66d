#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "citykb/quadstore/nquads.hpp"
#include "citykb/quadstore/store.hpp"

using namespace citykb::rdf;

namespace {

Quad q(const std::string& s, const std::string& p, const Term& o,
       const std::string& ds = "d", std::uint64_t v = 1) {
  return Quad{Term::iri("http://x.org/" + s), Term::iri("http://x.org/" + p), o,
              GraphId{ds, v}};
}

Quad qi(const std::string& s, const std::string& p, const std::string& o,
        const std::string& ds = "d", std::uint64_t v = 1) {
  return q(s, p, Term::iri("http://x.org/" + o), ds, v);
}

std::vector<Quad> randomQuads(std::mt19937& rng, std::size_t n, int terms,
                              int datasets) {
  std::uniform_int_distribution<int> pick(0, terms - 1);
  std::uniform_int_distribution<int> pred(0, 7);
  std::uniform_int_distribution<int> ds(0, datasets - 1);
  std::uniform_int_distribution<int> kind(0, 3);
  std::vector<Quad> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Term o = kind(rng) == 0
                 ? Term::literal(std::to_string(pick(rng)), "http://www.w3.org/2001/XMLSchema#integer")
                 : Term::iri("http://x.org/n" + std::to_string(pick(rng)));
    out.push_back(q("n" + std::to_string(pick(rng)), "p" + std::to_string(pred(rng)), o,
                    "ds" + std::to_string(ds(rng))));
  }
  return out;
}

std::set<Quad> asSet(const std::vector<Quad>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(QuadStore, InsertCountsDistinctQuads) {
  QuadStore store;
  std::vector<Quad> batch{qi("a", "p", "b"), qi("a", "p", "c"), qi("b", "p", "c")};
  EXPECT_EQ(store.insert(batch).added, 3u);
  EXPECT_EQ(store.size(), 3u);
  std::vector<Quad> again{qi("a", "p", "b")};
  EXPECT_EQ(store.insert(again).added, 0u);
  EXPECT_EQ(store.size(), 3u);
}

TEST(QuadStore, DuplicateWithinBatchCountsOnce) {
  QuadStore store;
  std::vector<Quad> batch{qi("a", "p", "b"), qi("a", "p", "b")};
  EXPECT_EQ(store.insert(batch).added, 1u);
  EXPECT_EQ(store.size(), 1u);
}

TEST(QuadStore, MalformedQuadsReportPositionAndBatchContinues) {
  QuadStore store;
  std::vector<Quad> batch{
      qi("a", "p", "b"),
      Quad{Term::iri("http://x.org/a"), Term::literal("p"), Term::iri("http://x.org/b"), GraphId{"d", 1}},
      Quad{Term::iri("not an iri"), Term::iri("http://x.org/p"), Term::iri("http://x.org/b"), GraphId{"d", 1}},
      q("a", "p", Term::literal("abc", "http://www.w3.org/2001/XMLSchema#integer")),
      qi("c", "p", "d"),
  };
  auto result = store.insert(batch);
  EXPECT_EQ(result.added, 2u);
  ASSERT_EQ(result.errors.size(), 3u);
  EXPECT_EQ(result.errors[0].position, 1u);
  EXPECT_EQ(result.errors[1].position, 2u);
  EXPECT_EQ(result.errors[2].position, 3u);
}

TEST(QuadStore, BlankObjectsAreRejected) {
  QuadStore store;
  std::vector<Quad> batch{Quad{Term::iri("http://x.org/a"), Term::iri("http://x.org/p"),
                               Term::blank("b0"), GraphId{"d", 1}}};
  auto result = store.insert(batch);
  EXPECT_EQ(result.added, 0u);
  EXPECT_EQ(result.errors.size(), 1u);
}

TEST(QuadStore, EmptyStoreMatchesNothing) {
  QuadStore store;
  EXPECT_TRUE(store.snapshot().match({}, {}, {}).empty());
  EXPECT_TRUE(store.snapshot().match(Term::iri("http://x.org/a"), {}, {}).empty());
}

TEST(QuadStore, PatternMatchingAgreesWithScanOracle) {
  std::mt19937 rng(7);
  auto quads = randomQuads(rng, 10000, 300, 4);
  QuadStore store;
  store.insert(quads);
  auto all = asSet(quads);
  ASSERT_EQ(store.size(), all.size());
  auto view = store.snapshot();
  std::uniform_int_distribution<std::size_t> pick(0, quads.size() - 1);
  std::bernoulli_distribution bound(0.5);
  for (int i = 0; i < 400; ++i) {
    const Quad& ref = quads[pick(rng)];
    TermPattern s = bound(rng) ? TermPattern(ref.subject) : std::nullopt;
    TermPattern p = bound(rng) ? TermPattern(ref.predicate) : std::nullopt;
    TermPattern o = bound(rng) ? TermPattern(ref.object) : std::nullopt;
    std::optional<GraphId> g = bound(rng) ? std::optional<GraphId>(ref.graph) : std::nullopt;
    std::set<Quad> expected;
    for (const auto& x : all) {
      if ((!s || x.subject == *s) && (!p || x.predicate == *p) && (!o || x.object == *o) &&
          (!g || x.graph == *g)) {
        expected.insert(x);
      }
    }
    auto got = view.match(s, p, o, g);
    EXPECT_EQ(got.size(), expected.size());
    EXPECT_EQ(asSet(got), expected);
  }
}

TEST(QuadStore, MatchIsDeterministic) {
  std::mt19937 rng(3);
  auto quads = randomQuads(rng, 2000, 50, 3);
  QuadStore a;
  QuadStore b;
  a.insert(quads);
  b.insert(quads);
  auto p = Term::iri("http://x.org/p1");
  EXPECT_EQ(a.snapshot().match({}, p, {}), b.snapshot().match({}, p, {}));
  EXPECT_EQ(a.snapshot().match({}, p, {}), a.snapshot().match({}, p, {}));
}

TEST(QuadStore, MatchTriplesUnionDeduplicates) {
  QuadStore store;
  std::vector<Quad> batch{qi("a", "p", "b", "d1"), qi("a", "p", "b", "d2")};
  store.insert(batch);
  auto view = store.snapshot();
  auto p = view.lookup(Term::iri("http://x.org/p"));
  ASSERT_TRUE(p);
  EXPECT_EQ(view.matchTriples(std::nullopt, *p, std::nullopt).size(), 1u);
  EXPECT_EQ(view.match({}, Term::iri("http://x.org/p"), {}).size(), 2u);
  EXPECT_GE(view.estimate(std::nullopt, *p, std::nullopt), 1u);
}

TEST(QuadStore, ReplaceGraphSwapsVersion) {
  QuadStore store;
  std::vector<Quad> v1{qi("old", "p", "x"), qi("both", "p", "x")};
  store.insert(v1);
  std::vector<Quad> v2{qi("new", "p", "x"), qi("both", "p", "x")};
  auto g = store.replaceGraph("d", 2, v2);
  EXPECT_EQ(g, (GraphId{"d", 2}));
  auto view = store.snapshot();
  EXPECT_TRUE(view.match(Term::iri("http://x.org/old"), {}, {}).empty());
  EXPECT_EQ(view.match(Term::iri("http://x.org/new"), {}, {}).size(), 1u);
  EXPECT_EQ(store.activeVersion("d"), 2u);
  for (const auto& x : view.allQuads()) EXPECT_EQ(x.graph.version, 2u);
}

TEST(QuadStore, ReplaceWithIdenticalContentOnlyBumpsVersion) {
  QuadStore store;
  std::vector<Quad> v1{qi("a", "p", "x"), qi("b", "p", "y")};
  store.insert(v1);
  auto before = store.snapshot().allQuads();
  store.replaceGraph("d", 5, v1);
  auto after = store.snapshot().allQuads();
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(before[i].subject, after[i].subject);
    EXPECT_EQ(before[i].object, after[i].object);
    EXPECT_EQ(after[i].graph.version, 5u);
  }
}

TEST(QuadStore, StaleVersionIsRejectedWithActiveVersion) {
  QuadStore store;
  std::vector<Quad> v{qi("a", "p", "x")};
  store.replaceGraph("d", 3, v);
  try {
    store.replaceGraph("d", 3, v);
    FAIL() << "expected StaleVersionError";
  } catch (const StaleVersionError& e) {
    EXPECT_EQ(e.activeVersion(), 3u);
  }
  EXPECT_THROW(store.replaceGraph("d", 2, v), StaleVersionError);
}

TEST(QuadStore, InsertIntoInactiveVersionIsRejected) {
  QuadStore store;
  std::vector<Quad> v{qi("a", "p", "x", "d", 2)};
  store.insert(v);
  std::vector<Quad> stale{qi("b", "p", "x", "d", 1)};
  auto r = store.insert(stale);
  EXPECT_EQ(r.added, 0u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].position, 0u);
}

TEST(QuadStore, GraphIsolation) {
  std::mt19937 rng(11);
  auto quads = randomQuads(rng, 3000, 100, 3);
  QuadStore store;
  store.insert(quads);
  auto before = store.snapshot().match({}, {}, {}, GraphId{"ds1", 1});
  std::vector<Quad> repl{qi("z", "p", "z")};
  store.replaceGraph("ds0", 2, repl);
  store.dropGraph("ds2");
  auto after = store.snapshot().match({}, {}, {}, GraphId{"ds1", 1});
  EXPECT_EQ(asSet(before), asSet(after));
  EXPECT_FALSE(store.activeVersion("ds2"));
}

TEST(QuadStore, SnapshotIsUnaffectedByLaterWrites) {
  QuadStore store;
  std::vector<Quad> v{qi("a", "p", "x")};
  store.insert(v);
  auto view = store.snapshot();
  std::vector<Quad> more{qi("b", "p", "x")};
  store.insert(more);
  store.replaceGraph("d", 9, more);
  EXPECT_EQ(view.size(), 1u);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(view.match({}, {}, {}).front().subject, Term::iri("http://x.org/a"));
}

TEST(QuadStore, BlankNodesAreScopedPerDataset) {
  QuadStore store;
  std::vector<Quad> v{
      Quad{Term::blank("b"), Term::iri("http://x.org/p"), Term::literal("1"), GraphId{"d1", 1}},
      Quad{Term::blank("b"), Term::iri("http://x.org/p"), Term::literal("2"), GraphId{"d2", 1}},
  };
  store.insert(v);
  auto view = store.snapshot();
  auto p = view.lookup(Term::iri("http://x.org/p"));
  auto triples = view.matchTriples(std::nullopt, *p, std::nullopt);
  ASSERT_EQ(triples.size(), 2u);
  EXPECT_NE(triples[0].s, triples[1].s);
  EXPECT_EQ(view.match(Term::blank("b"), {}, {}).size(), 2u);
}

TEST(QuadStore, ConcurrentWritersToDistinctDatasets) {
  QuadStore store;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&store, t] {
      for (int i = 0; i < 200; ++i) {
        std::vector<Quad> v{qi("s" + std::to_string(i), "p", "o", "ds" + std::to_string(t))};
        store.insert(v);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(store.size(), 800u);
}

TEST(QuadStore, ReadersNeverSeeMixedGraph) {
  QuadStore store;
  auto content = [](std::uint64_t v) {
    std::vector<Quad> out;
    for (int i = 0; i < 50; ++i) {
      out.push_back(q("s" + std::to_string(i), "gen", Term::literal(std::to_string(v))));
    }
    return out;
  };
  store.replaceGraph("d", 1, content(1));
  std::atomic<bool> done{false};
  std::atomic<int> violations{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 8; ++r) {
    readers.emplace_back([&] {
      while (!done) {
        auto quads = store.snapshot().match({}, Term::iri("http://x.org/gen"), {});
        std::set<std::string> gens;
        for (const auto& x : quads) gens.insert(x.object.value());
        if (quads.size() != 50 || gens.size() != 1) ++violations;
      }
    });
  }
  for (std::uint64_t v = 2; v <= 200; ++v) store.replaceGraph("d", v, content(v));
  done = true;
  for (auto& th : readers) th.join();
  EXPECT_EQ(violations.load(), 0);
}

TEST(NQuads, EscapedLiteralsRoundTrip) {
  Quad x = q("a", "p", Term::literal("say \"hi\"\nline\\two\ttab"));
  auto line = formatNQuad(x);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  auto back = parseNQuadsLine(line);
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, x);
}

TEST(NQuads, LanguageTagsAndDatatypes) {
  auto a = parseNQuadsLine(
      "<http://x.org/a> <http://x.org/p> \"ciao\"@it <http://www.disit.org/km4city/graph/d/v3> .");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->object.lang(), "it");
  EXPECT_EQ(a->graph, (GraphId{"d", 3}));
  auto b = parseNQuadsLine(
      "<http://x.org/a> <http://x.org/p> \"4.5\"^^<http://www.w3.org/2001/XMLSchema#decimal> .");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->object.numeric(), 4.5);
  EXPECT_EQ(b->graph.dataset, kDefaultDataset);
  EXPECT_FALSE(parseNQuadsLine("   # comment"));
  EXPECT_THROW(parseNQuadsLine("<http://x.org/a> <http://x.org/p> ."), NQuadsError);
  EXPECT_THROW(parseNQuadsLine("<http://x.org/a> _:p <http://x.org/b> ."), NQuadsError);
}

TEST(NQuads, UnicodeEscapesDecode) {
  auto a = parseNQuadsLine("<http://x.org/a> <http://x.org/p> \"caf\\u00E9\" .");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->object.value(), "caf\xC3\xA9");
}

TEST(NQuads, ReadCollectsIssuesWithLineNumbers) {
  std::istringstream in(
      "<http://x.org/a> <http://x.org/p> <http://x.org/b> .\n"
      "garbage\n"
      "\n"
      "<http://x.org/a> <http://x.org/p> \"x\" .\n");
  auto r = readNQuads(in);
  EXPECT_EQ(r.quads.size(), 2u);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].line, 2u);
}

TEST(NQuads, ExportImportRoundTrip) {
  std::mt19937 rng(5);
  auto quads = randomQuads(rng, 10000, 400, 3);
  quads.push_back(q("esc", "p", Term::literal("a \"quoted\"\nnew line")));
  quads.push_back(Quad{Term::blank("x1"), Term::iri("http://x.org/p"), Term::literal("v", std::string(kXsdString), "en"), GraphId{"blanks", 4}});
  QuadStore store;
  store.insert(quads);
  auto dir = std::filesystem::temp_directory_path() / "citykb_nq_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "all.nq";
  exportQuads(store.snapshot(), path);
  QuadStore reloaded;
  auto issues = importQuads(reloaded, path);
  EXPECT_TRUE(issues.empty());
  EXPECT_EQ(asSet(store.snapshot().allQuads()), asSet(reloaded.snapshot().allQuads()));

  auto one = dir / "one.nq";
  exportQuads(store.snapshot(), one, "ds1");
  QuadStore partial;
  importQuads(partial, one);
  EXPECT_EQ(asSet(partial.snapshot().allQuads()),
            asSet(store.snapshot().match({}, {}, {}, GraphId{"ds1", 1})));
  std::filesystem::remove_all(dir);
}

TEST(NQuads, EmptyStoreExportsEmptyFile) {
  auto path = std::filesystem::temp_directory_path() / "citykb_empty.nq";
  QuadStore store;
  exportQuads(store.snapshot(), path);
  EXPECT_EQ(std::filesystem::file_size(path), 0u);
  std::filesystem::remove(path);
}

TEST(NQuads, ExportToMissingDirectoryNamesPath) {
  QuadStore store;
  try {
    exportQuads(store.snapshot(), "/nonexistent/dir/out.nq");
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out.nq"), std::string::npos);
  }
}

TEST(GraphIdTest, IriRoundTrip) {
  GraphId g{"weather/2014 06", 12};
  EXPECT_EQ(GraphId::fromIri(g.toIri()), g);
}
