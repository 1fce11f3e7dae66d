#include <gtest/gtest.h>
#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>

#include "citykb/ingestion/ingest.hpp"
#include "citykb/ingestion/parsers.hpp"
#include "citykb/ingestion/record_store.hpp"
#include "citykb/ingestion/scheduler.hpp"

using namespace citykb::ingest;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() /
           ("citykb_ingest_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}

// Single-entry deflated zip archive.
std::string makeZip(const std::string& name, const std::string& content) {
  std::string deflated(compressBound(content.size()) + 64, '\0');
  z_stream zs{};
  deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(content.data()));
  zs.avail_in = static_cast<uInt>(content.size());
  zs.next_out = reinterpret_cast<Bytef*>(deflated.data());
  zs.avail_out = static_cast<uInt>(deflated.size());
  deflate(&zs, Z_FINISH);
  deflated.resize(zs.total_out);
  deflateEnd(&zs);
  auto crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size())));
  std::string zip;
  put32(zip, 0x04034b50);
  put16(zip, 20); put16(zip, 0); put16(zip, 8); put16(zip, 0); put16(zip, 0);
  put32(zip, crc);
  put32(zip, static_cast<std::uint32_t>(deflated.size()));
  put32(zip, static_cast<std::uint32_t>(content.size()));
  put16(zip, static_cast<std::uint16_t>(name.size())); put16(zip, 0);
  zip += name;
  zip += deflated;
  std::uint32_t cdOffset = static_cast<std::uint32_t>(zip.size());
  put32(zip, 0x02014b50);
  put16(zip, 20); put16(zip, 20); put16(zip, 0); put16(zip, 8); put16(zip, 0); put16(zip, 0);
  put32(zip, crc);
  put32(zip, static_cast<std::uint32_t>(deflated.size()));
  put32(zip, static_cast<std::uint32_t>(content.size()));
  put16(zip, static_cast<std::uint16_t>(name.size()));
  put16(zip, 0); put16(zip, 0); put16(zip, 0); put16(zip, 0);
  put32(zip, 0);
  put32(zip, 0);
  zip += name;
  std::uint32_t cdSize = static_cast<std::uint32_t>(zip.size()) - cdOffset;
  put32(zip, 0x06054b50);
  put16(zip, 0); put16(zip, 0); put16(zip, 1); put16(zip, 1);
  put32(zip, cdSize);
  put32(zip, cdOffset);
  put16(zip, 0);
  return zip;
}

std::string kmlWithPlacemarks(std::mt19937& rng, int n) {
  std::uniform_int_distribution<int> count(2, 9);
  std::uniform_real_distribution<double> lon(10.0, 12.0);
  std::uniform_real_distribution<double> lat(43.0, 44.0);
  std::ostringstream out;
  out.precision(8);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<kml xmlns=\"http://www.opengis.net/kml/2.2\"><Document><Folder>\n";
  for (int i = 0; i < n; ++i) {
    out << "<Placemark id=\"re" << i << "\"><name>Element " << i << "</name><LineString><coordinates>\n";
    int c = count(rng);
    for (int k = 0; k < c; ++k) out << lon(rng) << ',' << lat(rng) << ",0 ";
    out << "\n</coordinates></LineString></Placemark>\n";
  }
  out << "</Folder></Document></kml>\n";
  return out.str();
}

}  // namespace

TEST(Csv, SimpleTable) {
  auto r = parseCsv("a,b\n1,2\n3,4\n5,6\n");
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_TRUE(r.errors.empty());
  for (const auto& rec : r.records) EXPECT_EQ(rec.fields.size(), 2u);
  EXPECT_EQ(r.records[2].get("b"), "6");
  EXPECT_EQ(r.records[2].rowIndex, 2u);
}

TEST(Csv, QuotedDelimiterAndNewline) {
  auto r = parseCsv("name,addr\r\n\"Rossi, Mario\",\"VIA A\nSCALA B\"\r\n\"say \"\"hi\"\"\",x\r\n");
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].get("name"), "Rossi, Mario");
  EXPECT_EQ(r.records[0].get("addr"), "VIA A\nSCALA B");
  EXPECT_EQ(r.records[1].get("name"), "say \"hi\"");
}

TEST(Csv, ValuesAreNotTrimmedButBomIs) {
  auto r = parseCsv("\xEF\xBB\xBFid;name\n 1 ; x \n", CsvDialect{';', '"', true});
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].fields[0].first, "id");
  EXPECT_EQ(r.records[0].get("id"), " 1 ");
  EXPECT_EQ(r.records[0].get("name"), " x ");
}

TEST(Csv, RaggedRowsReportedWithLineAndSkipped) {
  auto r = parseCsv("a,b\n1,2\n1,2,3\n4,5\n6\n");
  EXPECT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0].index, 3u);
  EXPECT_EQ(r.errors[1].index, 5u);
}

TEST(Csv, InvalidUtf8IsADatasetError) {
  EXPECT_THROW(parseCsv("a\n\xC3\x28\n"), DatasetError);
  EXPECT_THROW(parseCsv("a\n\xED\xA0\x80\n"), DatasetError);
  EXPECT_NO_THROW(parseCsv("a\ncaff\xC3\xA8\n"));
}

TEST(Csv, HeaderlessDialectNamesColumns) {
  auto r = parseCsv("x,y\n", CsvDialect{',', '"', false});
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].get("column2"), "y");
}

TEST(Csv, TenThousandRowsRoundTripThroughRecordStore) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> n(0, 999);
  std::vector<std::vector<std::string>> rows;
  std::ostringstream csv;
  csv << "id,name,street,number,city\n";
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> row{"S" + std::to_string(i), "Bar \"" + std::to_string(n(rng)) + "\"",
                                 "VIA ROSSI, " + std::to_string(n(rng)), std::to_string(n(rng)) + "/R",
                                 i % 7 ? "FIRENZE" : "VICCHIO\nDEL MUGELLO"};
    rows.push_back(row);
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::string cell = row[k];
      std::string quoted = "\"";
      for (char c : cell) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      csv << (k ? "," : "") << quoted << "\"";
    }
    csv << "\n";
  }
  auto parsed = parseCsv(csv.str());
  ASSERT_EQ(parsed.records.size(), rows.size());
  TempDir dir;
  RecordStore store(dir.path);
  auto v = store.append("services", parsed.records, "h", "2014-01-01T00:00:00Z");
  EXPECT_EQ(v, 1u);
  auto back = store.read("services", 1);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_EQ(back[i].fields.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(back[i].fields[k].second, rows[i][k]);
    EXPECT_EQ(back[i].version, 1u);
    EXPECT_EQ(back[i].datasetId, "services");
  }
}

TEST(Kml, LonLatOrderIsSwapped) {
  auto r = parseKmlLineStrings(
      "<kml><Placemark><LineString><coordinates>11.25,43.77 11.26,43.78</coordinates>"
      "</LineString></Placemark></kml>");
  ASSERT_EQ(r.geometries.size(), 1u);
  ASSERT_EQ(r.geometries[0].points.size(), 2u);
  EXPECT_DOUBLE_EQ(r.geometries[0].points[0].lat, 43.77);
  EXPECT_DOUBLE_EQ(r.geometries[0].points[0].lon, 11.25);
  EXPECT_DOUBLE_EQ(r.geometries[0].points[1].lat, 43.78);
  EXPECT_DOUBLE_EQ(r.geometries[0].points[1].lon, 11.26);
}

TEST(Kml, SinglePointAndMalformedFeaturesAreRejected) {
  auto r = parseKmlLineStrings(
      "<kml><Document>"
      "<Placemark id=\"a\"><LineString><coordinates>11.25,43.77,5</coordinates></LineString></Placemark>"
      "<Placemark id=\"b\"><LineString><coordinates>11.25;43.77 1,2</coordinates></LineString></Placemark>"
      "<Placemark id=\"c\"><LineString><coordinates>11,43 12,95</coordinates></LineString></Placemark>"
      "<Placemark id=\"d\"><MultiGeometry><LineString><coordinates>1,2 3,4</coordinates></LineString>"
      "<LineString><coordinates>5,6 7,8</coordinates></LineString></MultiGeometry></Placemark>"
      "</Document></kml>");
  EXPECT_EQ(r.errors.size(), 3u);
  ASSERT_EQ(r.geometries.size(), 2u);
  EXPECT_EQ(r.geometries[0].featureId, "d#1");
  EXPECT_EQ(r.geometries[1].featureId, "d#2");
}

TEST(Kml, PlacemarkCountMatchesTextScanOracle) {
  std::mt19937 rng(137);
  auto kml = kmlWithPlacemarks(rng, 137);
  auto r = parseKmlLineStrings(kml);
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(r.geometries.size(), 137u);
  // Independent oracle: count coordinate tuples directly in the text.
  std::regex tuple(R"(-?\d+\.?\d*,-?\d+\.?\d*,0)");
  auto expected = std::distance(std::sregex_iterator(kml.begin(), kml.end(), tuple), std::sregex_iterator());
  std::size_t total = 0;
  for (const auto& g : r.geometries) total += g.points.size();
  EXPECT_EQ(total, static_cast<std::size_t>(expected));
}

TEST(Kml, KmzArchiveIsUnpacked) {
  std::mt19937 rng(3);
  auto kml = kmlWithPlacemarks(rng, 12);
  auto kmz = makeZip("doc.kml", kml);
  EXPECT_EQ(extractKmz(kmz), kml);
  DatasetDescriptor d{"roads", "x", SourceFormat::Kml, 0, DatasetCategory::Static, "", {}};
  auto parsed = parseSource(d, kmz);
  ASSERT_EQ(parsed.records.size(), 12u);
  auto pts = parsePointList(*parsed.records[0].get("points"));
  EXPECT_GE(pts.size(), 2u);
  EXPECT_THROW(extractKmz("PK\x03\x04garbage"), DatasetError);
}

TEST(JsonFeed, ArrayAndRecordsMember) {
  auto a = parseJsonRecords(R"([{"b":"x","a":1.5,"n":null},{"b":"y","a":2}])");
  ASSERT_EQ(a.records.size(), 2u);
  EXPECT_EQ(a.records[0].fields[0].first, "b");
  EXPECT_EQ(a.records[0].get("a"), "1.5");
  EXPECT_EQ(a.records[0].get("n"), "");
  auto b = parseJsonRecords(R"({"records":[{"k":"v"}, 3]})");
  EXPECT_EQ(b.records.size(), 1u);
  EXPECT_EQ(b.errors.size(), 1u);
  EXPECT_THROW(parseJsonRecords("{oops"), DatasetError);
}

TEST(Time, IsoRoundTrip) {
  EXPECT_EQ(formatIsoUtc(0), "1970-01-01T00:00:00Z");
  auto t = parseIsoUtc("2014-06-01T06:30:00Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(formatIsoUtc(*t), "2014-06-01T06:30:00Z");
  EXPECT_EQ(parseIsoUtc("2014-06-01T08:30:00+02:00"), t);
  EXPECT_FALSE(parseIsoUtc("2014-02-30T00:00:00Z"));
  EXPECT_FALSE(parseIsoUtc("yesterday"));
}

TEST(RecordStore, VersionsAreGapFreeAndImmutable) {
  TempDir dir;
  RecordStore store(dir.path);
  EXPECT_FALSE(store.latest("d"));
  RawRecord r;
  r.fields = {{"a", "1"}};
  EXPECT_EQ(store.append("d", {r}, "h1", "t1"), 1u);
  EXPECT_EQ(store.append("d", {r, r}, "h2", "t2"), 2u);
  EXPECT_EQ(store.append("other/feed", {}, "h", "t"), 1u);
  auto vs = store.versions("d");
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_EQ(vs[1].recordCount, 2u);
  EXPECT_EQ(vs[1].sourceHash, "h2");
  EXPECT_EQ(store.datasets(), (std::vector<std::string>{"d", "other/feed"}));
  auto before = fs::last_write_time(dir.path / "d" / "v1.jsonl");
  store.append("d", {r}, "h3", "t3");
  EXPECT_EQ(fs::last_write_time(dir.path / "d" / "v1.jsonl"), before);
  EXPECT_EQ(store.read("d", 1).size(), 1u);
  EXPECT_THROW(store.read("d", 9), std::runtime_error);
}

TEST(RecordStore, ConcurrentAppendsStayGapFree) {
  TempDir dir;
  RecordStore store(dir.path);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 10; ++i) store.append("d", {}, "h", "t");
    });
  }
  for (auto& th : threads) th.join();
  auto vs = store.versions("d");
  ASSERT_EQ(vs.size(), 40u);
  for (std::size_t i = 0; i < vs.size(); ++i) EXPECT_EQ(vs[i].version, i + 1);
}

TEST(IngestOnce, HashSkipAndVersionIncrement) {
  TempDir dir;
  RecordStore store(dir.path);
  ManualClock clock(1400000000);
  std::string content = "a,b\n1,2\n";
  Fetcher fetch = [&](const std::string&) { return content; };
  DatasetDescriptor d{"t", "mem://t", SourceFormat::Csv, 60, DatasetCategory::SemiStatic, "", {}};
  auto r1 = ingestOnce(d, store, clock, fetch);
  EXPECT_EQ(r1.newVersion, 1u);
  EXPECT_FALSE(r1.skipped);
  auto r2 = ingestOnce(d, store, clock, fetch);
  EXPECT_TRUE(r2.skipped);
  EXPECT_FALSE(r2.newVersion);
  content = "a,b\n1,3\n";
  auto r3 = ingestOnce(d, store, clock, fetch);
  EXPECT_EQ(r3.newVersion, 2u);
  EXPECT_EQ(store.versions("t").size(), 2u);
  EXPECT_EQ(store.read("t", 2)[0].retrievedAt, "2014-05-13T16:53:20Z");
}

TEST(IngestOnce, UnreachableSourceCreatesNoVersion) {
  TempDir dir;
  RecordStore store(dir.path);
  ManualClock clock;
  DatasetDescriptor d{"t", (dir.path / "missing.csv").string(), SourceFormat::Csv, 0,
                      DatasetCategory::Static, "", {}};
  try {
    ingestOnce(d, store, clock);
    FAIL();
  } catch (const SourceUnavailable& e) {
    EXPECT_NE(std::string(e.what()).find("retry"), std::string::npos);
  }
  EXPECT_FALSE(store.latest("t"));
}

TEST(IngestOnce, ReadsLocalFiles) {
  TempDir dir;
  auto file = dir.path / "s.csv";
  std::ofstream(file) << "x\n1\n2\n";
  RecordStore store(dir.path / "records");
  ManualClock clock;
  DatasetDescriptor d{"s", "file://" + file.string(), SourceFormat::Csv, 0,
                      DatasetCategory::Static, "", {}};
  EXPECT_EQ(ingestOnce(d, store, clock).recordCount, 2u);
}

TEST(Descriptor, PeriodRules) {
  DatasetDescriptor d{"rt", "x", SourceFormat::Json, 0, DatasetCategory::Realtime, "", {}};
  EXPECT_FALSE(validateDescriptor(d).empty());
  d.periodSeconds = 300;
  EXPECT_TRUE(validateDescriptor(d).empty());
  d.category = DatasetCategory::Static;
  d.periodSeconds = 0;
  EXPECT_TRUE(validateDescriptor(d).empty());
  EXPECT_EQ(parseFormat("kmz"), SourceFormat::Kml);
  EXPECT_THROW(parseCategory("daily"), std::invalid_argument);
}

namespace {

DatasetDescriptor every(const std::string& id, std::int64_t period) {
  return DatasetDescriptor{id, "mem://" + id, SourceFormat::Csv, period,
                           DatasetCategory::SemiStatic, "", {}};
}

}  // namespace

TEST(Scheduler, PeriodsOneTwoFourOverEightTicks) {
  ManualClock clock;
  Scheduler s({every("a", 1), every("b", 2), every("c", 4)},
              [](const DatasetDescriptor& d) { return IngestReport{d.id}; }, clock);
  for (int t = 0; t < 8; ++t) {
    s.poll();
    clock.advance(1);
  }
  s.waitIdle();
  auto st = s.stats();
  EXPECT_EQ(st["a"].runs, 8u);
  EXPECT_EQ(st["b"].runs, 4u);
  EXPECT_EQ(st["c"].runs, 2u);
}

TEST(Scheduler, SlowDatasetRunsNeverOverlap) {
  ManualClock clock;
  Scheduler s({every("slow", 1), every("fast", 1)},
              [&](const DatasetDescriptor& d) {
                if (d.id == "slow") clock.sleepFor(3);
                return IngestReport{d.id};
              },
              clock);
  for (int t = 0; t < 12; ++t) {
    s.poll();
    clock.advance(1);
  }
  s.waitIdle();
  auto st = s.stats();
  EXPECT_EQ(st["slow"].maxConcurrent, 1);
  EXPECT_EQ(st["slow"].runs, 4u);
  EXPECT_GT(st["slow"].overlapsAvoided, 0u);
  EXPECT_EQ(st["fast"].runs, 12u);
}

TEST(Scheduler, FailingDatasetIsRetriedAndIsolated) {
  ManualClock clock;
  std::vector<std::string> failures;
  std::mutex mu;
  Scheduler s({every("bad", 2), every("good", 1)},
              [](const DatasetDescriptor& d) -> IngestReport {
                if (d.id == "bad") throw SourceUnavailable("down");
                return IngestReport{d.id};
              },
              clock,
              [&](const IngestReport& r) {
                std::lock_guard lock(mu);
                if (r.failure) failures.push_back(r.datasetId);
              });
  for (int t = 0; t < 6; ++t) {
    s.poll();
    clock.advance(1);
  }
  s.waitIdle();
  auto st = s.stats();
  EXPECT_EQ(st["bad"].runs, 3u);
  EXPECT_EQ(st["bad"].failures, 3u);
  EXPECT_EQ(st["good"].runs, 6u);
  EXPECT_EQ(st["good"].failures, 0u);
  EXPECT_EQ(failures.size(), 3u);
}

TEST(Scheduler, FairnessOverLcmWindows) {
  std::vector<std::int64_t> periods{1, 2, 3, 4, 6};
  std::vector<DatasetDescriptor> ds;
  for (auto p : periods) ds.push_back(every("p" + std::to_string(p), p));
  ManualClock clock;
  Scheduler s(ds, [](const DatasetDescriptor& d) { return IngestReport{d.id}; }, clock);
  const std::int64_t window = 3 * 12;
  for (std::int64_t t = 0; t < window; ++t) {
    s.poll();
    clock.advance(1);
  }
  s.waitIdle();
  auto st = s.stats();
  for (auto p : periods) {
    auto expected = static_cast<long>(window / p);
    auto got = static_cast<long>(st["p" + std::to_string(p)].runs);
    EXPECT_LE(std::labs(got - expected), 1) << p;
  }
}

TEST(Scheduler, ManualDatasetsAreNotScheduled) {
  ManualClock clock;
  Scheduler s({every("m", 0)}, [](const DatasetDescriptor& d) { return IngestReport{d.id}; }, clock);
  EXPECT_EQ(s.poll(), 0u);
}
