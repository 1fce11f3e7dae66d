#include "citykb/reconciliation/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "citykb/schema/catalog.hpp"
#include "citykb/schema/vocab.hpp"

namespace citykb::recon {
namespace {

using rdf::Quad;
using rdf::Term;

constexpr std::size_t kMaxExpansions = 256;

void finish(std::vector<CandidateMatch>& c) {
  std::sort(c.begin(), c.end());
  // One candidate per (road, entry); official beats alternative.
  c.erase(std::unique(c.begin(), c.end(),
                      [](const CandidateMatch& a, const CandidateMatch& b) {
                        return a.roadIri == b.roadIri && a.entryIri == b.entryIri;
                      }),
          c.end());
}

void addRoad(std::vector<CandidateMatch>& out, const Gazetteer& gaz, std::size_t road,
             MatchedField field, const NormalizedAddress& addr, bool useNumbers) {
  if (!useNumbers) {
    out.push_back({gaz.road(road).iri, std::nullopt, field});
    return;
  }
  if (auto entry = gaz.entryFor(road, addr.numberTokens))
    out.push_back({gaz.road(road).iri, *entry, field});
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(' ', start);
    if (end == std::string::npos) end = s.size();
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool hasWord(const std::vector<std::string>& names, const std::string& w) {
  for (const auto& n : names) {
    auto ws = words(n);
    if (std::find(ws.begin(), ws.end(), w) != ws.end()) return true;
  }
  return false;
}

struct StepRunner {
  const Gazetteer& gaz;
  const ReconcileConfig& config;
  ReconciliationOutcome& out;
  bool numberLevel = true;
  std::optional<std::pair<int, std::vector<CandidateMatch>>> firstAmbiguous;

  // True when the step settled the outcome.
  bool consider(int step, std::vector<CandidateMatch> candidates, std::string note = {}) {
    out.trace.push_back({step, numberLevel, candidates.size(), std::move(note)});
    if (candidates.size() >= 2 && !firstAmbiguous) firstAmbiguous.emplace(step, candidates);
    if (candidates.size() != 1) return false;
    out.level = numberLevel ? Level::StreetNumber : Level::Street;
    out.step = step;
    out.candidates = std::move(candidates);
    return true;
  }

  bool enabled(int step) const { return step <= config.lastStep; }

  std::vector<CandidateMatch> steps1to3(const NormalizedAddress& a, const std::string& muni) {
    auto c = step1ExactMatch(a, muni, gaz, numberLevel);
    if (c.size() == 1) return c;
    auto c2 = step2QualifierMatch(a, muni, config.qualifiers, gaz, numberLevel);
    if (c2.size() == 1) return c2;
    auto c3 = step3LastWordMatch(a, muni, gaz, numberLevel);
    if (c3.size() == 1) return c3;
    // Report the earliest non-empty stage so ambiguity stays visible.
    if (!c.empty()) return c;
    if (!c2.empty()) return c2;
    return c3;
  }

  bool pass(const NormalizedAddress& addr, const NormalizedAddress& cleaned,
            const std::optional<std::string>& muni, const std::optional<std::string>& aliasMuni) {
    if (muni) {
      if (enabled(1) && consider(1, step1ExactMatch(addr, *muni, gaz, numberLevel))) return true;
      if (enabled(2) &&
          consider(2, step2QualifierMatch(addr, *muni, config.qualifiers, gaz, numberLevel)))
        return true;
      if (enabled(3) && consider(3, step3LastWordMatch(addr, *muni, gaz, numberLevel))) return true;
    }
    if (numberLevel && enabled(4) && config.geocoder && muni && geocode(addr, *muni)) return true;
    if (enabled(5) && muni) {
      bool changed = cleaned.streetTokens != addr.streetTokens ||
                     cleaned.numberTokens != addr.numberTokens;
      if (changed && consider(5, steps1to3(cleaned, *muni))) return true;
    }
    if (enabled(6) && aliasMuni && aliasMuni != muni) {
      if (consider(6, steps1to3(addr, *aliasMuni))) return true;
    }
    return false;
  }

  bool geocode(const NormalizedAddress& addr, const std::string& muni) {
    std::optional<GeocodeResult> r;
    try {
      std::string number;
      for (const auto& t : addr.numberTokens) {
        if (!number.empty()) number += "-";
        number += t.raw;
      }
      r = config.geocoder->geocode(addr.rawStreet, number, addr.municipalityRaw);
    } catch (const GeocoderError& e) {
      out.trace.push_back({4, true, 0, std::string("skipped: ") + e.what()});
      return false;
    }
    if (!r) return consider(4, {}, "no result");
    out.geocoded = r;
    auto canon = addr;
    canon.rawStreet = r->street;
    canon.streetTokens = parseAddress(r->street, "", "", config.qualifiers).streetTokens;
    auto c = step1ExactMatch(canon, muni, gaz, true);
    if (c.size() != 1) {
      auto c2 = step2QualifierMatch(canon, muni, config.qualifiers, gaz, true);
      if (c2.size() == 1 || c.empty()) c = std::move(c2);
    }
    return consider(4, std::move(c), "geocoded as " + r->street);
  }
};

std::vector<Quad> linkQuads(const std::string& service, const CandidateMatch& m) {
  rdf::GraphId g{std::string(kReconciliationDataset), 0};
  auto s = Term::iri(service);
  std::vector<Quad> q;
  if (m.entryIri)
    q.push_back({s, Term::iri(std::string(vocab::km4c::hasAccess)), Term::iri(*m.entryIri), g});
  q.push_back({s, Term::iri(std::string(vocab::km4c::isIn)), Term::iri(m.roadIri), g});
  return q;
}

std::string firstValue(const rdf::StoreView& view, const Term& s, std::string_view p) {
  auto quads = view.match(s, Term::iri(std::string(p)), std::nullopt);
  std::string best;
  bool found = false;
  for (const auto& q : quads) {
    if (!found || q.object.value() < best) best = q.object.value();
    found = true;
  }
  return best;
}

}  // namespace

std::string_view levelName(Level level) {
  switch (level) {
    case Level::StreetNumber: return "street-number";
    case Level::Street: return "street";
    case Level::PendingReview: return "pending-review";
    case Level::Unresolved: return "unresolved";
  }
  return "unresolved";
}

std::vector<CandidateMatch> step1ExactMatch(const NormalizedAddress& addr, const std::string& muni,
                                            const Gazetteer& gaz, bool useNumbers) {
  std::vector<CandidateMatch> out;
  if (addr.streetTokens.empty() || (useNumbers && !addr.hasUsableNumber())) return out;
  for (const auto& [road, field] : gaz.byName(muni, addr.street()))
    addRoad(out, gaz, road, field, addr, useNumbers);
  finish(out);
  return out;
}

std::vector<CandidateMatch> step2QualifierMatch(const NormalizedAddress& addr,
                                                const std::string& muni,
                                                const QualifierTable& table, const Gazetteer& gaz,
                                                bool useNumbers) {
  std::vector<CandidateMatch> out;
  if (addr.streetTokens.empty() || (useNumbers && !addr.hasUsableNumber())) return out;
  std::vector<std::string> streets{""};
  for (std::size_t i = 0; i < addr.streetTokens.size(); ++i) {
    auto alts = table.alternatives(addr.streetTokens[i]);
    std::vector<std::string> next;
    for (const auto& prefix : streets)
      for (const auto& a : alts) {
        if (next.size() >= kMaxExpansions) break;
        next.push_back(prefix.empty() ? a : prefix + " " + a);
      }
    streets = std::move(next);
  }
  for (const auto& s : streets)
    for (const auto& [road, field] : gaz.byName(muni, s))
      addRoad(out, gaz, road, field, addr, useNumbers);
  finish(out);
  return out;
}

std::vector<CandidateMatch> step3LastWordMatch(const NormalizedAddress& addr,
                                               const std::string& muni, const Gazetteer& gaz,
                                               bool useNumbers) {
  std::vector<CandidateMatch> out;
  if (addr.streetTokens.empty() || (useNumbers && !addr.hasUsableNumber())) return out;
  // Words after a corner marker name the crossing street.
  auto end = std::find_if(addr.streetTokens.begin() + 1, addr.streetTokens.end(),
                          [](const std::string& t) { return t == "ANG." || t == "ANG"; });
  const auto& last = *(end - 1);
  for (auto road : gaz.roadsOf(muni)) {
    const auto& r = gaz.road(road);
    if (hasWord(r.official, last)) addRoad(out, gaz, road, MatchedField::Official, addr, useNumbers);
    else if (hasWord(r.alternative, last))
      addRoad(out, gaz, road, MatchedField::Alternative, addr, useNumbers);
  }
  finish(out);
  return out;
}

ReconciliationOutcome runPipeline(const ServiceAddress& service, const Gazetteer& gaz,
                                  const ReconcileConfig& config) {
  ReconciliationOutcome out;
  out.serviceIri = service.serviceIri;
  auto addr = parseAddress(service.street, service.number, service.municipality, config.qualifiers);
  if (addr.streetTokens.empty()) {
    out.trace.push_back({0, true, 0, "no street address"});
    return out;
  }
  auto cleaned = aggressiveClean(addr, config.qualifiers);
  auto muni = gaz.municipality(service.municipality);
  std::optional<std::string> aliasMuni;
  if (config.municipalities)
    if (auto canon = config.municipalities->canonical(service.municipality))
      aliasMuni = gaz.municipality(*canon);

  StepRunner run{gaz, config, out, true, std::nullopt};
  bool done = false;
  if (addr.hasUsableNumber() || cleaned.hasUsableNumber()) {
    // Numbers repaired only by cleaning still take part from step 5 on.
    done = run.pass(addr, cleaned, muni, aliasMuni);
  }
  if (!done) {
    run.numberLevel = false;
    done = run.pass(addr, cleaned, muni, aliasMuni);
  }
  if (done) {
    out.emittedQuads = linkQuads(out.serviceIri, out.candidates.front());
  } else if (run.firstAmbiguous) {
    out.level = Level::PendingReview;
    out.step = run.firstAmbiguous->first;
    out.candidates = run.firstAmbiguous->second;
  }
  return out;
}

std::vector<ServiceAddress> collectServices(const rdf::StoreView& view) {
  std::set<Term> subjects;
  const auto& catalog = schema::builtinCatalog();
  auto type = Term::iri(std::string(vocab::rdf::type));
  for (const auto& [cls, def] : catalog.classes()) {
    if (cls != vocab::km4c::Service && !catalog.isSubclassOf(cls, vocab::km4c::Service)) continue;
    for (const auto& q : view.match(std::nullopt, type, Term::iri(cls)))
      if (q.subject.isIri()) subjects.insert(q.subject);
  }
  for (const auto& q :
       view.match(std::nullopt, Term::iri(std::string(vocab::km4c::serviceCategory)), std::nullopt))
    if (q.subject.isIri()) subjects.insert(q.subject);
  std::vector<ServiceAddress> out;
  for (const auto& s : subjects) {
    out.push_back({s.value(), firstValue(view, s, vocab::vcard::streetAddress),
                   firstValue(view, s, vocab::km4c::houseNumber),
                   firstValue(view, s, vocab::vcard::locality)});
  }
  return out;
}

std::map<std::string, std::size_t> ReconcileRun::summary() const {
  std::map<std::string, std::size_t> out;
  for (const auto& o : outcomes)
    ++out[std::string(levelName(o.level)) + "/step" + std::to_string(o.step)];
  return out;
}

ReconcileRun reconcileAll(const rdf::StoreView& view, const ReconcileConfig& config,
                          unsigned threads) {
  auto services = collectServices(view);
  auto gaz = Gazetteer::build(view);
  ReconcileRun run;
  run.outcomes.resize(services.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < services.size();)
      run.outcomes[i] = runPipeline(services[i], gaz, config);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& o : run.outcomes)
    run.quads.insert(run.quads.end(), o.emittedQuads.begin(), o.emittedQuads.end());
  std::sort(run.quads.begin(), run.quads.end());
  return run;
}

std::uint64_t publishLinks(rdf::QuadStore& store, const ReconcileRun& run) {
  std::string ds(kReconciliationDataset);
  auto version = store.activeVersion(ds).value_or(0) + 1;
  store.replaceGraph(ds, version, run.quads);
  return version;
}

}  // namespace citykb::recon
