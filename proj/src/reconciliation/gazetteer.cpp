#include "citykb/reconciliation/gazetteer.hpp"

#include <algorithm>
#include <set>

#include "citykb/mapping/names.hpp"
#include "citykb/schema/vocab.hpp"

namespace citykb::recon {
namespace {

using rdf::Term;

Term iri(std::string_view s) { return Term::iri(std::string(s)); }

std::vector<std::string> sortedObjects(const rdf::StoreView& view, const Term& s,
                                       std::string_view p) {
  std::set<std::string> out;
  for (const auto& q : view.match(s, iri(p), std::nullopt)) out.insert(q.object.value());
  return {out.begin(), out.end()};
}

}  // namespace

Gazetteer Gazetteer::build(const rdf::StoreView& view) {
  Gazetteer g;
  std::set<std::string> ambiguousNames;
  for (const auto& q : view.match(std::nullopt, iri(vocab::rdf::type), iri(vocab::km4c::Municipality))) {
    if (!q.subject.isIri()) continue;
    for (const auto& name : sortedObjects(view, q.subject, vocab::foaf::name)) {
      auto key = mapping::normalizeName(name);
      auto [it, inserted] = g.municipalities_.try_emplace(key, q.subject.value());
      if (!inserted && it->second != q.subject.value()) ambiguousNames.insert(key);
    }
  }
  // Two municipalities sharing a name cannot be told apart by name.
  for (const auto& n : ambiguousNames) g.municipalities_.erase(n);

  std::map<std::string, std::set<std::string>> muniOfRoad;
  for (const auto& q : view.match(std::nullopt, iri(vocab::km4c::inMunicipalityOf), std::nullopt))
    if (q.subject.isIri() && q.object.isIri()) muniOfRoad[q.subject.value()].insert(q.object.value());

  for (const auto& [roadIri, munis] : muniOfRoad) {
    Road r;
    r.iri = roadIri;
    auto subject = Term::iri(roadIri);
    for (const auto& n : sortedObjects(view, subject, vocab::km4c::extendName))
      r.official.push_back(normalizeStreet(n));
    for (const auto& n : sortedObjects(view, subject, vocab::km4c::alternativeName))
      r.alternative.push_back(normalizeStreet(n));
    std::size_t idx = g.roads_.size();
    g.roadIndex_[roadIri] = idx;
    for (const auto& m : munis) {
      g.roadsByMuni_[m].push_back(idx);
      for (const auto& n : r.alternative) g.byName_[{m, n}].emplace_back(idx, MatchedField::Alternative);
      for (const auto& n : r.official) {
        auto& v = g.byName_[{m, n}];
        auto it = std::find_if(v.begin(), v.end(), [&](auto& e) { return e.first == idx; });
        if (it != v.end()) it->second = MatchedField::Official;
        else v.emplace_back(idx, MatchedField::Official);
      }
    }
    g.roads_.push_back(std::move(r));
  }

  for (const auto& q : view.match(std::nullopt, iri(vocab::km4c::belongsTo), std::nullopt)) {
    auto ri = g.roadIndex_.find(q.object.value());
    if (!q.subject.isIri() || ri == g.roadIndex_.end()) continue;
    auto nums = sortedObjects(view, q.subject, vocab::km4c::number);
    if (nums.empty()) continue;
    auto tok = parseNumberToken(nums.front());
    if (!tok.number) continue;
    Number n;
    n.number = *tok.number;
    n.iri = q.subject.value();
    auto exps = sortedObjects(view, q.subject, vocab::km4c::exponent);
    n.exponent = exps.empty() ? tok.exponent : upperAscii(exps.front());
    auto codes = sortedObjects(view, q.subject, vocab::km4c::classCode);
    n.red = tok.red;
    for (const auto& c : codes) {
      auto u = upperAscii(c);
      n.red |= u == "R" || u == "RED" || u == "ROSSO";
    }
    auto ext = sortedObjects(view, q.subject, vocab::km4c::hasExternalAccess);
    auto in = sortedObjects(view, q.subject, vocab::km4c::hasInternalAccess);
    if (!ext.empty()) n.entry = ext.front();
    else if (!in.empty()) n.entry = in.front();
    else continue;
    g.roads_[ri->second].numbers.push_back(std::move(n));
  }
  for (auto& r : g.roads_)
    std::sort(r.numbers.begin(), r.numbers.end(),
              [](const Number& a, const Number& b) { return a.iri < b.iri; });

  for (const auto& q : view.match(std::nullopt, iri(vocab::rdf::type), iri(vocab::km4c::Entry))) {
    auto lat = sortedObjects(view, q.subject, vocab::geo::lat);
    auto lon = sortedObjects(view, q.subject, vocab::geo::lon);
    if (lat.empty() || lon.empty()) continue;
    try {
      g.entryPoints_[q.subject.value()] = {std::stod(lat.front()), std::stod(lon.front())};
    } catch (const std::exception&) {
    }
  }
  return g;
}

std::optional<std::string> Gazetteer::municipality(std::string_view name) const {
  auto it = municipalities_.find(mapping::normalizeName(name));
  if (it == municipalities_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::size_t, MatchedField>> Gazetteer::byName(const std::string& muni,
                                                                   const std::string& street) const {
  auto it = byName_.find({muni, street});
  if (it == byName_.end()) return {};
  return it->second;
}

const std::vector<std::size_t>& Gazetteer::roadsOf(const std::string& muni) const {
  static const std::vector<std::size_t> kNone;
  auto it = roadsByMuni_.find(muni);
  return it == roadsByMuni_.end() ? kNone : it->second;
}

std::optional<std::string> Gazetteer::entryFor(std::size_t road,
                                               const std::vector<StreetNumberToken>& tokens) const {
  for (const auto& t : tokens) {
    if (!t.usable()) continue;
    for (const auto& n : roads_[road].numbers)
      if (n.number == *t.number && n.exponent == t.exponent && n.red == t.red) return n.entry;
  }
  return std::nullopt;
}

std::optional<query::GeoPoint> Gazetteer::entryPoint(const std::string& entry) const {
  auto it = entryPoints_.find(entry);
  if (it == entryPoints_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Gazetteer::roadIndex(const std::string& iri) const {
  auto it = roadIndex_.find(iri);
  if (it == roadIndex_.end()) return std::nullopt;
  return it->second;
}

}  // namespace citykb::recon
