#include "citykb/query/geo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "citykb/schema/catalog.hpp"
#include "citykb/schema/vocab.hpp"

namespace citykb::query {
namespace {

using rdf::Term;

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string localName(const std::string& iri) {
  auto cut = iri.find_last_of("#/");
  return cut == std::string::npos ? iri : iri.substr(cut + 1);
}

// First numeric value of `prop` on `subject`, smallest lexical form first so
// the choice is stable when a subject carries several values.
std::optional<double> numberOf(const rdf::StoreView& view, const Term& subject,
                               std::string_view prop) {
  auto quads = view.match(subject, Term::iri(std::string(prop)), std::nullopt);
  std::sort(quads.begin(), quads.end());
  for (const auto& q : quads)
    if (auto v = q.object.numeric()) return v;
  return std::nullopt;
}

std::optional<GeoPoint> pointOf(const rdf::StoreView& view, const Term& subject) {
  auto lat = numberOf(view, subject, vocab::geo::lat);
  auto lon = numberOf(view, subject, vocab::geo::lon);
  if (!lat || !lon || std::abs(*lat) > 90 || std::abs(*lon) > 180) return std::nullopt;
  return GeoPoint{*lat, *lon};
}

std::vector<Term> objects(const rdf::StoreView& view, const Term& s, std::string_view p) {
  std::vector<Term> out;
  for (const auto& q : view.match(s, Term::iri(std::string(p)), std::nullopt))
    out.push_back(q.object);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Term> subjectsOfType(const rdf::StoreView& view, std::string_view cls) {
  std::vector<Term> out;
  for (const auto& q : view.match(std::nullopt, Term::iri(std::string(vocab::rdf::type)),
                                  Term::iri(std::string(cls))))
    if (q.subject.isIri()) out.push_back(q.subject);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

void validatePoint(const GeoPoint& p) {
  if (!(p.lat >= -90 && p.lat <= 90)) throw std::invalid_argument("latitude out of range");
  if (!(p.lon >= -180 && p.lon <= 180)) throw std::invalid_argument("longitude out of range");
}

double haversineMeters(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  double dlat = (b.lat - a.lat) * kRad;
  double dlon = (b.lon - a.lon) * kRad;
  double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * std::sin(dlon / 2) *
                 std::sin(dlon / 2);
  h = std::clamp(h, 0.0, 1.0);
  return 2 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

GeoIndex GeoIndex::build(const rdf::StoreView& view) {
  GeoIndex idx;
  // StreetNumber owning each entry; the smallest IRI wins if several do.
  std::map<std::string, std::pair<std::string, std::string>> owner;
  for (const auto& sn : subjectsOfType(view, vocab::km4c::StreetNumber)) {
    auto roads = objects(view, sn, vocab::km4c::belongsTo);
    std::string road = roads.empty() ? std::string() : roads.front().value();
    for (auto prop : {vocab::km4c::hasExternalAccess, vocab::km4c::hasInternalAccess})
      for (const auto& e : objects(view, sn, prop)) owner.try_emplace(e.value(), sn.value(), road);
  }
  std::map<std::string, GeoPoint> entryPoints;
  for (const auto& e : subjectsOfType(view, vocab::km4c::Entry)) {
    auto p = pointOf(view, e);
    if (!p) continue;
    entryPoints.emplace(e.value(), *p);
    EntryPoint ep{e.value(), *p, {}, {}};
    if (auto it = owner.find(e.value()); it != owner.end()) {
      ep.streetNumber = it->second.first;
      ep.road = it->second.second;
    }
    idx.entries_.push_back(std::move(ep));
  }

  std::vector<Term> services;
  const auto& catalog = schema::builtinCatalog();
  for (const auto& [cls, def] : catalog.classes()) {
    if (cls != vocab::km4c::Service && !catalog.isSubclassOf(cls, vocab::km4c::Service)) continue;
    auto typed = subjectsOfType(view, cls);
    services.insert(services.end(), typed.begin(), typed.end());
  }
  for (const auto& q : view.match(std::nullopt, Term::iri(std::string(vocab::km4c::serviceCategory)),
                                  std::nullopt))
    if (q.subject.isIri()) services.push_back(q.subject);
  std::sort(services.begin(), services.end());
  services.erase(std::unique(services.begin(), services.end()), services.end());
  for (const auto& s : services) {
    auto types = objects(view, s, vocab::rdf::type);
    auto cats = objects(view, s, vocab::km4c::serviceCategory);
    auto p = pointOf(view, s);
    if (!p) {
      for (const auto& e : objects(view, s, vocab::km4c::hasAccess)) {
        if (auto it = entryPoints.find(e.value()); it != entryPoints.end()) {
          p = it->second;
          break;
        }
      }
    }
    if (!p) continue;
    ServicePoint sp{s.value(), *p, {}};
    for (const auto& c : cats) sp.categories.push_back(lower(c.value()));
    for (const auto& t : types) sp.categories.push_back(lower(localName(t.value())));
    idx.services_.push_back(std::move(sp));
  }
  return idx;
}

std::vector<NearHit> GeoIndex::nearServices(const GeoPoint& center, double radiusMeters,
                                            const std::optional<std::string>& category) const {
  validatePoint(center);
  if (!(radiusMeters > 0)) throw std::invalid_argument("radius must be positive");
  std::optional<std::string> want;
  if (category) want = lower(*category);
  std::vector<NearHit> out;
  for (const auto& s : services_) {
    if (want && std::find(s.categories.begin(), s.categories.end(), *want) == s.categories.end())
      continue;
    double d = haversineMeters(center, s.point);
    if (d <= radiusMeters) out.push_back({s.iri, d});
  }
  std::sort(out.begin(), out.end(), [](const NearHit& a, const NearHit& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.serviceIri < b.serviceIri;
  });
  return out;
}

std::optional<ClosestNumber> GeoIndex::closestStreetNumber(const GeoPoint& p) const {
  validatePoint(p);
  const EntryPoint* best = nullptr;
  double bestD = 0;
  for (const auto& e : entries_) {
    double d = haversineMeters(p, e.point);
    if (!best || d < bestD || (d == bestD && e.iri < best->iri)) {
      best = &e;
      bestD = d;
    }
  }
  if (!best) return std::nullopt;
  return ClosestNumber{best->iri, best->streetNumber, best->road, bestD};
}

std::shared_ptr<const GeoIndex> GeoCache::get(const rdf::StoreView& view) {
  std::lock_guard lock(mu_);
  if (!index_ || generation_ != view.generation()) {
    index_ = std::make_shared<const GeoIndex>(GeoIndex::build(view));
    generation_ = view.generation();
  }
  return index_;
}

}  // namespace citykb::query
