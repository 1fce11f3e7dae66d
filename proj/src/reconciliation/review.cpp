#include "citykb/reconciliation/review.hpp"

#include <fstream>

#include "citykb/mapping/model.hpp"
#include "citykb/mapping/names.hpp"
#include "citykb/quadstore/nquads.hpp"
#include "citykb/schema/vocab.hpp"

namespace citykb::recon {
namespace {

using nlohmann::json;
using rdf::Quad;
using rdf::Term;

json candidateJson(const ReviewCandidate& c) {
  json j{{"roadIri", c.match.roadIri},
         {"roadName", c.roadName},
         {"matchedField", c.match.field == MatchedField::Official ? "official-name" : "alternative-name"},
         {"level", c.match.entryIri ? "street-number" : "street"}};
  if (c.match.entryIri) j["entryIri"] = *c.match.entryIri;
  if (c.point) {
    j["lat"] = c.point->lat;
    j["lon"] = c.point->lon;
  }
  return j;
}

ReviewCandidate candidateFromJson(const json& j) {
  ReviewCandidate c;
  c.match.roadIri = j.at("roadIri").get<std::string>();
  if (j.contains("entryIri")) c.match.entryIri = j["entryIri"].get<std::string>();
  c.match.field = j.value("matchedField", "official-name") == "official-name"
                      ? MatchedField::Official
                      : MatchedField::Alternative;
  c.roadName = j.value("roadName", "");
  if (j.contains("lat")) c.point = query::GeoPoint{j["lat"].get<double>(), j["lon"].get<double>()};
  return c;
}

}  // namespace

std::string_view statusName(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::Pending: return "pending";
    case ReviewStatus::Resolved: return "resolved";
    case ReviewStatus::Rejected: return "rejected";
  }
  return "pending";
}

std::optional<ReviewStatus> parseStatus(std::string_view s) {
  for (auto st : {ReviewStatus::Pending, ReviewStatus::Resolved, ReviewStatus::Rejected})
    if (statusName(st) == s) return st;
  return std::nullopt;
}

json itemToJson(const ReviewItem& item) {
  json cands = json::array();
  for (const auto& c : item.candidates) cands.push_back(candidateJson(c));
  json j{{"id", item.id},
         {"serviceIri", item.address.serviceIri},
         {"address",
          {{"street", item.address.street},
           {"number", item.address.number},
           {"municipality", item.address.municipality}}},
         {"step", item.step},
         {"candidates", cands},
         {"discoveredAt", item.discoveredAt},
         {"status", statusName(item.status)}};
  if (item.decision) {
    json quads = json::array();
    for (const auto& q : item.decision->quads) quads.push_back(rdf::formatNQuad(q));
    j["decision"] = {{"choice", item.decision->choice},
                     {"idempotencyKey", item.decision->idempotencyKey},
                     {"reviewer", item.decision->reviewer},
                     {"decidedAt", item.decision->decidedAt},
                     {"quads", quads}};
  }
  return j;
}

ReviewQueue::ReviewQueue(std::string base)
    : base_(base.empty() ? std::string(vocab::kResourceBase) : std::move(base)) {}

std::uint64_t ReviewQueue::enqueue(const ReconciliationOutcome& outcome,
                                   const ServiceAddress& address, const Gazetteer& gaz,
                                   const std::string& discoveredAt) {
  if (outcome.level != Level::PendingReview)
    throw std::invalid_argument("only pending-review outcomes are queued");
  std::lock_guard lock(mu_);
  if (auto it = pendingByService_.find(outcome.serviceIri); it != pendingByService_.end())
    return it->second;
  ReviewItem item;
  item.id = nextId_++;
  item.address = address;
  item.step = outcome.step;
  item.discoveredAt = discoveredAt;
  for (const auto& c : outcome.candidates) {
    ReviewCandidate rc{c, {}, {}};
    if (auto idx = gaz.roadIndex(c.roadIri)) {
      const auto& r = gaz.road(*idx);
      if (!r.official.empty()) rc.roadName = r.official.front();
      else if (!r.alternative.empty()) rc.roadName = r.alternative.front();
    }
    if (c.entryIri) rc.point = gaz.entryPoint(*c.entryIri);
    item.candidates.push_back(std::move(rc));
  }
  pendingByService_[outcome.serviceIri] = item.id;
  items_.emplace(item.id, std::move(item));
  return nextId_ - 1;
}

std::vector<ReviewItem> ReviewQueue::list(std::optional<ReviewStatus> status, std::size_t offset,
                                          std::size_t limit,
                                          const std::optional<std::string>& municipality) const {
  std::lock_guard lock(mu_);
  std::optional<std::string> muni;
  if (municipality) muni = mapping::normalizeName(*municipality);
  std::vector<ReviewItem> out;
  std::size_t seen = 0;
  for (const auto& [id, item] : items_) {
    if (status && item.status != *status) continue;
    if (muni && mapping::normalizeName(item.address.municipality) != *muni) continue;
    if (seen++ < offset) continue;
    if (out.size() >= limit) break;
    out.push_back(item);
  }
  return out;
}

std::size_t ReviewQueue::count(std::optional<ReviewStatus> status,
                               const std::optional<std::string>& municipality) const {
  return list(status, 0, std::numeric_limits<std::size_t>::max(), municipality).size();
}

std::optional<ReviewItem> ReviewQueue::get(std::uint64_t id) const {
  std::lock_guard lock(mu_);
  auto it = items_.find(id);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::string ReviewQueue::rawToponymIri(const ServiceAddress& a) const {
  return base_ + "/RawToponym/" + mapping::percentEncode(mapping::normalizeName(a.municipality)) +
         "/" + mapping::percentEncode(normalizeStreet(a.street));
}

ResolveResult ReviewQueue::resolve(std::uint64_t id, const std::string& choice,
                                   const std::string& idempotencyKey, const std::string& reviewer,
                                   const std::string& decidedAt, rdf::QuadStore& store) {
  std::lock_guard lock(mu_);
  auto it = items_.find(id);
  if (it == items_.end())
    throw ReviewError(ReviewError::Code::NotFound, "no review item " + std::to_string(id));
  auto& item = it->second;
  if (item.status != ReviewStatus::Pending) {
    if (!idempotencyKey.empty() && item.decision && item.decision->idempotencyKey == idempotencyKey)
      return {item, true};
    throw ReviewError(ReviewError::Code::Conflict,
                      "review item " + std::to_string(id) + " is already " +
                          std::string(statusName(item.status)));
  }

  ReviewDecision d{choice, idempotencyKey, reviewer, decidedAt, {}};
  if (choice == "reject") {
    item.status = ReviewStatus::Rejected;
  } else {
    const CandidateMatch* chosen = nullptr;
    bool viaEntry = false;
    for (const auto& c : item.candidates) {
      if (c.match.entryIri && *c.match.entryIri == choice) {
        chosen = &c.match;
        viaEntry = true;
        break;
      }
      if (c.match.roadIri == choice && !chosen) chosen = &c.match;
    }
    if (!chosen)
      throw ReviewError(ReviewError::Code::InvalidChoice,
                        "'" + choice + "' is not a candidate of review item " + std::to_string(id));
    std::string ds(kReviewDataset);
    rdf::GraphId g{ds, store.activeVersion(ds).value_or(1)};
    auto service = Term::iri(item.address.serviceIri);
    auto road = Term::iri(chosen->roadIri);
    if (viaEntry)
      d.quads.push_back({service, Term::iri(std::string(vocab::km4c::hasAccess)),
                         Term::iri(*chosen->entryIri), g});
    d.quads.push_back({service, Term::iri(std::string(vocab::km4c::isIn)), road, g});
    d.quads.push_back({Term::iri(rawToponymIri(item.address)),
                       Term::iri(std::string(vocab::owl::sameAs)), road, g});
    auto res = store.insert(d.quads);
    if (!res.errors.empty())
      throw std::runtime_error("review write failed: " + res.errors.front().message);
    item.status = ReviewStatus::Resolved;
  }
  item.decision = std::move(d);
  pendingByService_.erase(item.address.serviceIri);
  return {item, false};
}

json ReviewQueue::toJson() const {
  std::lock_guard lock(mu_);
  json items = json::array();
  for (const auto& [id, item] : items_) items.push_back(itemToJson(item));
  return {{"nextId", nextId_}, {"items", items}};
}

void ReviewQueue::loadJson(const json& j) {
  std::lock_guard lock(mu_);
  items_.clear();
  pendingByService_.clear();
  nextId_ = j.value("nextId", std::uint64_t{1});
  for (const auto& ji : j.at("items")) {
    ReviewItem item;
    item.id = ji.at("id").get<std::uint64_t>();
    item.address = {ji.at("serviceIri").get<std::string>(), ji["address"].value("street", ""),
                    ji["address"].value("number", ""), ji["address"].value("municipality", "")};
    item.step = ji.value("step", 0);
    for (const auto& c : ji.at("candidates")) item.candidates.push_back(candidateFromJson(c));
    item.discoveredAt = ji.value("discoveredAt", "");
    auto st = parseStatus(ji.value("status", "pending"));
    if (!st) throw std::invalid_argument("bad review status in item " + std::to_string(item.id));
    item.status = *st;
    if (ji.contains("decision")) {
      const auto& jd = ji["decision"];
      ReviewDecision d{jd.value("choice", ""), jd.value("idempotencyKey", ""),
                       jd.value("reviewer", ""), jd.value("decidedAt", ""), {}};
      for (const auto& line : jd.value("quads", json::array()))
        if (auto q = rdf::parseNQuadsLine(line.get<std::string>())) d.quads.push_back(*q);
      item.decision = std::move(d);
    }
    if (item.status == ReviewStatus::Pending) pendingByService_[item.address.serviceIri] = item.id;
    nextId_ = std::max(nextId_, item.id + 1);
    items_.emplace(item.id, std::move(item));
  }
}

void ReviewQueue::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << toJson().dump(1) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

void ReviewQueue::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  loadJson(json::parse(in));
}

}  // namespace citykb::recon
