#include "citykb/quadstore/store.hpp"

#include <algorithm>
#include <stdexcept>

namespace citykb::rdf {

namespace {

constexpr char kSep = '\x1f';

IdTriple toPos(const IdTriple& t) { return {t.p, t.o, t.s}; }
IdTriple toOsp(const IdTriple& t) { return {t.o, t.s, t.p}; }
IdTriple fromPos(const IdTriple& t) { return {t.o, t.s, t.p}; }
IdTriple fromOsp(const IdTriple& t) { return {t.p, t.o, t.s}; }

constexpr TermId kMaxId = ~TermId{0};

// Range of permuted triples whose first `n` components equal `key`'s.
template <typename Vec>
auto prefixRange(const Vec& v, const IdTriple& key, int n) {
  IdTriple lo = key;
  IdTriple hi = key;
  if (n < 3) { lo.o = 0; hi.o = kMaxId; }
  if (n < 2) { lo.p = 0; hi.p = kMaxId; }
  if (n < 1) { lo.s = 0; hi.s = kMaxId; }
  return std::make_pair(std::lower_bound(v.begin(), v.end(), lo),
                        std::upper_bound(v.begin(), v.end(), hi));
}

void sortUnique(std::vector<IdTriple>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<IdTriple> permuted(const std::vector<IdTriple>& v,
                               IdTriple (*f)(const IdTriple&)) {
  std::vector<IdTriple> out;
  out.reserve(v.size());
  for (const auto& t : v) out.push_back(f(t));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<IdTriple> mergeSorted(const std::vector<IdTriple>& a,
                                  std::vector<IdTriple> b) {
  sortUnique(b);
  std::vector<IdTriple> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

}  // namespace

// --- Dictionary ------------------------------------------------------------

std::string Dictionary::keyOf(const Term& term, std::string_view scope) {
  std::string key;
  switch (term.kind()) {
    case TermKind::Iri:
      key.reserve(term.value().size() + 1);
      key += 'I';
      key += term.value();
      break;
    case TermKind::Blank:
      key += 'B';
      key += scope;
      key += kSep;
      key += term.value();
      break;
    case TermKind::Literal:
      key += 'L';
      key += term.value();
      key += kSep;
      key += term.datatype();
      key += kSep;
      key += term.lang();
      break;
  }
  return key;
}

Term Dictionary::decode(std::string_view key) {
  char kind = key.front();
  key.remove_prefix(1);
  if (kind == 'I') return Term::iri(std::string(key));
  if (kind == 'B') {
    return Term::blank(std::string(key.substr(key.find(kSep) + 1)));
  }
  auto langSep = key.rfind(kSep);
  auto dtSep = key.rfind(kSep, langSep - 1);
  return Term::literal(std::string(key.substr(0, dtSep)),
                       std::string(key.substr(dtSep + 1, langSep - dtSep - 1)),
                       std::string(key.substr(langSep + 1)));
}

TermId Dictionary::intern(const Term& term, std::string_view scope) {
  std::string key = keyOf(term, scope);
  {
    std::shared_lock lock(mu_);
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  }
  std::unique_lock lock(mu_);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  if (keys_.size() >= kMaxId) throw std::length_error("dictionary full");
  auto id = static_cast<TermId>(keys_.size());
  keys_.push_back(std::move(key));
  ids_.emplace(keys_.back(), id);
  return id;
}

std::optional<TermId> Dictionary::find(const Term& term,
                                       std::string_view scope) const {
  std::string key = keyOf(term, scope);
  std::shared_lock lock(mu_);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  return std::nullopt;
}

Term Dictionary::term(TermId id) const {
  std::shared_lock lock(mu_);
  return decode(keys_.at(id));
}

TermKind Dictionary::kind(TermId id) const {
  std::shared_lock lock(mu_);
  switch (keys_.at(id).front()) {
    case 'I': return TermKind::Iri;
    case 'B': return TermKind::Blank;
    default: return TermKind::Literal;
  }
}

std::size_t Dictionary::size() const {
  std::shared_lock lock(mu_);
  return keys_.size();
}

// --- GraphPartition --------------------------------------------------------

GraphPartition::GraphPartition(GraphId graph, std::vector<IdTriple> triples)
    : graph_(std::move(graph)), spo_(std::move(triples)) {
  sortUnique(spo_);
  pos_ = permuted(spo_, toPos);
  osp_ = permuted(spo_, toOsp);
}

GraphPartition::GraphPartition(const GraphPartition& base,
                               std::vector<IdTriple> added)
    : graph_(base.graph_) {
  std::vector<IdTriple> pos;
  std::vector<IdTriple> osp;
  pos.reserve(added.size());
  osp.reserve(added.size());
  for (const auto& t : added) {
    pos.push_back(toPos(t));
    osp.push_back(toOsp(t));
  }
  spo_ = mergeSorted(base.spo_, std::move(added));
  pos_ = mergeSorted(base.pos_, std::move(pos));
  osp_ = mergeSorted(base.osp_, std::move(osp));
}

bool GraphPartition::contains(const IdTriple& t) const {
  return std::binary_search(spo_.begin(), spo_.end(), t);
}

void GraphPartition::match(std::optional<TermId> s, std::optional<TermId> p,
                           std::optional<TermId> o,
                           std::vector<IdTriple>& out) const {
  if (s) {
    if (o && !p) {
      auto [lo, hi] = prefixRange(osp_, {*o, *s, 0}, 2);
      for (auto it = lo; it != hi; ++it) out.push_back(fromOsp(*it));
      return;
    }
    int n = p ? (o ? 3 : 2) : 1;
    auto [lo, hi] = prefixRange(spo_, {*s, p.value_or(0), o.value_or(0)}, n);
    out.insert(out.end(), lo, hi);
    return;
  }
  if (p) {
    auto [lo, hi] = prefixRange(pos_, {*p, o.value_or(0), 0}, o ? 2 : 1);
    for (auto it = lo; it != hi; ++it) out.push_back(fromPos(*it));
    return;
  }
  if (o) {
    auto [lo, hi] = prefixRange(osp_, {*o, 0, 0}, 1);
    for (auto it = lo; it != hi; ++it) out.push_back(fromOsp(*it));
    return;
  }
  out.insert(out.end(), spo_.begin(), spo_.end());
}

std::size_t GraphPartition::count(std::optional<TermId> s,
                                  std::optional<TermId> p,
                                  std::optional<TermId> o) const {
  auto width = [](auto range) {
    return static_cast<std::size_t>(std::distance(range.first, range.second));
  };
  if (s) {
    if (o && !p) return width(prefixRange(osp_, {*o, *s, 0}, 2));
    int n = p ? (o ? 3 : 2) : 1;
    return width(prefixRange(spo_, {*s, p.value_or(0), o.value_or(0)}, n));
  }
  if (p) return width(prefixRange(pos_, {*p, o.value_or(0), 0}, o ? 2 : 1));
  if (o) return width(prefixRange(osp_, {*o, 0, 0}, 1));
  return spo_.size();
}

// --- StoreView -------------------------------------------------------------

StoreView::StoreView(std::shared_ptr<const Dictionary> dict,
                     std::vector<std::shared_ptr<const GraphPartition>> parts,
                     std::uint64_t generation)
    : dict_(std::move(dict)), parts_(std::move(parts)), generation_(generation) {}

std::size_t StoreView::size() const {
  std::size_t n = 0;
  for (const auto& p : parts_) n += p->size();
  return n;
}

std::vector<GraphId> StoreView::graphs() const {
  std::vector<GraphId> out;
  for (const auto& p : parts_) out.push_back(p->graph());
  return out;
}

std::vector<Quad> StoreView::match(const TermPattern& s, const TermPattern& p,
                                   const TermPattern& o,
                                   const std::optional<GraphId>& g) const {
  std::vector<Quad> out;
  if (!dict_) return out;
  std::vector<IdTriple> hits;
  for (const auto& part : parts_) {
    if (g && part->graph() != *g) continue;
    const auto& scope = part->graph().dataset;
    auto resolve = [&](const TermPattern& t, std::optional<TermId>& id) {
      if (!t) return true;
      id = dict_->find(*t, scope);
      return id.has_value();
    };
    std::optional<TermId> sid, pid, oid;
    if (!resolve(s, sid) || !resolve(p, pid) || !resolve(o, oid)) continue;
    hits.clear();
    part->match(sid, pid, oid, hits);
    for (const auto& t : hits) {
      out.push_back(Quad{dict_->term(t.s), dict_->term(t.p), dict_->term(t.o),
                         part->graph()});
    }
  }
  return out;
}

std::vector<IdTriple> StoreView::matchTriples(std::optional<TermId> s,
                                              std::optional<TermId> p,
                                              std::optional<TermId> o) const {
  std::vector<IdTriple> out;
  std::size_t contributing = 0;
  for (const auto& part : parts_) {
    auto before = out.size();
    part->match(s, p, o, out);
    if (out.size() != before) ++contributing;
  }
  if (contributing > 1) sortUnique(out);
  return out;
}

std::size_t StoreView::estimate(std::optional<TermId> s,
                                std::optional<TermId> p,
                                std::optional<TermId> o) const {
  std::size_t n = 0;
  for (const auto& part : parts_) n += part->count(s, p, o);
  return n;
}

bool StoreView::containsTriple(const IdTriple& t) const {
  for (const auto& part : parts_) {
    if (part->contains(t)) return true;
  }
  return false;
}

std::optional<TermId> StoreView::lookup(const Term& term) const {
  if (!dict_ || term.isBlank()) return std::nullopt;
  return dict_->find(term, {});
}

StoreView StoreView::without(std::span<const std::string> datasets) const {
  std::vector<std::shared_ptr<const GraphPartition>> kept;
  for (const auto& part : parts_) {
    if (std::find(datasets.begin(), datasets.end(), part->graph().dataset) ==
        datasets.end()) {
      kept.push_back(part);
    }
  }
  return StoreView(dict_, std::move(kept), generation_);
}

std::vector<Quad> StoreView::allQuads() const {
  std::vector<Quad> out;
  out.reserve(size());
  for (const auto& part : parts_) {
    for (const auto& t : part->triples()) {
      out.push_back(Quad{dict_->term(t.s), dict_->term(t.p), dict_->term(t.o),
                         part->graph()});
    }
  }
  return out;
}

// --- QuadStore -------------------------------------------------------------

StaleVersionError::StaleVersionError(const std::string& dataset,
                                     std::uint64_t requested,
                                     std::uint64_t active)
    : std::runtime_error("stale version " + std::to_string(requested) +
                         " for dataset '" + dataset + "': active version is " +
                         std::to_string(active)),
      active_(active) {}

QuadStore::QuadStore() : dict_(std::make_shared<Dictionary>()) {}

std::mutex& QuadStore::writerLock(const std::string& dataset) {
  std::lock_guard lock(lockTableMu_);
  auto& slot = writerLocks_[dataset];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::shared_ptr<const GraphPartition> QuadStore::current(
    const std::string& dataset) const {
  std::shared_lock lock(mu_);
  auto it = graphs_.find(dataset);
  return it == graphs_.end() ? nullptr : it->second;
}

void QuadStore::publish(const std::string& dataset,
                        std::shared_ptr<const GraphPartition> part) {
  std::unique_lock lock(mu_);
  if (part) {
    graphs_[dataset] = std::move(part);
  } else {
    graphs_.erase(dataset);
  }
  ++generation_;
}

std::vector<IdTriple> QuadStore::internAll(std::span<const Quad> quads,
                                           const std::string& scope) {
  std::vector<IdTriple> out;
  out.reserve(quads.size());
  for (const auto& q : quads) {
    out.push_back({dict_->intern(q.subject, scope),
                   dict_->intern(q.predicate, scope),
                   dict_->intern(q.object, scope)});
  }
  return out;
}

InsertResult QuadStore::insert(std::span<const Quad> quads) {
  InsertResult result;
  std::map<std::string, std::vector<std::size_t>> byDataset;
  for (std::size_t i = 0; i < quads.size(); ++i) {
    if (auto err = validateQuad(quads[i])) {
      result.errors.push_back({i, *err});
      continue;
    }
    byDataset[quads[i].graph.dataset].push_back(i);
  }
  for (auto& [dataset, positions] : byDataset) {
    std::lock_guard writer(writerLock(dataset));
    auto base = current(dataset);
    std::uint64_t version =
        base ? base->graph().version : quads[positions.front()].graph.version;
    std::vector<Quad> accepted;
    accepted.reserve(positions.size());
    for (auto i : positions) {
      if (quads[i].graph.version != version) {
        result.errors.push_back(
            {i, "graph version " + std::to_string(quads[i].graph.version) +
                    " is not the active version " + std::to_string(version) +
                    " of dataset '" + dataset + "'"});
        continue;
      }
      accepted.push_back(quads[i]);
    }
    if (accepted.empty()) continue;
    auto ids = internAll(accepted, dataset);
    std::shared_ptr<const GraphPartition> next;
    if (base) {
      next = std::make_shared<GraphPartition>(*base, std::move(ids));
    } else {
      next = std::make_shared<GraphPartition>(GraphId{dataset, version},
                                              std::move(ids));
    }
    result.added += next->size() - (base ? base->size() : 0);
    publish(dataset, std::move(next));
  }
  std::sort(result.errors.begin(), result.errors.end(),
            [](const auto& a, const auto& b) { return a.position < b.position; });
  return result;
}

GraphId QuadStore::replaceGraph(const std::string& dataset,
                                std::uint64_t version,
                                std::span<const Quad> quads) {
  for (std::size_t i = 0; i < quads.size(); ++i) {
    Quad probe = quads[i];
    probe.graph = GraphId{dataset, version};
    if (auto err = validateQuad(probe)) {
      throw std::invalid_argument("quad " + std::to_string(i) + ": " + *err);
    }
  }
  std::lock_guard writer(writerLock(dataset));
  if (auto base = current(dataset); base && base->graph().version >= version) {
    throw StaleVersionError(dataset, version, base->graph().version);
  }
  GraphId graph{dataset, version};
  auto part = std::make_shared<GraphPartition>(graph, internAll(quads, dataset));
  publish(dataset, std::move(part));
  return graph;
}

bool QuadStore::dropGraph(const std::string& dataset) {
  std::lock_guard writer(writerLock(dataset));
  if (!current(dataset)) return false;
  publish(dataset, nullptr);
  return true;
}

std::optional<std::uint64_t> QuadStore::activeVersion(
    const std::string& dataset) const {
  auto part = current(dataset);
  if (!part) return std::nullopt;
  return part->graph().version;
}

StoreView QuadStore::snapshot() const {
  std::shared_lock lock(mu_);
  std::vector<std::shared_ptr<const GraphPartition>> parts;
  parts.reserve(graphs_.size());
  for (const auto& [_, part] : graphs_) parts.push_back(part);
  return StoreView(dict_, std::move(parts), generation_.load());
}

}  // namespace citykb::rdf
