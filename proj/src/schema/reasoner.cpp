#include "citykb/schema/reasoner.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "citykb/schema/vocab.hpp"

namespace citykb::schema {

using rdf::IdTriple;
using rdf::Quad;
using rdf::StoreView;
using rdf::Term;
using rdf::TermId;
using rdf::TermKind;

namespace {

// Ids at or above this value name catalog terms the store has never seen.
constexpr TermId kVirtualBase = 0x80000000u;

struct TripleHash {
  std::size_t operator()(const IdTriple& t) const {
    std::uint64_t h = t.s;
    h = h * 0x9E3779B97F4A7C15ull ^ t.p;
    h = h * 0x9E3779B97F4A7C15ull ^ t.o;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

std::uint64_t pairKey(TermId s, TermId p) {
  return (static_cast<std::uint64_t>(s) << 32) | p;
}

class TermSpace {
 public:
  explicit TermSpace(const StoreView& view) : view_(view) {}

  TermId id(const std::string& iri) {
    if (auto it = cache_.find(iri); it != cache_.end()) return it->second;
    auto found = view_.lookup(Term::iri(iri));
    TermId id;
    if (found) {
      id = *found;
    } else {
      id = kVirtualBase + static_cast<TermId>(virtuals_.size());
      virtuals_.push_back(iri);
    }
    cache_.emplace(iri, id);
    return id;
  }

  std::optional<TermId> existing(std::string_view iri) {
    return view_.lookup(Term::iri(std::string(iri)));
  }

  Term term(TermId id) const {
    if (id >= kVirtualBase) return Term::iri(virtuals_[id - kVirtualBase]);
    return view_.term(id);
  }

  TermKind kind(TermId id) const {
    return id >= kVirtualBase ? TermKind::Iri : view_.kind(id);
  }

 private:
  const StoreView& view_;
  std::unordered_map<std::string, TermId> cache_;
  std::vector<std::string> virtuals_;
};

struct CompiledRestriction {
  TermId cls;
  TermId base;
  TermId property;
  const RestrictionRule* rule;
};

std::string localName(const Term& t) {
  if (t.isLiteral()) return t.value();
  const auto& v = t.value();
  auto cut = v.find_last_of("#/");
  return cut == std::string::npos ? v : v.substr(cut + 1);
}

class Reasoner {
 public:
  Reasoner(const StoreView& view, const SchemaCatalog& catalog)
      : view_(view), terms_(view) {
    type_ = terms_.id(std::string(vocab::rdf::type));
    for (const auto& [iri, def] : catalog.classes()) {
      auto cid = terms_.id(iri);
      for (const auto& sup : catalog.superclassClosure(iri)) {
        closure_[cid].push_back(terms_.id(sup));
      }
      if (def.definedBy && !def.superclasses.empty()) {
        restrictions_.push_back(CompiledRestriction{
            cid, terms_.id(def.superclasses.front()),
            terms_.id(def.definedBy->onProperty), &*def.definedBy});
      }
    }
    for (const auto& [iri, def] : catalog.properties()) {
      if (def.inverseOf) inverse_[terms_.id(iri)] = terms_.id(*def.inverseOf);
    }
    for (std::size_t i = 0; i < restrictions_.size(); ++i) {
      byBase_[restrictions_[i].base].push_back(i);
      byProperty_[restrictions_[i].property].push_back(i);
    }
  }

  std::vector<Quad> run() {
    std::vector<TermId> predicates{type_};
    for (const auto& [p, _] : inverse_) predicates.push_back(p);
    for (const auto& [p, _] : byProperty_) predicates.push_back(p);
    std::sort(predicates.begin(), predicates.end());
    predicates.erase(std::unique(predicates.begin(), predicates.end()), predicates.end());

    std::vector<IdTriple> work;
    for (auto p : predicates) {
      if (p >= kVirtualBase) continue;
      for (const auto& t : view_.matchTriples(std::nullopt, p, std::nullopt)) {
        if (known_.insert(t).second) {
          remember(t);
          work.push_back(t);
        }
      }
    }
    while (!work.empty()) {
      IdTriple t = work.back();
      work.pop_back();
      process(t, work);
    }

    std::vector<Quad> out;
    out.reserve(derived_.size());
    rdf::GraphId graph{std::string(kInferredDataset), 0};
    for (const auto& t : derived_) {
      out.push_back(Quad{terms_.term(t.s), terms_.term(t.p), terms_.term(t.o), graph});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void remember(const IdTriple& t) {
    if (byProperty_.count(t.p)) values_[pairKey(t.s, t.p)].push_back(t.o);
  }

  void emit(const IdTriple& t, std::vector<IdTriple>& work) {
    if (!known_.insert(t).second) return;
    derived_.push_back(t);
    remember(t);
    work.push_back(t);
  }

  bool valueMatches(TermId value, const CompiledRestriction& r) {
    if (r.rule->mode == RestrictionMode::HasSomeValue) return true;
    auto it = lexical_.find(value);
    if (it == lexical_.end()) {
      it = lexical_.emplace(value, localName(terms_.term(value))).first;
    }
    return r.rule->valueSet.count(it->second) > 0;
  }

  bool satisfies(TermId subject, const CompiledRestriction& r) {
    auto it = values_.find(pairKey(subject, r.property));
    if (it == values_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](TermId v) { return valueMatches(v, r); });
  }

  void process(const IdTriple& t, std::vector<IdTriple>& work) {
    if (t.p == type_) {
      if (auto it = closure_.find(t.o); it != closure_.end()) {
        for (auto sup : it->second) emit({t.s, type_, sup}, work);
      }
      if (auto it = byBase_.find(t.o); it != byBase_.end()) {
        for (auto idx : it->second) {
          const auto& r = restrictions_[idx];
          if (satisfies(t.s, r)) emit({t.s, type_, r.cls}, work);
        }
      }
    }
    if (auto it = inverse_.find(t.p); it != inverse_.end()) {
      // Blank nodes never appear as objects; literals never as subjects.
      if (terms_.kind(t.s) == TermKind::Iri && terms_.kind(t.o) == TermKind::Iri) {
        emit({t.o, it->second, t.s}, work);
      }
    }
    if (auto it = byProperty_.find(t.p); it != byProperty_.end()) {
      for (auto idx : it->second) {
        const auto& r = restrictions_[idx];
        if (known_.count({t.s, type_, r.base}) && valueMatches(t.o, r)) {
          emit({t.s, type_, r.cls}, work);
        }
      }
    }
  }

  const StoreView& view_;
  TermSpace terms_;
  TermId type_ = 0;
  std::unordered_map<TermId, std::vector<TermId>> closure_;
  std::unordered_map<TermId, TermId> inverse_;
  std::vector<CompiledRestriction> restrictions_;
  std::unordered_map<TermId, std::vector<std::size_t>> byBase_;
  std::map<TermId, std::vector<std::size_t>> byProperty_;
  std::unordered_set<IdTriple, TripleHash> known_;
  std::unordered_map<std::uint64_t, std::vector<TermId>> values_;
  std::unordered_map<TermId, std::string> lexical_;
  std::vector<IdTriple> derived_;
};

}  // namespace

std::vector<Quad> infer(const StoreView& view, const SchemaCatalog& catalog) {
  return Reasoner(view, catalog).run();
}

std::size_t materializeInferences(rdf::QuadStore& store, const SchemaCatalog& catalog) {
  const std::vector<std::string> excluded{std::string(kInferredDataset)};
  auto derived = infer(store.snapshot().without(excluded), catalog);
  auto next = store.activeVersion(std::string(kInferredDataset)).value_or(0) + 1;
  store.replaceGraph(std::string(kInferredDataset), next, derived);
  return derived.size();
}

std::vector<CardinalityCount> countCardinality(const StoreView& view,
                                               const CardinalityRule& rule) {
  std::vector<CardinalityCount> out;
  auto type = view.lookup(Term::iri(std::string(vocab::rdf::type)));
  auto cls = view.lookup(Term::iri(rule.classIri));
  if (!type || !cls) return out;
  auto prop = view.lookup(Term::iri(rule.propertyIri));
  std::vector<TermId> subjects;
  for (const auto& t : view.matchTriples(std::nullopt, *type, *cls)) {
    subjects.push_back(t.s);
  }
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  out.reserve(subjects.size());
  for (auto x : subjects) {
    std::size_t n = 0;
    if (prop) {
      n = rule.incoming ? view.matchTriples(std::nullopt, *prop, x).size()
                        : view.matchTriples(x, *prop, std::nullopt).size();
    }
    out.push_back({x, n});
  }
  return out;
}

std::vector<Violation> checkConstraints(const StoreView& view,
                                        const SchemaCatalog& catalog) {
  std::vector<Violation> out;
  for (const auto& rule : catalog.cardinalityRules()) {
    for (const auto& [subject, n] : countCardinality(view, rule)) {
      if (rule.min && n < static_cast<std::size_t>(*rule.min)) {
        out.push_back({view.term(subject), rule.propertyIri, ViolationKind::Missing,
                       "expected at least " + std::to_string(*rule.min) + ", found " +
                           std::to_string(n)});
      } else if (rule.max && n > static_cast<std::size_t>(*rule.max)) {
        out.push_back({view.term(subject), rule.propertyIri, ViolationKind::Excess,
                       "expected at most " + std::to_string(*rule.max) + ", found " +
                           std::to_string(n)});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace citykb::schema
