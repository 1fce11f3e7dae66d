#include "citykb/testkit/validation_oracle.hpp"

#include <algorithm>
#include <random>
#include <tuple>

#include "citykb/schema/vocab.hpp"
#include "citykb/validation/checks.hpp"

namespace citykb::testkit {
namespace {

using rdf::Quad;
using rdf::Term;
using Triple = std::tuple<Term, Term, Term>;

std::set<Triple> triplesOf(const std::vector<Quad>& quads) {
  std::set<Triple> out;
  for (const auto& q : quads) out.emplace(q.subject, q.predicate, q.object);
  return out;
}

std::string render(const Term& t) { return t.isLiteral() ? t.toString() : t.value(); }

struct Index {
  std::set<Triple> triples;
  std::set<Term> subjects;
  std::map<std::string, std::set<Term>> instancesOf;  // class IRI -> subjects
  std::map<Term, std::vector<std::pair<std::string, Term>>> outgoing, incomingOf;

  explicit Index(const std::vector<Quad>& quads) : triples(triplesOf(quads)) {
    for (const auto& [s, p, o] : triples) {
      subjects.insert(s);
      if (p.value() == vocab::rdf::type && o.isIri()) instancesOf[o.value()].insert(s);
      outgoing[s].emplace_back(p.value(), o);
      incomingOf[o].emplace_back(p.value(), s);
    }
  }

  // Statements from `s` (or into `s` when incoming) through `property`.
  std::vector<Term> values(const Term& s, std::string_view property, bool incoming = false) const {
    std::vector<Term> out;
    const auto& side = incoming ? incomingOf : outgoing;
    auto it = side.find(s);
    if (it == side.end()) return out;
    for (const auto& [p, other] : it->second)
      if (p == property) out.push_back(other);
    return out;
  }

  const std::set<Term>& instances(std::string_view cls) const {
    static const std::set<Term> none;
    auto it = instancesOf.find(std::string(cls));
    return it == instancesOf.end() ? none : it->second;
  }
};

}  // namespace

std::vector<schema::Violation> naiveConstraintViolations(const std::vector<Quad>& quads,
                                                         const schema::SchemaCatalog& catalog) {
  Index idx(quads);
  std::vector<schema::Violation> out;
  for (const auto& rule : catalog.cardinalityRules()) {
    for (const auto& s : idx.instances(rule.classIri)) {
      auto n = static_cast<int>(idx.values(s, rule.propertyIri, rule.incoming).size());
      if (rule.min && n < *rule.min)
        out.push_back({s, rule.propertyIri, schema::ViolationKind::Missing, ""});
      else if (rule.max && n > *rule.max)
        out.push_back({s, rule.propertyIri, schema::ViolationKind::Excess, ""});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, std::set<std::string>> naiveCheckViolations(
    const std::vector<Quad>& quads, const schema::SchemaCatalog& catalog) {
  Index idx(quads);
  std::map<std::string, std::set<std::string>> out;
  auto& unreconciled = out[std::string(validation::kUnreconciledService)];
  for (const auto& s : idx.instances(vocab::km4c::Service))
    if (idx.values(s, vocab::km4c::hasAccess).empty() && idx.values(s, vocab::km4c::isIn).empty())
      unreconciled.insert(render(s));

  auto& dangling = out[std::string(validation::kDanglingLink)];
  for (const auto& [s, p, o] : idx.triples)
    if (p.value() != vocab::rdf::type && o.isIri() && !idx.subjects.count(o))
      dangling.insert(render(o));

  auto& weather = out[std::string(validation::kWeatherWithoutMunicipality)];
  const auto& municipalities = idx.instances(vocab::km4c::Municipality);
  for (const auto& s : idx.instances(vocab::km4c::WeatherReport)) {
    auto targets = idx.values(s, vocab::km4c::refersTo);
    if (std::none_of(targets.begin(), targets.end(),
                     [&](const Term& m) { return municipalities.count(m) > 0; }))
      weather.insert(render(s));
  }

  auto& entries = out[std::string(validation::kEntryMultipleCoordinates)];
  for (const auto& s : idx.instances(vocab::km4c::Entry))
    if (idx.values(s, vocab::geo::lat).size() > 1 || idx.values(s, vocab::geo::lon).size() > 1)
      entries.insert(render(s));

  auto& routes = out[std::string(validation::kRouteWithoutStart)];
  for (const auto& s : idx.instances(vocab::km4c::Route))
    if (idx.values(s, vocab::km4c::hasFirstSection).empty() ||
        idx.values(s, vocab::km4c::hasFirstStop).empty())
      routes.insert(render(s));

  for (const auto& rule : catalog.cardinalityRules()) {
    auto& bucket = out[validation::cardinalityCheckId(rule)];
    for (const auto& s : idx.instances(rule.classIri)) {
      auto n = static_cast<int>(idx.values(s, rule.propertyIri, rule.incoming).size());
      if ((rule.min && n < *rule.min) || (rule.max && n > *rule.max)) bucket.insert(render(s));
    }
  }
  return out;
}

std::vector<Quad> randomValidationStore(std::uint32_t seed, std::size_t subjects,
                                        const schema::SchemaCatalog& catalog) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> percent(0, 99);
  auto chance = [&](int p) { return percent(rng) < p; };
  const std::string base = "http://example.org/v/";
  auto iri = [](std::string_view s) { return Term::iri(std::string(s)); };
  auto rules = catalog.cardinalityRules();

  std::vector<std::string> classes;
  for (const auto& r : rules) classes.push_back(r.classIri);
  for (auto c : {vocab::km4c::Service, vocab::km4c::WeatherReport, vocab::km4c::Municipality,
                 vocab::km4c::Entry, vocab::km4c::Route})
    classes.emplace_back(c);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<Quad> out;
  auto add = [&](Term s, std::string_view p, Term o) {
    rdf::GraphId g{"g" + std::to_string(percent(rng) % 3), 1};
    if (chance(5)) out.push_back({s, iri(p), o, rdf::GraphId{"dup", 1}});
    out.push_back({std::move(s), iri(p), std::move(o), std::move(g)});
  };
  std::vector<Term> nodes;
  for (std::size_t i = 0; i < subjects; ++i) nodes.push_back(Term::iri(base + "n" + std::to_string(i)));
  auto target = [&]() -> Term {
    if (chance(10)) return Term::iri(base + "ghost" + std::to_string(percent(rng)));
    return nodes[rng() % nodes.size()];
  };
  auto multiplicity = [&] {
    int x = percent(rng);
    return x < 20 ? 0 : x < 80 ? 1 : 2;
  };
  const std::set<std::string> coordinates{std::string(vocab::geo::lat), std::string(vocab::geo::lon)};

  for (const auto& s : nodes) {
    const auto& cls = classes[rng() % classes.size()];
    add(s, vocab::rdf::type, Term::iri(cls));
    if (chance(10)) add(s, vocab::rdf::type, Term::iri(classes[rng() % classes.size()]));
    for (const auto& r : rules) {
      if (r.classIri != cls) continue;
      int k = multiplicity();
      for (int j = 0; j < k; ++j) {
        if (coordinates.count(r.propertyIri))
          add(s, r.propertyIri,
              Term::literal(std::to_string(40 + percent(rng) % 3),
                            std::string(vocab::xsd::decimal)));
        else if (r.incoming)
          add(target(), r.propertyIri, s);
        else
          add(s, r.propertyIri, target());
      }
    }
    if (cls == vocab::km4c::Service) {
      if (chance(40)) add(s, vocab::km4c::hasAccess, target());
      if (chance(40)) add(s, vocab::km4c::isIn, target());
    } else if (cls == vocab::km4c::WeatherReport) {
      if (chance(70)) add(s, vocab::km4c::refersTo, target());
    } else if (cls == vocab::km4c::Route) {
      if (chance(70)) add(s, vocab::km4c::hasFirstSection, target());
      if (chance(70)) add(s, vocab::km4c::hasFirstStop, target());
    } else if (cls == vocab::km4c::Entry) {
      for (int j = 0, k = multiplicity(); j < k; ++j)
        add(s, vocab::geo::lat, Term::literal(std::to_string(43 + j), std::string(vocab::xsd::decimal)));
      for (int j = 0, k = multiplicity(); j < k; ++j)
        add(s, vocab::geo::lon, Term::literal(std::to_string(11 + j), std::string(vocab::xsd::decimal)));
    }
    if (chance(10)) add(s, vocab::foaf::name, Term::literal("name " + std::to_string(percent(rng))));
  }
  // Blank-node link targets and literal-valued statements never count as dangling.
  if (!nodes.empty()) add(nodes[0], vocab::km4c::isIn, Term::blank("b0"));
  return out;
}

}  // namespace citykb::testkit
