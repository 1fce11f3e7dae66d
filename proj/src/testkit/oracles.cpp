#include "citykb/testkit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "citykb/schema/vocab.hpp"

namespace citykb::testkit {
namespace {

using query::PatternTerm;
using query::Var;
using rdf::Term;
using Binding = std::map<std::string, Term>;

bool unify(const PatternTerm& pt, const Term& value, Binding& b) {
  if (const auto* t = std::get_if<Term>(&pt)) return *t == value;
  const auto& name = std::get<Var>(pt).name;
  auto it = b.find(name);
  if (it == b.end()) {
    b.emplace(name, value);
    return true;
  }
  return it->second == value;
}

struct TripleTable {
  std::vector<Term> flat;  // s, p, o triples back to back
  std::map<Term, std::vector<std::size_t>> byPredicate;
  std::vector<std::size_t> all;
};

// Candidates are narrowed by a constant predicate only; every other position
// is checked triple by triple.
std::vector<Binding> join(const std::vector<query::TriplePattern>& patterns,
                          const TripleTable& table, std::vector<Binding> rows) {
  static const std::vector<std::size_t> kNone;
  for (const auto& p : patterns) {
    const std::vector<std::size_t>* candidates = &table.all;
    if (const auto* c = std::get_if<Term>(&p.p)) {
      auto it = table.byPredicate.find(*c);
      candidates = it == table.byPredicate.end() ? &kNone : &it->second;
    }
    std::vector<Binding> next;
    for (const auto& row : rows) {
      for (auto i : *candidates) {
        Binding b = row;
        if (unify(p.s, table.flat[i], b) && unify(p.p, table.flat[i + 1], b) &&
            unify(p.o, table.flat[i + 2], b))
          next.push_back(std::move(b));
      }
    }
    rows = std::move(next);
  }
  return rows;
}

bool filterHolds(const query::Filter& f, const Binding& row) {
  using query::FilterOp;
  const Term& t = row.at(f.var);
  if (f.op == FilterOp::IsIri) return t.isIri();
  if (f.op == FilterOp::IsLiteral) return t.isLiteral();
  if (f.op == FilterOp::SameTerm || f.op == FilterOp::NotSameTerm) {
    const auto* v = std::get_if<Var>(&*f.rhs);
    bool same = (v ? row.at(v->name) : std::get<Term>(*f.rhs)) == t;
    return same == (f.op == FilterOp::SameTerm);
  }
  if (f.op == FilterOp::StrEq) return t.value() == f.operand;
  if (f.op == FilterOp::Contains) return t.value().find(f.operand) != std::string::npos;
  if (!t.isLiteral()) return false;
  auto v = t.numeric();
  if (!v) return false;
  double rhs = std::stod(f.operand);
  switch (f.op) {
    case FilterOp::Lt: return *v < rhs;
    case FilterOp::Le: return *v <= rhs;
    case FilterOp::Eq: return *v == rhs;
    case FilterOp::Gt: return *v > rhs;
    case FilterOp::Ge: return *v >= rhs;
    default: return false;
  }
}

void collectVars(const std::vector<query::TriplePattern>& ps, std::vector<std::string>& out) {
  for (const auto& p : ps)
    for (const auto* t : {&p.s, &p.p, &p.o})
      if (const auto* v = std::get_if<Var>(t))
        if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
}

}  // namespace

query::ResultTable nestedLoopEvaluate(const query::GraphPatternQuery& q,
                                      const std::vector<rdf::Quad>& quads) {
  std::set<std::tuple<Term, Term, Term>> distinctTriples;
  for (const auto& x : quads) distinctTriples.emplace(x.subject, x.predicate, x.object);
  TripleTable triples;
  for (const auto& [s, p, o] : distinctTriples) {
    auto at = triples.flat.size();
    triples.all.push_back(at);
    triples.byPredicate[p].push_back(at);
    triples.flat.push_back(s);
    triples.flat.push_back(p);
    triples.flat.push_back(o);
  }
  std::vector<std::string> vars;
  collectVars(q.patterns, vars);
  query::ResultTable out;
  out.variables = q.projection.empty() ? vars : q.projection;

  auto rows = join(q.patterns, triples, {Binding{}});
  std::vector<std::vector<Term>> result;
  for (const auto& row : rows) {
    bool keep = true;
    for (const auto& f : q.filters) keep = keep && filterHolds(f, row);
    for (const auto& g : q.notExists) keep = keep && join(g, triples, {row}).empty();
    if (!keep) continue;
    std::vector<Term> r;
    for (const auto& v : out.variables) r.push_back(row.at(v));
    result.push_back(std::move(r));
  }
  std::sort(result.begin(), result.end());
  if (q.distinct) result.erase(std::unique(result.begin(), result.end()), result.end());
  std::size_t first = std::min(q.offset, result.size());
  result.erase(result.begin(), result.begin() + static_cast<std::ptrdiff_t>(first));
  if (q.limit && result.size() > *q.limit) result.resize(*q.limit);
  out.rows = std::move(result);
  return out;
}

std::vector<rdf::Quad> randomJoinStore(std::uint32_t seed, std::size_t quadCount) {
  std::mt19937 rng(seed);
  const std::size_t nodes = std::max<std::size_t>(quadCount / 10, 10);
  std::uniform_int_distribution<std::size_t> node(0, nodes - 1);
  std::uniform_int_distribution<int> pred(0, 49), lit(0, 99), graph(0, 2);
  std::bernoulli_distribution literal(0.4);
  const std::string base = "http://example.org/n/";
  std::vector<rdf::Quad> out;
  out.reserve(quadCount);
  while (out.size() < quadCount) {
    rdf::Quad q;
    q.subject = Term::iri(base + std::to_string(node(rng)));
    q.predicate = Term::iri("http://example.org/p" + std::to_string(pred(rng)));
    q.object = literal(rng)
                   ? Term::literal(std::to_string(lit(rng)), std::string(vocab::xsd::integer))
                   : Term::iri(base + std::to_string(node(rng)));
    q.graph = {"g" + std::to_string(graph(rng)), 1};
    out.push_back(q);
    // Occasionally repeat a triple in another graph to exercise union dedupe.
    if (out.size() % 17 == 0 && out.size() < quadCount) {
      auto dup = q;
      dup.graph.dataset = q.graph.dataset == "g0" ? "g1" : "g0";
      out.push_back(dup);
    }
  }
  return out;
}

query::GraphPatternQuery randomQuery(std::mt19937& rng, const std::vector<rdf::Quad>& quads) {
  std::uniform_int_distribution<std::size_t> pick(0, quads.size() - 1);
  std::uniform_int_distribution<int> percent(0, 99);
  auto chance = [&](int p) { return percent(rng) < p; };
  query::GraphPatternQuery q;
  int varCounter = 0;
  auto freshVar = [&] { return Var{"v" + std::to_string(varCounter++)}; };

  // A chain walk: each next triple starts at the previous object when possible.
  std::size_t len = 1 + percent(rng) % 3;
  std::vector<rdf::Quad> walk{quads[pick(rng)]};
  for (std::size_t i = 1; i < len; ++i) {
    const auto& prev = walk.back();
    std::vector<const rdf::Quad*> next;
    if (prev.object.isIri())
      for (const auto& x : quads)
        if (x.subject == prev.object) next.push_back(&x);
    if (next.empty()) break;
    walk.push_back(*next[percent(rng) % next.size()]);
  }

  PatternTerm link = freshVar();
  for (std::size_t i = 0; i < walk.size(); ++i) {
    const auto& t = walk[i];
    query::TriplePattern p;
    // The first pattern keeps a selective constant so the oracle stays cheap.
    bool constSubject = i == 0 && chance(60);
    p.s = i == 0 ? (constSubject ? PatternTerm(t.subject) : PatternTerm(freshVar())) : link;
    p.p = (constSubject && chance(25)) ? PatternTerm(freshVar()) : PatternTerm(t.predicate);
    if (chance(15)) p.o = t.object;
    else p.o = freshVar();
    link = p.o;
    q.patterns.push_back(p);
  }
  // A repeated-variable or unsatisfiable pattern now and then.
  if (chance(5)) q.patterns.push_back({q.patterns[0].s, walk[0].predicate, q.patterns[0].s});
  if (chance(5))
    q.patterns.push_back({freshVar(), Term::iri("http://example.org/missing"), freshVar()});

  std::vector<std::string> vars;
  collectVars(q.patterns, vars);
  if (!vars.empty() && chance(30)) {
    const auto& v = vars[percent(rng) % vars.size()];
    static const query::FilterOp ops[] = {query::FilterOp::Lt, query::FilterOp::Le,
                                          query::FilterOp::Eq, query::FilterOp::Gt,
                                          query::FilterOp::Ge, query::FilterOp::StrEq,
                                          query::FilterOp::Contains};
    auto op = ops[percent(rng) % 7];
    std::string operand = op == query::FilterOp::Contains ? std::to_string(percent(rng) % 10)
                          : op == query::FilterOp::StrEq  ? walk[0].object.value()
                                                          : std::to_string(percent(rng));
    q.filters.push_back({v, op, operand, std::nullopt});
  }
  if (vars.size() >= 2 && chance(15)) {
    const auto& a = vars[percent(rng) % vars.size()];
    const auto& b = vars[percent(rng) % vars.size()];
    auto op = chance(50) ? query::FilterOp::SameTerm : query::FilterOp::NotSameTerm;
    q.filters.push_back({a, op, "", PatternTerm(Var{b})});
  } else if (!vars.empty() && chance(15)) {
    static const query::FilterOp kinds[] = {query::FilterOp::IsIri, query::FilterOp::IsLiteral,
                                            query::FilterOp::NotSameTerm};
    auto op = kinds[percent(rng) % 3];
    q.filters.push_back({vars[percent(rng) % vars.size()], op, "",
                         op == query::FilterOp::NotSameTerm
                             ? std::optional<PatternTerm>(walk[0].object)
                             : std::nullopt});
  }
  if (!vars.empty() && chance(20)) {
    const auto& v = vars[percent(rng) % vars.size()];
    auto p = walk.back().predicate;
    if (chance(50)) q.notExists.push_back({{Var{v}, p, Var{"local"}}});
    else q.notExists.push_back({{Var{"local"}, p, Var{v}}});
  }
  if (!vars.empty() && chance(50)) {
    for (const auto& v : vars)
      if (chance(60)) q.projection.push_back(v);
    if (q.projection.empty()) q.projection.push_back(vars.front());
  }
  q.distinct = chance(30);
  if (chance(20)) q.offset = percent(rng) % 5;
  if (chance(20)) q.limit = percent(rng) % 20;
  return q;
}

double chordDistanceMeters(const query::GeoPoint& a, const query::GeoPoint& b) {
  auto unit = [](const query::GeoPoint& p) {
    double lat = p.lat * std::numbers::pi / 180, lon = p.lon * std::numbers::pi / 180;
    return std::array<double, 3>{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                                 std::sin(lat)};
  };
  auto u = unit(a), v = unit(b);
  double c = std::sqrt((u[0] - v[0]) * (u[0] - v[0]) + (u[1] - v[1]) * (u[1] - v[1]) +
                       (u[2] - v[2]) * (u[2] - v[2]));
  return 2 * query::kEarthRadiusMeters * std::asin(std::min(1.0, c / 2));
}

std::vector<query::NearHit> scanNear(const std::vector<PlantedPoint>& points,
                                     const query::GeoPoint& center, double radius) {
  std::vector<query::NearHit> out;
  for (const auto& p : points) {
    double d = query::haversineMeters(center, p.point);
    if (d <= radius) out.push_back({p.iri, d});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.distance, x.serviceIri) < std::tie(y.distance, y.serviceIri);
  });
  return out;
}

std::optional<PlantedPoint> scanClosest(const std::vector<PlantedPoint>& points,
                                        const query::GeoPoint& p) {
  std::optional<PlantedPoint> best;
  double bestD = 0;
  for (const auto& x : points) {
    double d = query::haversineMeters(p, x.point);
    if (!best || std::tie(d, x.iri) < std::tie(bestD, best->iri)) {
      best = x;
      bestD = d;
    }
  }
  return best;
}

}  // namespace citykb::testkit
